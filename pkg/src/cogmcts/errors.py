"""Exception hierarchy shared across the engine."""


class CogMCTSError(Exception):
    """Base class for all engine errors."""


class ConfigurationError(CogMCTSError):
    """Invalid run or backend configuration."""


class StateError(CogMCTSError):
    """Operation attempted on an invalid internal state (e.g. empty tree)."""


class ParseError(CogMCTSError):
    """A generated response could not be parsed into an artifact.

    ``code`` is one of: no-description, no-code, unknown-dialect, bad-template.
    """

    def __init__(self, code: str, message: str = ""):
        super().__init__(message or code)
        self.code = code


class CognitionUnavailableError(CogMCTSError):
    """Cognition stage failed after retries; the iteration proceeds unguided."""


class BackendUnavailableError(CogMCTSError):
    """Live backend retries exhausted; the run checkpoints and aborts."""


class FixtureError(CogMCTSError):
    """Scripted backend contract violation (exhausted or mismatched script)."""


class InitializationError(CogMCTSError):
    """Initialization produced zero valid heuristics."""


class EvaluationError(CogMCTSError):
    """A heuristic could not be evaluated (infeasible instance, scorer crash)."""


class UnsupportedInstanceError(CogMCTSError):
    """Instance too large for the exact oracle."""


class RunAborted(CogMCTSError):
    """Run aborted mid-flight; carries a resumable state snapshot."""

    def __init__(self, message: str, state: dict):
        super().__init__(message)
        self.state = state
