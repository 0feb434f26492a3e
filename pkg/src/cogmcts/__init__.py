"""LLM-guided Monte Carlo tree search over executable heuristics for
combinatorial optimization, with cyclic cognitive feedback and
consistency-validated knowledge bases."""

from .artifacts import HeuristicArtifact, parse_response
from .backends import (BackendConfig, ChatRequest, LiveBackend,
                       ScriptedBackend, TranscriptLog, make_backend)
from .cognition import (CandidateSet, CognitiveGuidance, ExperienceRecord,
                        KnowledgeBase, build_ccs, ckv_route, complex_cognition,
                        rapid_cognition)
from .config import RunConfig
from .errors import (BackendUnavailableError, CogMCTSError,
                     CognitionUnavailableError, ConfigurationError,
                     EvaluationError, FixtureError, InitializationError,
                     ParseError, RunAborted, StateError,
                     UnsupportedInstanceError)
from .executor import EvalResult, ExecutorConfig, HeuristicExecutor
from .orchestrator import EliteSet, Orchestrator, RunReport, seed_artifact
from .reporting import render_report, write_run_dir
from .templates import GC_DOCUMENT, REGISTRY, TemplateDocument
from .tree import (HeuristicNode, QualityBounds, SearchTree, lambda_decay,
                   uct_score, update_bounds)

__version__ = "0.1.0"

__all__ = [
    "BackendConfig", "BackendUnavailableError", "CandidateSet", "ChatRequest",
    "CogMCTSError", "CognitionUnavailableError", "CognitiveGuidance",
    "ConfigurationError", "EliteSet", "EvalResult", "EvaluationError",
    "ExecutorConfig", "ExperienceRecord", "FixtureError", "GC_DOCUMENT",
    "HeuristicArtifact", "HeuristicExecutor", "HeuristicNode",
    "InitializationError", "KnowledgeBase", "LiveBackend", "Orchestrator",
    "ParseError", "QualityBounds", "REGISTRY", "RunAborted", "RunConfig",
    "RunReport", "ScriptedBackend", "SearchTree", "StateError",
    "TemplateDocument", "TranscriptLog", "UnsupportedInstanceError",
    "build_ccs", "ckv_route", "complex_cognition", "lambda_decay",
    "make_backend", "parse_response", "rapid_cognition", "render_report",
    "seed_artifact", "uct_score", "update_bounds", "write_run_dir",
]
