"""Persistent sandbox worker: loads one external-code heuristic and serves
matrix/score requests over line-delimited JSON on the standard streams.

Resource limiting is best effort (CPU/memory rlimits, disabled sockets,
per-request alarm); it is not a security boundary. Untrusted deployments
should add OS-level containment around the process.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import signal
import socket
import sys

TEMPLATE_DIALECT = "template"


class RequestTimeout(Exception):
    pass


class Session:
    """The currently loaded heuristic: a namespace with entry points."""

    def __init__(self):
        self.matrix_fn = None
        self.score_fn = None

    @property
    def loaded(self) -> bool:
        return self.matrix_fn is not None or self.score_fn is not None

    def reset(self) -> None:
        self.matrix_fn = None
        self.score_fn = None

    def load(self, dialect: str, code: str) -> None:
        if dialect == TEMPLATE_DIALECT:
            raise ValueError("template dialect is evaluated natively, "
                             "not by the worker")
        namespace: dict = {"__builtins__": __builtins__}
        exec(compile(code, "<heuristic>", "exec"), namespace)
        matrix_fn = namespace.get("matrix")
        score_fn = namespace.get("score")
        if not callable(matrix_fn) and not callable(score_fn):
            raise ValueError("code defines neither matrix(instance) "
                             "nor score(state)")
        self.matrix_fn = matrix_fn if callable(matrix_fn) else None
        self.score_fn = score_fn if callable(score_fn) else None


def _as_rows(result) -> list:
    rows = list(result)
    if rows and not isinstance(rows[0], (list, tuple)):
        rows = [rows]
    return [[float(x) for x in row] for row in rows]


def _as_vector(result) -> list:
    return [float(x) for x in list(result)]


def disable_network() -> None:
    def refused(*args, **kwargs):
        raise OSError("network access is disabled in the sandbox worker")

    socket.socket = refused
    socket.create_connection = refused


def apply_rlimits(cpu_limit_s: int, mem_limit_mb: int) -> None:
    import resource

    if cpu_limit_s > 0:
        resource.setrlimit(resource.RLIMIT_CPU, (cpu_limit_s, cpu_limit_s))
    if mem_limit_mb > 0:
        limit = mem_limit_mb * 1024 * 1024
        try:
            resource.setrlimit(resource.RLIMIT_AS, (limit, limit))
        except (ValueError, OSError):
            pass  # some platforms refuse address-space limits


class Worker:
    def __init__(self, request_timeout_s: float):
        self.request_timeout_s = request_timeout_s
        self.session = Session()

    def _with_timeout(self, fn, *args):
        """Run one call under the wall-clock alarm; stdout is muzzled so
        stray prints from loaded code cannot corrupt the protocol."""

        def on_alarm(signum, frame):
            raise RequestTimeout()

        previous = signal.signal(signal.SIGALRM, on_alarm)
        signal.setitimer(signal.ITIMER_REAL, self.request_timeout_s)
        try:
            with contextlib.redirect_stdout(io.StringIO()):
                return fn(*args)
        finally:
            signal.setitimer(signal.ITIMER_REAL, 0.0)
            signal.signal(signal.SIGALRM, previous)

    def handle(self, record: dict) -> dict:
        op = record.get("op")
        try:
            if op == "ping":
                return {"ok": True}
            if op == "load":
                self.session.reset()
                self._with_timeout(self.session.load,
                                   record.get("dialect", ""),
                                   record.get("code", ""))
                return {"ok": True}
            if op == "matrix":
                if self.session.matrix_fn is None:
                    return {"ok": False,
                            "error": "no matrix heuristic loaded"}
                result = self._with_timeout(self.session.matrix_fn,
                                            record.get("instance", {}))
                return {"ok": True, "rows": _as_rows(result)}
            if op == "score":
                if self.session.score_fn is None:
                    return {"ok": False, "error": "no score heuristic loaded"}
                result = self._with_timeout(self.session.score_fn,
                                            record.get("state", {}))
                return {"ok": True, "scores": _as_vector(result)}
            return {"ok": False, "error": f"unknown op {op!r}"}
        except RequestTimeout:
            # A hung heuristic leaves unknown state behind; drop it.
            self.session.reset()
            return {"ok": False,
                    "error": f"request timed out after "
                             f"{self.request_timeout_s}s"}
        except BaseException as exc:  # noqa: BLE001 - isolation contract
            return {"ok": False,
                    "error": f"{type(exc).__name__}: {exc}"}

    def serve(self, stdin, stdout) -> None:
        for line in stdin:
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                if not isinstance(record, dict):
                    raise ValueError("record must be a JSON object")
            except (json.JSONDecodeError, ValueError) as exc:
                response = {"ok": False, "error": f"bad request line: {exc}"}
            else:
                response = self.handle(record)
            stdout.write(json.dumps(response) + "\n")
            stdout.flush()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="sandbox worker for external-code heuristics")
    parser.add_argument("--cpu-limit", type=int, default=300,
                        help="CPU-time ceiling in seconds (0 disables)")
    parser.add_argument("--mem-limit", type=int, default=1024,
                        help="address-space ceiling in MiB (0 disables)")
    parser.add_argument("--request-timeout", type=float, default=10.0,
                        help="per-request wall-clock limit in seconds")
    args = parser.parse_args(argv)

    stdin, stdout = sys.stdin, sys.stdout
    # Loaded code sees a dummy stdout; only the protocol writes the real one.
    sys.stdout = sys.stderr
    apply_rlimits(args.cpu_limit, args.mem_limit)
    disable_network()
    Worker(args.request_timeout).serve(stdin, stdout)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
