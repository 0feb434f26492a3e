"""Client for the out-of-process sandbox worker that executes
external-code heuristics over a line-delimited stdio protocol."""

from __future__ import annotations

import json
import selectors
import subprocess
import sys
from typing import Optional

from .errors import EvaluationError


def default_worker_command() -> list[str]:
    return [sys.executable, "-m", "cogmcts_worker"]


class SandboxTimeout(EvaluationError):
    pass


class SandboxClient:
    """Owns one worker process; respawns it after a timeout or crash.

    Not a security boundary: the worker applies best-effort resource
    limits only.
    """

    def __init__(self, worker_cmd: Optional[list[str]] = None,
                 request_timeout_s: float = 10.0,
                 cpu_limit_s: int = 300, mem_limit_mb: int = 1024):
        self.worker_cmd = list(worker_cmd or default_worker_command())
        self.request_timeout_s = request_timeout_s
        self.cpu_limit_s = cpu_limit_s
        self.mem_limit_mb = mem_limit_mb
        self._proc: Optional[subprocess.Popen] = None
        self._loaded: Optional[tuple[str, str]] = None

    def _spawn(self) -> None:
        cmd = self.worker_cmd + [
            "--cpu-limit", str(self.cpu_limit_s),
            "--mem-limit", str(self.mem_limit_mb),
            "--request-timeout", str(self.request_timeout_s),
        ]
        self._proc = subprocess.Popen(
            cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL, text=True, bufsize=1)

    def _ensure_proc(self) -> None:
        if self._proc is None or self._proc.poll() is not None:
            self._spawn()
            if self._loaded is not None:
                dialect, code = self._loaded
                resp = self._request({"op": "load", "dialect": dialect,
                                      "code": code})
                if not resp.get("ok"):
                    raise EvaluationError(f"reload failed: {resp.get('error')}")

    def _request(self, record: dict, timeout_s: Optional[float] = None) -> dict:
        assert self._proc is not None
        timeout_s = timeout_s if timeout_s is not None else self.request_timeout_s
        try:
            self._proc.stdin.write(json.dumps(record) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            self._kill()
            raise EvaluationError(f"worker pipe broken: {exc}") from exc
        sel = selectors.DefaultSelector()
        sel.register(self._proc.stdout, selectors.EVENT_READ)
        # Client-side grace beyond the worker's own per-request limit.
        ready = sel.select(timeout=timeout_s + 5.0)
        sel.close()
        if not ready:
            self._kill()
            raise SandboxTimeout("worker did not answer within the request timeout")
        line = self._proc.stdout.readline()
        if not line:
            self._kill()
            raise EvaluationError("worker exited unexpectedly")
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            self._kill()
            raise EvaluationError(f"bad worker response: {exc}") from exc

    def _kill(self) -> None:
        if self._proc is not None:
            self._proc.kill()
            self._proc.wait()
            self._proc = None

    def load(self, dialect: str, code: str) -> None:
        self._loaded = None
        self._ensure_proc()
        resp = self._request({"op": "load", "dialect": dialect, "code": code})
        if not resp.get("ok"):
            raise EvaluationError(f"load failed: {resp.get('error')}")
        self._loaded = (dialect, code)

    def matrix(self, instance_payload: dict,
               timeout_s: Optional[float] = None) -> list[list[float]]:
        self._ensure_proc()
        resp = self._request({"op": "matrix", "instance": instance_payload},
                             timeout_s)
        if not resp.get("ok"):
            raise EvaluationError(f"matrix request failed: {resp.get('error')}")
        return resp["rows"]

    def score(self, state_payload: dict,
              timeout_s: Optional[float] = None) -> list[float]:
        self._ensure_proc()
        resp = self._request({"op": "score", "state": state_payload}, timeout_s)
        if not resp.get("ok"):
            raise EvaluationError(f"score request failed: {resp.get('error')}")
        return resp["scores"]

    def ping(self) -> bool:
        self._ensure_proc()
        return bool(self._request({"op": "ping"}).get("ok"))

    def close(self) -> None:
        self._kill()
        self._loaded = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
