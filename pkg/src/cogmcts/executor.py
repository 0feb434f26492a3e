"""Executes heuristic artifacts against problem instances: a native
evaluator for the template dialect and the sandbox-worker client for the
external-code dialect, plus whole-dataset evaluation through the
problem's solving framework."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .artifacts import HeuristicArtifact, TEMPLATE_DIALECT
from .cop.aco import ACOParams, aco_solve
from .cop.gls import GLSParams, gls_solve
from .cop.instances import Dataset, MAXIMIZE, SIGNATURE_KIND
from .cop.kp import kp_construct
from .errors import ConfigurationError, EvaluationError
from .sandbox_client import SandboxClient, SandboxTimeout
from .templates import native_matrix, native_scorer


@dataclass
class ExecOutput:
    kind: str  # edge-matrix | item-vector
    array: np.ndarray
    substituted: bool = False


@dataclass
class EvalResult:
    reward: float
    objectives: list[float]
    status: str  # ok | error | timeout
    elapsed_s: float
    substitutions: int = 0
    message: str = ""


@dataclass
class ExecutorConfig:
    code_dialect: str = "python"
    timeout_s: float = 60.0
    worker_cmd: Optional[list[str]] = None
    sandbox_request_timeout_s: float = 10.0

    def to_dict(self) -> dict:
        return {"code_dialect": self.code_dialect, "timeout_s": self.timeout_s,
                "worker_cmd": self.worker_cmd,
                "sandbox_request_timeout_s": self.sandbox_request_timeout_s}

    @classmethod
    def from_dict(cls, doc: dict) -> "ExecutorConfig":
        return cls(**doc)


def sanitize_array(raw, shape) -> tuple[np.ndarray, bool]:
    """Replace NaN/inf/negative entries by 0; all-zero falls back to ones."""
    arr = np.asarray(raw, dtype=float)
    if arr.shape != shape:
        raise EvaluationError(f"heuristic output shape {arr.shape}, "
                              f"expected {shape}")
    cleaned = np.where(np.isfinite(arr) & (arr >= 0.0), arr, 0.0)
    substituted = bool((cleaned != arr).any() if np.isfinite(arr).all()
                       else True)
    if not cleaned.any():
        return np.ones(shape), True
    return cleaned, substituted


class ScorerSession:
    """Step-scorer handle; masked items surface as a -inf sentinel."""

    def __init__(self, raw_scorer, n_items: int):
        self._raw = raw_scorer
        self._n = n_items
        self.closed = False

    def __call__(self, state: dict) -> np.ndarray:
        return self.score(state)

    def score(self, state: dict) -> np.ndarray:
        assert not self.closed, "scorer session already closed"
        scores = np.asarray(self._raw(state), dtype=float)
        if scores.shape != (self._n,):
            raise EvaluationError(f"scorer returned shape {scores.shape}, "
                                  f"expected ({self._n},)")
        scores = np.where(np.isfinite(scores), scores, 0.0)
        mask = np.asarray(state["mask"], dtype=bool)
        return np.where(mask, -np.inf, scores)

    def close(self) -> None:
        self.closed = True


class HeuristicExecutor:
    """One evaluation engine bound to a problem and framework parameters."""

    def __init__(self, problem: str, exec_cfg: ExecutorConfig,
                 framework_params: Optional[dict] = None,
                 sandbox_factory=None):
        if problem not in SIGNATURE_KIND:
            raise ConfigurationError(f"unknown problem {problem!r}")
        self.problem = problem
        self.cfg = exec_cfg
        self.framework_params = dict(framework_params or {})
        self._sandbox_factory = sandbox_factory or self._default_sandbox
        self._sandbox: Optional[SandboxClient] = None

    def _default_sandbox(self) -> SandboxClient:
        return SandboxClient(worker_cmd=self.cfg.worker_cmd,
                             request_timeout_s=self.cfg.sandbox_request_timeout_s)

    def _sandbox_for(self, artifact: HeuristicArtifact) -> SandboxClient:
        if self._sandbox is None:
            self._sandbox = self._sandbox_factory()
        self._sandbox.load(artifact.dialect, artifact.payload)
        return self._sandbox

    def close(self) -> None:
        if self._sandbox is not None:
            self._sandbox.close()
            self._sandbox = None

    # Matrix/vector execution -------------------------------------------

    def exec_matrix(self, artifact: HeuristicArtifact, instance,
                    timeout_s: Optional[float] = None) -> ExecOutput:
        kind = artifact.signature_kind
        if kind not in ("edge-matrix", "item-vector"):
            raise EvaluationError(f"exec_matrix cannot serve {kind}")
        shape = ((instance.n, instance.n) if kind == "edge-matrix"
                 else (instance.n,))
        if artifact.dialect == TEMPLATE_DIALECT:
            raw = native_matrix(artifact.template_document(), instance)
        else:
            rows = self._sandbox_for(artifact).matrix(instance.to_payload(),
                                                      timeout_s)
            raw = np.asarray(rows, dtype=float)
            if kind == "item-vector":
                raw = raw.reshape(-1)
        arr, substituted = sanitize_array(raw, shape)
        return ExecOutput(kind=kind, array=arr, substituted=substituted)

    def open_step_scorer(self, artifact: HeuristicArtifact, instance,
                         timeout_s: Optional[float] = None) -> ScorerSession:
        if artifact.signature_kind != "step-scorer":
            raise EvaluationError("artifact is not a step scorer")
        if artifact.dialect == TEMPLATE_DIALECT:
            raw = native_scorer(artifact.template_document(), instance)
        else:
            client = self._sandbox_for(artifact)
            payload_base = instance.to_payload()

            def raw(state: dict):
                payload = dict(payload_base)
                payload["remaining"] = float(state["remaining"])
                payload["mask"] = [int(x) for x in state["mask"]]
                return client.score(payload, timeout_s)

        return ScorerSession(raw, instance.n)

    # Whole-dataset evaluation ------------------------------------------

    def _solve_instance(self, artifact, instance, seed: int,
                        remaining_s: float) -> tuple[float, int]:
        problem = self.problem
        if problem == "kp":
            session = self.open_step_scorer(artifact, instance,
                                            timeout_s=remaining_s)
            try:
                return kp_construct(instance, session), 0
            finally:
                session.close()
        out = self.exec_matrix(artifact, instance, timeout_s=remaining_s)
        subs = int(out.substituted)
        if problem == "tsp":
            params = GLSParams(**{**self.framework_params, "seed": seed})
            return gls_solve(instance, out.array, params), subs
        params = ACOParams(**{**self.framework_params, "seed": seed})
        return aco_solve(instance, out.array, params), subs

    def evaluate(self, artifact: HeuristicArtifact, dataset: Dataset) -> EvalResult:
        """Mean-objective reward over the dataset, sign-flipped for
        minimization problems; wall clock capped over the whole dataset."""
        if dataset.problem != self.problem:
            raise ConfigurationError(
                f"dataset problem {dataset.problem!r} != executor {self.problem!r}")
        if not dataset.instances:
            raise EvaluationError("dataset is empty")
        for inst in dataset.instances:
            if inst.n == 0:
                raise EvaluationError("degenerate empty instance")
        start = time.monotonic()
        objectives: list[float] = []
        substitutions = 0
        base_seed = self.framework_params.get("seed", 0)
        for idx, instance in enumerate(dataset.instances):
            elapsed = time.monotonic() - start
            remaining = self.cfg.timeout_s - elapsed
            if remaining <= 0:
                return EvalResult(reward=float("nan"), objectives=objectives,
                                  status="timeout",
                                  elapsed_s=time.monotonic() - start,
                                  substitutions=substitutions,
                                  message="dataset evaluation timed out")
            try:
                obj, subs = self._solve_instance(artifact, instance,
                                                 seed=base_seed + idx,
                                                 remaining_s=remaining)
            except SandboxTimeout as exc:
                return EvalResult(reward=float("nan"), objectives=objectives,
                                  status="timeout",
                                  elapsed_s=time.monotonic() - start,
                                  substitutions=substitutions,
                                  message=str(exc))
            except EvaluationError as exc:
                return EvalResult(reward=float("nan"), objectives=objectives,
                                  status="error",
                                  elapsed_s=time.monotonic() - start,
                                  substitutions=substitutions,
                                  message=str(exc))
            objectives.append(float(obj))
            substitutions += subs
        mean_obj = float(np.mean(objectives))
        reward = mean_obj if MAXIMIZE[self.problem] else -mean_obj
        return EvalResult(reward=reward, objectives=objectives, status="ok",
                          elapsed_s=time.monotonic() - start,
                          substitutions=substitutions)
