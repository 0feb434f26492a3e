"""Run configuration: defaults, validation, and JSON round-tripping."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .backends import BackendConfig
from .cop.instances import PROBLEMS
from .errors import ConfigurationError
from .executor import ExecutorConfig
from .prompting import DEFAULT_PERSONAS


@dataclass
class RunConfig:
    problem: str = "kp"
    size_params: dict = field(default_factory=lambda: {"n": 50, "capacity": 12.5})
    dataset_seed: int = 0
    n_instances: int = 16

    n_init: int = 10
    budget: int = 1000
    depth_cap: int = 10
    lambda0: float = 0.1
    real_m: int = 7
    elite_k: int = 20
    fanouts: dict = field(default_factory=lambda: {"em1": 5, "em2": 1,
                                                   "m1": 1, "m2": 1})
    thinking_cycle: int = 2
    widening_factor: float = 2.0
    disabled_actions: list = field(default_factory=list)

    kb_capacity: int = 10
    guidance_pos: int = 3
    guidance_neg: int = 3
    ckv_epsilon: float = 1e-9
    prompt_char_budget: int = 20000
    personas: list = field(default_factory=lambda: list(DEFAULT_PERSONAS))

    seed: int = 0
    backend: BackendConfig = field(default_factory=BackendConfig)
    executor: ExecutorConfig = field(default_factory=ExecutorConfig)
    framework_params: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.problem not in PROBLEMS:
            raise ConfigurationError(f"unknown problem {self.problem!r}")
        if self.n_init < 1:
            raise ConfigurationError("n_init must be >= 1")
        if self.budget < self.n_init:
            raise ConfigurationError("budget must be >= n_init")
        if self.thinking_cycle < 1:
            raise ConfigurationError("thinking_cycle must be >= 1")
        bad = set(self.disabled_actions) - {"em1", "em2", "m1", "m2"}
        if bad:
            raise ConfigurationError(f"unknown disabled actions: {sorted(bad)}")
        fanouts = self.active_fanouts()
        if any(v < 0 for v in fanouts.values()) or sum(fanouts.values()) < 1:
            raise ConfigurationError("fanouts must be >= 0 with sum >= 1")
        self.backend.validate()

    def active_fanouts(self) -> dict:
        return {action: (0 if action in self.disabled_actions else count)
                for action, count in self.fanouts.items()}

    def fanout_sum(self) -> int:
        return sum(self.active_fanouts().values())

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["backend"] = self.backend.to_dict()
        doc["executor"] = self.executor.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        doc = dict(doc)
        if "backend" in doc:
            doc["backend"] = BackendConfig.from_dict(doc["backend"])
        if "executor" in doc:
            doc["executor"] = ExecutorConfig.from_dict(doc["executor"])
        return cls(**doc)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}")
        return cls.from_dict(doc)
