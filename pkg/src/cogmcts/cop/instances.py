"""Problem instance types, seeded generators, and dataset (de)serialization.

Distributions where the benchmark headers are silent are declared defaults:
coordinates and prizes uniform in [0, 1], CVRP demands uniform integers in
[1, 9], MKP capacities at 0.5 tightness of the weight row sums.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from ..errors import ConfigurationError

PROBLEMS = ("kp", "tsp", "op", "cvrp", "mkp")

# Objective sense per problem; reward = mean objective when maximizing,
# negative mean objective when minimizing.
MAXIMIZE = {"kp": True, "tsp": False, "op": True, "cvrp": False, "mkp": True}

# Heuristic output shape each problem's framework consumes.
SIGNATURE_KIND = {
    "kp": "step-scorer",
    "tsp": "edge-matrix",
    "op": "edge-matrix",
    "cvrp": "edge-matrix",
    "mkp": "item-vector",
}


def _distances(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff ** 2).sum(-1))


@dataclass
class KPInstance:
    values: np.ndarray
    weights: np.ndarray
    capacity: float
    problem = "kp"

    @property
    def n(self) -> int:
        return len(self.values)

    def to_payload(self) -> dict:
        return {"problem": "kp", "values": self.values.tolist(),
                "weights": self.weights.tolist(), "capacity": self.capacity}


@dataclass
class TSPInstance:
    coords: np.ndarray
    problem = "tsp"
    _dist: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def distance(self) -> np.ndarray:
        if self._dist is None:
            self._dist = _distances(self.coords)
        return self._dist

    def to_payload(self) -> dict:
        return {"problem": "tsp", "coords": self.coords.tolist(),
                "distance": self.distance.tolist()}


@dataclass
class OPInstance:
    coords: np.ndarray
    prizes: np.ndarray
    max_len: float
    depot: int = 0
    problem = "op"
    _dist: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def distance(self) -> np.ndarray:
        if self._dist is None:
            self._dist = _distances(self.coords)
        return self._dist

    def to_payload(self) -> dict:
        return {"problem": "op", "coords": self.coords.tolist(),
                "prizes": self.prizes.tolist(), "max_len": self.max_len,
                "depot": self.depot, "distance": self.distance.tolist()}


@dataclass
class CVRPInstance:
    coords: np.ndarray
    demands: np.ndarray
    capacity: float
    depot: int = 0
    problem = "cvrp"
    _dist: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def distance(self) -> np.ndarray:
        if self._dist is None:
            self._dist = _distances(self.coords)
        return self._dist

    def to_payload(self) -> dict:
        return {"problem": "cvrp", "coords": self.coords.tolist(),
                "demands": self.demands.tolist(), "capacity": self.capacity,
                "depot": self.depot, "distance": self.distance.tolist()}


@dataclass
class MKPInstance:
    values: np.ndarray
    weights: np.ndarray  # m x N
    capacities: np.ndarray
    problem = "mkp"

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def n_constraints(self) -> int:
        return self.weights.shape[0]

    def to_payload(self) -> dict:
        return {"problem": "mkp", "values": self.values.tolist(),
                "weights": self.weights.tolist(),
                "capacities": self.capacities.tolist()}


Instance = Union[KPInstance, TSPInstance, OPInstance, CVRPInstance, MKPInstance]


@dataclass
class Dataset:
    problem: str
    instances: list
    seed: int
    size_params: dict

    def __len__(self) -> int:
        return len(self.instances)

    def digest(self) -> str:
        doc = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(doc.encode()).hexdigest()

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "seed": self.seed,
            "size_params": self.size_params,
            "instances": [_instance_arrays(inst) for inst in self.instances],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Dataset":
        problem = doc["problem"]
        instances = [_instance_from_arrays(problem, rec) for rec in doc["instances"]]
        return cls(problem=problem, instances=instances, seed=doc["seed"],
                   size_params=doc["size_params"])


def _instance_arrays(inst: Instance) -> dict:
    rec = inst.to_payload()
    rec.pop("distance", None)  # derived, keep dataset files compact
    return rec


def _instance_from_arrays(problem: str, rec: dict) -> Instance:
    if problem == "kp":
        return KPInstance(np.array(rec["values"]), np.array(rec["weights"]),
                          float(rec["capacity"]))
    if problem == "tsp":
        return TSPInstance(np.array(rec["coords"]))
    if problem == "op":
        return OPInstance(np.array(rec["coords"]), np.array(rec["prizes"]),
                          float(rec["max_len"]), int(rec["depot"]))
    if problem == "cvrp":
        return CVRPInstance(np.array(rec["coords"]), np.array(rec["demands"]),
                            float(rec["capacity"]), int(rec["depot"]))
    if problem == "mkp":
        return MKPInstance(np.array(rec["values"]), np.array(rec["weights"]),
                           np.array(rec["capacities"]))
    raise ConfigurationError(f"unknown problem {problem!r}")


def default_op_max_len(n: int) -> float:
    return 2.0 * (n / 50.0) ** 0.5


def generate_instances(problem: str, n_instances: int, seed: int,
                       **size_params) -> Dataset:
    """Deterministic per-seed dataset generation.

    Size params: kp -> n, capacity; tsp -> n; op -> n (max_len optional);
    cvrp -> n, capacity; mkp -> n, m (tightness optional).
    """
    if problem not in PROBLEMS:
        raise ConfigurationError(f"unknown problem {problem!r}")
    if n_instances < 1:
        raise ConfigurationError("n_instances must be >= 1")
    n = int(size_params["n"])
    if n < 1:
        raise ConfigurationError("instance size must be >= 1")
    rng = np.random.default_rng(seed)
    instances = []
    for _ in range(n_instances):
        if problem == "kp":
            instances.append(KPInstance(
                values=rng.random(n), weights=rng.random(n),
                capacity=float(size_params["capacity"])))
        elif problem == "tsp":
            instances.append(TSPInstance(coords=rng.random((n, 2))))
        elif problem == "op":
            max_len = float(size_params.get("max_len") or default_op_max_len(n))
            instances.append(OPInstance(
                coords=rng.random((n, 2)), prizes=rng.random(n),
                max_len=max_len, depot=0))
        elif problem == "cvrp":
            instances.append(CVRPInstance(
                coords=rng.random((n, 2)),
                demands=rng.integers(1, 10, size=n).astype(float),
                capacity=float(size_params["capacity"]), depot=0))
        elif problem == "mkp":
            m = int(size_params["m"])
            tightness = float(size_params.get("tightness", 0.5))
            weights = rng.random((m, n))
            instances.append(MKPInstance(
                values=rng.random(n), weights=weights,
                capacities=tightness * weights.sum(axis=1)))
    # Depot demand is zero by convention.
    if problem == "cvrp":
        for inst in instances:
            inst.demands[inst.depot] = 0.0
    return Dataset(problem=problem, instances=instances, seed=seed,
                   size_params=dict(size_params))


def save_dataset(dataset: Dataset, path) -> str:
    doc = dataset.to_dict()
    Path(path).write_text(json.dumps(doc, sort_keys=True))
    return dataset.digest()


def load_dataset(path) -> Dataset:
    return Dataset.from_dict(json.loads(Path(path).read_text()))
