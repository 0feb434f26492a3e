"""Parameterized heuristic templates evaluated natively by the engine.

The registry deliberately contains the exact greedy value/weight-ratio
heuristic (alpha=beta=1, gamma=0) so the search space provably contains
the classic KP construction baseline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError

EPSILON = 1e-6


@dataclass(frozen=True)
class TemplateSpec:
    template_id: str
    signature_kind: str  # edge-matrix | item-vector | step-scorer
    problems: tuple
    param_ranges: dict


REGISTRY: dict[str, TemplateSpec] = {
    spec.template_id: spec
    for spec in [
        TemplateSpec("inverse-distance", "edge-matrix", ("tsp", "op", "cvrp"),
                     {"alpha": (0.0, 5.0)}),
        TemplateSpec("prize-distance-ratio", "edge-matrix", ("op",),
                     {"alpha": (0.0, 5.0), "beta": (0.0, 5.0)}),
        TemplateSpec("savings-style", "edge-matrix", ("cvrp",),
                     {"alpha": (0.0, 5.0)}),
        TemplateSpec("value-weight-ratio", "step-scorer", ("kp",),
                     {"alpha": (0.0, 5.0), "beta": (0.0, 5.0),
                      "gamma": (-2.0, 2.0)}),
        TemplateSpec("density-over-tightness", "item-vector", ("mkp",),
                     {"alpha": (0.0, 5.0), "beta": (0.0, 5.0),
                      "gamma": (-2.0, 2.0)}),
    ]
}


@dataclass
class TemplateDocument:
    template_id: str
    params: dict = field(default_factory=dict)

    @property
    def spec(self) -> TemplateSpec:
        return REGISTRY[self.template_id]

    def render(self) -> str:
        return json.dumps({"template": self.template_id,
                           "params": self.params}, sort_keys=True)

    @classmethod
    def parse(cls, text: str) -> "TemplateDocument":
        try:
            doc = json.loads(text)
            template_id = doc["template"]
            params = dict(doc.get("params", {}))
        except (json.JSONDecodeError, TypeError, KeyError) as exc:
            raise ParseError("bad-template", f"invalid template document: {exc}")
        if template_id not in REGISTRY:
            raise ParseError("bad-template", f"unknown template id {template_id!r}")
        spec = REGISTRY[template_id]
        for name, value in params.items():
            if name not in spec.param_ranges:
                raise ParseError("bad-template", f"unknown parameter {name!r}")
            lo, hi = spec.param_ranges[name]
            if not (isinstance(value, (int, float)) and lo <= value <= hi):
                raise ParseError(
                    "bad-template",
                    f"parameter {name}={value!r} outside [{lo}, {hi}]")
        document = cls(template_id=template_id, params=params)
        return document

    def param(self, name: str, default: float) -> float:
        return float(self.params.get(name, default))


GC_DOCUMENT = TemplateDocument("value-weight-ratio",
                               {"alpha": 1.0, "beta": 1.0, "gamma": 0.0})


def native_matrix(doc: TemplateDocument, instance) -> np.ndarray:
    """Evaluate an edge-matrix or item-vector template on one instance."""
    tid = doc.template_id
    if tid == "inverse-distance":
        alpha = doc.param("alpha", 1.0)
        return (1.0 / (instance.distance + EPSILON)) ** alpha
    if tid == "prize-distance-ratio":
        alpha, beta = doc.param("alpha", 1.0), doc.param("beta", 1.0)
        prize = np.maximum(instance.prizes, 0.0)
        return prize[None, :] ** alpha / (instance.distance ** beta + EPSILON)
    if tid == "savings-style":
        alpha = doc.param("alpha", 1.0)
        d = instance.distance
        depot = instance.depot
        savings = d[:, depot][:, None] + d[depot, :][None, :] - d
        return (np.maximum(savings, 0.0) + EPSILON) ** alpha
    if tid == "density-over-tightness":
        alpha, beta = doc.param("alpha", 1.0), doc.param("beta", 1.0)
        gamma = doc.param("gamma", 0.0)
        load = (instance.weights / instance.capacities[:, None]).mean(axis=0)
        return instance.values ** alpha / (load ** beta + EPSILON) \
            + gamma * instance.values
    raise ParseError("bad-template", f"{tid} is not a matrix template")


def native_scorer(doc: TemplateDocument, instance):
    """Build a step scorer closure: state dict -> per-item raw scores."""
    if doc.template_id != "value-weight-ratio":
        raise ParseError("bad-template",
                         f"{doc.template_id} is not a step-scorer template")
    alpha, beta = doc.param("alpha", 1.0), doc.param("beta", 1.0)
    gamma = doc.param("gamma", 0.0)
    values, weights = instance.values, instance.weights
    base = values ** alpha / (weights ** beta + EPSILON) + gamma * values

    def score(state: dict) -> np.ndarray:
        return base.copy()

    return score


def reference_external_code(doc: TemplateDocument) -> str:
    """Python transcription of a template for the external-code dialect.

    Used by the cross-engine equivalence checks; produces the same numbers
    as the native evaluator within floating-point round-off.
    """
    params = {name: doc.param(name, 1.0 if name != "gamma" else 0.0)
              for name in doc.spec.param_ranges}
    header = f"EPS = {EPSILON!r}\nPARAMS = {params!r}\n"
    tid = doc.template_id
    if tid == "inverse-distance":
        body = (
            "def matrix(instance):\n"
            "    d = instance['distance']\n"
            "    a = PARAMS['alpha']\n"
            "    return [[(1.0 / (x + EPS)) ** a for x in row] for row in d]\n")
    elif tid == "prize-distance-ratio":
        body = (
            "def matrix(instance):\n"
            "    d = instance['distance']\n"
            "    p = [max(x, 0.0) for x in instance['prizes']]\n"
            "    a, b = PARAMS['alpha'], PARAMS['beta']\n"
            "    return [[p[j] ** a / (row[j] ** b + EPS)\n"
            "             for j in range(len(row))] for row in d]\n")
    elif tid == "savings-style":
        body = (
            "def matrix(instance):\n"
            "    d = instance['distance']\n"
            "    dep = instance['depot']\n"
            "    a = PARAMS['alpha']\n"
            "    n = len(d)\n"
            "    return [[(max(d[i][dep] + d[dep][j] - d[i][j], 0.0) + EPS) ** a\n"
            "             for j in range(n)] for i in range(n)]\n")
    elif tid == "density-over-tightness":
        body = (
            "def matrix(instance):\n"
            "    v = instance['values']\n"
            "    w = instance['weights']\n"
            "    c = instance['capacities']\n"
            "    a, b, g = PARAMS['alpha'], PARAMS['beta'], PARAMS['gamma']\n"
            "    n = len(v)\n"
            "    m = len(w)\n"
            "    load = [sum(w[k][i] / c[k] for k in range(m)) / m for i in range(n)]\n"
            "    return [[v[i] ** a / (load[i] ** b + EPS) + g * v[i]\n"
            "             for i in range(n)]]\n")
    elif tid == "value-weight-ratio":
        body = (
            "def score(state):\n"
            "    v = state['values']\n"
            "    w = state['weights']\n"
            "    a, b, g = PARAMS['alpha'], PARAMS['beta'], PARAMS['gamma']\n"
            "    return [v[i] ** a / (w[i] ** b + EPS) + g * v[i]\n"
            "            for i in range(len(v))]\n")
    else:
        raise ParseError("bad-template", f"unknown template {tid!r}")
    return header + body
