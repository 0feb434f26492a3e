"""Step-by-step knapsack construction and the greedy ratio baseline."""

from __future__ import annotations

import numpy as np

from ..errors import EvaluationError
from .instances import Dataset, KPInstance


def kp_construct(instance: KPInstance, scorer) -> float:
    """Greedy construction driven by a step scorer.

    The scorer receives {values, weights, capacity, remaining, mask} and
    returns per-item scores; infeasible and already-picked items are masked
    to -inf. Ties break to the lowest index. Always returns a feasible value.
    """
    n = instance.n
    mask = np.zeros(n, dtype=bool)
    remaining = instance.capacity
    total = 0.0
    while True:
        feasible = ~mask & (instance.weights <= remaining)
        if not feasible.any():
            break
        state = {
            "values": instance.values,
            "weights": instance.weights,
            "capacity": instance.capacity,
            "remaining": remaining,
            "mask": mask.copy(),
        }
        try:
            scores = np.asarray(scorer(state), dtype=float)
        except Exception as exc:
            raise EvaluationError(f"step scorer failed: {exc}") from exc
        if scores.shape != (n,):
            raise EvaluationError(f"scorer returned shape {scores.shape}, "
                                  f"expected ({n},)")
        scores = np.where(np.isfinite(scores), scores, 0.0)
        scores = np.where(feasible, scores, -np.inf)
        item = int(np.argmax(scores))  # argmax takes the lowest tied index
        mask[item] = True
        remaining -= instance.weights[item]
        total += instance.values[item]
    return total


def gc_scorer(instance: KPInstance):
    """Exact value/weight-ratio scorer of the greedy construction baseline."""
    ratio = instance.values / instance.weights

    def score(state: dict) -> np.ndarray:
        return ratio.copy()

    return score


def baseline_gc(dataset: Dataset) -> float:
    if dataset.problem != "kp":
        raise EvaluationError("greedy construction baseline is KP-only")
    totals = [kp_construct(inst, gc_scorer(inst)) for inst in dataset.instances]
    return float(np.mean(totals))
