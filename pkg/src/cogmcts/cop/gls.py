"""Guided local search for TSP: 2-opt descent on penalty-augmented costs,
penalties placed on tour edges of highest utility."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import EvaluationError


@dataclass
class GLSParams:
    penalty_rounds: int = 200
    lambda_factor: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.penalty_rounds < 0:
            raise EvaluationError("penalty_rounds must be >= 0")


def tour_cost(tour: np.ndarray, d: np.ndarray) -> float:
    return float(d[tour, np.roll(tour, -1)].sum())


def nearest_neighbor_tour(d: np.ndarray, start: int = 0) -> np.ndarray:
    n = len(d)
    unvisited = set(range(n))
    unvisited.remove(start)
    tour = [start]
    while unvisited:
        current = tour[-1]
        # Ties broken by lowest index for reproducibility.
        nxt = min(unvisited, key=lambda j: (d[current, j], j))
        unvisited.remove(nxt)
        tour.append(nxt)
    return np.array(tour)


def two_opt(tour: np.ndarray, cost: np.ndarray) -> np.ndarray:
    """Best-improvement 2-opt descent to a local optimum of ``cost``."""
    tour = tour.copy()
    n = len(tour)
    improved = True
    while improved:
        improved = False
        best_delta, best_move = -1e-12, None
        for i in range(n - 1):
            a, b = tour[i], tour[i + 1]
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue  # reversing the whole cycle is a no-op
                c, e = tour[j], tour[(j + 1) % n]
                delta = (cost[a, b] + cost[c, e]) - (cost[a, c] + cost[b, e])
                if delta > best_delta:
                    best_delta, best_move = delta, (i, j)
        if best_move is not None:
            i, j = best_move
            tour[i + 1:j + 1] = tour[i + 1:j + 1][::-1]
            improved = True
    return tour


def _exact_small(d: np.ndarray) -> float:
    n = len(d)
    best = np.inf
    for perm in itertools.permutations(range(1, n)):
        order = (0,) + perm
        best = min(best, tour_cost(np.array(order), d))
    return best


def gls_solve(instance, eta: np.ndarray, p: GLSParams,
              return_history: bool = False):
    """Best true tour cost found across penalty rounds."""
    d = instance.distance
    n = len(d)
    if n < 4:
        best = _exact_small(d)
        return (best, [best]) if return_history else best

    penalty = np.zeros_like(d)
    tour = two_opt(nearest_neighbor_tour(d), d)
    best = tour_cost(tour, d)
    history = [best]
    for _ in range(p.penalty_rounds):
        edges = list(zip(tour, np.roll(tour, -1)))
        utils = np.array([eta[i, j] / (1.0 + penalty[i, j]) for i, j in edges])
        top = utils.max()
        for (i, j), u in zip(edges, utils):
            if u >= top - 1e-15:
                penalty[i, j] += 1.0
                penalty[j, i] += 1.0
        lam_g = p.lambda_factor * tour_cost(tour, d) / n
        tour = two_opt(tour, d + lam_g * penalty)
        best = min(best, tour_cost(tour, d))
        history.append(best)
    if return_history:
        return best, history
    return best
