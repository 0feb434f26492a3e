"""Ant-colony construction framework for OP, CVRP, and MKP.

Pheromone times heuristic attractiveness drives stochastic construction;
the best ant of each iteration deposits, everything evaporates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EvaluationError
from .instances import CVRPInstance, MKPInstance, OPInstance


@dataclass
class ACOParams:
    n_ants: int = 20
    n_iterations: int = 50
    alpha_p: float = 1.0
    beta_p: float = 1.0
    rho: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n_ants < 1 or self.n_iterations < 1:
            raise EvaluationError("ant/iteration counts must be >= 1")
        if not 0.0 < self.rho < 1.0:
            raise EvaluationError("rho must lie in (0, 1)")


def _pick(rng: np.random.Generator, weights: np.ndarray) -> int:
    total = weights.sum()
    if total <= 0.0 or not np.isfinite(total):
        # Degenerate attractiveness: fall back to uniform over candidates.
        weights = np.ones_like(weights)
        total = weights.sum()
    u = rng.random() * total
    return int(np.searchsorted(np.cumsum(weights), u, side="right"))


def _construct_op(instance: OPInstance, tau, eta, p, rng):
    d = instance.distance
    depot = instance.depot
    visited = np.zeros(instance.n, dtype=bool)
    visited[depot] = True
    current, remaining = depot, instance.max_len
    edges, prize = [], 0.0
    while True:
        feasible = np.flatnonzero(
            ~visited & (d[current] + d[:, depot] <= remaining))
        if feasible.size == 0:
            break
        w = (tau[current, feasible] ** p.alpha_p) * (eta[current, feasible] ** p.beta_p)
        nxt = int(feasible[_pick(rng, w)])
        edges.append((current, nxt))
        remaining -= d[current, nxt]
        prize += instance.prizes[nxt]
        visited[nxt] = True
        current = nxt
    edges.append((current, depot))
    return prize, edges


def _construct_cvrp(instance: CVRPInstance, tau, eta, p, rng):
    d = instance.distance
    depot = instance.depot
    visited = np.zeros(instance.n, dtype=bool)
    visited[depot] = True
    current, cap = depot, instance.capacity
    edges, cost = [], 0.0
    while not visited.all():
        feasible = np.flatnonzero(~visited & (instance.demands <= cap))
        if feasible.size == 0:
            if current == depot:
                raise EvaluationError("infeasible CVRP instance: demand > capacity")
            edges.append((current, depot))
            cost += d[current, depot]
            current, cap = depot, instance.capacity
            continue
        w = (tau[current, feasible] ** p.alpha_p) * (eta[current, feasible] ** p.beta_p)
        nxt = int(feasible[_pick(rng, w)])
        edges.append((current, nxt))
        cost += d[current, nxt]
        cap -= instance.demands[nxt]
        visited[nxt] = True
        current = nxt
    edges.append((current, depot))
    cost += d[current, depot]
    return cost, edges


def _construct_mkp(instance: MKPInstance, tau, eta, p, rng):
    residual = instance.capacities.copy()
    chosen = np.zeros(instance.n, dtype=bool)
    items, value = [], 0.0
    while True:
        fits = (instance.weights <= residual[:, None]).all(axis=0)
        feasible = np.flatnonzero(~chosen & fits)
        if feasible.size == 0:
            break
        w = (tau[feasible] ** p.alpha_p) * (eta[feasible] ** p.beta_p)
        item = int(feasible[_pick(rng, w)])
        items.append(item)
        value += instance.values[item]
        residual -= instance.weights[:, item]
        chosen[item] = True
    return value, items


def aco_solve(instance, eta: np.ndarray, p: ACOParams,
              return_history: bool = False):
    """Best objective over all iterations (prize/value max, distance min)."""
    rng = np.random.default_rng(p.seed)
    maximize = not isinstance(instance, CVRPInstance)
    if isinstance(instance, OPInstance):
        construct, tau = _construct_op, np.ones_like(instance.distance)
    elif isinstance(instance, CVRPInstance):
        construct, tau = _construct_cvrp, np.ones_like(instance.distance)
    elif isinstance(instance, MKPInstance):
        construct, tau = _construct_mkp, np.ones(instance.n)
    else:
        raise EvaluationError(f"ACO does not handle {type(instance).__name__}")

    best = -np.inf if maximize else np.inf
    history = []
    for _ in range(p.n_iterations):
        iter_best, iter_components = None, None
        for _ in range(p.n_ants):
            obj, components = construct(instance, tau, eta, p, rng)
            better = iter_best is None or (obj > iter_best if maximize
                                           else obj < iter_best)
            if better:
                iter_best, iter_components = obj, components
        tau *= 1.0 - p.rho
        deposit = iter_best if maximize else 1.0 / max(iter_best, 1e-12)
        if isinstance(instance, MKPInstance):
            for item in iter_components:
                tau[item] += deposit
        else:
            for i, j in iter_components:
                tau[i, j] += deposit
                tau[j, i] += deposit
        if (iter_best > best) if maximize else (iter_best < best):
            best = iter_best
        history.append(best)
    if return_history:
        return best, history
    return best
