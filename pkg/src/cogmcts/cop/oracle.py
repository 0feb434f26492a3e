"""Exact small-instance oracles: knapsack DP plus exhaustive dynamic
programs for the routing and multi-knapsack variants."""

from __future__ import annotations

import numpy as np

from ..errors import UnsupportedInstanceError
from .instances import (CVRPInstance, KPInstance, MKPInstance, OPInstance,
                        TSPInstance)

EXHAUSTIVE_LIMIT = 12
KP_WEIGHT_SCALE = 1e-4  # weight grid; value error bounded by n * scale


def kp_oracle(instance: KPInstance, scale: float = KP_WEIGHT_SCALE) -> float:
    """DP over weights rounded up to the grid (solution always feasible)."""
    # The 1e-9 guards against float noise in the division itself.
    w_int = np.ceil(instance.weights / scale - 1e-9).astype(np.int64)
    cap = int(np.floor(instance.capacity / scale + 1e-9))
    dp = np.zeros(cap + 1)
    for value, weight in zip(instance.values, w_int):
        if weight <= cap:
            if weight == 0:
                dp += value
            else:
                dp[weight:] = np.maximum(dp[weight:], dp[:-weight] + value)
    return float(dp[-1])


def _held_karp(d: np.ndarray, start: int):
    """dp[mask][j]: shortest path from start through mask, ending at j.

    ``mask`` indexes subsets of the non-start nodes.
    """
    n = len(d)
    others = [i for i in range(n) if i != start]
    m = len(others)
    pos = {node: k for k, node in enumerate(others)}
    dp = np.full((1 << m, m), np.inf)
    for node in others:
        dp[1 << pos[node], pos[node]] = d[start, node]
    for mask in range(1, 1 << m):
        row = dp[mask]
        ends = np.flatnonzero(np.isfinite(row))
        for e in ends:
            base = row[e]
            node_e = others[e]
            for node in others:
                k = pos[node]
                if mask & (1 << k):
                    continue
                nxt = mask | (1 << k)
                cand = base + d[node_e, node]
                if cand < dp[nxt, k]:
                    dp[nxt, k] = cand
    return dp, others


def tsp_oracle(instance: TSPInstance) -> float:
    n = instance.n
    if n > EXHAUSTIVE_LIMIT:
        raise UnsupportedInstanceError(f"TSP oracle limited to n <= {EXHAUSTIVE_LIMIT}")
    if n <= 2:
        return float(2.0 * instance.distance[0, 1]) if n == 2 else 0.0
    d = instance.distance
    dp, others = _held_karp(d, start=0)
    full = (1 << len(others)) - 1
    closes = dp[full] + np.array([d[node, 0] for node in others])
    return float(closes.min())


def op_oracle(instance: OPInstance) -> float:
    """Max collectible prize over all subsets routable within the budget."""
    n = instance.n
    if n > EXHAUSTIVE_LIMIT:
        raise UnsupportedInstanceError(f"OP oracle limited to n <= {EXHAUSTIVE_LIMIT}")
    d = instance.distance
    depot = instance.depot
    dp, others = _held_karp(d, start=depot)
    prize_of = np.array([instance.prizes[node] for node in others])
    best = 0.0
    for mask in range(1, 1 << len(others)):
        row = dp[mask]
        ends = np.flatnonzero(np.isfinite(row))
        close = min(row[e] + d[others[e], depot] for e in ends)
        if close <= instance.max_len + 1e-12:
            prize = prize_of[[k for k in range(len(others)) if mask & (1 << k)]].sum()
            best = max(best, float(prize))
    return best


def cvrp_oracle(instance: CVRPInstance) -> float:
    """Optimal route-set cost: per-subset optimal tours + set-partition DP."""
    n = instance.n
    if n > EXHAUSTIVE_LIMIT:
        raise UnsupportedInstanceError(f"CVRP oracle limited to n <= {EXHAUSTIVE_LIMIT}")
    d = instance.distance
    depot = instance.depot
    dp, others = _held_karp(d, start=depot)
    m = len(others)
    demand_of = np.array([instance.demands[node] for node in others])
    if (demand_of > instance.capacity).any():
        raise UnsupportedInstanceError("infeasible CVRP instance: demand > capacity")

    route_cost = np.full(1 << m, np.inf)
    route_cost[0] = 0.0
    for mask in range(1, 1 << m):
        members = [k for k in range(m) if mask & (1 << k)]
        if demand_of[members].sum() > instance.capacity + 1e-12:
            continue
        row = dp[mask]
        ends = np.flatnonzero(np.isfinite(row))
        route_cost[mask] = min(row[e] + d[others[e], depot] for e in ends)

    part = np.full(1 << m, np.inf)
    part[0] = 0.0
    for mask in range(1, 1 << m):
        # Iterate submasks containing the lowest set bit to avoid duplicates.
        low = mask & -mask
        sub = mask
        while sub:
            if sub & low and np.isfinite(route_cost[sub]):
                cand = route_cost[sub] + part[mask ^ sub]
                if cand < part[mask]:
                    part[mask] = cand
            sub = (sub - 1) & mask
    return float(part[(1 << m) - 1])


def mkp_oracle(instance: MKPInstance) -> float:
    n = instance.n
    if n > EXHAUSTIVE_LIMIT:
        raise UnsupportedInstanceError(f"MKP oracle limited to n <= {EXHAUSTIVE_LIMIT}")
    best = 0.0
    for mask in range(1 << n):
        members = [i for i in range(n) if mask & (1 << i)]
        if not members:
            continue
        load = instance.weights[:, members].sum(axis=1)
        if (load <= instance.capacities + 1e-12).all():
            best = max(best, float(instance.values[members].sum()))
    return best


def oracle_exact(instance) -> float:
    """Exact optimum; exhaustive variants are limited to small sizes."""
    if isinstance(instance, KPInstance):
        return kp_oracle(instance)
    if isinstance(instance, TSPInstance):
        return tsp_oracle(instance)
    if isinstance(instance, OPInstance):
        return op_oracle(instance)
    if isinstance(instance, CVRPInstance):
        return cvrp_oracle(instance)
    if isinstance(instance, MKPInstance):
        return mkp_oracle(instance)
    raise UnsupportedInstanceError(f"no oracle for {type(instance).__name__}")
