"""Greedy bipartite allocation of the best edge-arm over a graph.

The greedy pass builds a 2-coloring where each node joins the side least
represented among its already-colored neighbors. Nodes in part 1 play x*,
nodes in part 2 play x*'. The resulting global reward is at least halfway
between the worst and best achievable rewards.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .environment import global_reward
from .graphs import Graph

BRUTE_FORCE_LIMIT = 10 ** 7


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Allocation:
    assignment: tuple[int, ...]
    part: tuple[int, ...]
    star_pair: tuple[int, int]
    operations: int = 0

    @property
    def v1(self) -> list[int]:
        return [i for i, p in enumerate(self.part) if p == 1]

    @property
    def v2(self) -> list[int]:
        return [i for i, p in enumerate(self.part) if p == 2]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("node", "part", "arm"))
            for i, (p, a) in enumerate(zip(self.part, self.assignment)):
                w.writerow((i, p, a))


@dataclass(frozen=True)
class RewardSummary:
    reward: float
    best: float
    worst: float

    @property
    def differential_ratio(self) -> float:
        return differential_ratio(self.reward, self.best, self.worst)


def _matrix(param) -> np.ndarray:
    return np.asarray(getattr(param, "matrix", param), dtype=float)


def _arms(node_arms) -> np.ndarray:
    return np.asarray(getattr(node_arms, "arms", node_arms), dtype=float)


def best_edge_arm(param_estimate, node_arms) -> tuple[tuple[int, int], float]:
    """Exhaustive argmax of x^T M x' over the K^2 ordered pairs.

    Ties resolve to the lexicographically smallest pair.
    """
    X = _arms(node_arms)
    V = X @ _matrix(param_estimate) @ X.T
    k = int(np.argmax(V))
    a, b = divmod(k, V.shape[1])
    return (a, b), float(V[a, b])


def bipartite_allocation(graph: Graph, node_arms, param_estimate) -> Allocation:
    (a, b), _ = best_edge_arm(param_estimate, node_arms)
    K = _arms(node_arms).shape[0]
    ops = K * K
    part = [0] * graph.n_nodes
    assignment = [0] * graph.n_nodes
    for i in range(graph.n_nodes):
        n1 = n2 = 0
        for j in graph.neighbors(i):
            ops += 1
            if part[j] == 1:
                n1 += 1
            elif part[j] == 2:
                n2 += 1
        ops += 1
        if n1 > n2:
            part[i], assignment[i] = 2, b
        else:
            part[i], assignment[i] = 1, a
    return Allocation(tuple(assignment), tuple(part), (a, b), ops)


def _decode(code: int, n: int, K: int) -> tuple[int, ...]:
    digits = []
    for _ in range(n):
        code, r = divmod(code, K)
        digits.append(r)
    return tuple(reversed(digits))


def brute_force_extremes(graph: Graph, node_arms, param):
    """Best and worst joint arms by full enumeration of the K^n allocations.

    Returns (best_allocation, r_best, worst_allocation, r_worst).
    """
    X = _arms(node_arms)
    K, n = X.shape[0], graph.n_nodes
    if K ** n > BRUTE_FORCE_LIMIT:
        raise InstanceTooLarge(f"K^n = {K}^{n} exceeds the enumeration limit {BRUTE_FORCE_LIMIT}")
    V = np.ascontiguousarray(X @ _matrix(param) @ X.T)
    bc, best, wc, worst = kernels.allocation_extremes(V, graph.heads, graph.tails, n, K)
    return _decode(int(bc), n, K), float(best), _decode(int(wc), n, K), float(worst)


def differential_ratio(reward: float, best: float, worst: float) -> float:
    """(r - r_min) / (r* - r_min), taken as 1 when r* == r_min."""
    if best < worst:
        raise ValueError("best reward must not be below worst reward")
    span = best - worst
    if span <= 1e-12 * max(1.0, abs(best), abs(worst)):
        return 1.0
    return (reward - worst) / span


def summarize(graph: Graph, node_arms, param, allocation: Allocation) -> RewardSummary:
    """Compare an allocation against brute-force extremes (small instances only)."""
    from .environment import BilinearParameter

    p = param if isinstance(param, BilinearParameter) else BilinearParameter(param)
    X = _arms(node_arms)
    r = global_reward(allocation.assignment, graph, p, X)
    _, best, _, worst = brute_force_extremes(graph, X, p)
    return RewardSummary(r, best, worst)


def cut_edges(graph: Graph, allocation: Allocation) -> int:
    """Directed edges whose endpoints sit in different parts."""
    return sum(1 for i, j in graph.edges if allocation.part[i] != allocation.part[j])
