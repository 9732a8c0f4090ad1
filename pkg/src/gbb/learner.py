"""Randomized G-allocation learner with a fixed-confidence stopping rule.

Every round each node draws an arm i.i.d. from the G-optimal node design mu,
every directed edge reveals a noisy bilinear reward, and the ridge estimate
theta_hat = A^{-1} b is refreshed with A = I + sum z z^T.

Because edge-arms come from a finite indexed set, A and b are stored through
per-edge-arm pull counts and reward sums; this is exact, not an approximation.
"""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .arms import EdgeArmSet, NodeArmSet, duplicate_mask
from .design import DEFAULT_TOL, DesignDistribution, f_Z, frank_wolfe_design
from .environment import BilinearParameter, NoiseModel
from .graphs import Graph

log = logging.getLogger(__name__)


@dataclass
class StopReport:
    stopped: bool
    candidate: int
    worst_margin: float
    round: int


@dataclass
class LearnerState:
    graph: Graph
    arms: EdgeArmSet
    param: BilinearParameter
    mu: DesignDistribution
    sigma: float
    delta: float
    rng: np.random.Generator
    counts: np.ndarray
    reward_sums: np.ndarray
    round: int = 0
    log_pi_power: int = 2
    record: bool = False
    observations: list = field(default_factory=list, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._heads = self.graph.heads
        self._tails = self.graph.tails
        self._values = self.param.pair_values(self.arms.base.arms).ravel()
        self._cdf = self.mu.cdf

    @property
    def node_arms(self) -> NodeArmSet:
        return self.arms.base

    @property
    def n_edges(self) -> int:
        return self.graph.n_edges

    @property
    def dim(self) -> int:
        return self.arms.dim

    @property
    def n_observations(self) -> int:
        return int(self.counts.sum())

    @property
    def design_matrix(self) -> np.ndarray:
        if "A" not in self._cache:
            Z = self.arms.vectors
            A = Z.T @ (self.counts[:, None] * Z)
            A = 0.5 * (A + A.T)
            A[np.diag_indices_from(A)] += 1.0
            self._cache["A"] = A
        return self._cache["A"]

    @property
    def response(self) -> np.ndarray:
        if "b" not in self._cache:
            self._cache["b"] = self.arms.vectors.T @ self.reward_sums
        return self._cache["b"]

    @property
    def cholesky(self) -> np.ndarray:
        if "L" not in self._cache:
            self._cache["L"] = np.linalg.cholesky(self.design_matrix)
        return self._cache["L"]

    @property
    def estimate(self) -> np.ndarray:
        if "theta" not in self._cache:
            L = self.cholesky
            y = np.linalg.solve(L, self.response)
            self._cache["theta"] = np.linalg.solve(L.T, y)
        return self._cache["theta"]

    def invalidate(self):
        self._cache.clear()


def init(graph: Graph, node_arms: NodeArmSet, param: BilinearParameter, sigma: float = 1.0,
         delta: float = 0.1, seed=None, *, mu: DesignDistribution | None = None,
         tol: float = DEFAULT_TOL, log_pi_power: int = 2, record: bool = False) -> LearnerState:
    """Fresh learner: A = I, b = 0, theta_hat = 0, mu from Frank-Wolfe unless given."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if param.dim != node_arms.dim:
        raise ValueError(f"parameter dimension {param.dim} != arm dimension {node_arms.dim}")
    if mu is None:
        mu = frank_wolfe_design(node_arms, tol=tol).distribution
    if len(mu) != node_arms.n_arms:
        raise ValueError("mu must carry one weight per node-arm")
    n_z = node_arms.n_arms ** 2
    return LearnerState(
        graph=graph, arms=node_arms.edge_arms, param=param, mu=mu, sigma=float(sigma),
        delta=float(delta), rng=np.random.default_rng(seed),
        counts=np.zeros(n_z), reward_sums=np.zeros(n_z),
        log_pi_power=log_pi_power, record=record)


def draw_nodes(state: LearnerState) -> np.ndarray:
    """One inverse-CDF draw per node, in node order."""
    u = state.rng.random(state.graph.n_nodes)
    idx = np.searchsorted(state._cdf, u, side="right")
    return np.minimum(idx, state.node_arms.n_arms - 1).astype(np.int64)


def step(state: LearnerState) -> LearnerState:
    """Play one round: draw node-arms, observe all m edge rewards, update A and b."""
    assign = draw_nodes(state)
    noise = state.sigma * state.rng.standard_normal(state.n_edges)
    if state.record:
        K = state.node_arms.n_arms
        idx = assign[state._heads] * K + assign[state._tails]
        state.observations.append((idx, state._values[idx] + noise))
    kernels.tally_round(assign, state._heads, state._tails, state.node_arms.n_arms,
                        state._values, noise, state.counts, state.reward_sums)
    state.round += 1
    state.invalidate()
    return state


def log_term(state: LearnerState) -> float:
    """log(6 m^2 t^2 K^4 / (delta pi^q)) with q = state.log_pi_power."""
    m, t, K = state.n_edges, max(state.round, 1), state.node_arms.n_arms
    return float(np.log(6.0 * m * m * t * t * K ** 4 / (state.delta * np.pi ** state.log_pi_power)))


def stopping_condition(state: LearnerState) -> StopReport:
    """Check the confidence rule for the empirical best edge-arm.

    For every z' that is not a duplicate of z_hat:
        ||z_hat - z'||_{A^-1} sqrt(8 sigma^2 log(...)) <= (z_hat - z')^T theta_hat
    """
    Z = state.arms.vectors
    theta = state.estimate
    scores = Z @ theta
    cand = empirical_best(Z, theta)
    diffs = Z[cand] - Z
    keep = ~duplicate_mask(Z, Z[cand])
    if not keep.any():
        return StopReport(True, cand, float("inf"), state.round)
    diffs = diffs[keep]
    gaps = scores[cand] - scores[keep]
    Y = np.linalg.solve(state.cholesky, diffs.T)
    norms = np.sqrt(np.einsum("ij,ij->j", Y, Y))
    radius = norms * np.sqrt(8.0 * state.sigma ** 2 * log_term(state))
    margin = float(np.min(gaps - radius))
    return StopReport(margin >= 0.0, cand, margin, state.round)


def relative_error(state: LearnerState) -> float:
    """Empirical alpha: f_Z(A_t) * m t / d^2 - 1."""
    if state.round < 1:
        raise ValueError("relative error needs at least one round")
    return design_relative_error(state.arms.vectors, state.design_matrix, state.n_edges * state.round)


def design_relative_error(edge_arms, A, n_pulls: int) -> float:
    """f_Z(A) / f_Z(n_pulls * Sigma(lambda*)) - 1, using f_Z at the optimum = p / n_pulls."""
    Z = np.asarray(getattr(edge_arms, "vectors", edge_arms), dtype=float)
    return f_Z(Z, A) * n_pulls / Z.shape[1] - 1.0


def empirical_best(edge_arms, theta) -> int:
    """argmax_z z^T theta, lowest index on ties."""
    Z = np.asarray(getattr(edge_arms, "vectors", edge_arms), dtype=float)
    return int(np.argmax(Z @ theta))


@dataclass
class RunResult:
    candidate: int
    rounds: int
    stopped: bool
    history: list

    @property
    def budget_exhausted(self) -> bool:
        return not self.stopped


HISTORY_FIELDS = ("round", "candidate", "worst_margin", "alpha", "wall_time")


def run(state: LearnerState, max_rounds: int, check_every: int = 10, *,
        track_alpha: bool = False) -> RunResult:
    """Step until the stopping rule fires or the round budget is spent.

    The rule is checked every ``check_every`` rounds and after the last round.
    A spent budget is reported via ``stopped=False``, not raised.
    """
    if check_every < 1:
        raise ValueError("check_every must be >= 1")
    history = []
    t0 = time.perf_counter()
    report = None
    while state.round < max_rounds:
        step(state)
        if state.round % check_every == 0 or state.round == max_rounds:
            report = stopping_condition(state)
            alpha = relative_error(state) if track_alpha else float("nan")
            history.append((state.round, report.candidate, report.worst_margin, alpha,
                            time.perf_counter() - t0))
            if report.stopped:
                return RunResult(report.candidate, state.round, True, history)
    if report is None:
        cand = int(np.argmax(state.arms.vectors @ state.estimate))
        return RunResult(cand, state.round, False, history)
    return RunResult(report.candidate, state.round, False, history)


def write_history(result: RunResult, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(HISTORY_FIELDS)
        for row in result.history:
            w.writerow([row[0], row[1], f"{row[2]:.10g}", f"{row[3]:.10g}", f"{row[4]:.6f}"])


def _pi_power(log_pi_power: int) -> float:
    if log_pi_power not in (1, 2):
        raise ValueError("log_pi_power must be 1 or 2")
    return np.pi ** log_pi_power


def sample_complexity_upper_bound(d, sigma, delta, m, K, gap_min, alpha, t, log_pi_power=1) -> float:
    """128 sigma^2 d^2 (1 + alpha) log(6 m^2 t^2 K^4 / (delta pi)) / (m gap_min^2)."""
    if gap_min <= 0:
        raise ValueError("gap_min must be positive")
    logt = np.log(6.0 * m * m * t * t * K ** 4 / (delta * _pi_power(log_pi_power)))
    return float(128.0 * sigma ** 2 * d ** 2 * (1.0 + alpha) * logt / (m * gap_min ** 2))


def worst_case_lower_bound(d, sigma, m, delta, gap_min) -> float:
    """4 sigma^2 d^2 / (m gap_min^2); delta only enters the uncapped bound."""
    if gap_min <= 0:
        raise ValueError("gap_min must be positive")
    return float(4.0 * sigma ** 2 * d ** 2 / (m * gap_min ** 2))


def reward_gaps(edge_arms: EdgeArmSet, param: BilinearParameter) -> np.ndarray:
    """(z_star - z)^T theta_star for every edge-arm."""
    scores = edge_arms.vectors @ param.theta
    return scores.max() - scores


def min_gap(edge_arms: EdgeArmSet, param: BilinearParameter) -> float:
    """Smallest positive gap; zero-gap duplicates of the best arm are skipped."""
    g = reward_gaps(edge_arms, param)
    pos = g[g > 1e-12]
    return float(pos.min()) if pos.size else 0.0
