"""Monte-Carlo study of the per-round design increment A_1.

A_1 = sum over directed edges of z z^T when every node draws its arm i.i.d.
from mu. Its matrix variance E[(A_1 - E A_1)^2] controls how fast the
learner's design matrix concentrates, and grows with m at a rate set by how
many edges share nodes.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .arms import NodeArmSet, random_unit_arms
from .design import DesignDistribution, frank_wolfe_design
from .graphs import Graph, GraphError, graph_with_edges, make_graph, nodes_for_edges


@dataclass(frozen=True)
class VarianceEstimate:
    kind: str
    m: int
    n_samples: int
    spectral_norm: float
    std_error: float


@dataclass(frozen=True)
class VarianceBoundSpec:
    P: float
    M: float
    N: float

    def __post_init__(self):
        if min(self.P, self.M, self.N) < 0:
            raise ValueError("P, M, N must be nonnegative")


def spectral_norm(S: np.ndarray, rtol: float = 1e-8, max_iter: int = 10_000) -> float:
    """Largest singular value by power iteration on S^T S."""
    S = np.asarray(S, dtype=float)
    G = S.T @ S
    if not np.any(G):
        return 0.0
    v = np.ones(G.shape[0]) + np.linspace(0.0, 0.1, G.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = G @ v
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
        new = float(v @ G @ v)
        if abs(new - lam) <= rtol * abs(new):
            lam = new
            break
        lam = new
    return float(np.sqrt(max(lam, 0.0)))


def _draw(mu: DesignDistribution, n_nodes: int, rng: np.random.Generator) -> np.ndarray:
    idx = np.searchsorted(mu.cdf, rng.random(n_nodes), side="right")
    return np.minimum(idx, len(mu) - 1).astype(np.int64)


def sample_A1(graph: Graph, node_arms: NodeArmSet, mu: DesignDistribution,
              rng: np.random.Generator) -> np.ndarray:
    """One draw of sum_{(i,j) in E} z_ij z_ij^T with node arms i.i.d. from mu."""
    assign = _draw(mu, graph.n_nodes, rng)
    Z = node_arms.edge_arms.vectors
    return kernels.edge_gram(Z, assign, graph.heads, graph.tails, node_arms.n_arms)


def sample_A1_batch(graph, node_arms, mu, n_samples, rng) -> np.ndarray:
    return np.stack([sample_A1(graph, node_arms, mu, rng) for _ in range(n_samples)])


def _variance_from_moments(mean_sq: np.ndarray, mean: np.ndarray) -> np.ndarray:
    V = mean_sq - mean @ mean
    return 0.5 * (V + V.T)


def matrix_variance(samples: np.ndarray) -> np.ndarray:
    """Two-pass estimate of E[(A - EA)^2] from stacked samples."""
    mean = samples.mean(axis=0)
    D = samples - mean
    V = np.einsum("kij,kjl->il", D, D) / samples.shape[0]
    return 0.5 * (V + V.T)


def variance_norm(graph: Graph, node_arms: NodeArmSet, mu: DesignDistribution,
                  n_samples: int = 100, seed=None, n_boot: int = 200) -> VarianceEstimate:
    """Spectral norm of the Monte-Carlo matrix variance of A_1, with bootstrap error."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    rng = np.random.default_rng(seed)
    A = sample_A1_batch(graph, node_arms, mu, n_samples, rng)
    est = spectral_norm(matrix_variance(A))
    boot = np.empty(n_boot)
    if n_boot:
        sq = np.einsum("kij,kjl->kil", A, A)
        brng = np.random.default_rng(rng.integers(2 ** 63))
        for b in range(n_boot):
            w = np.bincount(brng.integers(0, n_samples, n_samples), minlength=n_samples) / n_samples
            mean = np.tensordot(w, A, axes=1)
            boot[b] = spectral_norm(_variance_from_moments(np.tensordot(w, sq, axes=1), mean))
    std = float(boot.std(ddof=1)) if n_boot > 1 else float("nan")
    return VarianceEstimate(graph.kind, graph.n_edges, n_samples, est, std)


def exact_variance(graph: Graph, node_arms: NodeArmSet, mu: DesignDistribution) -> np.ndarray:
    """E[(A_1 - E A_1)^2] by enumerating all K^n joint draws (tiny instances only)."""
    K, n = node_arms.n_arms, graph.n_nodes
    if K ** n > 200_000:
        raise ValueError("enumeration too large")
    Z = node_arms.edge_arms.vectors
    w = mu.weights
    first = np.zeros((Z.shape[1],) * 2)
    second = np.zeros_like(first)
    for code in range(K ** n):
        assign = np.array(np.unravel_index(code, (K,) * n), dtype=np.int64)
        prob = float(np.prod(w[assign]))
        if prob == 0.0:
            continue
        A = kernels.edge_gram(Z, assign, graph.heads, graph.tails, K)
        first += prob * A
        second += prob * (A @ A)
    return _variance_from_moments(second, first)


def _default_mu(node_arms: NodeArmSet) -> DesignDistribution:
    return frank_wolfe_design(node_arms).distribution


def _check_m_grid(kind: str, m_values) -> list[int]:
    ms = sorted(set(int(m) for m in m_values))
    if len(ms) < 3:
        raise GraphError("slope fits need at least 3 distinct m values")
    if ms[-1] < 4 * ms[0]:
        raise GraphError("m values must span at least a factor of 4")
    for m in ms:
        nodes_for_edges(kind, m)
    return ms


def scaling_slope(kind: str, m_values, d: int = 5, K: int = 100, n_samples: int = 100,
                  seed: int = 0, mu: DesignDistribution | None = None,
                  node_arms: NodeArmSet | None = None):
    """Least-squares slope of log ||Var(A_1)|| against log m.

    Returns (slope, estimates).
    """
    ms = _check_m_grid(kind, m_values)
    if node_arms is None:
        node_arms = random_unit_arms(K, d, seed)
    if mu is None:
        mu = _default_mu(node_arms)
    ests = [variance_norm(graph_with_edges(kind, m), node_arms, mu, n_samples,
                          seed=(seed, k), n_boot=0)
            for k, m in enumerate(ms)]
    slope = np.polyfit(np.log(ms), np.log([e.spectral_norm for e in ests]), 1)[0]
    return float(slope), ests


def table1_bound(kind: str, m: int, spec: VarianceBoundSpec) -> float:
    """Per-kind ceiling on ||Var(A_1)|| given per-pair constants P, M, N."""
    n = nodes_for_edges(kind, m)
    P, M, N = spec.P, spec.M, spec.N
    if kind == "star":
        return m * P + (n - 1) * (n - 2) * M + n * (n - 1) * N
    if kind == "complete":
        return m * P + n * (n - 1) * (n - 2) * M + n * (n - 1) ** 2 * N
    if kind == "circle":
        return m * P + 2 * n * M + 4 * n * N
    if kind == "matching":
        return m * P + m * N
    raise GraphError(f"unknown graph kind {kind!r}")


def estimate_bound_constants(node_arms: NodeArmSet, mu: DesignDistribution,
                             n_samples: int = 1000, seed=None) -> VarianceBoundSpec:
    """Monte-Carlo ceilings P, M, N for the per-edge variance and covariances.

    P: ||Var(A^(i,j))||. M: ||Cov(A^(i,j), A^(i,k))||, edges sharing their head,
    from a 3-node path. N: the larger of ||Cov(A^(i,j), A^(j,k))|| on the path
    and ||Cov(A^(i,j), A^(j,i))|| on a 2-node gadget (k = i is a neighbor of j).
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    rng = np.random.default_rng(seed)
    Z = node_arms.edge_arms.vectors
    K = node_arms.n_arms
    draws = _draw(mu, 3 * n_samples, rng).reshape(n_samples, 3)
    i, j, k = draws[:, 0], draws[:, 1], draws[:, 2]

    def grams(a, b):
        z = Z[a * K + b]
        return np.einsum("ni,nj->nij", z, z)

    def cov(A, B):
        Da, Db = A - A.mean(axis=0), B - B.mean(axis=0)
        return np.einsum("nij,njl->il", Da, Db) / A.shape[0]

    Aij = grams(i, j)
    return VarianceBoundSpec(
        P=spectral_norm(matrix_variance(Aij)),
        M=spectral_norm(cov(Aij, grams(i, k))),
        N=max(spectral_norm(cov(Aij, grams(j, k))), spectral_norm(cov(Aij, grams(j, i)))),
    )


def write_estimates(rows, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("kind", "m", "n_samples", "norm", "std_error"))
        for e in rows:
            w.writerow((e.kind, e.m, e.n_samples, f"{e.spectral_norm:.10g}", f"{e.std_error:.10g}"))
