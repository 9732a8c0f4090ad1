"""Relaxed G-optimal designs over finite arm sets.

The design objective is the maximum leverage

    h(w) = max_x x^T Sigma(w)^{-1} x,    Sigma(w) = sum_x w_x x x^T,

which equals the ambient dimension p at the optimum. ``frank_wolfe_design``
stops on that certificate.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-2
DEFAULT_MAX_ITER = 100_000
_SINGULAR_RTOL = 1e-12


class DesignConvergenceError(RuntimeError):
    """Raised when the iteration budget runs out before the certificate holds."""

    def __init__(self, message: str, report: "DesignReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True, eq=False)
class DesignDistribution:
    weights: np.ndarray
    support_threshold: float = 1e-8

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size == 0 or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.weights.size

    @classmethod
    def uniform(cls, n: int) -> "DesignDistribution":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, n: int, k: int) -> "DesignDistribution":
        w = np.zeros(n)
        w[k] = 1.0
        return cls(w)

    @classmethod
    def normalized(cls, w, **kw) -> "DesignDistribution":
        w = np.clip(np.asarray(w, dtype=float), 0.0, None)
        return cls(w / w.sum(), **kw)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > self.support_threshold)

    @property
    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.weights)
        c[-1] = 1.0
        return c


@dataclass(eq=False)
class DesignReport:
    distribution: DesignDistribution
    objective: float
    iterations: int
    dimension: int
    jittered: bool = False
    history: list = field(default_factory=list, repr=False)

    @property
    def certificate_gap(self) -> float:
        return self.objective - self.dimension

    def to_dict(self) -> dict:
        return {
            "weights": self.distribution.weights.tolist(),
            "support": self.distribution.support().tolist(),
            "objective": self.objective,
            "dimension": self.dimension,
            "iterations": self.iterations,
            "certificate_gap": self.certificate_gap,
            "jittered": self.jittered,
        }

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def _as_matrix(arms) -> np.ndarray:
    if hasattr(arms, "arms"):
        arms = arms.arms
    elif hasattr(arms, "vectors"):
        arms = arms.vectors
    return np.atleast_2d(np.asarray(arms, dtype=float))


def _weights(dist) -> np.ndarray:
    return dist.weights if isinstance(dist, DesignDistribution) else np.asarray(dist, dtype=float)


def covariance(arms, dist) -> np.ndarray:
    """sum_k w_k x_k x_k^T."""
    X = _as_matrix(arms)
    w = _weights(dist)
    S = X.T @ (w[:, None] * X)
    return 0.5 * (S + S.T)


def _is_singular(S: np.ndarray) -> bool:
    ev = np.linalg.eigvalsh(S)
    return ev[0] <= _SINGULAR_RTOL * max(ev[-1], np.finfo(float).tiny)


def leverages(X: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Row-wise x^T S^{-1} x via a Cholesky factor of S."""
    L = np.linalg.cholesky(S)
    Y = np.linalg.solve(L, X.T)
    return np.einsum("ij,ij->j", Y, Y)


def h_value(arms, dist) -> float:
    """Max leverage under the design covariance; +inf when it is singular."""
    X = _as_matrix(arms)
    S = covariance(X, dist)
    if _is_singular(S):
        return float("inf")
    try:
        return float(leverages(X, S).max())
    except np.linalg.LinAlgError:
        return float("inf")


def _factor_leverages(X, S):
    try:
        return leverages(X, S), False
    except np.linalg.LinAlgError:
        p = S.shape[0]
        jitter = 1e-10 * np.trace(S) / p
        return leverages(X, S + jitter * np.eye(p)), True


def frank_wolfe_design(arms, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                       record_history: bool = False) -> DesignReport:
    """G-optimal design by Frank-Wolfe with the Fedorov-Wynn exact step.

    Each iteration moves mass toward the arm of largest leverage l with step
    (l/p - 1)/(l - 1). Stops once max leverage <= p * (1 + tol).
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    X = _as_matrix(arms)
    K, p = X.shape
    if np.linalg.matrix_rank(X) < p:
        raise ValueError(f"arms do not span R^{p}")
    w = np.full(K, 1.0 / K)
    jittered = False
    history = []
    threshold = p * (1.0 + tol)
    lev_max = np.inf
    for k in range(max_iter + 1):
        lev, jit = _factor_leverages(X, covariance(X, w))
        jittered |= jit
        j = int(np.argmax(lev))  # first maximum: lowest index wins ties
        lev_max = float(lev[j])
        if record_history:
            history.append(lev_max)
        if lev_max <= threshold:
            dist = DesignDistribution.normalized(w)
            return DesignReport(dist, lev_max, k, p, jittered, history)
        if k == max_iter:
            break
        gamma = (lev_max / p - 1.0) / (lev_max - 1.0) if lev_max > p else 2.0 / (k + 2.0)
        w *= 1.0 - gamma
        w[j] += gamma
    report = DesignReport(DesignDistribution.normalized(w), lev_max, max_iter, p, jittered, history)
    raise DesignConvergenceError(
        f"Frank-Wolfe did not reach max leverage <= {threshold:.6g} in {max_iter} iterations "
        f"(last {lev_max:.6g})", report)


def product_distribution(mu: DesignDistribution) -> DesignDistribution:
    """Edge-arm design lambda_(a,b) = mu_a mu_b on the flat index a*K + b."""
    w = mu.weights
    return DesignDistribution.normalized(np.outer(w, w).ravel(), support_threshold=mu.support_threshold)


def marginals(lam: DesignDistribution, K: int) -> tuple[np.ndarray, np.ndarray]:
    W = lam.weights.reshape(K, K)
    return W.sum(axis=1), W.sum(axis=0)


def min_eigenvalue_unweighted(arms) -> float:
    """Smallest eigenvalue of (1/N) sum_k x_k x_k^T."""
    X = _as_matrix(arms)
    S = X.T @ X / X.shape[0]
    return max(float(np.linalg.eigvalsh(0.5 * (S + S.T))[0]), 0.0)


def burn_in_rounds(edge_arms, d: int, delta: float) -> float:
    """Rounds after which the relative-error guarantee kicks in:
    2 L d^2 log(2 d^2 / delta) / nu_min with L the max squared edge-arm norm."""
    Z = _as_matrix(edge_arms)
    nu = min_eigenvalue_unweighted(Z)
    if nu <= 0:
        return float("inf")
    L = float(np.max(np.einsum("ij,ij->i", Z, Z)))
    return 2.0 * L * d * d * np.log(2.0 * d * d / delta) / nu


def f_Z(edge_arms, A) -> float:
    """max_z z^T A^{-1} z for a positive definite A; raises on singular A."""
    Z = _as_matrix(edge_arms)
    A = np.asarray(A, dtype=float)
    try:
        return float(leverages(Z, 0.5 * (A + A.T)).max())
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("matrix is not positive definite") from exc
