"""Bilinear reward oracle: r = x^T M x' + noise."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .arms import vec
from .graphs import Graph


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BilinearParameter:
    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionError(f"parameter matrix must be square, got {M.shape}")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def theta(self) -> np.ndarray:
        return vec(self.matrix)

    def pair_values(self, arms) -> np.ndarray:
        """K x K table of expected rewards x_a^T M x_b."""
        X = np.asarray(arms, dtype=float)
        if X.shape[1] != self.dim:
            raise DimensionError(f"arms have dimension {X.shape[1]}, parameter {self.dim}")
        return X @ self.matrix @ X.T

    @classmethod
    def from_csv(cls, path: str | Path) -> "BilinearParameter":
        return cls(np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float)))


@dataclass(frozen=True)
class NoiseModel:
    sigma: float = 1.0
    distribution: str = "gaussian"

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.distribution != "gaussian":
            raise ValueError(f"unsupported noise distribution {self.distribution!r}")

    def sample(self, rng: np.random.Generator, size=None):
        return self.sigma * rng.standard_normal(size)


def _check(x, y, param: BilinearParameter):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (param.dim,) or y.shape != (param.dim,):
        raise DimensionError(f"arm shapes {x.shape}, {y.shape} do not match dimension {param.dim}")
    return x, y


def expected_reward(x, y, param: BilinearParameter) -> float:
    x, y = _check(x, y, param)
    return float(x @ param.matrix @ y)


def sample_reward(x, y, param: BilinearParameter, noise: NoiseModel, rng: np.random.Generator) -> float:
    return expected_reward(x, y, param) + float(noise.sample(rng))


def global_reward(allocation, graph: Graph, param: BilinearParameter, arms) -> float:
    """Sum of expected rewards over all directed edges.

    ``allocation`` holds one arm index per node, ``arms`` the (K, d) arm matrix.
    """
    alloc = np.asarray(allocation, dtype=np.int64)
    if alloc.shape != (graph.n_nodes,):
        raise ValueError(f"allocation must have {graph.n_nodes} entries, got {alloc.shape}")
    X = np.asarray(arms, dtype=float)
    if alloc.size and (alloc.min() < 0 or alloc.max() >= X.shape[0]):
        raise IndexError("allocation refers to an arm index out of range")
    if graph.n_edges == 0:
        return 0.0
    V = param.pair_values(X)
    return float(V[alloc[graph.heads], alloc[graph.tails]].sum())


def symmetrize(M) -> BilinearParameter:
    """M + M^T; drives the same directed-sum reward on symmetric graphs."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got {M.shape}")
    return BilinearParameter(M + M.T)


def augment(M, beta) -> BilinearParameter:
    """Fold a linear term x^T beta into a (d+1)-dimensional bilinear parameter.

    Pair with ``augment_arms`` so that x~^T M~ x~' = x^T M x' + x^T beta.
    """
    M = np.asarray(M, dtype=float)
    beta = np.asarray(beta, dtype=float).ravel()
    if M.ndim != 2 or M.shape[0] != M.shape[1] or beta.shape != (M.shape[0],):
        raise DimensionError(f"incompatible shapes M {M.shape}, beta {beta.shape}")
    d = M.shape[0]
    out = np.zeros((d + 1, d + 1))
    out[:d, :d] = M
    out[:d, d] = beta
    return BilinearParameter(out)


def augment_arms(arms) -> np.ndarray:
    X = np.atleast_2d(np.asarray(arms, dtype=float))
    return np.hstack([X, np.ones((X.shape[0], 1))])


def soare_parameter(d: int) -> BilinearParameter:
    if d < 2:
        raise DimensionError(f"d must be >= 2, got {d}")
    M = np.zeros((d, d))
    M[0, 0] = 2.0
    return BilinearParameter(M)


def load_beta(path: str | Path) -> np.ndarray:
    return np.atleast_1d(np.loadtxt(path, delimiter=",", dtype=float)).ravel()
