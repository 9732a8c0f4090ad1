"""Node-arm sets and their lifted edge-arm sets.

The lift uses column-major vec: ``lift(x, y)[j * d + i] == x[i] * y[j]``.
Edge-arm (a, b) lives at flat index ``a * K + b``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np


DUPLICATE_RTOL = 1e-12


class ArmSetError(ValueError):
    pass


def duplicate_mask(Z: np.ndarray, z: np.ndarray, rtol: float = DUPLICATE_RTOL) -> np.ndarray:
    """Rows of Z equal to z up to rtol relative to the largest row norm.

    cos(pi/2) is not exactly 0 in floating point, so exact comparison would
    miss the duplicates of the omega = pi/2 benchmark.
    """
    scale = max(float(np.abs(Z).max(initial=0.0)), 1.0)
    return np.all(np.abs(Z - z) <= rtol * scale, axis=1)


def lift(x, y) -> np.ndarray:
    """Return vec(x y^T), columns stacked."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ArmSetError(f"lift needs two vectors of equal length, got {x.shape} and {y.shape}")
    return np.outer(y, x).ravel()


def unlift(z, d: int) -> np.ndarray:
    """Inverse of vec: rebuild the d x d matrix from a column-stacked vector."""
    return np.asarray(z, dtype=float).reshape(d, d).T


def vec(M) -> np.ndarray:
    return np.asarray(M, dtype=float).T.ravel()


@dataclass(frozen=True, eq=False)
class NodeArmSet:
    arms: np.ndarray

    def __post_init__(self):
        arms = np.array(self.arms, dtype=float)
        if arms.ndim != 2 or arms.shape[0] == 0:
            raise ArmSetError(f"arms must be a non-empty (K, d) array, got shape {arms.shape}")
        K, d = arms.shape
        if K < d:
            raise ArmSetError(f"need K >= d arms to span R^{d}, got K = {K}")
        if np.linalg.matrix_rank(arms) < d:
            raise ArmSetError(f"arms do not span R^{d}")
        arms.setflags(write=False)
        object.__setattr__(self, "arms", arms)

    @property
    def n_arms(self) -> int:
        return self.arms.shape[0]

    @property
    def dim(self) -> int:
        return self.arms.shape[1]

    def __len__(self):
        return self.n_arms

    def __getitem__(self, i):
        return self.arms[i]

    @cached_property
    def edge_arms(self) -> "EdgeArmSet":
        return EdgeArmSet(self)

    def to_csv(self, path: str | Path) -> None:
        np.savetxt(path, self.arms, delimiter=",", fmt="%.17g")

    @classmethod
    def from_csv(cls, path: str | Path) -> "NodeArmSet":
        return cls(np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float)))


@dataclass(frozen=True)
class EdgeArm:
    vector: np.ndarray
    left_index: int
    right_index: int


class EdgeArmSet:
    """All K^2 ordered lifts of a node-arm set. Duplicate vectors are kept."""

    def __init__(self, base: NodeArmSet):
        self.base = base
        X = base.arms
        K, d = X.shape
        # row a*K + b holds vec(x_a x_b^T); entry j*d + i = x_a[i] * x_b[j]
        Z = np.einsum("bj,ai->abji", X, X).reshape(K * K, d * d)
        Z.setflags(write=False)
        self.vectors = Z

    @property
    def n_base(self) -> int:
        return self.base.n_arms

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return self.vectors.shape[0]

    def index(self, a: int, b: int) -> int:
        return a * self.n_base + b

    def pair(self, k: int) -> tuple[int, int]:
        return divmod(int(k), self.n_base)

    def __getitem__(self, k: int) -> EdgeArm:
        a, b = self.pair(k)
        return EdgeArm(self.vectors[k], a, b)

    def duplicates_of(self, k: int, rtol: float = DUPLICATE_RTOL) -> np.ndarray:
        """Indices whose vector equals edge-arm k up to rounding (k included)."""
        return np.flatnonzero(duplicate_mask(self.vectors, self.vectors[k], rtol))


def soare_arm_set(d: int, omega: float) -> NodeArmSet:
    """Canonical basis of R^d plus (cos w, sin w, 0, ..., 0)."""
    if d < 2:
        raise ArmSetError(f"d must be >= 2, got {d}")
    if not (0.0 < omega <= np.pi / 2):
        raise ArmSetError(f"omega must lie in (0, pi/2], got {omega}")
    extra = np.zeros(d)
    extra[0], extra[1] = np.cos(omega), np.sin(omega)
    return NodeArmSet(np.vstack([np.eye(d), extra]))


def random_unit_arms(K: int, d: int, seed: int) -> NodeArmSet:
    """K standard Gaussian draws in R^d, each scaled to unit norm."""
    if K < d:
        raise ArmSetError(f"K = {K} < d = {d} cannot span R^{d}")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((K, d))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    return NodeArmSet(X)
