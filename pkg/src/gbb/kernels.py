"""Hot inner loops, compiled with numba when available.

Set ``GBB_DISABLE_NUMBA=1`` before import to force the pure-numpy paths.
Both implementations of every kernel are kept importable (``NUMPY_KERNELS``,
``NUMBA_KERNELS``) so tests and the benchmark can compare them directly.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

USE_NUMBA = numba is not None and os.environ.get("GBB_DISABLE_NUMBA", "").lower() not in ("1", "true", "yes")


# -- round tallies --------------------------------------------------------

def _tally_round_np(assign, heads, tails, K, values, noise, counts, sums):
    idx = assign[heads] * K + assign[tails]
    rewards = values[idx] + noise
    counts += np.bincount(idx, minlength=K * K)
    sums += np.bincount(idx, weights=rewards, minlength=K * K)


def _tally_round_py(assign, heads, tails, K, values, noise, counts, sums):
    for e in range(heads.shape[0]):
        k = assign[heads[e]] * K + assign[tails[e]]
        counts[k] += 1
        sums[k] += values[k] + noise[e]


# -- one draw of the per-round design increment ---------------------------

def _edge_gram_np(Z, assign, heads, tails, K):
    sel = Z[assign[heads] * K + assign[tails]]
    return sel.T @ sel


def _edge_gram_py(Z, assign, heads, tails, K):
    p = Z.shape[1]
    out = np.zeros((p, p))
    for e in range(heads.shape[0]):
        z = Z[assign[heads[e]] * K + assign[tails[e]]]
        for r in range(p):
            zr = z[r]
            if zr == 0.0:
                continue
            for c in range(p):
                out[r, c] += zr * z[c]
    return out


# -- exhaustive joint-arm enumeration --------------------------------------

_CHUNK = 1 << 16


def _allocation_extremes_np(values, heads, tails, n, K):
    total = K ** n
    powers = K ** np.arange(n - 1, -1, -1, dtype=np.int64)
    best, worst = -np.inf, np.inf
    best_code = worst_code = 0
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (codes[:, None] // powers) % K
        r = values[digits[:, heads], digits[:, tails]].sum(axis=1) if heads.size else np.zeros(codes.size)
        hi, lo = int(np.argmax(r)), int(np.argmin(r))
        if r[hi] > best:
            best, best_code = float(r[hi]), int(codes[hi])
        if r[lo] < worst:
            worst, worst_code = float(r[lo]), int(codes[lo])
    return best_code, best, worst_code, worst


def _allocation_extremes_py(values, heads, tails, n, K):
    total = K ** n
    digits = np.zeros(n, dtype=np.int64)
    best, worst = -np.inf, np.inf
    best_code = 0
    worst_code = 0
    for code in range(total):
        r = 0.0
        for e in range(heads.shape[0]):
            r += values[digits[heads[e]], digits[tails[e]]]
        if r > best:
            best = r
            best_code = code
        if r < worst:
            worst = r
            worst_code = code
        # increment the mixed-radix counter, last node fastest
        pos = n - 1
        while pos >= 0:
            digits[pos] += 1
            if digits[pos] < K:
                break
            digits[pos] = 0
            pos -= 1
    return best_code, best, worst_code, worst


NUMPY_KERNELS = {
    "tally_round": _tally_round_np,
    "edge_gram": _edge_gram_np,
    "allocation_extremes": _allocation_extremes_np,
}

if numba is not None:
    NUMBA_KERNELS = {
        "tally_round": numba.njit(cache=True)(_tally_round_py),
        "edge_gram": numba.njit(cache=True)(_edge_gram_py),
        "allocation_extremes": numba.njit(cache=True)(_allocation_extremes_py),
    }
else:  # pragma: no cover
    NUMBA_KERNELS = {}

_ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS

tally_round = _ACTIVE["tally_round"]
edge_gram = _ACTIVE["edge_gram"]
allocation_extremes = _ACTIVE["allocation_extremes"]


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
