"""Numpy implementations of the pointwise kernels.

Same contracts as the compiled core in ``_core.pyx``; used when the extension
is unavailable or DHYM_PURE_PYTHON is set.
"""

import numpy as np


def sigma_all(vals: np.ndarray) -> np.ndarray:
    """All elementary symmetric polynomials of each row.

    vals: (m, n) float64.  Returns (m, n+1) with column k holding sigma_k.
    """
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    m, n = vals.shape
    out = np.zeros((m, n + 1))
    out[:, 0] = 1.0
    for j in range(n):
        v = vals[:, j]
        for k in range(j + 1, 0, -1):
            out[:, k] += v * out[:, k - 1]
    return out


def sigma_batch(vals: np.ndarray, k: int) -> np.ndarray:
    return sigma_all(vals)[:, k]


def subset_margins(vals: np.ndarray, subsets: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Minimum over index subsets of sum_k c_k * sigma_k(subset values).

    vals: (m, n); subsets: (s, i) integer index rows; coeffs: (i+1,) listed
    highest-order first, i.e. coeffs[0] multiplies sigma_i.  Returns (m,).
    """
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    subsets = np.ascontiguousarray(subsets, dtype=np.int64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    arity = subsets.shape[1]
    asc = coeffs[::-1]  # index k -> coefficient of sigma_k
    best = None
    for row in subsets:
        e = sigma_all(vals[:, row])
        val = e @ asc
        best = val if best is None else np.minimum(best, val)
    return best


def eigh2_batch(h11, h22, re12, im12):
    """Eigenvalues of 2x2 Hermitian matrices, vectorized; returns (lo, hi)."""
    h11 = np.asarray(h11, dtype=np.float64)
    h22 = np.asarray(h22, dtype=np.float64)
    mean = 0.5 * (h11 + h22)
    radius = np.hypot(0.5 * (h11 - h22), np.hypot(re12, im12))
    return mean - radius, mean + radius
