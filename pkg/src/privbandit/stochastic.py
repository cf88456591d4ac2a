"""Helpers for row-stochastic matrices.

A transition matrix here is a square numpy array whose rows are probability
distributions over the next state: entries in [0, 1], each row summing to 1
within ``ROW_SUM_TOL``.
"""

from __future__ import annotations

import numpy as np

ROW_SUM_TOL = 1e-9


def uniform_matrix(d: int) -> np.ndarray:
    """d x d matrix with every row uniform."""
    if d < 1:
        raise ValueError(f"state count must be >= 1, got {d}")
    return np.full((d, d), 1.0 / d)


def is_row_stochastic(matrix, tol: float = ROW_SUM_TOL) -> bool:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        return False
    if not np.all(np.isfinite(m)):
        return False
    if np.any(m < 0.0) or np.any(m > 1.0 + tol):
        return False
    return bool(np.all(np.abs(m.sum(axis=1) - 1.0) <= tol))


def require_row_stochastic(matrix, tol: float = ROW_SUM_TOL, what: str = "matrix") -> np.ndarray:
    m = np.asarray(matrix, dtype=float)
    if not is_row_stochastic(m, tol):
        raise ValueError(f"{what} is not row-stochastic within {tol}")
    return m


def normalize_rows(matrix) -> np.ndarray:
    """Divide positive-sum rows by their sum; impute all-zero rows uniformly.

    Input must be nonnegative. Rows that carry no mass ("missing states")
    become the uniform distribution over all states.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if np.any(m < 0.0):
        raise ValueError("normalize_rows requires nonnegative entries")
    sums = m.sum(axis=1)
    out = np.empty_like(m, dtype=float)
    zero = sums <= 0.0
    out[~zero] = m[~zero] / sums[~zero, None]
    out[zero] = 1.0 / m.shape[1]
    return out
