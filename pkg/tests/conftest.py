"""Shared helpers: random instance generators and dense reference math.

The reference implementations here are deliberately plain dense
expressions (or explicit loops for the tiny worked examples) so they stay
independent of the sparse kernels they check.
"""

from __future__ import annotations

import numpy as np

from cenreg import SparseDesign, from_triplets


def random_design(rng, n: int, p: int, density: float) -> SparseDesign:
    """Bernoulli-mask design with standard normal values, via triplets."""
    mask = rng.random((n, p)) < density
    vals = rng.standard_normal((n, p))
    ii, jj = np.nonzero(mask)
    entries = [(int(i), int(j), float(vals[i, j])) for i, j in zip(ii, jj)]
    return from_triplets(n, p, entries)


def with_intercept_column(rng, n: int, p: int, density: float) -> SparseDesign:
    """Like random_design but column 0 is all ones."""
    mask = rng.random((n, p)) < density
    vals = rng.standard_normal((n, p))
    mask[:, 0] = True
    vals[:, 0] = 1.0
    ii, jj = np.nonzero(mask)
    entries = [(int(i), int(j), float(vals[i, j])) for i, j in zip(ii, jj)]
    return from_triplets(n, p, entries)


def dense_of(M: SparseDesign) -> np.ndarray:
    out = np.zeros((M.n_rows, M.n_cols))
    for j in range(M.n_cols):
        lo, hi = int(M.col_ptr[j]), int(M.col_ptr[j + 1])
        for k in range(lo, hi):
            out[int(M.row_idx[k]), j] = M.values[k]
    return out


def loop_colsums(dense: np.ndarray, w: np.ndarray) -> np.ndarray:
    n, p = dense.shape
    out = np.zeros(p)
    for j in range(p):
        acc = 0.0
        for i in range(n):
            acc += w[i] * dense[i, j]
        out[j] = acc
    return out


def loop_gram(dense: np.ndarray, w: np.ndarray) -> np.ndarray:
    n, p = dense.shape
    out = np.zeros((p, p))
    for j in range(p):
        for k in range(j, p):
            acc = 0.0
            for i in range(n):
                acc += w[i] * dense[i, j] * dense[i, k]
            out[j, k] = acc
            out[k, j] = acc
    return out


def loop_transpose_apply(dense: np.ndarray, v: np.ndarray) -> np.ndarray:
    n, p = dense.shape
    out = np.zeros(p)
    for j in range(p):
        acc = 0.0
        for i in range(n):
            acc += dense[i, j] * v[i]
        out[j] = acc
    return out


def dense_gram(dense: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Vectorized dense reference for larger sweeps."""
    return (dense * w[:, None]).T @ dense


def rel_err(got: np.ndarray, want: np.ndarray, floor: float = 1e-300) -> float:
    got = np.atleast_1d(np.asarray(got, dtype=np.float64))
    want = np.atleast_1d(np.asarray(want, dtype=np.float64))
    scale = max(float(np.max(np.abs(want))), float(np.max(np.abs(got))), floor)
    return float(np.max(np.abs(got - want))) / scale


FLAG_CONFIGS = [
    # (with_intercept, center, scale); centered fits need an intercept to
    # absorb the offset during back-transformation.
    (True, False, False),
    (True, True, False),
    (True, False, True),
    (True, True, True),
    (False, False, False),
    (False, False, True),
]


def random_instance(rng, config_index: int):
    """One seeded fit instance: (M, y, w, kwargs) cycling the flag grid."""
    with_icol, center, scale = FLAG_CONFIGS[config_index % len(FLAG_CONFIGS)]
    n = int(rng.integers(20, 501))
    p = int(rng.integers(1 if not with_icol else 2, 26))
    p = min(p, n - 1)
    density = float(rng.uniform(0.02, 0.6))
    if with_icol:
        M = with_intercept_column(rng, n, p, density)
    else:
        M = random_design(rng, n, p, density)
    beta = rng.standard_normal(p)
    y = dense_of_fast(M) @ beta + rng.standard_normal(n)
    w = rng.uniform(0.0, 2.0, size=n)
    kwargs = dict(
        center=center, scale=scale,
        intercept_col=0 if with_icol else None,
    )
    return M, y, w, kwargs


def dense_of_fast(M: SparseDesign) -> np.ndarray:
    out = np.zeros((M.n_rows, M.n_cols))
    for j in range(M.n_cols):
        lo, hi = int(M.col_ptr[j]), int(M.col_ptr[j + 1])
        out[M.row_idx[lo:hi], j] = M.values[lo:hi]
    return out
