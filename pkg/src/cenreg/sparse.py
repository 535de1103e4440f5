"""Compressed sparse column storage and the kernels the solver reduces to.

Everything downstream (column moments, normal equations, robust covariance)
is expressed through three column-oriented kernels on a CSC matrix:
weighted column sums, the weighted Gram product, and transposed
matrix-vector application.  All accumulations run in a fixed order so
repeated runs are bitwise identical, including when the Gram product is
partitioned across worker threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import CenregError

# Fixed row-block size for the Gram product.  Partial Gram matrices are
# computed per block and summed in block order, so the result does not
# depend on how many workers processed the blocks.  The block size bounds
# per-block scratch memory and is part of the bitwise-determinism contract.
GRAM_ROW_CHUNK = 32768

# Worker count for the blocked Gram product (default: all cores).
WORKERS_ENV = "CENREG_GRAM_WORKERS"


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        raw = os.environ.get(WORKERS_ENV, "")
        workers = int(raw) if raw.strip() else (os.cpu_count() or 1)
    if workers < 1:
        raise CenregError(f"worker count must be >= 1, got {workers}")
    return workers


class SymmetricDenseMatrix:
    """Dense symmetric matrix storing only the upper triangle.

    ``packed`` holds the rows of the upper triangle concatenated:
    entry (j, k) with j <= k lives at ``j*order - j*(j-1)//2 + (k - j)``.
    Symmetry is structural; the lower triangle is never computed.
    """

    __slots__ = ("order", "packed")

    def __init__(self, order: int, packed: np.ndarray):
        expected = order * (order + 1) // 2
        if packed.shape != (expected,):
            raise CenregError(
                f"packed triangle for order {order} must have length {expected}, "
                f"got {packed.shape}"
            )
        self.order = order
        self.packed = packed

    @classmethod
    def zeros(cls, order: int) -> "SymmetricDenseMatrix":
        return cls(order, np.zeros(order * (order + 1) // 2))

    @classmethod
    def from_full(cls, full: np.ndarray) -> "SymmetricDenseMatrix":
        """Take the upper triangle of a square array (lower is discarded)."""
        order = full.shape[0]
        if full.shape != (order, order):
            raise CenregError(f"expected a square array, got shape {full.shape}")
        iu = np.triu_indices(order)
        return cls(order, np.ascontiguousarray(full[iu], dtype=np.float64))

    def row_slice(self, j: int) -> slice:
        """Packed positions of entries (j, j), (j, j+1), ..., (j, order-1)."""
        off = j * self.order - j * (j - 1) // 2
        return slice(off, off + self.order - j)

    def to_full(self) -> np.ndarray:
        full = np.zeros((self.order, self.order))
        iu = np.triu_indices(self.order)
        full[iu] = self.packed
        full.T[iu] = self.packed
        return full

    def diagonal(self) -> np.ndarray:
        idx = np.arange(self.order)
        return self.packed[idx * self.order - idx * (idx - 1) // 2]

    def entry(self, i: int, j: int) -> float:
        if i > j:
            i, j = j, i
        return float(self.packed[i * self.order - i * (i - 1) // 2 + (j - i)])

    def scaled(self, factor: float) -> "SymmetricDenseMatrix":
        return SymmetricDenseMatrix(self.order, self.packed * factor)

    def copy(self) -> "SymmetricDenseMatrix":
        return SymmetricDenseMatrix(self.order, self.packed.copy())


@dataclass(frozen=True)
class SparseDesign:
    """Immutable CSC design matrix with sorted row indices per column.

    ``col_ptr`` has length ``n_cols + 1``; column j's nonzeros occupy
    ``row_idx[col_ptr[j]:col_ptr[j+1]]`` (strictly increasing) with values
    in the matching slice of ``values``.  Stored explicit zeros are legal
    and never change a kernel result.
    """

    n_rows: int
    n_cols: int
    col_ptr: np.ndarray
    row_idx: np.ndarray
    values: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.col_ptr[-1])

    @property
    def density(self) -> float:
        return self.nnz / (self.n_rows * self.n_cols)

    @classmethod
    def from_csc(
        cls,
        n_rows: int,
        n_cols: int,
        col_ptr: np.ndarray,
        row_idx: np.ndarray,
        values: np.ndarray,
        validate: bool = True,
    ) -> "SparseDesign":
        if n_rows <= 0 or n_cols <= 0:
            raise CenregError(f"matrix must be non-empty, got {n_rows}x{n_cols}")
        if int(np.asarray(col_ptr)[-1]) > np.iinfo(np.int32).max:
            raise CenregError("more than 2**31-1 stored entries are not supported")
        col_ptr = np.ascontiguousarray(col_ptr, dtype=np.int32)
        row_idx = np.ascontiguousarray(row_idx, dtype=np.int32)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if validate:
            if col_ptr.shape != (n_cols + 1,) or col_ptr[0] != 0:
                raise CenregError("col_ptr must have length n_cols+1 and start at 0")
            if np.any(np.diff(col_ptr) < 0):
                raise CenregError("col_ptr must be nondecreasing")
            nnz = int(col_ptr[-1])
            if row_idx.shape != (nnz,) or values.shape != (nnz,):
                raise CenregError("row_idx/values length must equal col_ptr[-1]")
            if nnz and (row_idx.min() < 0 or row_idx.max() >= n_rows):
                raise CenregError("row index out of range")
            for j in range(n_cols):
                seg = row_idx[col_ptr[j]: col_ptr[j + 1]]
                if seg.size > 1 and np.any(np.diff(seg) <= 0):
                    raise CenregError(
                        f"row indices in column {j} must be strictly increasing"
                    )
        return cls(n_rows, n_cols, col_ptr, row_idx, values)

    @cached_property
    def _col_ids(self) -> np.ndarray:
        """Column id of every stored entry, CSC order (np.intp for bincount)."""
        return np.repeat(
            np.arange(self.n_cols, dtype=np.intp), np.diff(self.col_ptr)
        )

    @cached_property
    def _csr(self) -> sp.csr_matrix:
        """Row-major copy used by the Gram kernel; built once per matrix."""
        csc = sp.csc_matrix(
            (self.values, self.row_idx, self.col_ptr),
            shape=(self.n_rows, self.n_cols),
        )
        csr = csc.tocsr()
        csr.sort_indices()
        return csr

    def to_dense(self) -> np.ndarray:
        """Materialize the full n x p array (the cost the solver avoids)."""
        try:
            out = np.zeros((self.n_rows, self.n_cols))
        except MemoryError as err:
            raise MemoryError(
                f"cannot allocate {self.n_rows * self.n_cols * 8} bytes "
                f"for a dense {self.n_rows}x{self.n_cols} matrix"
            ) from err
        for j in range(self.n_cols):
            lo, hi = self.col_ptr[j], self.col_ptr[j + 1]
            out[self.row_idx[lo:hi], j] = self.values[lo:hi]
        return out


def from_triplets(
    n: int, p: int, entries: list[tuple[int, int, float]]
) -> SparseDesign:
    """Build a canonical CSC matrix from (row, col, value) triplets.

    Duplicate (row, col) pairs are summed in input order.  Raises on any
    out-of-range index, naming the offending entry.
    """
    if n <= 0 or p <= 0:
        raise CenregError(f"matrix must be non-empty, got {n}x{p}")
    if not entries:
        return SparseDesign.from_csc(
            n, p, np.zeros(p + 1, dtype=np.int32), np.empty(0, np.int32),
            np.empty(0), validate=False,
        )
    rows = np.asarray([e[0] for e in entries], dtype=np.int64)
    cols = np.asarray([e[1] for e in entries], dtype=np.int64)
    vals = np.asarray([e[2] for e in entries], dtype=np.float64)
    bad = np.flatnonzero((rows < 0) | (rows >= n) | (cols < 0) | (cols >= p))
    if bad.size:
        k = int(bad[0])
        raise CenregError(
            f"entry {k} out of range: (row={rows[k]}, col={cols[k]}) "
            f"for a {n}x{p} matrix"
        )
    key = cols * n + rows
    order = np.argsort(key, kind="stable")
    key_sorted = key[order]
    boundaries = np.flatnonzero(np.diff(key_sorted)) + 1
    starts = np.concatenate(([0], boundaries))
    summed = np.add.reduceat(vals[order], starts)
    unique_keys = key_sorted[starts]
    out_rows = (unique_keys % n).astype(np.int32)
    out_cols = unique_keys // n
    counts = np.bincount(out_cols, minlength=p)
    col_ptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int32)
    return SparseDesign.from_csc(n, p, col_ptr, out_rows, summed, validate=False)


def _check_rows(M: SparseDesign, v: np.ndarray, name: str) -> np.ndarray:
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.shape != (M.n_rows,):
        raise CenregError(
            f"{name} has length {v.shape[0] if v.ndim == 1 else v.shape}, "
            f"expected {M.n_rows}"
        )
    return v


def weighted_column_sums(M: SparseDesign, w: np.ndarray) -> np.ndarray:
    """out[j] = sum_i w[i] * M[i, j], touching stored entries only."""
    w = _check_rows(M, w, "weights")
    terms = M.values * w[M.row_idx]
    return np.bincount(M._col_ids, weights=terms, minlength=M.n_cols)


def transpose_apply(M: SparseDesign, v: np.ndarray) -> np.ndarray:
    """out = M.T @ v over stored entries only."""
    v = _check_rows(M, v, "vector")
    terms = M.values * v[M.row_idx]
    return np.bincount(M._col_ids, weights=terms, minlength=M.n_cols)


def apply_matvec(M: SparseDesign, x: np.ndarray) -> np.ndarray:
    """out = M @ x; column-order accumulation, deterministic."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (M.n_cols,):
        raise CenregError(
            f"coefficient vector has length {x.shape}, expected {M.n_cols}"
        )
    out = np.zeros(M.n_rows)
    for j in range(M.n_cols):
        lo, hi = M.col_ptr[j], M.col_ptr[j + 1]
        if lo != hi:
            out[M.row_idx[lo:hi]] += M.values[lo:hi] * x[j]
    return out


def _gram_block(csr: sp.csr_matrix, w: np.ndarray, a: int, b: int) -> np.ndarray:
    block = csr[a:b]
    w_per_entry = np.repeat(w[a:b], np.diff(block.indptr))
    scaled = sp.csr_matrix(
        (block.data * w_per_entry, block.indices, block.indptr),
        shape=block.shape,
    )
    return (block.T @ scaled).toarray()


def weighted_gram_upper(
    M: SparseDesign, w: np.ndarray, workers: int | None = None
) -> SymmetricDenseMatrix:
    """Upper triangle of M.T @ diag(w) @ M.

    Rows are processed in fixed blocks of GRAM_ROW_CHUNK; block partials
    are summed in ascending block order, so the output is bitwise
    identical for any worker count.  Cost scales with the number of
    coinciding nonzero pairs per row, never with n * p^2.
    """
    w = _check_rows(M, w, "weights")
    if np.any(w < 0):
        k = int(np.flatnonzero(w < 0)[0])
        raise CenregError(f"weights must be nonnegative, got w[{k}] = {w[k]}")
    workers = resolve_workers(workers)
    csr = M._csr
    starts = range(0, M.n_rows, GRAM_ROW_CHUNK)
    bounds = [(a, min(a + GRAM_ROW_CHUNK, M.n_rows)) for a in starts]
    full = np.zeros((M.n_cols, M.n_cols))
    if workers == 1 or len(bounds) == 1:
        for a, b in bounds:
            full += _gram_block(csr, w, a, b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(lambda ab: _gram_block(csr, w, *ab), bounds):
                full += part
    return SymmetricDenseMatrix.from_full(full)
