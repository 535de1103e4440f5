"""Assemble the centered-and-scaled normal equations without densifying.

For a design M with weights w, plan (mu, scale) and response y, the
normal-equation matrix of the implicitly centered and scaled design is

    G = S (M'WM) S - u v' - v u' + (1'W1) v v'

with S = diag(scale), u = S (M'W1) the scaled weighted column sums and
v = S mu.  G is built from the sparse Gram kernel plus rank-one edits on
the packed upper triangle; the dense centered matrix never exists.  The
right-hand side is S (M'Wy) - v (1'Wy).

The same assembly with a different diagonal (w * residuals^2) yields the
inner matrix of the heteroskedasticity-robust sandwich, so it is exposed
here for reuse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CenregError
from .moments import StandardizationPlan, weight_aggregates
from .sparse import (
    SparseDesign,
    SymmetricDenseMatrix,
    transpose_apply,
    weighted_column_sums,
    weighted_gram_upper,
)


@dataclass(frozen=True)
class NormalEquations:
    gram: SymmetricDenseMatrix   # G of the implicit centered/scaled design
    rhs: np.ndarray              # right-hand side b
    sum_w: float                 # 1'W1
    sum_wy: float                # 1'Wy
    n_obs: int
    plan: StandardizationPlan


def scaled_colsums(
    M: SparseDesign, w: np.ndarray, plan: StandardizationPlan
) -> np.ndarray:
    """scale[j] * sum_i w[i] M[i, j]; the u vector of the cross term."""
    if plan.n_cols != M.n_cols:
        raise CenregError(
            f"plan has {plan.n_cols} columns, matrix has {M.n_cols}"
        )
    return plan.scale * weighted_column_sums(M, w)


def cross_correction(
    colsums_scaled: np.ndarray, mu_scaled: np.ndarray
) -> SymmetricDenseMatrix:
    """-(u v' + v u') accumulated on the upper triangle."""
    u = np.asarray(colsums_scaled, dtype=np.float64)
    v = np.asarray(mu_scaled, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise CenregError(
            f"vectors must be 1-d with equal length, got {u.shape} and {v.shape}"
        )
    p = u.shape[0]
    out = SymmetricDenseMatrix.zeros(p)
    for j in range(p):
        out.packed[out.row_slice(j)] = -(u[j] * v[j:] + v[j] * u[j:])
    return out


def outer_correction(
    mu_scaled: np.ndarray, sum_w: float
) -> SymmetricDenseMatrix:
    """+sum_w * v v' on the upper triangle."""
    if sum_w < 0:
        raise CenregError(f"sum of weights must be nonnegative, got {sum_w}")
    v = np.asarray(mu_scaled, dtype=np.float64)
    p = v.shape[0]
    out = SymmetricDenseMatrix.zeros(p)
    for j in range(p):
        out.packed[out.row_slice(j)] = sum_w * v[j] * v[j:]
    return out


def assemble_centered_gram(
    M: SparseDesign,
    diag_weights: np.ndarray,
    plan: StandardizationPlan,
    workers: int | None = None,
) -> SymmetricDenseMatrix:
    """Centered/scaled Gram for an arbitrary nonnegative diagonal.

    Fuses the row/column scaling and both rank-one corrections into the
    packed upper triangle of the sparse Gram, avoiding separate p x p
    temporaries.  Used with diag_weights = w for the normal equations and
    diag_weights = w * residuals^2 for the robust-covariance inner matrix;
    the plan (and therefore the centering) always comes from the fit.
    """
    if plan.n_cols != M.n_cols:
        raise CenregError(
            f"plan has {plan.n_cols} columns, matrix has {M.n_cols}"
        )
    gram = weighted_gram_upper(M, diag_weights, workers=workers)
    u = plan.scale * weighted_column_sums(M, diag_weights)
    v = plan.mu_scaled
    dsum = float(np.sum(diag_weights))
    scale = plan.scale
    packed = gram.packed
    p = M.n_cols
    for j in range(p):
        seg = gram.row_slice(j)
        packed[seg] *= scale[j] * scale[j:]
        packed[seg] -= u[j] * v[j:] + v[j] * u[j:]
        packed[seg] += dsum * v[j] * v[j:]
    return gram


def build_normal_equations(
    M: SparseDesign,
    y: np.ndarray,
    w: np.ndarray,
    plan: StandardizationPlan,
    workers: int | None = None,
) -> NormalEquations:
    """Normal equations of the implicit centered/scaled design.

    Peak extra memory is O(p^2) for the Gram plus O(n) scratch; the dense
    n x p centered matrix is never allocated.
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if y.shape != (M.n_rows,):
        raise CenregError(f"response has length {y.shape}, expected {M.n_rows}")
    if not np.all(np.isfinite(M.values)):
        raise CenregError("design matrix contains non-finite values")
    if not np.all(np.isfinite(y)):
        raise CenregError("response contains non-finite values")
    if not np.all(np.isfinite(w)):
        raise CenregError("weights contain non-finite values")
    sum_w, sum_wy, wy = weight_aggregates(w, y)
    gram = assemble_centered_gram(M, w, plan, workers=workers)
    rhs = plan.scale * transpose_apply(M, wy) - plan.mu_scaled * sum_wy
    return NormalEquations(
        gram=gram, rhs=rhs, sum_w=sum_w, sum_wy=sum_wy,
        n_obs=M.n_rows, plan=plan,
    )
