"""Parameter covariance for the transformed coefficients.

Homoskedastic: Gram inverse times the residual variance.  Robust (HC):
the sandwich whose inner matrix is the same centered Gram expansion
evaluated with the diagonal w * residuals^2, reusing the fit's
standardization plan, so the dense centered design is never formed.
"""

from __future__ import annotations

import numpy as np

from .errors import CenregError
from .gram import assemble_centered_gram
from .moments import StandardizationPlan
from .sparse import SparseDesign, SymmetricDenseMatrix


def cov_homoskedastic(
    gram_inverse: SymmetricDenseMatrix, k_hat_sq: float
) -> SymmetricDenseMatrix:
    if k_hat_sq < 0:
        raise CenregError(f"residual variance must be nonnegative, got {k_hat_sq}")
    return gram_inverse.scaled(k_hat_sq)


def cov_hc(
    M: SparseDesign,
    w: np.ndarray,
    residuals: np.ndarray,
    plan: StandardizationPlan,
    gram_inverse: SymmetricDenseMatrix,
    workers: int | None = None,
) -> SymmetricDenseMatrix:
    """Heteroskedasticity-consistent sandwich for the transformed scale.

    The inner diagonal is w * residuals^2 with no small-sample correction.
    The centering vector stays the one from the fit: the substitution
    replaces the weight matrix inside the already-centered expansion, not
    the centering itself.
    """
    w = np.ascontiguousarray(w, dtype=np.float64)
    residuals = np.ascontiguousarray(residuals, dtype=np.float64)
    if w.shape != (M.n_rows,) or residuals.shape != (M.n_rows,):
        raise CenregError(
            f"weights/residuals must have length {M.n_rows}, "
            f"got {w.shape} and {residuals.shape}"
        )
    if gram_inverse.order != M.n_cols:
        raise CenregError(
            f"gram inverse has order {gram_inverse.order}, expected {M.n_cols}"
        )
    inner = assemble_centered_gram(M, w * residuals * residuals, plan, workers)
    g_inv = gram_inverse.to_full()
    return SymmetricDenseMatrix.from_full(g_inv @ inner.to_full() @ g_inv)
