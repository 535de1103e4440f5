"""Solve the normal equations, back-transform, predict, and summarize.

``fit`` is the whole pipeline: standardization plan, sparse normal
equations, solve, back-transformation to the raw-data scale, in-sample
predictions, residual variance, and (optionally) a parameter covariance.
Any stage rejection is re-raised as PipelineError naming the stage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CenregError, PipelineError
from .gram import NormalEquations, build_normal_equations
from .moments import StandardizationPlan, compute_plan
from .sparse import SparseDesign, SymmetricDenseMatrix, apply_matvec

COVARIANCE_KINDS = ("none", "homoskedastic", "hc")


@dataclass(frozen=True)
class FitResult:
    beta_transformed: np.ndarray        # coefficients on the centered/scaled scale
    beta_original: np.ndarray           # coefficients valid for the raw design
    gram_inverse: SymmetricDenseMatrix  # (pseudo)inverse of the Gram
    k_hat_sq: float                     # residual variance estimate
    residuals: np.ndarray               # y - M @ beta_original
    dof: int                            # n - p
    rank: int                           # retained rank of the Gram
    covariance: SymmetricDenseMatrix | None  # Cov(beta_transformed) or None
    covariance_kind: str
    plan: StandardizationPlan


def solve_transformed(
    eqs: NormalEquations,
) -> tuple[np.ndarray, SymmetricDenseMatrix, int]:
    """beta = G^+ b with a definite factorization fast path.

    Tries a Cholesky factorization first; if the Gram is not numerically
    positive definite, falls back to an eigendecomposition pseudoinverse
    that drops eigenvalues at or below p * eps * max(diag G) and returns
    the minimum-norm solution.
    """
    if eqs.sum_w <= 0.0:
        raise CenregError("sum of weights must be positive to solve")
    g_full = eqs.gram.to_full()
    b = np.ascontiguousarray(eqs.rhs, dtype=np.float64)
    if not (np.all(np.isfinite(g_full)) and np.all(np.isfinite(b))):
        raise CenregError("normal equations contain non-finite entries")
    p = eqs.gram.order
    cutoff = p * np.finfo(np.float64).eps * max(float(eqs.gram.diagonal().max()), 0.0)
    try:
        lower = np.linalg.cholesky(g_full)
        # pivots at or below the pseudoinverse cutoff mean the factorization
        # only succeeded through rounding; defer to the eigenvalue path
        if float(np.min(np.diag(lower))) ** 2 <= cutoff:
            raise np.linalg.LinAlgError("numerically semidefinite")
        g_inv = np.linalg.solve(lower.T, np.linalg.solve(lower, np.eye(p)))
        beta = np.linalg.solve(lower.T, np.linalg.solve(lower, b))
        rank = p
    except np.linalg.LinAlgError:
        eigvals, eigvecs = np.linalg.eigh(g_full)
        keep = eigvals > cutoff
        rank = int(np.count_nonzero(keep))
        vk = eigvecs[:, keep]
        g_inv = (vk / eigvals[keep]) @ vk.T
        beta = g_inv @ b
    return beta, SymmetricDenseMatrix.from_full(g_inv), rank


def to_original(
    beta_transformed: np.ndarray, plan: StandardizationPlan
) -> np.ndarray:
    """Coefficients usable directly on the raw (uncentered, unscaled) design.

    Scales each coefficient, then folds the full centering offset into the
    intercept position.  A centered fit with no designated intercept has no
    place to absorb the offset, so it is rejected.
    """
    beta_transformed = np.ascontiguousarray(beta_transformed, dtype=np.float64)
    if beta_transformed.shape != (plan.n_cols,):
        raise CenregError(
            f"coefficient vector has length {beta_transformed.shape}, "
            f"expected {plan.n_cols}"
        )
    out = plan.scale * beta_transformed
    if plan.intercept_col is not None:
        offset = float(plan.means @ out)
        out[plan.intercept_col] -= offset
    elif plan.center_enabled:
        raise CenregError(
            "centered fit has no intercept column to absorb the offsets; "
            "designate one with intercept_col to back-transform"
        )
    return out


def predict(M_new: SparseDesign, beta_original: np.ndarray) -> np.ndarray:
    """yhat = M_new @ beta_original; inputs need no preprocessing."""
    beta_original = np.ascontiguousarray(beta_original, dtype=np.float64)
    if beta_original.shape != (M_new.n_cols,):
        raise CenregError(
            f"model has {beta_original.shape[0]} coefficients but the matrix "
            f"has {M_new.n_cols} columns"
        )
    return apply_matvec(M_new, beta_original)


def residual_variance(
    y: np.ndarray,
    y_hat: np.ndarray,
    w: np.ndarray,
    n: int,
    p: int,
    weighted: bool = True,
) -> float:
    """Residual variance: sum of (weighted) squared residuals over n - p.

    With unit weights both forms reduce to the plain residual variance.
    ``weighted=False`` gives the literal unweighted numerator.
    """
    if n <= p:
        raise CenregError(
            f"residual variance needs n > p, got n={n}, p={p}"
        )
    resid = np.asarray(y, dtype=np.float64) - np.asarray(y_hat, dtype=np.float64)
    rss = float(np.sum(w * resid * resid)) if weighted else float(
        np.sum(resid * resid)
    )
    return rss / (n - p)


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except CenregError as err:
        raise PipelineError(name, str(err)) from err


def fit(
    M: SparseDesign,
    y: np.ndarray,
    w: np.ndarray | None = None,
    *,
    center: bool = False,
    scale: bool = False,
    intercept_col: int | None = None,
    covariance: str = "none",
    weighted_variance: bool = True,
    workers: int | None = None,
) -> FitResult:
    """Weighted least squares on the implicitly centered/scaled design.

    Parameters
    ----------
    M : SparseDesign
        n x p design matrix, kept sparse throughout.
    y : array, shape (n,)
        Response.
    w : array, shape (n,), optional
        Nonnegative observation weights; defaults to all ones.
    center, scale : bool
        Remove weighted column means / divide by weighted column standard
        deviations (implicitly; M is never modified).
    intercept_col : int, optional
        Column exempt from centering and scaling, required to
        back-transform a centered fit.
    covariance : {"none", "homoskedastic", "hc"}
        Parameter covariance for the transformed coefficients.
    weighted_variance : bool
        Weight the residual sum of squares in the variance estimate
        (identical to the unweighted form when w is all ones).
    workers : int, optional
        Worker threads for the Gram product; defaults to the
        CENREG_GRAM_WORKERS environment variable, else all cores.

    Returns
    -------
    FitResult
        Coefficients on both scales, residuals, residual variance, Gram
        inverse, rank, and the requested covariance.
    """
    if covariance not in COVARIANCE_KINDS:
        raise CenregError(
            f"covariance must be one of {COVARIANCE_KINDS}, got {covariance!r}"
        )
    y = np.ascontiguousarray(y, dtype=np.float64)
    w = np.ones(M.n_rows) if w is None else np.ascontiguousarray(
        w, dtype=np.float64
    )

    plan = _stage("compute_plan", compute_plan, M, w, center, scale, intercept_col)
    eqs = _stage(
        "build_normal_equations", build_normal_equations, M, y, w, plan,
        workers=workers,
    )
    beta_t, g_inv, rank = _stage("solve_transformed", solve_transformed, eqs)
    beta_o = _stage("to_original", to_original, beta_t, plan)
    y_hat = _stage("predict", predict, M, beta_o)
    k_sq = _stage(
        "residual_variance", residual_variance, y, y_hat, w,
        M.n_rows, M.n_cols, weighted=weighted_variance,
    )
    residuals = y - y_hat
    cov = None
    if covariance == "homoskedastic":
        from .covariance import cov_homoskedastic

        cov = _stage("covariance", cov_homoskedastic, g_inv, k_sq)
    elif covariance == "hc":
        from .covariance import cov_hc

        cov = _stage(
            "covariance", cov_hc, M, w, residuals, plan, g_inv, workers=workers
        )
    return FitResult(
        beta_transformed=beta_t,
        beta_original=beta_o,
        gram_inverse=g_inv,
        k_hat_sq=k_sq,
        residuals=residuals,
        dof=M.n_rows - M.n_cols,
        rank=rank,
        covariance=cov,
        covariance_kind=covariance,
        plan=plan,
    )
