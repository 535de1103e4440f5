"""Naive dense reference solver: materialize, then textbook least squares.

This is the baseline the sparse path is benchmarked against, and the
correctness oracle it is tested against.  Everything here goes through a
dense n x p array and plain dense products: moments are computed two-pass
from explicit deviations, the normal equations are dense, and the solve is
always an eigendecomposition pseudoinverse.  It shares no kernel code with
the sparse path; only the result contract (FitResult, stage names, and the
eigenvalue cutoff rule) is common.
"""

from __future__ import annotations

import numpy as np

from .errors import CenregError, PipelineError
from .moments import StandardizationPlan
from .solver import COVARIANCE_KINDS, FitResult
from .sparse import SparseDesign, SymmetricDenseMatrix


def materialize_centered(
    M: SparseDesign, plan: StandardizationPlan
) -> np.ndarray:
    """The dense centered/scaled matrix (M[i,j] - mu[j]) * scale[j].

    Allocates the full n x p array; that allocation is the cost the sparse
    path exists to avoid.
    """
    if plan.n_cols != M.n_cols:
        raise CenregError(
            f"plan has {plan.n_cols} columns, matrix has {M.n_cols}"
        )
    dense = M.to_dense()
    return (dense - plan.means) * plan.scale


def _dense_plan(
    dense: np.ndarray,
    w: np.ndarray,
    center: bool,
    scale: bool,
    intercept_col: int | None,
) -> StandardizationPlan:
    # Two-pass moments from explicit deviations, deliberately unlike the
    # sparse one-pass path.
    n, p = dense.shape
    if np.any(w < 0):
        k = int(np.flatnonzero(w < 0)[0])
        raise CenregError(f"weights must be nonnegative, got w[{k}] = {w[k]}")
    sum_w = float(np.sum(w))
    if sum_w <= 0.0:
        raise CenregError("sum of weights must be positive")
    if intercept_col is not None and not (0 <= intercept_col < p):
        raise CenregError(
            f"intercept column {intercept_col} out of range for p={p}"
        )
    mu = (w @ dense) / sum_w
    dev = dense - mu
    sigma = np.sqrt((w @ (dev * dev)) / sum_w)
    means = mu if center else np.zeros(p)
    scale_vec = np.ones(p)
    if scale:
        exempt = np.zeros(p, dtype=bool)
        if intercept_col is not None:
            exempt[intercept_col] = True
        degenerate = (sigma == 0.0) & ~exempt
        if np.any(degenerate):
            k = int(np.flatnonzero(degenerate)[0])
            raise CenregError(
                f"cannot scale: column {k} has zero weighted variance"
            )
        scale_vec = 1.0 / np.where(exempt, 1.0, sigma)
    if intercept_col is not None:
        means = means.copy()
        means[intercept_col] = 0.0
        scale_vec[intercept_col] = 1.0
    return StandardizationPlan(
        means=means, stddevs=sigma, scale=scale_vec,
        center_enabled=center, scale_enabled=scale,
        intercept_col=intercept_col,
    )


def _pinv_solve(
    g: np.ndarray, b: np.ndarray
) -> tuple[np.ndarray, np.ndarray, int]:
    # Same cutoff contract as the sparse path so both agree on rank.
    p = g.shape[0]
    eigvals, eigvecs = np.linalg.eigh(g)
    cutoff = p * np.finfo(np.float64).eps * max(float(np.diag(g).max()), 0.0)
    keep = eigvals > cutoff
    vk = eigvecs[:, keep]
    g_inv = (vk / eigvals[keep]) @ vk.T
    return g_inv @ b, g_inv, int(np.count_nonzero(keep))


def naive_fit(
    M: SparseDesign,
    y: np.ndarray,
    w: np.ndarray | None = None,
    *,
    center: bool = False,
    scale: bool = False,
    intercept_col: int | None = None,
    covariance: str = "none",
    weighted_variance: bool = True,
) -> FitResult:
    """Reference fit through the materialized dense centered design.

    Result contract and stage-named rejections match ``solver.fit``; the
    computation path is entirely dense.
    """
    if covariance not in COVARIANCE_KINDS:
        raise CenregError(
            f"covariance must be one of {COVARIANCE_KINDS}, got {covariance!r}"
        )
    y = np.ascontiguousarray(y, dtype=np.float64)
    w = np.ones(M.n_rows) if w is None else np.ascontiguousarray(
        w, dtype=np.float64
    )
    if y.shape != (M.n_rows,) or w.shape != (M.n_rows,):
        raise CenregError(
            f"response/weights must have length {M.n_rows}, "
            f"got {y.shape} and {w.shape}"
        )
    dense = M.to_dense()
    n, p = dense.shape

    try:
        plan = _dense_plan(dense, w, center, scale, intercept_col)
    except CenregError as err:
        raise PipelineError("compute_plan", str(err)) from err

    if not (
        np.all(np.isfinite(dense))
        and np.all(np.isfinite(y))
        and np.all(np.isfinite(w))
    ):
        raise PipelineError(
            "build_normal_equations", "inputs contain non-finite values"
        )
    centered = (dense - plan.means) * plan.scale
    g = centered.T @ (w[:, None] * centered)
    b = centered.T @ (w * y)

    beta_t, g_inv, rank = _pinv_solve(g, b)

    beta_o = plan.scale * beta_t
    if plan.intercept_col is not None:
        beta_o = beta_o.copy()
        beta_o[plan.intercept_col] -= float(plan.means @ (plan.scale * beta_t))
    elif plan.center_enabled:
        raise PipelineError(
            "to_original",
            "centered fit has no intercept column to absorb the offsets; "
            "designate one with intercept_col to back-transform",
        )

    y_hat = dense @ beta_o
    if n <= p:
        raise PipelineError(
            "residual_variance", f"residual variance needs n > p, got n={n}, p={p}"
        )
    residuals = y - y_hat
    rss = float(np.sum(w * residuals * residuals)) if weighted_variance else float(
        np.sum(residuals * residuals)
    )
    k_sq = rss / (n - p)

    cov = None
    if covariance == "homoskedastic":
        cov = SymmetricDenseMatrix.from_full(g_inv * k_sq)
    elif covariance == "hc":
        inner = centered.T @ ((w * residuals * residuals)[:, None] * centered)
        cov = SymmetricDenseMatrix.from_full(g_inv @ inner @ g_inv)

    return FitResult(
        beta_transformed=beta_t,
        beta_original=beta_o,
        gram_inverse=SymmetricDenseMatrix.from_full(g_inv),
        k_hat_sq=k_sq,
        residuals=residuals,
        dof=n - p,
        rank=rank,
        covariance=cov,
        covariance_kind=covariance,
        plan=plan,
    )
