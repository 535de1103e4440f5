"""Weighted column moments and the standardization plan applied to a design.

The plan records what "centered and scaled" means for one fit: weighted
column means, weighted standard deviations, the per-column scale factors,
and which column (if any) is an intercept exempt from both transforms.
Downstream code never special-cases the intercept; the exemption is baked
into the plan (mean 0, scale 1 at that column).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CenregError
from .sparse import SparseDesign, weighted_column_sums


@dataclass(frozen=True)
class StandardizationPlan:
    means: np.ndarray          # weighted column means (0 where not centered)
    stddevs: np.ndarray        # weighted column standard deviations, as computed
    scale: np.ndarray          # per-column scale factor (1/stddev where scaled)
    center_enabled: bool
    scale_enabled: bool
    intercept_col: int | None  # column exempt from centering and scaling

    @property
    def n_cols(self) -> int:
        return self.means.shape[0]

    @property
    def mu_scaled(self) -> np.ndarray:
        """Elementwise means * scale, the vector both rank-one terms use."""
        return self.means * self.scale

    def is_identity(self) -> bool:
        return not self.center_enabled and not self.scale_enabled


def weight_aggregates(
    w: np.ndarray, y: np.ndarray
) -> tuple[float, float, np.ndarray]:
    """Return (sum of weights, sum of weighted response, elementwise w*y)."""
    w = np.ascontiguousarray(w, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if w.shape != y.shape or w.ndim != 1:
        raise CenregError(
            f"weights and response must be 1-d with equal length, "
            f"got {w.shape} and {y.shape}"
        )
    wy = w * y
    return float(np.sum(w)), float(np.sum(wy)), wy


def compute_plan(
    M: SparseDesign,
    w: np.ndarray,
    center: bool,
    scale: bool,
    intercept_col: int | None = None,
) -> StandardizationPlan:
    """Weighted means and standard deviations from stored nonzeros only.

    Variances use the one-pass moment form E[x^2] - E[x]^2 with the sum of
    weights as denominator, clamped at zero.  Requesting scaling when a
    non-exempt column has zero weighted variance is an error: silently
    skipping the column would change what its coefficient means.
    """
    w = np.ascontiguousarray(w, dtype=np.float64)
    if w.shape != (M.n_rows,):
        raise CenregError(
            f"weights have length {w.shape}, expected {M.n_rows}"
        )
    if np.any(w < 0):
        k = int(np.flatnonzero(w < 0)[0])
        raise CenregError(f"weights must be nonnegative, got w[{k}] = {w[k]}")
    sum_w = float(np.sum(w))
    if sum_w <= 0.0:
        raise CenregError("sum of weights must be positive")
    if intercept_col is not None and not (0 <= intercept_col < M.n_cols):
        raise CenregError(
            f"intercept column {intercept_col} out of range for p={M.n_cols}"
        )

    p = M.n_cols
    s1 = weighted_column_sums(M, w)
    sq_terms = M.values * M.values * w[M.row_idx]
    s2 = np.bincount(M._col_ids, weights=sq_terms, minlength=p)
    mu = s1 / sum_w
    var = np.maximum(s2 / sum_w - mu * mu, 0.0)
    sigma = np.sqrt(var)

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
        means=means,
        stddevs=sigma,
        scale=scale_vec,
        center_enabled=center,
        scale_enabled=scale,
        intercept_col=intercept_col,
    )
