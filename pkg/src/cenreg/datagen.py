"""Deterministic synthetic sparse regression instances.

Generator contract
------------------
All randomness comes from one Philox4x32-10 counter-based bit generator
(numpy's ``np.random.Philox``) seeded through ``SeedSequence(seed)`` and
consumed via ``np.random.Generator``.  The draw order is part of the
contract:

1. for each column j = 0..p-1 in order, skipping the intercept column:
   a. n uniforms in [0, 1); cell (i, j) is nonzero iff u_i < density;
   b. one standard normal per nonzero, in ascending row order;
2. p standard normals for the true coefficients;
3. n standard normals for the noise, drawn only if noise_sd > 0.

The same seed therefore reproduces every output bitwise.  The intercept
column (column 0 when enabled) is all ones and excluded from the density
accounting, so nnz stays an honest measure of the random design.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CenregError
from .sparse import SparseDesign, apply_matvec


@dataclass(frozen=True)
class SimulationSpec:
    n: int
    p: int
    density: float
    seed: int
    with_intercept: bool = False
    noise_sd: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise CenregError(f"n must be >= 1, got {self.n}")
        min_p = 2 if self.with_intercept else 1
        if self.p < min_p:
            raise CenregError(
                f"p must be >= {min_p} "
                f"({'with' if self.with_intercept else 'without'} intercept), "
                f"got {self.p}"
            )
        if not (0.0 < self.density <= 1.0):
            raise CenregError(f"density must be in (0, 1], got {self.density}")
        if self.noise_sd < 0:
            raise CenregError(f"noise_sd must be >= 0, got {self.noise_sd}")


def simulate(
    spec: SimulationSpec,
) -> tuple[SparseDesign, np.ndarray, np.ndarray, np.ndarray]:
    """Return (design, response, weights, true coefficients) for the spec.

    Each non-intercept cell is nonzero independently with probability
    ``density`` with a standard normal value; y = M @ beta + noise;
    weights are all ones.
    """
    rng = np.random.Generator(np.random.Philox(spec.seed))
    n, p = spec.n, spec.p
    col_rows: list[np.ndarray] = []
    col_vals: list[np.ndarray] = []
    col_ptr = np.zeros(p + 1, dtype=np.int64)
    for j in range(p):
        if spec.with_intercept and j == 0:
            rows = np.arange(n, dtype=np.int32)
            vals = np.ones(n)
        else:
            u = rng.random(n)
            rows = np.flatnonzero(u < spec.density).astype(np.int32)
            vals = rng.standard_normal(rows.size)
        col_rows.append(rows)
        col_vals.append(vals)
        col_ptr[j + 1] = col_ptr[j] + rows.size
    M = SparseDesign.from_csc(
        n, p, col_ptr,
        np.concatenate(col_rows) if col_rows else np.empty(0, np.int32),
        np.concatenate(col_vals) if col_vals else np.empty(0),
        validate=False,
    )
    beta_true = rng.standard_normal(p)
    y = apply_matvec(M, beta_true)
    if spec.noise_sd > 0:
        y = y + spec.noise_sd * rng.standard_normal(n)
    w = np.ones(n)
    return M, y, w, beta_true
