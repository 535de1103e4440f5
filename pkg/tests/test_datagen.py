import numpy as np
import pytest
from conftest import dense_of_fast

from cenreg import CenregError, SimulationSpec, fit, simulate


class TestSpecValidation:
    def test_bad_fields(self):
        with pytest.raises(CenregError):
            SimulationSpec(n=0, p=2, density=0.5, seed=1)
        with pytest.raises(CenregError):
            SimulationSpec(n=5, p=0, density=0.5, seed=1)
        with pytest.raises(CenregError):
            SimulationSpec(n=5, p=1, density=0.5, seed=1, with_intercept=True)
        with pytest.raises(CenregError):
            SimulationSpec(n=5, p=2, density=0.0, seed=1)
        with pytest.raises(CenregError):
            SimulationSpec(n=5, p=2, density=1.5, seed=1)
        with pytest.raises(CenregError):
            SimulationSpec(n=5, p=2, density=0.5, seed=1, noise_sd=-1.0)


class TestSimulate:
    def test_full_density_exact_nnz(self):
        M, _, _, _ = simulate(SimulationSpec(n=4, p=2, density=1.0, seed=3))
        assert M.nnz == 8

    def test_near_zero_density(self):
        M, _, _, _ = simulate(
            SimulationSpec(n=100, p=10, density=1e-9, seed=3)
        )
        assert M.nnz == 0

    def test_density_concentration(self):
        # realized nnz is Binomial(n*p, density); check the pooled mean over
        # 50 seeds stays within 3 standard deviations
        n, p, density, seeds = 1000, 100, 0.1, 50
        total = 0
        for s in range(seeds):
            M, _, _, _ = simulate(SimulationSpec(n=n, p=p, density=density, seed=s))
            total += M.nnz
        cells = n * p * seeds
        sd = np.sqrt(cells * density * (1 - density))
        assert abs(total - cells * density) <= 3 * sd

    def test_intercept_column_is_ones_and_excluded(self):
        spec = SimulationSpec(
            n=200, p=5, density=0.05, seed=9, with_intercept=True
        )
        M, _, _, _ = simulate(spec)
        dense = dense_of_fast(M)
        assert np.array_equal(dense[:, 0], np.ones(200))
        # non-intercept nnz stays near (p-1)*n*density, far from p*n*density
        rand_nnz = M.nnz - 200
        assert rand_nnz < 2 * 200 * 4 * 0.05 + 40

    def test_reproducible_bitwise(self):
        spec = SimulationSpec(n=300, p=8, density=0.2, seed=1234,
                              with_intercept=True, noise_sd=0.5)
        M1, y1, w1, b1 = simulate(spec)
        M2, y2, w2, b2 = simulate(spec)
        assert M1.col_ptr.tobytes() == M2.col_ptr.tobytes()
        assert M1.row_idx.tobytes() == M2.row_idx.tobytes()
        assert M1.values.tobytes() == M2.values.tobytes()
        assert y1.tobytes() == y2.tobytes()
        assert w1.tobytes() == w2.tobytes()
        assert b1.tobytes() == b2.tobytes()

    def test_different_seeds_differ(self):
        a = simulate(SimulationSpec(n=50, p=4, density=0.5, seed=1))
        b = simulate(SimulationSpec(n=50, p=4, density=0.5, seed=2))
        assert a[0].values.tobytes() != b[0].values.tobytes()

    def test_noiseless_recovery(self):
        spec = SimulationSpec(n=400, p=6, density=0.3, seed=77,
                              with_intercept=True, noise_sd=0.0)
        M, y, w, beta_true = simulate(spec)
        res = fit(M, y, w, center=True, intercept_col=0)
        if res.rank == M.n_cols:
            err = np.abs(res.beta_original - beta_true).max()
            assert err <= 1e-8 * max(np.abs(beta_true).max(), 1.0)

    def test_weights_are_ones(self):
        _, _, w, _ = simulate(SimulationSpec(n=25, p=3, density=0.5, seed=5))
        assert np.array_equal(w, np.ones(25))
