import numpy as np
import pytest

from awgp.errors import DomainError, SimulationError
from awgp.fsde import (CostEstimate, CouplingControl, FsdeSpec, assumption_checker,
                       estimate_coupling_cost, euler_fsde, lamperti_inverse,
                       lamperti_inverse_interpolator, lamperti_transform, make_diffusion,
                       make_drift, simulate_coupled_noise)
from awgp.gauss_aw import continuous_aw_fbm
from awgp.kernels import (Brownian, IntensityMeasure, MolchanGolosov, RiemannLiouville,
                          covariance)
from awgp.quadrature import QuadratureGrid

BM = Brownian(T=1.0)
SYNC = CouplingControl.synchronous()


def _additive_spec(kernel, x0=0.0):
    drift, dn = make_drift("zero")
    diff, sn = make_diffusion({"name": "const", "c": 1.0})
    return FsdeSpec(drift=drift, diffusion=diff, x0=x0, noise_kernel=kernel, T=kernel.T,
                    drift_name=dn, diffusion_name=sn)


class TestCoupledNoise:
    def test_synchronous_identical(self):
        z1, z2 = simulate_coupled_noise(BM, BM, SYNC, 1.0, 64, 500, seed=42)
        assert np.array_equal(z1.paths, z2.paths)

    def test_seed_determinism(self):
        z1, _ = simulate_coupled_noise(BM, BM, SYNC, 1.0, 64, 500, seed=42)
        z1b, _ = simulate_coupled_noise(BM, BM, SYNC, 1.0, 64, 500, seed=42)
        assert np.array_equal(z1.paths, z1b.paths)
        z1c, _ = simulate_coupled_noise(BM, BM, SYNC, 1.0, 64, 500, seed=43)
        assert not np.array_equal(z1.paths, z1c.paths)

    def test_starts_at_zero(self):
        z1, z2 = simulate_coupled_noise(MolchanGolosov(T=1.0, h=0.7), BM, SYNC, 1.0, 32, 50, seed=1)
        assert np.all(z1.paths[:, 0] == 0.0)
        assert np.all(z2.paths[:, 0] == 0.0)

    def test_independent_control_uncorrelated(self):
        n = 10_000
        z1, z2 = simulate_coupled_noise(BM, BM, CouplingControl.independent(), 1.0, 64, n, seed=1)
        corr = np.corrcoef(z1.paths[:, -1], z2.paths[:, -1])[0, 1]
        assert abs(corr) < 3.0 / np.sqrt(n)

    def test_antithetic_control(self):
        z1, z2 = simulate_coupled_noise(BM, BM, CouplingControl.antithetic(), 1.0, 64, 200, seed=1)
        assert np.allclose(z1.paths, -z2.paths, atol=1e-12)

    def test_marginal_variance_matches_quadrature(self):
        n = 10_000
        mg = MolchanGolosov(T=1.0, h=0.75)
        z, _ = simulate_coupled_noise(mg, mg, SYNC, 1.0, 256, n, seed=3)
        var = z.paths[:, -1].var(ddof=1)
        target = covariance(mg, IntensityMeasure.lebesgue(), 1.0, 1.0, QuadratureGrid(n_t=1024))
        se = var * np.sqrt(2.0 / (n - 1))
        assert abs(var - target) < 3.0 * se

    def test_weak_convergence_at_grid_times(self):
        n = 100_000
        mg = MolchanGolosov(T=1.0, h=0.7)
        z, _ = simulate_coupled_noise(mg, mg, SYNC, 1.0, 128, n, seed=4)
        leb = IntensityMeasure.lebesgue()
        grid = QuadratureGrid(n_t=512)
        idx = [32, 64, 96, 128]
        times = z.times[idx]
        sample = np.cov(z.paths[:, idx].T, ddof=1)
        for i in range(4):
            for j in range(4):
                target = covariance(mg, leb, times[i], times[j], grid)
                se = np.sqrt((sample[i, i] * sample[j, j] + sample[i, j] ** 2) / (n - 1))
                assert abs(sample[i, j] - target) < 4.0 * se

    def test_control_validation(self):
        with pytest.raises(DomainError):
            CouplingControl.piecewise_constant([0.5, 1.5], T=1.0)

    def test_grid_too_coarse(self):
        with pytest.raises(DomainError):
            simulate_coupled_noise(BM, BM, SYNC, 1.0, 4, 10, seed=0)


class TestEuler:
    def test_additive_is_shifted_noise(self):
        z, _ = simulate_coupled_noise(BM, BM, SYNC, 1.0, 64, 200, seed=5)
        spec = _additive_spec(BM, x0=2.0)
        x = euler_fsde(spec, z)
        assert np.allclose(x.paths, 2.0 + z.paths, atol=1e-12, rtol=0.0)
        assert np.all(x.paths[:, 0] == 2.0)

    def test_deterministic_exponential(self):
        drift, _ = make_drift({"name": "linear", "a": -1.0})
        diff, _ = make_diffusion({"name": "const", "c": 0.0})
        spec = FsdeSpec(drift=drift, diffusion=diff, x0=1.0, noise_kernel=BM, T=1.0)
        z, _ = simulate_coupled_noise(BM, BM, SYNC, 1.0, 64, 3, seed=0)
        x = euler_fsde(spec, z)
        expect = (1.0 - 1.0 / 64) ** np.arange(65)
        assert np.abs(x.paths - expect[None, :]).max() < 1e-14

    def test_explosion_reports_path(self):
        drift, _ = make_drift({"name": "linear", "a": 1e4})
        diff, _ = make_diffusion({"name": "const", "c": 0.0})
        spec = FsdeSpec(drift=drift, diffusion=diff, x0=1.0, noise_kernel=BM, T=1.0)
        z, _ = simulate_coupled_noise(BM, BM, SYNC, 1.0, 8, 3, seed=0)
        with pytest.raises(SimulationError) as exc:
            euler_fsde(spec, z)
        assert exc.value.path_index == 0

    def test_horizon_check(self):
        z, _ = simulate_coupled_noise(BM, BM, SYNC, 1.0, 16, 3, seed=0)
        spec = _additive_spec(Brownian(T=2.0))
        with pytest.raises(DomainError):
            euler_fsde(spec, z)


class TestCouplingCost:
    def test_same_spec_synchronous_zero(self):
        spec = _additive_spec(BM, x0=1.0)
        est = estimate_coupling_cost(spec, spec, SYNC, 64, 500, seed=5)
        assert est.mean == 0.0
        assert est.std_error == 0.0

    def test_independent_brownian_pair(self):
        # E int_0^1 |B1 - B2|^2 dt = int 2t dt = 1
        spec = _additive_spec(BM)
        est = estimate_coupling_cost(spec, spec, CouplingControl.independent(), 256, 10_000, seed=6)
        assert abs(est.mean - 1.0) < 3.0 * est.std_error

    def test_matches_formula_for_fbm_pair(self):
        s1 = _additive_spec(MolchanGolosov(T=1.0, h=0.5))
        s2 = _additive_spec(MolchanGolosov(T=1.0, h=0.75))
        est = estimate_coupling_cost(s1, s2, SYNC, 256, 4_000, seed=7)
        target = continuous_aw_fbm(0.5, 0.75, 1.0).distance_squared
        assert abs(est.mean - target) <= 3.0 * est.std_error + 0.02 * target

    def test_bit_stable_across_workers(self):
        s1 = _additive_spec(MolchanGolosov(T=1.0, h=0.6))
        s2 = _additive_spec(MolchanGolosov(T=1.0, h=0.8))
        a = estimate_coupling_cost(s1, s2, CouplingControl.independent(), 64, 9000, seed=8,
                                   n_workers=1)
        b = estimate_coupling_cost(s1, s2, CouplingControl.independent(), 64, 9000, seed=8,
                                   n_workers=4)
        assert a.mean == b.mean
        assert a.std_error == b.std_error

    def test_estimate_serialization(self):
        est = CostEstimate(mean=0.5, std_error=0.01, n_paths=100, control={"kind": "synchronous"})
        assert CostEstimate.from_dict(est.to_dict()) == est


class TestLamperti:
    def test_unit_diffusion(self):
        diff, _ = make_diffusion({"name": "const", "c": 1.0})
        assert lamperti_transform(diff, 0.0, 2.5) == pytest.approx(2.5, abs=1e-12)

    def test_linear_diffusion_log(self):
        sigma = lambda x: np.asarray(x, dtype=float)
        assert lamperti_transform(sigma, 1.0, 3.0) == pytest.approx(np.log(3.0), rel=1e-10)

    def test_self_refinement(self):
        sigma = lambda x: 1.0 + np.asarray(x, dtype=float) ** 2 / (1.0 + np.asarray(x, dtype=float) ** 2)
        val = lamperti_transform(sigma, 0.0, 2.0)
        # fixed-rule oracle at two resolutions
        from awgp.quadrature import graded_gauss
        refs = []
        for n in (256, 2560):
            x, w = graded_gauss(0.0, 2.0, n, order=6, gamma=1.0)
            refs.append(float(np.sum(w / sigma(x))))
        assert abs(refs[0] - refs[1]) < 1e-9
        assert val == pytest.approx(refs[1], abs=1e-9)

    def test_inverse_roundtrip(self):
        sigma = lambda x: 2.0 + np.sin(np.asarray(x, dtype=float))
        for y in (-1.0, -0.2, 0.0, 0.4, 1.7):
            x = lamperti_inverse(sigma, 0.5, y)
            assert lamperti_transform(sigma, 0.5, x) == pytest.approx(y, abs=1e-10)

    def test_interpolating_inverse_matches_rootfinder(self):
        sigma = lambda x: 2.0 + np.sin(np.asarray(x, dtype=float))
        inv = lamperti_inverse_interpolator(sigma, 0.0, (-6.0, 6.0))
        ys = np.linspace(-1.5, 1.5, 11)
        exact = np.array([lamperti_inverse(sigma, 0.0, float(y)) for y in ys])
        assert np.abs(inv(ys) - exact).max() < 1e-6

    def test_nonpositive_sigma_rejected(self):
        sigma = lambda x: np.asarray(x, dtype=float)
        with pytest.raises(DomainError):
            lamperti_transform(sigma, -1.0, 1.0)

    def test_consistency_with_direct_simulation(self):
        # multiplicative SDE vs Lamperti-transformed additive SDE mapped back
        h, n_steps, n_paths = 0.75, 512, 10_000
        mg = MolchanGolosov(T=1.0, h=h)
        sigma, sig_name = make_diffusion({"name": "sin_offset", "c": 2.0})
        zero, _ = make_drift("zero")
        direct = FsdeSpec(drift=zero, diffusion=sigma, x0=0.0, noise_kernel=mg, T=1.0)
        transformed = FsdeSpec(drift=zero, diffusion=make_diffusion({"name": "const", "c": 1.0})[0],
                               x0=0.0, noise_kernel=mg, T=1.0)
        z, _ = simulate_coupled_noise(mg, mg, SYNC, 1.0, n_steps, n_paths, seed=9)
        x_direct = euler_fsde(direct, z).paths[:, -1]
        y = euler_fsde(transformed, z).paths[:, -1]
        inv = lamperti_inverse_interpolator(sigma, 0.0, (-12.0, 12.0), n=8193)
        x_mapped = inv(y)
        se = np.sqrt(x_direct.var(ddof=1) / n_paths + x_mapped.var(ddof=1) / n_paths)
        assert abs(x_direct.mean() - x_mapped.mean()) <= 3.0 * se


class TestAssumptionChecker:
    def test_tanh_drift_passes(self):
        spec = FsdeSpec(drift=np.tanh, diffusion=make_diffusion({"name": "const", "c": 1.0})[0],
                        x0=0.0, noise_kernel=RiemannLiouville(T=1.0, h=0.7), T=1.0)
        rep = assumption_checker(spec)
        assert rep.all_regularity_passed
        assert rep.drift_sigma_ratio_monotone
        assert rep.monotonicity_satisfied

    def test_mean_reversion_needs_kernel_branch(self):
        drift, _ = make_drift({"name": "linear", "a": -1.0})
        spec = FsdeSpec(drift=drift, diffusion=make_diffusion({"name": "const", "c": 1.0})[0],
                        x0=0.0, noise_kernel=RiemannLiouville(T=1.0, h=0.7), T=1.0)
        rep = assumption_checker(spec)
        assert not rep.drift_sigma_ratio_monotone
        assert rep.kernel_monotone
        assert rep.monotonicity_satisfied

    def test_degenerate_diffusion_fails(self):
        sigma = lambda x: np.asarray(x, dtype=float)
        spec = FsdeSpec(drift=make_drift("zero")[0], diffusion=sigma, x0=0.5,
                        noise_kernel=BM, T=1.0)
        rep = assumption_checker(spec, state_range=(0.0, 1.0))
        assert not rep.checks["sigma_positive"]["passed"]

    def test_report_serializes(self):
        spec = FsdeSpec(drift=np.tanh, diffusion=make_diffusion({"name": "const", "c": 1.0})[0],
                        x0=0.0, noise_kernel=BM, T=1.0)
        rep = assumption_checker(spec)
        out = rep.to_dict()
        assert {"checks", "monotonicity_satisfied", "all_regularity_passed"} <= set(out)


class TestRegistry:
    def test_unknown_names_rejected(self):
        with pytest.raises(DomainError):
            make_drift("cubic")
        with pytest.raises(DomainError):
            make_diffusion("bessel")

    def test_tabulated_fn(self):
        drift, _ = make_drift({"name": "tabulated", "x": [0.0, 1.0], "y": [0.0, 2.0]})
        assert drift(0.5) == pytest.approx(1.0)
