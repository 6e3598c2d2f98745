import json

import numpy as np
import pytest

from awgp.errors import DomainError
from awgp.gauss_aw import cholesky_causal_factor
from awgp.kernels import IntensityMeasure, MolchanGolosov, covariance, fbm_spec
from awgp.oracles import (OracleVerdict, bruteforce_discrete_cross_term, cholesky_marginal_paths,
                          get_golden, load_goldens, mc_formula_check,
                          pointwise_optimal_correlation, psd_feasibility_sampler,
                          quadrature_crosscheck, regenerate_goldens)
from awgp.quadrature import QuadratureGrid


class TestBruteforce:
    def test_identity(self):
        assert bruteforce_discrete_cross_term(np.eye(4), np.eye(4)) == pytest.approx(4.0)

    def test_separable_signs(self):
        k1 = np.diag([2.0, 3.0])
        k2 = np.diag([1.0, -1.0])
        # diagonal of K1^T K2 is (2, -3); the optimum flips the second sign
        assert bruteforce_discrete_cross_term(k1, k2) == pytest.approx(5.0)

    def test_matches_abs_diagonal(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            a = rng.normal(size=(8, 8))
            s1 = a @ a.T + 0.5 * np.eye(8)
            b = rng.normal(size=(8, 8))
            s2 = b @ b.T + 0.5 * np.eye(8)
            k1 = cholesky_causal_factor(s1).entries
            k2 = cholesky_causal_factor(s2).entries
            expect = np.abs(np.sum(k1 * k2, axis=0)).sum()
            assert bruteforce_discrete_cross_term(k1, k2) == pytest.approx(expect, abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            bruteforce_discrete_cross_term(np.eye(2), np.eye(3))


class TestMcFormulaCheck:
    def test_identical_specs(self):
        v = mc_formula_check(fbm_spec(0.6), fbm_spec(0.6), QuadratureGrid(n_s=96, n_t=96),
                             n_steps=64, n_paths=500, seed=1)
        assert v.passed
        assert v.target == pytest.approx(0.0, abs=1e-10)
        assert v.oracle == pytest.approx(0.0, abs=1e-10)

    def test_sign_control_all_positive_for_fbm(self):
        times = np.linspace(0.0, 1.0, 17)[:-1]
        signs = pointwise_optimal_correlation(fbm_spec(0.5), fbm_spec(0.75), times)
        assert np.all(signs == 1.0)

    def test_singular_measure_rejected(self):
        from awgp.kernels import cantor_martingale_spec
        with pytest.raises(DomainError):
            mc_formula_check(fbm_spec(0.5), cantor_martingale_spec(), n_paths=10)


class TestPsdSampler:
    def test_samples_feasible(self):
        rng = np.random.default_rng(1)
        a_ = rng.normal(size=(3, 3)); a = a_ @ a_.T
        b_ = rng.normal(size=(4, 4)); b = b_ @ b_.T
        count = 0
        for gamma in psd_feasibility_sampler(a, b, 200, seed=5):
            block = np.block([[a, gamma], [gamma.T, b]])
            assert np.linalg.eigvalsh(block).min() >= -1e-10
            count += 1
        assert count == 200

    def test_non_psd_rejected(self):
        with pytest.raises(DomainError):
            list(psd_feasibility_sampler(np.array([[1.0, 0.0], [0.0, -1.0]]), np.eye(2), 1))


class TestQuadratureCrosscheck:
    def test_smooth(self):
        v = quadrature_crosscheck(lambda t: t, 0.0, 1.0,
                                  {"scheme": "graded_midpoint", "n": 256, "gamma": 1.0},
                                  {"scheme": "graded_gauss", "n": 256, "gamma": 1.0})
        assert v.passed
        assert v.target == pytest.approx(0.5, rel=1e-6)

    def test_power_kink(self):
        h = 0.75
        v = quadrature_crosscheck(lambda s: (1.0 - s) ** (h - 0.5), 0.0, 1.0,
                                  {"scheme": "graded_midpoint", "n": 512, "gamma": 3.0,
                                   "cluster": "right"},
                                  {"scheme": "graded_gauss", "n": 512, "gamma": 3.0,
                                   "cluster": "right"}, singular=True)
        assert v.passed
        assert v.target == pytest.approx(1.0 / (h + 0.5), rel=1e-4)

    def test_gauss_jacobi_scheme(self):
        # full integrand s^0.25 with the endpoint exponent declared to the rule
        v = quadrature_crosscheck(lambda s: s ** 0.25, 0.0, 1.0,
                                  {"scheme": "gauss_jacobi", "n": 32, "beta": 0.25},
                                  {"scheme": "graded_midpoint", "n": 2048, "gamma": 3.0},
                                  rtol=1e-4)
        assert v.passed
        assert v.target == pytest.approx(0.8, rel=1e-10)

    def test_verdict_compare_modes(self):
        v = OracleVerdict.compare(1.0, 1.001, 0.01, mode="rel")
        assert v.passed
        v = OracleVerdict.compare(1.0, 1.1, 0.01, mode="abs")
        assert not v.passed


class TestCholeskyMarginals:
    def test_marginal_law_crosscheck(self):
        # exact-Cholesky generator agrees with the increment generator in law
        mg = MolchanGolosov(T=1.0, h=0.7)
        leb = IntensityMeasure.lebesgue()
        times = np.array([0.25, 0.5, 0.75, 1.0])
        n = 20_000
        paths = cholesky_marginal_paths(mg, leb, times, n, seed=11)
        grid = QuadratureGrid(n_t=512)
        for i, t in enumerate(times):
            target = covariance(mg, leb, float(t), float(t), grid)
            var = paths[:, i].var(ddof=1)
            se = var * np.sqrt(2.0 / (n - 1))
            assert abs(var - target) < 4.0 * se


class TestGoldenRegistry:
    def test_registry_complete(self):
        reg = load_goldens()
        for name, entry in reg.items():
            assert {"value", "oracle", "config", "derived_at"} <= set(entry), name

    def test_missing_entry_is_hard_failure(self):
        with pytest.raises(KeyError):
            get_golden("no_such_golden")

    def test_regeneration_reproduces_registry(self, tmp_path):
        # every oracle is deterministic, so a fresh run must reproduce the
        # shipped values (timestamps aside)
        out = tmp_path / "goldens.json"
        fresh = regenerate_goldens(path=out)
        shipped = load_goldens()
        assert set(fresh) == set(shipped)
        for name in shipped:
            a, b = fresh[name]["value"], shipped[name]["value"]
            if isinstance(a, str):
                assert a == b
            else:
                assert a == pytest.approx(b, rel=1e-12)

    def test_fou_convention_recorded(self):
        assert get_golden("fou_sign_convention") == "mild"
