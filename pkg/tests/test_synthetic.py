import math
import warnings

import numpy as np
import pytest
from scipy.special import expit

from rieszdre.errors import DataError, DegenerateDesign, ResampledDesignWarning, UsageError
from rieszdre.synthetic import (
    DESIGNS,
    GaussianShiftDesign,
    GaussianShiftOracle,
    Oracle,
    SyntheticDesign,
    generate,
    generate_two_sample,
    get_design,
    oracle_from_dict,
)

GRID_X = np.random.default_rng(2024).standard_normal((1000, 2)) * 2.0


class TestOracle:
    @pytest.mark.parametrize("name", sorted(DESIGNS))
    def test_pointwise_identities(self, name):
        design = DESIGNS[name]
        oracle = Oracle(design)
        x = np.random.default_rng(1).standard_normal((1000, design.d)) * 2.0
        e = oracle.e0(x)
        np.testing.assert_allclose(oracle.r1(x) * e, 1.0, rtol=0, atol=1e-12)
        np.testing.assert_allclose(oracle.r0(x) * (1 - e), 1.0, rtol=0, atol=1e-12)
        for d in (0.0, 1.0):
            expect = d * oracle.r1(x) - (1 - d) * oracle.r0(x)
            np.testing.assert_allclose(oracle.alpha(np.full(1000, d), x), expect, rtol=0, atol=1e-12)

    def test_overlap_bounds(self):
        oracle = Oracle(DESIGNS["strong-confounding"])
        x = 10 * np.random.default_rng(0).standard_normal((1000, 3))
        eps = oracle.design.eps
        assert np.all(oracle.e0(x) >= eps) and np.all(oracle.e0(x) <= 1 - eps)
        assert np.all(oracle.alpha(1, x) > 1) and np.all(oracle.alpha(0, x) < -1)

    def test_zero_propensity_coefficients(self):
        oracle = Oracle(SyntheticDesign(beta=(0.0, 0.0), b=0.0))
        np.testing.assert_array_equal(oracle.e0(GRID_X), 0.5)
        np.testing.assert_array_equal(oracle.alpha(1, GRID_X), 2.0)
        np.testing.assert_array_equal(oracle.alpha(0, GRID_X), -2.0)

    def test_homogeneous_effect(self):
        design = SyntheticDesign(tau_base=1.0, gamma1=(0.0, 0.0), gamma0=(0.3, -0.2))
        oracle = Oracle(design)
        assert oracle.tau0 == 1.0
        np.testing.assert_allclose(oracle.mu(1, GRID_X) - oracle.mu(0, GRID_X), 1.0, rtol=0, atol=1e-14)

    def test_moment_identity(self):
        # E[alpha0(D,X) a(D,X)] = E[a(1,X) - a(0,X)] for arbitrary test functions a
        data, oracle = generate(DESIGNS["default-confounded"], 100_000, seed=3)
        rng = np.random.default_rng(4)
        for _ in range(5):
            c1, c0 = rng.standard_normal(3), rng.standard_normal(3)
            a = lambda d, x: np.where(d == 1, c1[0] + x @ c1[1:], c0[0] + x @ c0[1:])
            ones, zeros = np.ones(data.n), np.zeros(data.n)
            diff = oracle.alpha(data.d_treat, data.x) * a(data.d_treat, data.x) - (a(ones, data.x) - a(zeros, data.x))
            assert abs(diff.mean()) <= 4 * diff.std(ddof=1) / math.sqrt(data.n)

    def test_dict_round_trip(self):
        oracle = Oracle(DESIGNS["default-confounded"])
        back = oracle_from_dict(oracle.to_dict())
        np.testing.assert_array_equal(back.e0(GRID_X), oracle.e0(GRID_X))
        assert oracle.to_dict()["tau0"] == 1.0


class TestGenerate:
    def test_deterministic(self):
        a, _ = generate(DESIGNS["default-confounded"], 50, seed=7)
        b, _ = generate(DESIGNS["default-confounded"], 50, seed=7)
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.y, b.y)

    def test_naive_difference_is_confounded(self):
        design = DESIGNS["default-confounded"]
        naive = []
        for rep in range(200):
            data, _ = generate(design, 500, seed=rep)
            d = data.d_treat == 1
            naive.append(data.y[d].mean() - data.y[~d].mean())
        naive = np.asarray(naive)
        se = naive.std(ddof=1) / math.sqrt(naive.size)
        assert abs(naive.mean() - design.tau0) > 3 * se

    def test_propensity_calibration(self):
        data, oracle = generate(DESIGNS["default-confounded"], 50_000, seed=11)
        e = oracle.e0(data.x)
        edges = np.quantile(e, np.linspace(0, 1, 11))
        bins = np.clip(np.searchsorted(edges, e, side="right") - 1, 0, 9)
        for k in range(10):
            m = bins == k
            freq, p = data.d_treat[m].mean(), e[m].mean()
            assert abs(freq - p) <= 4 * math.sqrt(p * (1 - p) / m.sum())

    def test_empty_arm_is_resampled_with_warning(self):
        # e0 pinned at eps makes an all-control draw likely at n=2
        design = SyntheticDesign(d=1, beta=(0.0,), b=-50.0, eps=0.01, gamma0=(0.0,), gamma1=(0.0,))
        with pytest.warns(ResampledDesignWarning):
            data, _ = generate(design, 2, seed=0)
        assert 0 < data.d_treat.sum() < 2

    def test_small_n_rejected(self):
        with pytest.raises(DataError):
            generate(DESIGNS["randomized"], 1)

    @pytest.mark.parametrize("eps", [0.0, 0.5, -0.1, 0.7])
    def test_degenerate_eps(self, eps):
        with pytest.raises(DegenerateDesign):
            SyntheticDesign(eps=eps)

    def test_length_mismatch(self):
        with pytest.raises(DegenerateDesign):
            SyntheticDesign(d=3)

    def test_unknown_design(self):
        with pytest.raises(UsageError):
            get_design("nope")


class TestTwoSample:
    def test_identical_distributions(self):
        _, oracle = generate_two_sample(GaussianShiftDesign((0.0,)), 5, 5)
        np.testing.assert_array_equal(oracle(GRID_X[:, :1]), 1.0)

    def test_one_dimensional_ratio(self):
        _, oracle = generate_two_sample(GaussianShiftDesign((0.5,)), 5, 5)
        x = np.linspace(-4, 4, 1000)
        np.testing.assert_allclose(oracle(x[:, None]), np.exp(0.5 * x - 0.125), rtol=1e-14)

    def test_ratio_matches_density_quotient(self):
        design = GaussianShiftDesign((0.7, -0.4), sd=1.3)
        oracle = GaussianShiftOracle(design)
        from scipy.stats import multivariate_normal

        cov = 1.69 * np.eye(2)
        expect = multivariate_normal([0.7, -0.4], cov).pdf(GRID_X) / multivariate_normal([0, 0], cov).pdf(GRID_X)
        np.testing.assert_allclose(oracle(GRID_X), expect, rtol=1e-10)
        np.testing.assert_allclose(oracle.as_ratio_model()(GRID_X), oracle(GRID_X), rtol=1e-14)

    def test_kl(self):
        mu = np.full(8, 2.0)
        assert GaussianShiftOracle(GaussianShiftDesign(tuple(mu))).kl == pytest.approx(16.0)

    def test_sample_moments(self):
        data, _ = generate_two_sample(GaussianShiftDesign((1.0,)), 20_000, 20_000, seed=5)
        assert abs(data.de.mean()) <= 4 / math.sqrt(20_000)
        assert abs(data.nu.mean() - 1.0) <= 4 / math.sqrt(20_000)

    def test_constant_l2_formula(self):
        oracle = GaussianShiftOracle(GaussianShiftDesign((0.5,)))
        assert oracle.l2_sq_of_constant(1.0) == pytest.approx(math.exp(0.25) - 1.0)

    def test_bad_sizes(self):
        with pytest.raises(DataError):
            generate_two_sample(GaussianShiftDesign(), 0, 3)
        with pytest.raises(DegenerateDesign):
            GaussianShiftDesign(sd=0.0)


def test_logistic_propensity_reference():
    oracle = Oracle(SyntheticDesign(d=1, beta=(1.0,), b=0.0, eps=1e-9, gamma0=(0.0,), gamma1=(0.0,)))
    x = np.linspace(-3, 3, 50)[:, None]
    np.testing.assert_allclose(oracle.e0(x), expit(x[:, 0]), rtol=1e-14)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        generate(oracle.design, 10, seed=0)
