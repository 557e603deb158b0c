import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rieszdre.errors import DomainError, NonConvergenceWarning, UsageError
from rieszdre.optim import OptimizerSettings, gradient_descent


def quadratic(a, b):
    def fun(x):
        return 0.5 * x @ a @ x - b @ x, a @ x - b

    return fun


class TestGradientDescent:
    def test_quadratic_minimum(self, rng):
        m = rng.standard_normal((4, 4))
        a = m @ m.T + np.eye(4)
        b = rng.standard_normal(4)
        res = gradient_descent(quadratic(a, b), np.zeros(4), OptimizerSettings(grad_tol=1e-10))
        assert res.converged
        np.testing.assert_allclose(res.theta, np.linalg.solve(a, b), atol=1e-8)

    @pytest.mark.filterwarnings("ignore::rieszdre.errors.NonConvergenceWarning")
    @given(st.integers(0, 10_000), st.booleans())
    @settings(max_examples=25, deadline=None)
    def test_trace_nonincreasing(self, seed, bb):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((5, 5))
        a = m @ m.T + 0.01 * np.eye(5)
        res = gradient_descent(
            quadratic(a, rng.standard_normal(5)),
            rng.standard_normal(5),
            OptimizerSettings(max_iters=200, barzilai_borwein=bb),
        )
        assert np.all(np.diff(res.trace) <= 0)
        if res.converged:
            assert res.grad_norm <= 1e-8

    def test_non_convergence_warns_and_returns_last(self):
        fun = quadratic(np.diag([1.0, 1e-4]), np.array([1.0, 1.0]))
        with pytest.warns(NonConvergenceWarning):
            res = gradient_descent(fun, np.zeros(2), OptimizerSettings(max_iters=3, barzilai_borwein=False))
        assert not res.converged and res.n_iter == 3 and len(res.trace) == 4

    def test_domain_error_at_start(self):
        def fun(x):
            raise DomainError("outside", 0, float(x[0]))

        with pytest.raises(DomainError):
            gradient_descent(fun, np.zeros(1))

    def test_domain_violations_are_backtracked(self):
        # minimise -log(x) + x on x > 0; large trial steps leave the domain
        def fun(x):
            if x[0] <= 0:
                raise DomainError("x <= 0", 0, float(x[0]))
            return -np.log(x[0]) + x[0], np.array([-1.0 / x[0] + 1.0])

        res = gradient_descent(fun, np.array([0.05]), OptimizerSettings(step_size=10.0))
        assert res.converged and res.theta[0] == pytest.approx(1.0, abs=1e-7)

    def test_record_path(self):
        res = gradient_descent(quadratic(np.eye(2), np.ones(2)), np.zeros(2), record_path=True)
        assert len(res.path) == len(res.trace)

    @pytest.mark.parametrize("kw", [dict(max_iters=0), dict(grad_tol=0.0), dict(step_size=-1.0)])
    def test_settings_validation(self, kw):
        with pytest.raises(UsageError):
            OptimizerSettings(**kw)
