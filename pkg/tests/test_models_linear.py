import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surrkit.errors import AllZeroWeights, NonFiniteInput, Separation
from surrkit.models import (
    fit_linear,
    fit_logistic,
    lasso_kkt_residuals,
    logistic_gradient,
)


class TestWls:
    def test_exact_linear_data(self):
        m = fit_linear([[1.0], [2.0], [3.0]], [2.0, 4.0, 6.0])
        assert m.coefficients == pytest.approx([2.0], abs=1e-10)
        assert m.intercept == pytest.approx(0.0, abs=1e-10)

    def test_normal_equation_residual(self):
        rng = np.random.default_rng(0)
        z = rng.normal(size=(80, 5))
        y = rng.normal(size=80)
        w = rng.uniform(0.1, 2.0, size=80)
        m = fit_linear(z, y, weights=w)
        resid = y - m.predict(z)
        # WLS optimality: X'W(y - yhat) = 0 including the intercept column
        design = np.column_stack([np.ones(80), z])
        score = design.T @ (w * resid)
        assert np.max(np.abs(score)) < 1e-8 * np.linalg.norm(y)

    def test_weighted_fit_prefers_heavy_points(self):
        z = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([0.0, 1.0, 2.0, 100.0])
        w = np.array([1.0, 1.0, 1.0, 0.0])
        m = fit_linear(z, y, weights=w)
        assert m.coefficients[0] == pytest.approx(1.0, abs=1e-8)

    def test_singular_system_gets_jitter(self):
        z = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        with pytest.warns(UserWarning):
            m = fit_linear(z, [1.0, 2.0, 3.0])
        assert np.all(np.isfinite(m.coefficients))

    def test_all_zero_weights(self):
        with pytest.raises(AllZeroWeights):
            fit_linear([[1.0], [2.0]], [1.0, 2.0], weights=[0.0, 0.0])

    def test_non_finite_input(self):
        with pytest.raises(NonFiniteInput):
            fit_linear([[np.nan], [2.0]], [1.0, 2.0])

    def test_no_intercept_mode(self):
        z = np.array([[1.0], [2.0], [3.0]])
        m = fit_linear(z, [2.0, 4.0, 6.0], fit_intercept=False)
        assert m.intercept == 0.0
        assert m.coefficients == pytest.approx([2.0], abs=1e-10)


class TestLasso:
    def test_null_model_above_lambda_max(self):
        rng = np.random.default_rng(1)
        z = rng.normal(size=(40, 3))
        y = rng.normal(size=40)
        w = rng.uniform(0.5, 1.5, size=40)
        ybar = w @ y / w.sum()
        lam_max = np.max(np.abs((z * w[:, None]).T @ (y - ybar))) / 40
        m = fit_linear(z, y, weights=w, l1_strength=lam_max * 1.0001)
        assert np.all(m.coefficients == 0.0)
        assert m.intercept == pytest.approx(ybar, abs=1e-10)

    def test_kkt_residuals_random_problem(self):
        rng = np.random.default_rng(2)
        z = rng.normal(size=(50, 4))
        y = z @ np.array([1.0, -2.0, 0.0, 0.5]) + rng.normal(scale=0.3, size=50)
        m = fit_linear(z, y, l1_strength=0.1)
        gaps = lasso_kkt_residuals(m, z, y, l1_strength=0.1)
        assert np.max(gaps) < 1e-6

    def test_kkt_with_weights(self):
        rng = np.random.default_rng(3)
        z = rng.normal(size=(60, 5))
        y = rng.normal(size=60)
        w = rng.uniform(0.1, 3.0, size=60)
        m = fit_linear(z, y, weights=w, l1_strength=0.05)
        gaps = lasso_kkt_residuals(m, z, y, weights=w, l1_strength=0.05)
        assert np.max(gaps) < 1e-6

    def test_shrinks_toward_zero(self):
        rng = np.random.default_rng(4)
        z = rng.normal(size=(100, 2))
        y = z @ np.array([1.0, 0.0]) + rng.normal(scale=0.1, size=100)
        dense = fit_linear(z, y, l1_strength=0.0)
        sparse = fit_linear(z, y, l1_strength=0.2)
        assert abs(sparse.coefficients[0]) < abs(dense.coefficients[0])

    def test_no_intercept_kkt(self):
        rng = np.random.default_rng(5)
        z = rng.normal(size=(30, 3))
        y = rng.normal(size=30)
        m = fit_linear(z, y, l1_strength=0.05, fit_intercept=False)
        gaps = lasso_kkt_residuals(m, z, y, l1_strength=0.05)
        assert np.max(gaps) < 1e-6

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000),
           st.floats(min_value=0.01, max_value=1.0))
    def test_kkt_property(self, seed, lam):
        rng = np.random.default_rng(seed)
        z = rng.normal(size=(30, 3))
        y = rng.normal(size=30)
        m = fit_linear(z, y, l1_strength=lam)
        assert np.max(lasso_kkt_residuals(m, z, y, l1_strength=lam)) < 1e-6


class TestLogistic:
    def test_symmetric_problem(self):
        z = np.zeros((10, 2))
        labels = np.array([0, 1] * 5)
        m = fit_logistic(z, labels, l2_strength=1.0)
        assert np.all(np.abs(m.coefficients) < 1e-8)
        assert abs(m.intercept) < 1e-8
        assert m.predict(np.zeros((3, 2))) == pytest.approx([0.5] * 3)

    def test_monotone_relationship(self):
        rng = np.random.default_rng(6)
        z = rng.normal(size=(200, 1))
        labels = (z[:, 0] > 0).astype(float)
        m = fit_logistic(z, labels, l2_strength=1.0)
        assert m.coefficients[0] > 0

    def test_gradient_norm_at_solution(self):
        rng = np.random.default_rng(7)
        z = rng.normal(size=(200, 3))
        eta = z @ np.array([0.5, -1.0, 0.2]) + 0.3
        labels = (rng.uniform(size=200) < 1 / (1 + np.exp(-eta))).astype(float)
        m = fit_logistic(z, labels, l2_strength=1.0)
        grad = logistic_gradient(m, z, labels, l2_strength=1.0)
        assert np.linalg.norm(grad) < 1e-6

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(8)
        z = rng.normal(size=(120, 2))
        labels = (rng.uniform(size=120) < 0.5).astype(float)
        m = fit_logistic(z, labels, l2_strength=1.0)

        def penalized_nll(theta):
            eta = theta[0] + z @ theta[1:]
            return float(np.sum(np.logaddexp(0.0, eta) - labels * eta)
                         + 0.5 * theta[1:] @ theta[1:])

        theta0 = np.concatenate([[m.intercept + 0.37], m.coefficients + 0.11])
        analytic = logistic_gradient(
            type(m)(coefficients=theta0[1:], intercept=theta0[0]),
            z, labels, l2_strength=1.0)
        step = 1e-5
        for j in range(theta0.shape[0]):
            bump = np.zeros_like(theta0)
            bump[j] = step
            fd = (penalized_nll(theta0 + bump) - penalized_nll(theta0 - bump)) / (2 * step)
            assert abs(fd - analytic[j]) / max(abs(fd), 1.0) < 1e-4

    def test_separation_raises_without_penalty(self):
        z = np.linspace(-1, 1, 20).reshape(-1, 1)
        labels = (z[:, 0] > 0).astype(float)
        with pytest.raises(Separation):
            fit_logistic(z, labels, l2_strength=0.0)

    def test_separable_data_penalized_is_fine(self):
        z = np.linspace(-1, 1, 20).reshape(-1, 1)
        labels = (z[:, 0] > 0).astype(float)
        m = fit_logistic(z, labels, l2_strength=1.0)
        assert np.all(np.isfinite(m.coefficients))

    def test_probabilities_strictly_inside_unit_interval(self):
        m = fit_logistic(np.array([[-50.0], [50.0]] * 10),
                         np.array([0.0, 1.0] * 10), l2_strength=0.01)
        p = m.predict(np.array([[-1e3], [1e3]]))
        assert 0.0 < p[0] < 1.0 and 0.0 < p[1] < 1.0
