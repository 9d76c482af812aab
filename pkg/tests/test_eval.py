import numpy as np
import pytest

from surrkit.core import ScenarioTruth, make_rng
from surrkit.errors import ShapeMismatch, SingleArmData
from surrkit.eval import (
    EffectEstimate,
    ate_diff_in_means,
    bootstrap_ate_ci,
    bootstrap_ci,
    cate_potential_outcomes,
    cate_t_learner,
    score,
    t_learner_estimate,
)
from surrkit.models import LinearModel
from surrkit.surrogates import SurrogateModel


def toy_truth(cate, y_noise=None):
    cate = np.asarray(cate, dtype=float)
    n = cate.shape[0]
    y0 = np.zeros(n)
    y1 = cate.copy()
    return ScenarioTruth(s0=np.zeros((n, 1)), s1=np.ones((n, 1)),
                         y0=y0, y1=y1, cate=cate, ate=float(cate.mean()))


class TestAteDiffInMeans:
    def test_arithmetic(self):
        assert ate_diff_in_means([1, 1, 3, 3], [0, 0, 1, 1]) == 2.0

    def test_constant_values(self):
        assert ate_diff_in_means([5, 5, 5, 5], [0, 1, 0, 1]) == 0.0

    def test_single_arm_raises(self):
        with pytest.raises(SingleArmData):
            ate_diff_in_means([1.0, 2.0], [1, 1])

    def test_offset_invariance(self):
        gen = np.random.default_rng(0)
        v = gen.normal(size=100)
        t = gen.integers(0, 2, size=100)
        assert ate_diff_in_means(v + 17.3, t) == pytest.approx(
            ate_diff_in_means(v, t), abs=1e-12)


class TestTLearner:
    def test_exact_linear_structure(self):
        gen = np.random.default_rng(1)
        x = gen.normal(size=(400, 1))
        t = gen.integers(0, 2, size=400).astype(float)
        values = 3.0 + 2.0 * x[:, 0] + t * (1.0 + x[:, 0])
        tau = cate_t_learner(x, t, values)
        assert np.max(np.abs(tau - (1.0 + x[:, 0]))) < 1e-8

    def test_no_effect(self):
        gen = np.random.default_rng(2)
        x = gen.normal(size=(2000, 2))
        t = gen.integers(0, 2, size=2000).astype(float)
        values = x[:, 0] + gen.normal(scale=0.1, size=2000)
        tau = cate_t_learner(x, t, values)
        assert np.max(np.abs(tau)) < 0.05

    def test_estimate_ate_is_mean_cate(self):
        gen = np.random.default_rng(3)
        x = gen.normal(size=(300, 2))
        t = gen.integers(0, 2, size=300).astype(float)
        values = x @ [1.0, -1.0] + 2.0 * t
        est = t_learner_estimate(x, t, values)
        assert est.ate == pytest.approx(float(est.cate.mean()), abs=1e-10)
        assert est.estimator == "t_learner"

    def test_small_arm_raises(self):
        x = np.zeros((4, 3))
        with pytest.raises(SingleArmData):
            cate_t_learner(x, [1, 1, 1, 0], np.ones(4))


class TestPotentialOutcomeCate:
    def make_f(self, coef, intercept=0.0):
        return SurrogateModel(form="linear", input_dim=len(coef),
                              linear=LinearModel(np.array(coef), intercept))

    def test_linear_contrast(self):
        f = self.make_f([1.0, 0.0])
        s0 = np.zeros((5, 2))
        s1 = np.column_stack([np.full(5, 2.0), np.arange(5.0)])
        assert np.allclose(cate_potential_outcomes(f, s1, s0), 2.0)

    def test_no_movement_zero_vector(self):
        f = self.make_f([1.5, -2.0])
        s = np.random.default_rng(4).normal(size=(10, 2))
        assert np.allclose(cate_potential_outcomes(f, s, s), 0.0)

    def test_constant_f_zero_vector(self):
        f = self.make_f([0.0], intercept=3.0)
        s1 = np.ones((8, 1))
        s0 = np.zeros((8, 1))
        assert np.allclose(cate_potential_outcomes(f, s1, s0), 0.0)

    def test_shape_mismatch(self):
        f = self.make_f([1.0])
        with pytest.raises(ShapeMismatch):
            cate_potential_outcomes(f, np.ones((3, 1)), np.ones((4, 1)))


class TestScore:
    def test_perfect_estimate(self):
        truth = toy_truth([1.0, 2.0, 3.0])
        est = EffectEstimate(ate=truth.ate, cate=truth.cate.copy(),
                             estimator="t_learner")
        report = score(est, truth)
        assert report.mae_ate == 0.0
        assert report.r2_cate == pytest.approx(1.0)
        assert report.pehe == pytest.approx(0.0)

    def test_mean_predictor_r2_zero(self):
        truth = toy_truth([1.0, 2.0, 3.0, 4.0])
        est = EffectEstimate(ate=truth.ate,
                             cate=np.full(4, truth.cate.mean()))
        report = score(est, truth)
        assert report.r2_cate == pytest.approx(0.0, abs=1e-12)

    def test_constant_truth_r2_absent(self):
        truth = toy_truth([2.0, 2.0, 2.0])
        est = EffectEstimate(ate=1.0, cate=np.array([1.0, 2.0, 3.0]))
        report = score(est, truth)
        assert report.r2_cate is None
        assert report.pehe is not None

    def test_pehe_r2_relation(self):
        gen = np.random.default_rng(5)
        cate = gen.normal(size=50)
        truth = toy_truth(cate)
        est = EffectEstimate(ate=0.0, cate=cate + gen.normal(scale=0.5, size=50))
        report = score(est, truth)
        variance = float(np.mean((cate - cate.mean()) ** 2))
        assert report.r2_cate == pytest.approx(1.0 - report.pehe / variance,
                                               abs=1e-10)

    def test_reference_ate_only(self):
        report = score(EffectEstimate(ate=5.0), 6.47)
        assert report.mae_ate == pytest.approx(1.47)
        assert report.r2_cate is None


class TestBootstrap:
    def test_constant_statistic(self):
        mean, lo, hi = bootstrap_ci(lambda idx: 3.0, 50, B=100, rng=make_rng(6))
        assert (mean, lo, hi) == (3.0, 3.0, 3.0)

    def test_normal_theory_width(self):
        gen = np.random.default_rng(7)
        data = gen.normal(size=1000)
        mean, lo, hi = bootstrap_ci(lambda idx: float(data[idx].mean()),
                                    1000, B=2000, rng=make_rng(8))
        width = hi - lo
        expected = 2.0 * 1.96 / np.sqrt(1000)
        assert abs(width - expected) / expected < 0.2
        assert lo <= mean <= hi

    def test_deterministic(self):
        gen = np.random.default_rng(9)
        data = gen.normal(size=200)
        a = bootstrap_ci(lambda idx: float(data[idx].mean()), 200, B=500,
                         rng=make_rng(10))
        b = bootstrap_ci(lambda idx: float(data[idx].mean()), 200, B=500,
                         rng=make_rng(10))
        assert a == b

    def test_ate_bootstrap(self):
        gen = np.random.default_rng(11)
        t = gen.integers(0, 2, size=500).astype(float)
        values = 1.0 * t + gen.normal(size=500)
        mean, lo, hi = bootstrap_ate_ci(values, t, B=500, rng=make_rng(12))
        assert lo < 1.0 < hi
        assert lo <= mean <= hi
