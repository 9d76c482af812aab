"""Trial-side effect estimation and scoring.

Estimation: difference-in-means ATE, per-arm linear T-learner CATE, and
potential-outcome CATE for simulated cohorts.  Scoring: ATE absolute error,
CATE R-squared and PEHE against ground truth.  Uncertainty: unit-level
percentile bootstrap.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import RandomSource, ScenarioTruth, make_rng
from .errors import RankDeficientWarning, ShapeMismatch, SingleArmData
from .models import fit_linear


@dataclass(frozen=True)
class EffectEstimate:
    """One method's effect estimates on a trial cohort."""

    ate: float
    method_id: str = ""
    estimator: str = "diff_in_means"
    cate: Optional[np.ndarray] = None


@dataclass(frozen=True)
class MetricReport:
    """Scores of an estimate against ground truth.

    r2_cate is None when the true CATE is constant (the ratio is undefined);
    it may be arbitrarily negative otherwise.
    """

    mae_ate: float
    r2_cate: Optional[float] = None
    pehe: Optional[float] = None
    ci: Optional[tuple] = None


def ate_diff_in_means(values: np.ndarray, t: np.ndarray) -> float:
    """Difference of arm means; the trial estimate of the effect on values."""
    values = np.asarray(values, dtype=float).ravel()
    t = np.asarray(t, dtype=float).ravel()
    treated = t == 1.0
    if treated.all() or not treated.any():
        raise SingleArmData("both treatment arms must be nonempty")
    return float(values[treated].mean() - values[~treated].mean())


def cate_t_learner(x: np.ndarray, t: np.ndarray, values: np.ndarray,
                   eval_x: Optional[np.ndarray] = None) -> np.ndarray:
    """Per-arm linear regressions g_t(x); returns g_1(eval_x) - g_0(eval_x)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    t = np.asarray(t, dtype=float).ravel()
    values = np.asarray(values, dtype=float).ravel()
    eval_x = x if eval_x is None else np.asarray(eval_x, dtype=float)
    if eval_x.ndim == 1:
        eval_x = eval_x.reshape(-1, 1)
    arms = {}
    for arm in (0, 1):
        mask = t == arm
        if mask.sum() < x.shape[1] + 1:
            raise SingleArmData(
                f"arm {arm} needs at least k+1 = {x.shape[1] + 1} units")
        arms[arm] = fit_linear(x[mask], values[mask])
    return arms[1].predict(eval_x) - arms[0].predict(eval_x)


def t_learner_estimate(x, t, values, eval_x=None, method_id="") -> EffectEstimate:
    """EffectEstimate whose ATE is the mean of the T-learner CATE."""
    cate = cate_t_learner(x, t, values, eval_x)
    return EffectEstimate(ate=float(cate.mean()), method_id=method_id,
                          estimator="t_learner", cate=cate)


def cate_potential_outcomes(f, s1: np.ndarray, s0: np.ndarray) -> np.ndarray:
    """Elementwise f(s1) - f(s0) over simulated potential-outcome arms."""
    s1 = np.asarray(s1, dtype=float)
    s0 = np.asarray(s0, dtype=float)
    if s1.shape != s0.shape:
        raise ShapeMismatch(f"arm shapes differ: {s1.shape} vs {s0.shape}")
    return np.asarray(f.predict(s1), dtype=float) - np.asarray(f.predict(s0), dtype=float)


def score(est: EffectEstimate, truth, ci: Optional[tuple] = None) -> MetricReport:
    """MAE of the ATE plus, when CATEs are available, R^2 and PEHE.

    ``truth`` is a ScenarioTruth or a bare reference ATE.  R^2 is omitted
    when the true CATE has zero variance.
    """
    if isinstance(truth, ScenarioTruth):
        true_ate = truth.ate
        true_cate = truth.cate
    else:
        true_ate = float(truth)
        true_cate = None
    mae = abs(est.ate - true_ate)
    r2 = pehe = None
    if est.cate is not None and true_cate is not None:
        if est.cate.shape != true_cate.shape:
            raise ShapeMismatch("estimated and true CATE lengths differ")
        pehe = float(np.mean((true_cate - est.cate) ** 2))
        variance = float(np.mean((true_cate - true_cate.mean()) ** 2))
        if variance > 0.0:
            r2 = 1.0 - pehe / variance
    return MetricReport(mae_ate=mae, r2_cate=r2, pehe=pehe, ci=ci)


def bootstrap_ci(statistic: Callable, data, B: int = 2000, level: float = 0.95,
                 rng: Optional[RandomSource] = None) -> tuple:
    """Unit-level percentile bootstrap.

    ``statistic`` maps an index array of a resample to a scalar; ``data``
    only provides the unit count (an int) or is an array whose first axis is
    units.  Returns (replicate mean, lo, hi) with percentiles interpolated
    linearly between order statistics.
    """
    rng = rng or make_rng(0)
    n = data if isinstance(data, int) else np.asarray(data).shape[0]
    if n < 1 or B < 2:
        raise ValueError("need at least one unit and B >= 2 replicates")
    reps = np.empty(B)
    for b in range(B):
        gen = rng.substream(b).generator()
        idx = gen.integers(0, n, size=n)
        reps[b] = statistic(idx)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.percentile(reps, [100.0 * alpha, 100.0 * (1.0 - alpha)],
                           method="linear")
    return float(reps.mean()), float(lo), float(hi)


def bootstrap_ate_ci(values: np.ndarray, t: np.ndarray, B: int = 2000,
                     level: float = 0.95,
                     rng: Optional[RandomSource] = None) -> tuple:
    """Percentile bootstrap of the difference-in-means ATE.

    Degenerate resamples (a single arm) are redrawn from the replicate's
    sub-stream, so the procedure stays deterministic.
    """
    values = np.asarray(values, dtype=float).ravel()
    t = np.asarray(t, dtype=float).ravel()
    n = values.shape[0]
    rng = rng or make_rng(0)

    def stat(idx):
        return ate_diff_in_means(values[idx], t[idx])

    reps = np.empty(B)
    for b in range(B):
        gen = rng.substream(b).generator()
        for _ in range(100):
            idx = gen.integers(0, n, size=n)
            tt = t[idx]
            if tt.any() and not tt.all():
                break
        reps[b] = stat(idx)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.percentile(reps, [100.0 * alpha, 100.0 * (1.0 - alpha)],
                           method="linear")
    return float(reps.mean()), float(lo), float(hi)
