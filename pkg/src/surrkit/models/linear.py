"""Weighted linear least squares, coordinate-descent Lasso, and L2 logistic
regression.

All fits are exact-tolerance numerical routines with documented optimality
certificates: WLS zeroes the weighted normal equations, the Lasso satisfies
its subgradient (KKT) conditions, and the logistic fit drives the penalized
gradient below tolerance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import (
    AllZeroWeights,
    NonFiniteInput,
    RankDeficientWarning,
    Separation,
    WidthMismatch,
)

RIDGE_JITTER = 1e-10
LASSO_TOL = 1e-8
LASSO_MAX_SWEEPS = 10_000
LOGISTIC_TOL = 1e-8
LOGISTIC_MAX_ITER = 100


@dataclass(frozen=True)
class LinearModel:
    """Affine predictor intercept + coefficients . z."""

    coefficients: np.ndarray
    intercept: float

    def __post_init__(self):
        object.__setattr__(self, "coefficients",
                           np.asarray(self.coefficients, dtype=float).ravel())
        object.__setattr__(self, "intercept", float(self.intercept))

    def predict(self, features: np.ndarray) -> np.ndarray:
        z = np.asarray(features, dtype=float)
        if z.ndim == 1:
            z = z.reshape(1, -1)
        if z.shape[1] != self.coefficients.shape[0]:
            raise WidthMismatch(
                f"expected {self.coefficients.shape[0]} features, got {z.shape[1]}")
        return self.intercept + z @ self.coefficients


@dataclass(frozen=True)
class LogisticModel:
    """Probability predictor sigmoid(intercept + coefficients . z)."""

    coefficients: np.ndarray
    intercept: float

    def __post_init__(self):
        object.__setattr__(self, "coefficients",
                           np.asarray(self.coefficients, dtype=float).ravel())
        object.__setattr__(self, "intercept", float(self.intercept))

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Predicted probabilities, strictly inside (0, 1)."""
        z = np.asarray(features, dtype=float)
        if z.ndim == 1:
            z = z.reshape(1, -1)
        if z.shape[1] != self.coefficients.shape[0]:
            raise WidthMismatch(
                f"expected {self.coefficients.shape[0]} features, got {z.shape[1]}")
        eta = self.intercept + z @ self.coefficients
        p = _sigmoid(eta)
        return np.clip(p, 1e-300, 1.0 - 1e-16)


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta, dtype=float)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    ex = np.exp(eta[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _check_finite(*arrays):
    for a in arrays:
        if a is not None and not np.all(np.isfinite(a)):
            raise NonFiniteInput("input contains NaN or infinity")


def _prepare_weights(weights, n: int) -> np.ndarray:
    if weights is None:
        return np.ones(n)
    w = np.asarray(weights, dtype=float).ravel()
    _check_finite(w)
    if w.shape[0] != n:
        raise WidthMismatch(f"weights length {w.shape[0]} != n={n}")
    if np.any(w < 0):
        raise AllZeroWeights("weights must be nonnegative")
    if not np.any(w > 0):
        raise AllZeroWeights("weights are identically zero")
    return w


def _solve_normal_equations(gram: np.ndarray, moment: np.ndarray) -> np.ndarray:
    if np.linalg.matrix_rank(gram, hermitian=True) < gram.shape[0]:
        warnings.warn("singular normal equations; applying ridge jitter",
                      RankDeficientWarning)
        gram = gram + RIDGE_JITTER * np.eye(gram.shape[0])
    return np.linalg.solve(gram, moment)


def fit_linear(features, targets, weights=None, l1_strength: float = 0.0,
               fit_intercept: bool = True) -> LinearModel:
    """Weighted linear regression, exact for l1_strength=0, Lasso otherwise.

    For l1_strength = 0 the weighted-least-squares minimizer is returned via
    the normal equations (ridge jitter 1e-10 on singular systems).  For
    l1_strength > 0, coordinate descent minimizes

        (1/2n) sum_i w_i (y_i - b - beta.z_i)^2 + l1_strength * ||beta||_1

    with the intercept never penalized, run until the largest coefficient
    change in a sweep falls below 1e-8 or 10,000 sweeps.
    """
    z = np.asarray(features, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    y = np.asarray(targets, dtype=float).ravel()
    _check_finite(z, y)
    n, p = z.shape
    if n < 1 or y.shape[0] != n:
        raise WidthMismatch(f"targets length {y.shape[0]} != n={n}")
    w = _prepare_weights(weights, n)
    if l1_strength < 0:
        raise ValueError("l1_strength must be nonnegative")

    if l1_strength == 0.0:
        if fit_intercept:
            design = np.column_stack([np.ones(n), z])
        else:
            design = z
        gram = design.T @ (w[:, None] * design)
        moment = design.T @ (w * y)
        theta = _solve_normal_equations(gram, moment)
        if fit_intercept:
            return LinearModel(coefficients=theta[1:], intercept=theta[0])
        return LinearModel(coefficients=theta, intercept=0.0)

    return _lasso_cd(z, y, w, l1_strength, fit_intercept)


def _lasso_cd(z, y, w, lam, fit_intercept):
    """Coordinate descent on the raw-space objective.

    Features are internally standardized for conditioning; the per-feature
    penalty is rescaled by the standardization factor so the solution matches
    the unstandardized objective exactly, and coefficients are
    back-transformed on return.
    """
    n, p = z.shape
    w_sum = w.sum()
    if fit_intercept:
        mu = (w @ z) / w_sum
        zc = z - mu
    else:
        mu = np.zeros(p)
        zc = z
    sigma = np.sqrt((w @ (zc ** 2)) / w_sum)
    active = sigma > 0
    sigma_safe = np.where(active, sigma, 1.0)
    zs = zc / sigma_safe
    # per-feature penalty in standardized coordinates
    lam_j = lam / sigma_safe
    # curvature (1/n) sum w zs_j^2 is w_sum/n for active features
    a = np.where(active, w_sum / n, np.inf)

    beta = np.zeros(p)
    b = (w @ y) / w_sum if fit_intercept else 0.0
    resid = y - b - zs @ beta
    wz = w[:, None] * zs

    for _ in range(LASSO_MAX_SWEEPS):
        max_delta = 0.0
        for j in range(p):
            if not active[j]:
                continue
            rho = (wz[:, j] @ resid) / n + a[j] * beta[j]
            new = np.sign(rho) * max(abs(rho) - lam_j[j], 0.0) / a[j]
            delta = new - beta[j]
            if delta != 0.0:
                resid -= zs[:, j] * delta
                beta[j] = new
            # change measured on the original coefficient scale
            max_delta = max(max_delta, abs(delta) / sigma_safe[j])
        if fit_intercept:
            shift = (w @ resid) / w_sum
            if shift != 0.0:
                b += shift
                resid -= shift
                max_delta = max(max_delta, abs(shift))
        if max_delta < LASSO_TOL:
            break

    coef = np.where(active, beta / sigma_safe, 0.0)
    intercept = b - coef @ mu if fit_intercept else 0.0
    return LinearModel(coefficients=coef, intercept=intercept)


def lasso_kkt_residuals(model: LinearModel, features, targets, weights=None,
                        l1_strength: float = 0.0) -> np.ndarray:
    """Per-coefficient KKT gap of the Lasso objective at the fitted model.

    Returns max(0, |g_j| - lam) for zero coefficients and |g_j - lam*sign|
    for active ones, where g_j = (1/n) sum_i w_i z_ij r_i.  All entries of a
    converged fit are ~0.
    """
    z = np.asarray(features, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    y = np.asarray(targets, dtype=float).ravel()
    n = z.shape[0]
    w = _prepare_weights(weights, n)
    r = y - model.predict(z)
    g = (z * w[:, None]).T @ r / n
    gaps = np.empty(z.shape[1])
    for j in range(z.shape[1]):
        if model.coefficients[j] == 0.0:
            gaps[j] = max(0.0, abs(g[j]) - l1_strength)
        else:
            gaps[j] = abs(g[j] - l1_strength * np.sign(model.coefficients[j]))
    return gaps


# ---------------------------------------------------------------------------
# logistic regression
# ---------------------------------------------------------------------------

def _logistic_nll(eta, labels):
    # stable sum of log(1 + exp(eta)) - y*eta
    return float(np.sum(np.logaddexp(0.0, eta) - labels * eta))


def logistic_gradient(model: LogisticModel, features, labels,
                      l2_strength: float) -> np.ndarray:
    """Gradient of the penalized negative log-likelihood at the model.

    Ordering: [intercept, coefficients]; the intercept is unpenalized.
    """
    z = np.asarray(features, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    y = np.asarray(labels, dtype=float).ravel()
    p = model.predict(z)
    design = np.column_stack([np.ones(z.shape[0]), z])
    grad = design.T @ (p - y)
    grad[1:] += l2_strength * model.coefficients
    return grad


def fit_logistic(features, labels, l2_strength: float = 0.0) -> LogisticModel:
    """L2-penalized logistic regression via damped Newton (IRLS) steps.

    Minimizes sum_i [log(1 + exp(eta_i)) - y_i eta_i] + (l2/2)||beta||^2 with
    an unpenalized intercept, stopping when the gradient norm drops below
    1e-8 or after 100 iterations.  With l2_strength = 0 and separable data
    the MLE does not exist; that condition raises Separation.
    """
    z = np.asarray(features, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    y = np.asarray(labels, dtype=float).ravel()
    _check_finite(z, y)
    if not np.all(np.isin(y, (0.0, 1.0))):
        raise ValueError("labels must be binary 0/1")
    n, p = z.shape
    if l2_strength == 0.0 and (y.min() == y.max() or n < 2):
        raise Separation("unpenalized logistic fit requires both classes")

    design = np.column_stack([np.ones(n), z])
    theta = np.zeros(p + 1)
    pen = np.zeros(p + 1)
    pen[1:] = l2_strength

    def objective(th):
        eta = design @ th
        return _logistic_nll(eta, y) + 0.5 * l2_strength * float(th[1:] @ th[1:])

    obj = objective(theta)
    for _ in range(LOGISTIC_MAX_ITER):
        eta = design @ theta
        prob = _sigmoid(eta)
        grad = design.T @ (prob - y) + pen * theta
        if np.linalg.norm(grad) < LOGISTIC_TOL:
            break
        hess_w = prob * (1.0 - prob)
        hess = design.T @ (hess_w[:, None] * design) + np.diag(pen)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.solve(hess + RIDGE_JITTER * np.eye(p + 1), grad)
        # damped update: halve until the penalized objective stops increasing
        scale = 1.0
        for _ in range(50):
            candidate = theta - scale * step
            cand_obj = objective(candidate)
            if cand_obj <= obj + 1e-12:
                theta = candidate
                obj = cand_obj
                break
            scale *= 0.5
        else:
            break
        if l2_strength == 0.0 and np.max(np.abs(theta)) > 1e6:
            raise Separation("coefficients diverge; data are separable")
        if not np.all(np.isfinite(theta)):
            raise Separation("logistic fit diverged")

    if l2_strength == 0.0 and obj < 1e-6:
        # the unpenalized NLL reaches 0 only on separable data, where the
        # MLE does not exist and the fitted coefficients are arbitrary
        raise Separation("data are separable; unpenalized MLE does not exist")
    return LogisticModel(coefficients=theta[1:], intercept=theta[0])
