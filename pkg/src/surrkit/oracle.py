"""Brute-force verification engine on finite-support causal models.

A DiscreteSCM stores the full joint law of (X, T, S) plus the conditional
outcome means E[Y | x, s] (optionally t-dependent), so every effect, every
weighted-regression minimizer, the trial CATE risk, and its upper bounds can
be computed by exact enumeration.  These exact values back the identity and
dominance checks used throughout the test suite:

- tau_Y(x) and tau_S(x) by direct summation
- the weighted-regression minimizer f*(s) for any weight scheme
- the trial CATE risk and its w^2 / w^+ / w^1 bounds
- per-case unbiasedness claims (confounded-outcome weights, signed weights,
  t-dependent weights under a direct effect)
- the linear-case risk formula, the ATE-matching construction, and the
  confounded outcome-regression bias decomposition
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .core import Cohort, RandomSource, ScenarioTruth
from .errors import (
    CaseMismatch,
    DimensionMismatch,
    DomainMismatch,
    NoAffectedSurrogate,
    PositivityViolation,
    ZeroDenominator,
)

PROB_TOL = 1e-12

W2 = "w2"
WPLUS = "wplus"
W1 = "w1"
WMINUS = "wminus"
PX_OVER_PXS = "px_over_pxs"
UNIFORM = "uniform"
SCHEMES = (W2, WPLUS, W1, WMINUS, PX_OVER_PXS, UNIFORM)


@dataclass(frozen=True)
class WeightScheme:
    """A named regression weight, optionally with propensity clipping.

    Clipping is a variance-control device for estimated weights; the exact
    identity checks below always use unclipped schemes.
    """

    kind: str = W2
    clip_bounds: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise DomainMismatch(f"unknown weight scheme {self.kind!r}")


@dataclass(frozen=True)
class DiscreteSCM:
    """Finite-support structural model over (X, T, S, Y-mean).

    x_values:   (n_x, k) covariate support points
    p_x:        (n_x,) marginal probabilities
    t_given_x:  (n_x,) propensities p(T=1 | x)
    s_values:   (n_s, d) surrogate support points
    s_given_xt: (2, n_x, n_s) conditionals p(s | x, t)
    y_mean:     (n_x, n_s) E[Y | x, s], or (2, n_x, n_s) when t-dependent
    linear:     optional (gamma, delta, intercept) when
                E[Y | x, s] = gamma.x + delta.s + intercept
    """

    x_values: np.ndarray
    p_x: np.ndarray
    t_given_x: np.ndarray
    s_values: np.ndarray
    s_given_xt: np.ndarray
    y_mean: np.ndarray
    linear: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "x_values", np.atleast_2d(np.asarray(self.x_values, dtype=float)))
        object.__setattr__(self, "p_x", np.asarray(self.p_x, dtype=float))
        object.__setattr__(self, "t_given_x", np.asarray(self.t_given_x, dtype=float))
        object.__setattr__(self, "s_values", np.atleast_2d(np.asarray(self.s_values, dtype=float)))
        object.__setattr__(self, "s_given_xt", np.asarray(self.s_given_xt, dtype=float))
        object.__setattr__(self, "y_mean", np.asarray(self.y_mean, dtype=float))
        self.validate()

    @property
    def n_x(self) -> int:
        return self.x_values.shape[0]

    @property
    def n_s(self) -> int:
        return self.s_values.shape[0]

    @property
    def k(self) -> int:
        return self.x_values.shape[1]

    @property
    def d(self) -> int:
        return self.s_values.shape[1]

    @property
    def t_dependent_outcome(self) -> bool:
        return self.y_mean.ndim == 3

    def validate(self):
        if abs(self.p_x.sum() - 1.0) > PROB_TOL:
            raise DomainMismatch("p_x does not sum to 1")
        if np.any(self.p_x < 0):
            raise DomainMismatch("p_x has negative entries")
        if self.s_given_xt.shape != (2, self.n_x, self.n_s):
            raise DomainMismatch("s_given_xt must have shape (2, n_x, n_s)")
        row_sums = self.s_given_xt.sum(axis=2)
        if np.max(np.abs(row_sums - 1.0)) > PROB_TOL:
            raise DomainMismatch("conditional surrogate rows must sum to 1")
        if np.any(self.s_given_xt < 0):
            raise DomainMismatch("negative conditional probability")
        support = self.p_x > 0
        if np.any((self.t_given_x[support] <= 0) | (self.t_given_x[support] >= 1)):
            raise PositivityViolation(
                "p(T=t|x) must be strictly positive on the covariate support")
        expect = (2, self.n_x, self.n_s) if self.y_mean.ndim == 3 else (self.n_x, self.n_s)
        if self.y_mean.shape != expect:
            raise DomainMismatch(f"y_mean must have shape {expect}")

    # -- derived tables ------------------------------------------------------

    def p_s_given_x(self) -> np.ndarray:
        e = self.t_given_x[:, None]
        return (1.0 - e) * self.s_given_xt[0] + e * self.s_given_xt[1]

    def p_s(self) -> np.ndarray:
        return self.p_x @ self.p_s_given_x()

    def p_x_given_s(self) -> np.ndarray:
        """(n_x, n_s) posterior of x given s (marginal over t)."""
        joint = self.p_x[:, None] * self.p_s_given_x()
        return joint / joint.sum(axis=0, keepdims=True)

    def rho(self) -> np.ndarray:
        """(n_x, n_s) surrogate score p(T=1 | x, s)."""
        e = self.t_given_x[:, None]
        return e * self.s_given_xt[1] / self.p_s_given_x()

    def pi(self) -> np.ndarray:
        """(n_x, n_s) density difference p(s|x,1) - p(s|x,0)."""
        return self.s_given_xt[1] - self.s_given_xt[0]

    def to_dict(self) -> dict:
        doc = {
            "x_values": self.x_values.tolist(),
            "p_x": self.p_x.tolist(),
            "t_given_x": self.t_given_x.tolist(),
            "s_values": self.s_values.tolist(),
            "s_given_xt": self.s_given_xt.tolist(),
            "y_mean": self.y_mean.tolist(),
        }
        if self.linear is not None:
            gamma, delta, intercept = self.linear
            doc["linear"] = {
                "gamma": np.asarray(gamma, dtype=float).tolist(),
                "delta": np.asarray(delta, dtype=float).tolist(),
                "intercept": float(intercept),
            }
        return doc

    @staticmethod
    def from_dict(doc: dict) -> "DiscreteSCM":
        linear = None
        if "linear" in doc and doc["linear"] is not None:
            lin = doc["linear"]
            linear = (np.array(lin["gamma"], dtype=float),
                      np.array(lin["delta"], dtype=float),
                      float(lin["intercept"]))
        return DiscreteSCM(
            x_values=np.array(doc["x_values"], dtype=float),
            p_x=np.array(doc["p_x"], dtype=float),
            t_given_x=np.array(doc["t_given_x"], dtype=float),
            s_values=np.array(doc["s_values"], dtype=float),
            s_given_xt=np.array(doc["s_given_xt"], dtype=float),
            y_mean=np.array(doc["y_mean"], dtype=float),
            linear=linear,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_json(text: str) -> "DiscreteSCM":
        return DiscreteSCM.from_dict(json.loads(text))


def _f_table(m: DiscreteSCM, f) -> np.ndarray:
    """Coerce a surrogate function (table, callable, or model) to per-s values."""
    if isinstance(f, np.ndarray) or isinstance(f, (list, tuple)):
        table = np.asarray(f, dtype=float).ravel()
        if table.shape[0] != m.n_s:
            raise DomainMismatch(
                f"f table has {table.shape[0]} entries for {m.n_s} support points")
        return table
    if hasattr(f, "predict"):
        return np.asarray(f.predict(m.s_values), dtype=float).ravel()
    if callable(f):
        return np.array([float(f(s)) for s in m.s_values])
    raise DomainMismatch(f"cannot interpret {type(f).__name__} as a surrogate function")


# ---------------------------------------------------------------------------
# exact effects and risks
# ---------------------------------------------------------------------------

def exact_effects(m: DiscreteSCM) -> dict:
    """Enumerate tau_Y, tau_Y(x), and tau_S(x) over the finite support."""
    pi = m.pi()
    if m.t_dependent_outcome:
        tau_y_of_x = (m.y_mean[1] * m.s_given_xt[1]
                      - m.y_mean[0] * m.s_given_xt[0]).sum(axis=1)
    else:
        tau_y_of_x = (m.y_mean * pi).sum(axis=1)
    tau_s_of_x = pi @ m.s_values
    return {
        "tau_y": float(m.p_x @ tau_y_of_x),
        "tau_y_of_x": tau_y_of_x,
        "tau_s_of_x": tau_s_of_x,
        "tau_s": m.p_x @ tau_s_of_x,
    }


def weight_table(m: DiscreteSCM, scheme: WeightScheme) -> np.ndarray:
    """(n_x, n_s) table of the scheme's weights computed from the true law."""
    e = m.t_given_x[:, None]
    rho = m.rho()
    if scheme.clip_bounds is not None:
        lo, hi = scheme.clip_bounds
        e = np.clip(e, lo, hi)
        rho = np.clip(rho, lo, hi)
    eta = rho / e - (1.0 - rho) / (1.0 - e)
    if scheme.kind == W2:
        return eta ** 2
    if scheme.kind == WPLUS:
        return rho / e + (1.0 - rho) / (1.0 - e)
    if scheme.kind == W1:
        return np.abs(eta)
    if scheme.kind == WMINUS:
        return eta
    if scheme.kind == PX_OVER_PXS:
        # p(x)/p(x|s) = p(s)/p(s|x)
        return m.p_s()[None, :] / m.p_s_given_x()
    if scheme.kind == UNIFORM:
        return np.ones((m.n_x, m.n_s))
    raise DomainMismatch(f"unknown weight scheme {scheme.kind!r}")


def exact_weighted_minimizer(m: DiscreteSCM, w: Union[WeightScheme, np.ndarray]) -> np.ndarray:
    """Population minimizer f*(s) of the weighted regression of h on s.

    f*(s) = sum_x w(x,s) h(x,s) p(x|s) / sum_x w(x,s) p(x|s).
    """
    if m.t_dependent_outcome:
        raise CaseMismatch(
            "the single-function minimizer needs a t-independent outcome mean")
    wt = weight_table(m, w) if isinstance(w, WeightScheme) else np.asarray(w, dtype=float)
    pxs = m.p_x_given_s()
    denom = (wt * pxs).sum(axis=0)
    numer = (wt * m.y_mean * pxs).sum(axis=0)
    degenerate = (np.abs(denom) < 1e-12) & (m.p_s() > PROB_TOL)
    if np.any(degenerate):
        raise ZeroDenominator(
            f"weight scheme degenerates at s indices {np.nonzero(degenerate)[0].tolist()}")
    return numer / np.where(np.abs(denom) < 1e-300, 1.0, denom)


def surrogate_ate(m: DiscreteSCM, f) -> float:
    """Plug-in trial ATE of f: E_X[ E[f(S)|x,T=1] - E[f(S)|x,T=0] ]."""
    table = _f_table(m, f)
    return float(m.p_x @ (m.pi() @ table))


def surrogate_cate(m: DiscreteSCM, f) -> np.ndarray:
    """Per-x plug-in CATE of f."""
    return m.pi() @ _f_table(m, f)


def exact_risk(m: DiscreteSCM, f, density_ratio_x: Optional[np.ndarray] = None) -> float:
    """Exact trial CATE risk E_X[ dr(x) (tau_Y(x) - tau_f(x))^2 ]."""
    table = _f_table(m, f)
    eff = exact_effects(m)
    gap = eff["tau_y_of_x"] - m.pi() @ table
    dr = np.ones(m.n_x) if density_ratio_x is None else np.asarray(density_ratio_x, dtype=float)
    return float(m.p_x @ (dr * gap ** 2))


def exact_l1_risk(m: DiscreteSCM, f) -> float:
    """Exact absolute CATE risk E_X[ |tau_Y(x) - tau_f(x)| ]."""
    table = _f_table(m, f)
    eff = exact_effects(m)
    return float(m.p_x @ np.abs(eff["tau_y_of_x"] - m.pi() @ table))


def risk_bound(m: DiscreteSCM, f, scheme: str) -> float:
    """Exact value of the weighted upper-bound expression for a scheme.

    w2    : E[w^2 (h - f)^2]       and risk <= bound
    wplus : E[w^+ (h - f)^2]       and risk <= 2 * bound
    w1    : E[w^1 |h - f|]         and L1 risk <= bound
    """
    if m.t_dependent_outcome:
        raise DomainMismatch("risk bounds assume a t-independent outcome mean")
    kind = scheme.kind if isinstance(scheme, WeightScheme) else scheme
    if kind not in (W2, WPLUS, W1):
        raise DomainMismatch(f"no risk bound defined for scheme {kind!r}")
    table = _f_table(m, f)
    gap = m.y_mean - table[None, :]
    wt = weight_table(m, WeightScheme(kind))
    joint = m.p_x[:, None] * m.p_s_given_x()
    if kind == W1:
        return float((joint * wt * np.abs(gap)).sum())
    return float((joint * wt * gap ** 2).sum())


# ---------------------------------------------------------------------------
# per-case claims
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CaseCheck:
    claim: str
    lhs: float
    rhs: float
    passed: bool


def _structural_case(m: DiscreteSCM) -> dict:
    """Structural predicates used to validate case shapes."""
    h_x_free = (not m.t_dependent_outcome
                and np.max(np.abs(m.y_mean - m.y_mean[0:1, :])) < 1e-12)
    h_s_free = (not m.t_dependent_outcome
                and np.max(np.abs(m.y_mean - m.y_mean[:, 0:1])) < 1e-12)
    s_x_free = np.max(np.abs(m.s_given_xt - m.s_given_xt[:, 0:1, :])) < 1e-12
    return {"h_x_free": h_x_free, "h_s_free": h_s_free, "s_x_free": s_x_free}


def check_case_properties(case_id: str, m: DiscreteSCM, tol: float = 1e-9) -> list:
    """Verify the closed-form per-case claims by enumeration.

    a) the regression f(s) = E[Y|S=s] attains zero CATE risk
    b) the w+, w1, and p(x)/p(x|s) weighted minimizers reproduce tau_Y
       (the squared-difference weights generally do not)
    c) the zero-effect model admits a constant zero-risk surrogate
    d) the signed difference weights reproduce tau_Y but can be negative
    e) with a direct effect, the t-dependent weight construction built on
       pi(x,s)/p(s|x) reproduces tau_Y
    """
    shape = _structural_case(m)
    eff = exact_effects(m)
    tau_y = eff["tau_y"]
    checks: list[CaseCheck] = []

    def add(claim, lhs, rhs, tol_=tol):
        checks.append(CaseCheck(claim, float(lhs), float(rhs),
                                bool(abs(lhs - rhs) <= tol_)))

    if case_id == "a":
        if not shape["h_x_free"]:
            raise CaseMismatch("case a requires E[Y|x,s] free of x")
        f = m.y_mean[0]  # h(s)
        add("risk of f=E[Y|S] is zero", exact_risk(m, f), 0.0)
        add("f=E[Y|S] reproduces tau_Y", surrogate_ate(m, f), tau_y)
    elif case_id == "b":
        if not shape["s_x_free"]:
            raise CaseMismatch("case b requires p(s|x,t) free of x")
        for kind in (WPLUS, W1, PX_OVER_PXS):
            f = exact_weighted_minimizer(m, WeightScheme(kind))
            add(f"{kind}-weighted minimizer matches tau_Y",
                surrogate_ate(m, f), tau_y)
        f2 = exact_weighted_minimizer(m, WeightScheme(W2))
        checks.append(CaseCheck("w2-weighted minimizer bias (informational)",
                                surrogate_ate(m, f2), tau_y, True))
    elif case_id == "c":
        if not shape["h_s_free"]:
            raise CaseMismatch("case c requires E[Y|x,s] free of s and t")
        add("tau_Y is zero", tau_y, 0.0)
        add("max |tau_Y(x)|", np.max(np.abs(eff["tau_y_of_x"])), 0.0)
        add("constant surrogate attains zero risk",
            exact_risk(m, np.zeros(m.n_s)), 0.0)
    elif case_id == "d":
        f = exact_weighted_minimizer(m, WeightScheme(WMINUS))
        add("wminus-weighted minimizer matches tau_Y", surrogate_ate(m, f), tau_y)
        wt = weight_table(m, WeightScheme(WMINUS))
        checks.append(CaseCheck("some wminus weight is negative",
                                float(wt.min()), 0.0, bool(wt.min() < 0.0)))
    elif case_id == "e":
        if not m.t_dependent_outcome:
            raise CaseMismatch("case e requires a t-dependent outcome mean")
        f = t_dependent_weight_surrogate(m)
        add("t-dependent-weight surrogate matches tau_Y",
            surrogate_ate(m, f), tau_y)
    else:
        raise CaseMismatch(f"unknown case id {case_id!r}")
    return checks


def t_dependent_weight_surrogate(m: DiscreteSCM) -> np.ndarray:
    """Case-e construction: a function of s alone whose plug-in ATE is tau_Y.

    Each arm's outcome mean h_t is weighted by pi(x,s)/p(s|x,t) under that
    arm's conditional law, giving

        f*(s) = sum_x p(x) [h_1 p(s|x,1) - h_0 p(s|x,0)]
                / sum_x p(x) [p(s|x,1) - p(s|x,0)].
    """
    if not m.t_dependent_outcome:
        raise CaseMismatch("construction applies to t-dependent outcome means")
    numer = (m.p_x[:, None] * (m.y_mean[1] * m.s_given_xt[1]
                               - m.y_mean[0] * m.s_given_xt[0])).sum(axis=0)
    denom = (m.p_x[:, None] * m.pi()).sum(axis=0)
    if np.any(np.abs(denom) < 1e-12):
        raise ZeroDenominator("pi-bar vanishes at some surrogate value")
    return numer / denom


# ---------------------------------------------------------------------------
# linear-case risk, ATE matching, outcome-regression bias
# ---------------------------------------------------------------------------

def linear_risk(beta_h, beta_f, tau_s_samples, weights=None) -> float:
    """Closed-form trial CATE risk for linear h and f.

    Returns the (weighted) mean over rows of ((beta_h - beta_f) . tau_S(x))^2.
    """
    bh = np.asarray(beta_h, dtype=float).ravel()
    bf = np.asarray(beta_f, dtype=float).ravel()
    tau_s = np.atleast_2d(np.asarray(tau_s_samples, dtype=float))
    if bh.shape != bf.shape or tau_s.shape[1] != bh.shape[0]:
        raise DimensionMismatch(
            f"beta_h {bh.shape}, beta_f {bf.shape}, tau_S width {tau_s.shape[1]}")
    gap = tau_s @ (bh - bf)
    if weights is None:
        return float(np.mean(gap ** 2))
    w = np.asarray(weights, dtype=float).ravel()
    return float(np.mean(w * gap ** 2))


def ate_matching_surrogate(tau_y: float, deltas, threshold: float = 1e-6) -> tuple:
    """Single-variable ATE-matching construction f(S) = alpha * S_j.

    ``deltas`` holds the weighted surrogate contrasts delta_j; the column
    with the largest |delta_j| is selected (ties to the lowest index) and
    alpha = tau_y / delta_j reproduces tau_y exactly by construction.
    """
    d = np.asarray(deltas, dtype=float).ravel()
    if np.max(np.abs(d)) < threshold:
        raise NoAffectedSurrogate(
            f"all surrogate contrasts below threshold {threshold}")
    j = int(np.argmax(np.abs(d)))
    if tau_y == 0.0:
        return j, 0.0
    return j, float(tau_y / d[j])


def outcome_regression_bias(m, x_to_y_coef=None) -> dict:
    """Decompose the bias of the plug-in regression f(S) = E[Y|S].

    For a DiscreteSCM with linear outcome structure gamma.x + delta.s + c,
    everything is enumerated exactly.  For a Monte-Carlo (Cohort,
    ScenarioTruth) pair the plug-in is the fitted linear regression of y on
    s, and the decomposition uses the linear projection of x on s.
    In both cases  plugin_ate - true_ate = bias  with
    bias = gamma . (E[X at S(1)] - E[X at S(0)]).
    """
    if isinstance(m, DiscreteSCM):
        if m.linear is None:
            raise DomainMismatch("model does not expose a linear outcome structure")
        gamma, delta, _ = m.linear
        gamma = np.asarray(gamma, dtype=float).ravel()
        eff = exact_effects(m)
        # true conditional regression f(s) = E[Y | S=s]
        f = (m.p_x_given_s() * m.y_mean).sum(axis=0)
        plugin = surrogate_ate(m, f)
        # E[X | S=s] then averaged over each potential-surrogate law
        e_x_given_s = m.p_x_given_s().T @ m.x_values        # (n_s, k)
        avg = [None, None]
        for t in (0, 1):
            p_st = m.p_x @ m.s_given_xt[t]                  # marginal of S(t)
            avg[t] = p_st @ e_x_given_s
        bias = float(gamma @ (avg[1] - avg[0]))
        return {"true_ate": eff["tau_y"], "plugin_ate": plugin, "bias": bias}

    cohort, truth = m
    if x_to_y_coef is None:
        raise DomainMismatch("Monte-Carlo path needs the x-to-y coefficient block")
    gamma = np.asarray(x_to_y_coef, dtype=float).ravel()
    from .models import fit_linear

    reg = fit_linear(cohort.s, cohort.y)
    plugin = float(reg.predict(truth.s1).mean() - reg.predict(truth.s0).mean())
    # linear projection of each x column on s, evaluated at the arm laws
    bias = 0.0
    for col in range(cohort.k):
        proj = fit_linear(cohort.s, cohort.x[:, col])
        bias += gamma[col] * float(proj.predict(truth.s1).mean()
                                   - proj.predict(truth.s0).mean())
    return {"true_ate": truth.ate, "plugin_ate": plugin, "bias": bias}


# ---------------------------------------------------------------------------
# random model generators and sampling
# ---------------------------------------------------------------------------

def random_discrete_scm(rng: RandomSource, case: str = "d", n_x: int = 3,
                        n_s: int = 4, k: int = 1, d: int = 1,
                        positivity_margin: float = 0.02,
                        min_pi_bar: float = 0.0) -> DiscreteSCM:
    """Draw a random finite-support model shaped like one of the cases.

    Positivity is enforced with the given margin; probability cells are
    floored away from zero so density ratios stay bounded.  When
    ``min_pi_bar`` is positive, draws whose aggregated density difference
    pi-bar(s) comes close to zero at any s are rejected (the signed-weight
    identities divide by it).
    """
    gen = rng.generator()
    for _ in range(1000):
        x_values = gen.normal(size=(n_x, k))
        p_x = gen.uniform(0.2, 1.0, size=n_x)
        p_x = p_x / p_x.sum()
        t_given_x = gen.uniform(positivity_margin, 1.0 - positivity_margin, size=n_x)
        s_values = gen.normal(size=(n_s, d))

        def random_rows(rows):
            raw = gen.uniform(0.05, 1.0, size=(rows, n_s))
            return raw / raw.sum(axis=1, keepdims=True)

        if case == "b":
            per_t = random_rows(2)
            s_given_xt = np.stack([np.tile(per_t[t], (n_x, 1)) for t in (0, 1)])
        else:
            s_given_xt = np.stack([random_rows(n_x), random_rows(n_x)])

        if case == "a":
            row = gen.uniform(-2.0, 2.0, size=n_s)
            y_mean = np.tile(row, (n_x, 1))
        elif case == "c":
            col = gen.uniform(-2.0, 2.0, size=n_x)
            y_mean = np.tile(col[:, None], (1, n_s))
        elif case == "e":
            y_mean = gen.uniform(-2.0, 2.0, size=(2, n_x, n_s))
        else:
            y_mean = gen.uniform(-2.0, 2.0, size=(n_x, n_s))

        m = DiscreteSCM(x_values=x_values, p_x=p_x, t_given_x=t_given_x,
                        s_values=s_values, s_given_xt=s_given_xt, y_mean=y_mean)
        if min_pi_bar > 0.0:
            pi_bar = np.abs((m.p_x[:, None] * m.pi()).sum(axis=0))
            if np.min(pi_bar) < min_pi_bar:
                continue
        return m
    raise RuntimeError("rejection sampling failed to produce a valid model")


def random_linear_discrete_scm(rng: RandomSource, n_x: int = 3, n_s: int = 4,
                               k: int = 2, d: int = 2) -> DiscreteSCM:
    """Random model whose outcome mean is linear: gamma.x + delta.s + c."""
    gen = rng.generator()
    base = random_discrete_scm(rng.substream(1), case="d", n_x=n_x, n_s=n_s,
                               k=k, d=d)
    gamma = gen.normal(size=k)
    delta = gen.normal(size=d)
    intercept = float(gen.normal())
    y_mean = (base.x_values @ gamma)[:, None] + (base.s_values @ delta)[None, :] + intercept
    return DiscreteSCM(
        x_values=base.x_values, p_x=base.p_x, t_given_x=base.t_given_x,
        s_values=base.s_values, s_given_xt=base.s_given_xt, y_mean=y_mean,
        linear=(gamma, delta, intercept),
    )


def sample_cohort(m: DiscreteSCM, n: int, rng: RandomSource,
                  regime: str = "observational", y_noise: float = 0.0):
    """Draw a numeric cohort (and potential outcomes) from a discrete model."""
    gen = rng.generator()
    ix = gen.choice(m.n_x, size=n, p=m.p_x)
    if regime == "observational":
        t = (gen.uniform(size=n) < m.t_given_x[ix]).astype(float)
    else:
        t = (gen.uniform(size=n) < 0.5).astype(float)
    is0 = np.empty(n, dtype=np.int64)
    is1 = np.empty(n, dtype=np.int64)
    for xi in range(m.n_x):
        rows = np.nonzero(ix == xi)[0]
        if rows.size == 0:
            continue
        is0[rows] = gen.choice(m.n_s, size=rows.size, p=m.s_given_xt[0, xi])
        is1[rows] = gen.choice(m.n_s, size=rows.size, p=m.s_given_xt[1, xi])
    s_idx = np.where(t == 1.0, is1, is0)

    def mean_at(t_val, s_indices):
        if m.t_dependent_outcome:
            return m.y_mean[t_val, ix, s_indices]
        return m.y_mean[ix, s_indices]

    noise0 = gen.normal(scale=y_noise, size=n) if y_noise > 0 else np.zeros(n)
    noise1 = gen.normal(scale=y_noise, size=n) if y_noise > 0 else np.zeros(n)
    y0 = mean_at(0, is0) + noise0
    y1 = mean_at(1, is1) + noise1
    y = np.where(t == 1.0, y1, y0)

    eff = exact_effects(m)
    cohort = Cohort(x=m.x_values[ix], s=m.s_values[s_idx], t=t, y=y,
                    population_tag="observational" if regime == "observational"
                    else "experimental")
    truth = ScenarioTruth(
        s0=m.s_values[is0], s1=m.s_values[is1], y0=y0, y1=y1,
        cate=eff["tau_y_of_x"][ix], ate=float(np.mean(y1 - y0)),
    )
    return cohort, truth
