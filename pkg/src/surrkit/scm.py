"""Synthetic structural-causal-model cohorts with ground-truth effects.

The generator produces an observational cohort (treatment assigned from the
covariates) and a trial cohort (treatment randomized fair-coin) that share
the covariates and every structural noise, so the two regimes differ only in
the treatment column.  Surrogates come in three blocks:

- ``med``    mediators: affected by treatment and driving the outcome
- ``leaf``   affected by treatment, no effect on the outcome
- ``proxy``  drive the outcome, unaffected by treatment

Both potential-outcome arms are materialized per unit with shared noises, so
unit-level contrasts are well defined, and the conditional effect at each x
is computed in closed form (Gaussian second moments for the squared map).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .core import (
    EXPERIMENTAL,
    OBSERVATIONAL,
    Cohort,
    RandomSource,
    ScenarioTruth,
)
from .errors import DomainMismatch

CASES = ("a", "b", "c", "d", "e", "f")
BLOCKS = ("med", "leaf", "proxy")
BLOCK_RADII = {"med": 0.7, "leaf": 0.5, "proxy": 0.6}
TREATMENT_SLOPE = np.array([0.8, -0.6])
TREATMENT_INTERCEPT = -0.1
INTERCEPT_MEAN = 0.6
INTERCEPT_SD = 0.5
OUTCOME_SLOPE_RADIUS = 1.0

#: documented sub-scenario convention (the reference design names ten
#: variants per case without enumerating them)
VARIANTS = ("baseline", "confounded", "med_scale_0.5", "med_scale_2.0",
            "proxy_scale_2.0")


@dataclass(frozen=True)
class ScenarioSpec:
    """One synthetic configuration: causal case, map shape, and scales."""

    case_id: str
    x_dim: int = 2
    d_med: int = 3
    d_leaf: int = 2
    d_proxy: int = 2
    nonlinearity: str = "linear"
    unobserved_confounder: bool = False
    med_scale: float = 1.0
    leaf_scale: float = 1.0
    proxy_scale: float = 1.0
    direct_effect: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.case_id not in CASES:
            raise DomainMismatch(f"unknown case {self.case_id!r}")
        if self.x_dim not in (2, 5):
            raise DomainMismatch("x_dim must be 2 or 5")
        if self.nonlinearity not in ("linear", "square"):
            raise DomainMismatch(f"unknown nonlinearity {self.nonlinearity!r}")

    @property
    def d(self) -> int:
        return self.d_med + self.d_leaf + self.d_proxy

    def block_scales(self) -> dict:
        return {"med": self.med_scale, "leaf": self.leaf_scale,
                "proxy": self.proxy_scale}

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id, "x_dim": self.x_dim,
            "d_med": self.d_med, "d_leaf": self.d_leaf, "d_proxy": self.d_proxy,
            "nonlinearity": self.nonlinearity,
            "unobserved_confounder": self.unobserved_confounder,
            "med_scale": self.med_scale, "leaf_scale": self.leaf_scale,
            "proxy_scale": self.proxy_scale,
            "direct_effect": self.direct_effect, "seed": self.seed,
        }

    @staticmethod
    def from_dict(doc: dict) -> "ScenarioSpec":
        return ScenarioSpec(**doc)


@dataclass(frozen=True)
class ScenarioParams:
    """Sampled structural coefficients for one scenario draw."""

    spec: ScenarioSpec
    w_xt: np.ndarray
    b_t: float
    w_xs: dict           # block -> (k, d_block)
    b_s: dict            # block -> (d_block,)
    w_xy: np.ndarray
    b_y: float
    w_xm: Optional[np.ndarray] = None      # (k, d_med), case f
    b_m: Optional[np.ndarray] = None       # (d_med,), case f
    w_ms: Optional[dict] = None            # block -> (d_med, d_block), case f


def _hypersphere_columns(gen: np.random.Generator, k: int, d: int,
                         radius: float) -> np.ndarray:
    """(k, d) matrix with each column uniform on the radius-r sphere in R^k."""
    cols = gen.normal(size=(k, d))
    norms = np.linalg.norm(cols, axis=0)
    return radius * cols / norms


def sample_scenario_params(spec: ScenarioSpec, rng: RandomSource) -> ScenarioParams:
    """Draw structural coefficients; case-specific edges are then zeroed."""
    gen = rng.generator()
    k = spec.x_dim
    w_xt = np.zeros(k)
    w_xt[:2] = TREATMENT_SLOPE

    scales = spec.block_scales()
    dims = {"med": spec.d_med, "leaf": spec.d_leaf, "proxy": spec.d_proxy}
    w_xs = {b: _hypersphere_columns(gen, k, dims[b], BLOCK_RADII[b] * scales[b])
            for b in BLOCKS}
    b_s = {b: gen.normal(INTERCEPT_MEAN, INTERCEPT_SD, size=dims[b])
           for b in BLOCKS}
    w_xy = _hypersphere_columns(gen, k, 1, OUTCOME_SLOPE_RADIUS)[:, 0]
    b_y = float(gen.normal(INTERCEPT_MEAN, INTERCEPT_SD))

    w_xm = b_m = w_ms = None
    if spec.case_id == "f":
        w_xm = _hypersphere_columns(gen, k, spec.d_med, BLOCK_RADII["med"])
        b_m = gen.normal(INTERCEPT_MEAN, INTERCEPT_SD, size=spec.d_med)
        w_ms = {b: _hypersphere_columns(gen, spec.d_med, dims[b],
                                        BLOCK_RADII[b] * scales[b])
                for b in BLOCKS}

    if spec.case_id == "a":
        w_xy = np.zeros(k)
    elif spec.case_id == "b":
        w_xs = {b: np.zeros_like(w_xs[b]) for b in BLOCKS}

    return ScenarioParams(spec=spec, w_xt=w_xt, b_t=TREATMENT_INTERCEPT,
                          w_xs=w_xs, b_s=b_s, w_xy=w_xy, b_y=b_y,
                          w_xm=w_xm, b_m=b_m, w_ms=w_ms)


def _phi(values: np.ndarray, nonlinearity: str) -> np.ndarray:
    """Scalar outcome contribution of a surrogate block."""
    if nonlinearity == "square":
        return (values ** 2).sum(axis=1)
    return values.sum(axis=1)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def generate_cohort(params: ScenarioParams, n: int, regime: str,
                    rng: RandomSource) -> tuple[Cohort, ScenarioTruth]:
    """Simulate n units under the observational or trial regime.

    Streams are split by purpose, so the two regimes generated from the same
    source share X and all structural noises and differ only in T.
    """
    if regime not in (OBSERVATIONAL, "trial", EXPERIMENTAL):
        raise DomainMismatch(f"unknown regime {regime!r}")
    spec = params.spec
    k = spec.x_dim

    x = rng.substream(0).generator().normal(size=(n, k))
    eps_t = rng.substream(1).generator().normal(size=n)
    t_uniform = rng.substream(2).generator().uniform(size=n)
    eps = {b: rng.substream(3 + i).generator().normal(size=(n, dims))
           for i, (b, dims) in enumerate(
               (("med", spec.d_med), ("leaf", spec.d_leaf), ("proxy", spec.d_proxy)))}
    eps_y = rng.substream(6).generator().normal(size=n)
    u = (rng.substream(7).generator().normal(size=n)
         if spec.unobserved_confounder else np.zeros(n))
    eps_m = (rng.substream(8).generator().normal(size=(n, spec.d_med))
             if spec.case_id == "f" else None)

    if regime == OBSERVATIONAL:
        p_treat = _sigmoid(x @ params.w_xt + params.b_t + eps_t + u)
    else:
        p_treat = np.full(n, 0.5)
    t = (t_uniform < p_treat).astype(float)

    u_col = u[:, None]

    def surrogate_arms(block):
        """(s(0), s(1)) for one block, shared noise across arms."""
        lin = x @ params.w_xs[block] + params.b_s[block]
        noise = eps[block] + u_col
        if spec.case_id == "f":
            m_lin = x @ params.w_xm + params.b_m
            m0 = m_lin + eps_m + u_col
            m1 = 2.0 * m_lin + eps_m + u_col
            s0 = lin + m0 @ params.w_ms[block] + noise
            s1 = lin + m1 @ params.w_ms[block] + noise
            return s0, s1
        if block == "proxy":
            s = lin + noise
            return s, s
        return lin + noise, 2.0 * lin + noise

    arms = {b: surrogate_arms(b) for b in BLOCKS}
    s0 = np.hstack([arms[b][0] for b in BLOCKS])
    s1 = np.hstack([arms[b][1] for b in BLOCKS])

    base_y = params.b_y + x @ params.w_xy + eps_y + u

    def outcome(arm, t_val):
        if spec.case_id == "c":
            return base_y
        if spec.case_id == "f":
            m_lin = x @ params.w_xm + params.b_m
            m = (1.0 + t_val) * m_lin + eps_m + u_col
            return base_y + _phi(m, spec.nonlinearity)
        med = arms["med"][arm]
        proxy = arms["proxy"][arm]
        total = base_y + _phi(med, spec.nonlinearity) + _phi(proxy, spec.nonlinearity)
        if spec.case_id == "e":
            total = total + spec.direct_effect * t_val
        return total

    y0 = outcome(0, 0.0)
    y1 = outcome(1, 1.0)
    s = np.where(t[:, None] == 1.0, s1, s0)
    y = np.where(t == 1.0, y1, y0)

    cohort = Cohort(
        x=x, s=s, t=t, y=y,
        population_tag=OBSERVATIONAL if regime == OBSERVATIONAL else EXPERIMENTAL,
        s_names=tuple([f"med_{i}" for i in range(spec.d_med)]
                      + [f"leaf_{i}" for i in range(spec.d_leaf)]
                      + [f"proxy_{i}" for i in range(spec.d_proxy)]),
    )
    truth = ScenarioTruth(s0=s0, s1=s1, y0=y0, y1=y1,
                          cate=analytic_cate(params, x),
                          ate=float(np.mean(y1 - y0)))
    return cohort, truth


def analytic_cate(params: ScenarioParams, x: np.ndarray) -> np.ndarray:
    """Noise-free conditional effect tau_Y(x) for each row of x.

    The treated mediator arm doubles the systematic part a(x), so the linear
    map contributes sum_j a_j(x) and the squared map contributes
    E[(2a + eps)^2 - (a + eps)^2 | x] = 3 a_j(x)^2 per dimension.
    """
    spec = params.spec
    if spec.case_id == "c":
        return np.zeros(x.shape[0])
    if spec.case_id == "f":
        a = x @ params.w_xm + params.b_m
    else:
        a = x @ params.w_xs["med"] + params.b_s["med"]
    if spec.nonlinearity == "square":
        cate = 3.0 * (a ** 2).sum(axis=1)
    else:
        cate = a.sum(axis=1)
    if spec.case_id == "e":
        cate = cate + spec.direct_effect
    return cate


def nested_monte_carlo_cate(params: ScenarioParams, x_row: np.ndarray,
                            rng: RandomSource, draws: int = 10_000) -> float:
    """Estimate tau_Y(x) at a fixed x by re-drawing the structural noises.

    Slow fallback used to validate the closed-form conditional effects.
    """
    spec = params.spec
    gen = rng.generator()
    x = np.tile(np.asarray(x_row, dtype=float), (draws, 1))
    if spec.case_id == "c":
        return 0.0
    u = (gen.normal(size=(draws, 1))
         if spec.unobserved_confounder else np.zeros((draws, 1)))
    if spec.case_id == "f":
        m_lin = x @ params.w_xm + params.b_m
        eps_m = gen.normal(size=(draws, spec.d_med))
        contrast = (_phi(2.0 * m_lin + eps_m + u, spec.nonlinearity)
                    - _phi(m_lin + eps_m + u, spec.nonlinearity))
    else:
        lin = x @ params.w_xs["med"] + params.b_s["med"]
        eps_med = gen.normal(size=(draws, spec.d_med))
        contrast = (_phi(2.0 * lin + eps_med + u, spec.nonlinearity)
                    - _phi(lin + eps_med + u, spec.nonlinearity))
    if spec.case_id == "e":
        contrast = contrast + spec.direct_effect
    return float(contrast.mean())


# ---------------------------------------------------------------------------
# the confounded outcome-regression counterexample
# ---------------------------------------------------------------------------

def appendix_e1_scenario(n: int, rng: RandomSource,
                         x_to_y: float = 5.0) -> tuple[Cohort, ScenarioTruth]:
    """Worked counterexample: unconfounded treatment, confounded regression.

    X ~ N(0,1), T ~ Bernoulli(1/2), S = X T + T + eps_S, Y = c X + S + eps_Y
    with c = 5 by default.  The population ATE is exactly 1 (the unit-level
    contrast is X + 1), yet the regression of Y on S inherits the X-S
    association and its plug-in effect estimate is biased upward.
    """
    x = rng.substream(0).generator().normal(size=(n, 1))
    t = (rng.substream(1).generator().uniform(size=n) < 0.5).astype(float)
    eps_s = rng.substream(2).generator().normal(size=n)
    eps_y = rng.substream(3).generator().normal(size=n)

    s0 = eps_s[:, None]
    s1 = (x[:, 0] + 1.0 + eps_s)[:, None]
    y0 = x_to_y * x[:, 0] + s0[:, 0] + eps_y
    y1 = x_to_y * x[:, 0] + s1[:, 0] + eps_y

    s = np.where(t[:, None] == 1.0, s1, s0)
    y = np.where(t == 1.0, y1, y0)
    cohort = Cohort(x=x, s=s, t=t, y=y, population_tag=OBSERVATIONAL)
    # the population effect is exactly 1 by construction: E[X + 1] = 1
    truth = ScenarioTruth(s0=s0, s1=s1, y0=y0, y1=y1,
                          cate=x[:, 0] + 1.0, ate=1.0)
    return cohort, truth


# ---------------------------------------------------------------------------
# scenario suite enumeration
# ---------------------------------------------------------------------------

def _variant_fields(variant: str) -> dict:
    if variant == "baseline":
        return {}
    if variant == "confounded":
        return {"unobserved_confounder": True}
    if variant.startswith("med_scale_"):
        return {"med_scale": float(variant.rsplit("_", 1)[1])}
    if variant.startswith("proxy_scale_"):
        return {"proxy_scale": float(variant.rsplit("_", 1)[1])}
    raise DomainMismatch(f"unknown sub-scenario variant {variant!r}")


def scenario_suite(family: str = "composite", seeds=(0,),
                   cases=CASES, x_dim: int = 2) -> list:
    """Enumerate the sub-scenario lattice crossed with seeds.

    The ten sub-scenarios per case pair each of the five named variants
    (baseline, added unobserved confounder, mediator radius halved or
    doubled, proxy radius doubled) with the linear and squared outcome maps;
    the ``linear`` family keeps only the linear half.
    """
    if family not in ("composite", "linear"):
        raise DomainMismatch(f"unknown scenario family {family!r}")
    nonlinearities = ("linear",) if family == "linear" else ("linear", "square")
    specs = []
    for case in cases:
        for nonlinearity in nonlinearities:
            for variant in VARIANTS:
                fields = _variant_fields(variant)
                for seed in seeds:
                    specs.append(ScenarioSpec(
                        case_id=case, x_dim=x_dim, nonlinearity=nonlinearity,
                        seed=int(seed), **fields))
    return specs
