"""Plug-in endpoint learners.

Two objective-driven learners plus the standard baselines:

- outcome regression       y ~ s
- regress-select-regress   y ~ s, keep the largest standardized coefficient,
                           refit on that single column
- surrogate index          y ~ (x, s); not a plug-in endpoint (uses x)
- bound regression         weighted regression of h-hat(x, s) on s, with
                           weights derived from propensity and surrogate
                           scores that emphasize treatment-informative points
- surrogate sampling       draws counterfactual surrogates from per-arm
                           conditional samplers and fits f to match the
                           h-hat contrast per unit

Every returned SurrogateModel is a function of the surrogate vector alone;
pre-treatment covariates never enter a plug-in evaluation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .core import EXPERIMENTAL, Cohort, DensityRatio, RandomSource, make_rng
from .errors import (
    AllZeroWeights,
    DegenerateContrasts,
    MissingOutcome,
    SingleArmData,
    UnfittedNuisance,
)
from .models import (
    TREE_GRID,
    ForestParams,
    GbmParams,
    LinearModel,
    LogisticModel,
    TreeModel,
    TreeParams,
    cross_validate_grid,
    fit_forest,
    fit_gbm,
    fit_linear,
    fit_logistic,
    fit_tree,
)

DEFAULT_CLIP = (0.3, 0.7)
DEFAULT_L = 50
DEFAULT_L1 = 0.01
DEGENERATE_WEIGHT_MEAN = 1e-8
DEGENERATE_CONTRAST = 1e-8

LEARNER_IDS = (
    "outcome_reg_lin", "outcome_reg_tree",
    "reg_sel_reg_lin", "reg_sel_reg_tree",
    "surrogate_index_lin", "surrogate_index_tree", "surrogate_index_gbm",
    "bound_reg_lin", "bound_reg_tree", "bound_reg_bintree",
    "surrogate_sampling_lin",
)


# ---------------------------------------------------------------------------
# the plug-in endpoint container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurrogateModel:
    """A learned endpoint f: R^d -> R with affine post-calibration.

    ``binarize_thresholds`` is set only for the quantile-indicator tree
    variant, which routes on 1[s_j <= q] features.
    """

    form: str                      # "linear" | "tree" | "binarized_tree"
    input_dim: int
    linear: Optional[LinearModel] = None
    tree: Optional[TreeModel] = None
    binarize_thresholds: Optional[np.ndarray] = None   # (n_bins, 2): (col, q)
    scale: float = 1.0
    offset: float = 0.0

    def raw(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if s.ndim == 1:
            s = s.reshape(1, -1)
        if self.form == "linear":
            return self.linear.predict(s)
        if self.form == "tree":
            return self.tree.predict(s)
        if self.form == "binarized_tree":
            cols = self.binarize_thresholds[:, 0].astype(int)
            qs = self.binarize_thresholds[:, 1]
            z = (s[:, cols] <= qs).astype(float)
            return self.tree.predict(z)
        raise ValueError(f"unknown surrogate form {self.form!r}")

    def predict(self, s: np.ndarray) -> np.ndarray:
        """Calibrated endpoint values; a function of the surrogates only."""
        return self.scale * self.raw(s) + self.offset

    def with_calibration(self, scale: float, offset: float) -> "SurrogateModel":
        return replace(self, scale=scale, offset=offset)


def _require_outcome(cohort: Cohort):
    if cohort.y is None:
        raise MissingOutcome("this learner needs outcome data (y present)")


def _concat_xs(x: np.ndarray, s: np.ndarray) -> np.ndarray:
    return np.hstack([x, s])


# ---------------------------------------------------------------------------
# nuisances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionalSampler:
    """Residual-bootstrap approximation of p(S | x, T=t).

    A draw is the fitted per-arm conditional mean plus a whole residual row
    resampled from that arm's training pool, preserving the dependence
    between surrogate dimensions.
    """

    mean_models: dict          # t -> list of per-dimension regressors
    residual_pools: dict       # t -> (n_t, d) training residuals
    L: int = DEFAULT_L

    def conditional_mean(self, x: np.ndarray, t: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        return np.column_stack([m.predict(x) for m in self.mean_models[t]])

    def draw(self, x: np.ndarray, t: int, L: int,
             rng: RandomSource) -> np.ndarray:
        """(n, L, d) counterfactual draws with one sub-stream per unit."""
        means = self.conditional_mean(x, t)
        pool = self.residual_pools[t]
        n, d = means.shape[0], pool.shape[1]
        out = np.empty((n, L, d))
        for i in range(n):
            gen = rng.substream(i).generator()
            rows = gen.integers(0, pool.shape[0], size=L)
            out[i] = means[i] + pool[rows]
        return out


@dataclass(frozen=True)
class NuisanceBundle:
    """Fitted nuisances shared by the objective-driven learners."""

    h_hat: object = None            # regressor over (x, s)
    e_hat: Optional[LogisticModel] = None
    rho_hat: Optional[LogisticModel] = None
    sampler: Optional[ConditionalSampler] = None
    sigma2: float = 0.0             # residual variance of h_hat
    k: int = 0
    d: int = 0

    def predict_h(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        if self.h_hat is None:
            raise UnfittedNuisance("outcome model h_hat is not fitted")
        return self.h_hat.predict(_concat_xs(x, s))


def fit_surrogate_index(outcome_data: Cohort, family: str = "gbm",
                        rng: Optional[RandomSource] = None,
                        grid: Optional[dict] = None):
    """Fit h_hat(x, s) ~ E[Y | x, s] on outcome data."""
    _require_outcome(outcome_data)
    xs = _concat_xs(outcome_data.x, outcome_data.s)
    y = outcome_data.y
    if family == "linear":
        return fit_linear(xs, y)
    if family == "tree":
        best = cross_validate_grid(_tree_trainer, grid or TREE_GRID, xs, y,
                                   rng=rng)
        return fit_tree(xs, y, params=TreeParams(**best))
    if family == "gbm":
        return fit_gbm(xs, y)
    raise ValueError(f"unknown surrogate-index family {family!r}")


def _tree_trainer(z, y, w, **params):
    return fit_tree(z, y, weights=w, params=TreeParams(**params))


def fit_nuisances(treatment_data: Cohort, outcome_data: Cohort,
                  h_family: str = "gbm", l2_strength: float = 1.0,
                  sampler_config: Optional[dict] = None,
                  rng: Optional[RandomSource] = None) -> NuisanceBundle:
    """Fit the full bundle: h_hat, propensity, surrogate score, and sampler.

    When the treatment cohort is tagged experimental, the propensity is fixed
    to the empirical treated share instead of a regression on x.
    """
    rng = rng or make_rng(0)
    h_hat = fit_surrogate_index(outcome_data, family=h_family,
                                rng=rng.substream(0))
    resid = outcome_data.y - h_hat.predict(
        _concat_xs(outcome_data.x, outcome_data.s))
    sigma2 = float(np.mean(resid ** 2))

    t = treatment_data.t
    if t is None:
        raise SingleArmData("treatment data needs a t column")
    if treatment_data.population_tag == EXPERIMENTAL:
        share = float(np.clip(t.mean(), 1e-12, 1 - 1e-12))
        e_hat = LogisticModel(coefficients=np.zeros(treatment_data.k),
                              intercept=math.log(share / (1.0 - share)))
    else:
        e_hat = fit_logistic(treatment_data.x, t, l2_strength=l2_strength)
    rho_hat = fit_logistic(_concat_xs(treatment_data.x, treatment_data.s), t,
                           l2_strength=l2_strength)
    sampler = fit_conditional_sampler(treatment_data,
                                      config=sampler_config,
                                      rng=rng.substream(1))
    return NuisanceBundle(h_hat=h_hat, e_hat=e_hat, rho_hat=rho_hat,
                          sampler=sampler, sigma2=sigma2,
                          k=treatment_data.k, d=treatment_data.d)


def fit_conditional_sampler(treatment_data: Cohort,
                            config: Optional[dict] = None,
                            rng: Optional[RandomSource] = None) -> ConditionalSampler:
    """Per-arm conditional-mean regressors plus joint residual pools.

    ``config`` keys: mean_family ("forest" | "linear"), n_trees, max_depth,
    min_samples_leaf, L.
    """
    config = dict(config or {})
    rng = rng or make_rng(0)
    t = treatment_data.t
    if t is None or len(np.unique(t)) < 2:
        raise SingleArmData("conditional sampler needs both treatment arms")
    mean_family = config.get("mean_family", "forest")
    L = int(config.get("L", DEFAULT_L))

    mean_models: dict = {}
    residual_pools: dict = {}
    for arm in (0, 1):
        mask = t == arm
        if mask.sum() < 2:
            raise SingleArmData(f"arm {arm} has fewer than 2 units")
        x_arm = treatment_data.x[mask]
        s_arm = treatment_data.s[mask]
        models = []
        fitted = np.empty_like(s_arm)
        for j in range(treatment_data.d):
            if mean_family == "linear":
                model = fit_linear(x_arm, s_arm[:, j])
            elif mean_family == "forest":
                params = ForestParams(
                    n_trees=int(config.get("n_trees", 100)),
                    max_depth=config.get("max_depth", 8),
                    min_samples_leaf=int(config.get("min_samples_leaf", 5)),
                )
                model = fit_forest(x_arm, s_arm[:, j], params=params,
                                   rng=rng.substream(arm * 1000 + j))
            else:
                raise ValueError(f"unknown sampler mean family {mean_family!r}")
            models.append(model)
            fitted[:, j] = model.predict(x_arm)
        mean_models[arm] = models
        residual_pools[arm] = s_arm - fitted
    return ConditionalSampler(mean_models=mean_models,
                              residual_pools=residual_pools, L=L)


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------

def fit_outcome_regression(outcome_data: Cohort, family: str = "linear",
                           rng: Optional[RandomSource] = None,
                           grid: Optional[dict] = None) -> SurrogateModel:
    """Regression of y on the surrogates only."""
    _require_outcome(outcome_data)
    s, y = outcome_data.s, outcome_data.y
    if family == "linear":
        return SurrogateModel(form="linear", input_dim=outcome_data.d,
                              linear=fit_linear(s, y))
    if family == "tree":
        best = cross_validate_grid(_tree_trainer, grid or TREE_GRID, s, y,
                                   rng=rng)
        return SurrogateModel(form="tree", input_dim=outcome_data.d,
                              tree=fit_tree(s, y, params=TreeParams(**best)))
    raise ValueError(f"unknown outcome-regression family {family!r}")


def _remap_single_feature_tree(tree: TreeModel, column: int, d: int) -> TreeModel:
    """Lift a tree fit on one column into the full d-dimensional input."""
    feature = np.where(tree.feature >= 0, column, tree.feature)
    return TreeModel(feature=feature, threshold=tree.threshold,
                     children_left=tree.children_left,
                     children_right=tree.children_right,
                     value=tree.value, weight=tree.weight, count=tree.count,
                     n_features=d, depth=tree.depth)


def fit_reg_sel_reg(outcome_data: Cohort, family: str = "linear",
                    rng: Optional[RandomSource] = None,
                    grid: Optional[dict] = None) -> SurrogateModel:
    """Select the surrogate with the largest standardized coefficient, then
    regress on that single variable."""
    _require_outcome(outcome_data)
    s, y = outcome_data.s, outcome_data.y
    sd = s.std(axis=0)
    scaled = (s - s.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    stage1 = fit_linear(scaled, y)
    magnitudes = np.where(sd > 0, np.abs(stage1.coefficients), -np.inf)
    # ties (within solver noise) resolve to the lowest column index
    top = magnitudes.max()
    j = int(np.argmax(magnitudes >= top - 1e-9 * max(top, 1.0)))

    column = s[:, [j]]
    if family == "linear":
        narrow = fit_linear(column, y)
        coef = np.zeros(outcome_data.d)
        coef[j] = narrow.coefficients[0]
        model = LinearModel(coefficients=coef, intercept=narrow.intercept)
        return SurrogateModel(form="linear", input_dim=outcome_data.d,
                              linear=model)
    if family == "tree":
        best = cross_validate_grid(_tree_trainer, grid or TREE_GRID, column, y,
                                   rng=rng)
        narrow = fit_tree(column, y, params=TreeParams(**best))
        return SurrogateModel(
            form="tree", input_dim=outcome_data.d,
            tree=_remap_single_feature_tree(narrow, j, outcome_data.d))
    raise ValueError(f"unknown reg-sel-reg family {family!r}")


# ---------------------------------------------------------------------------
# bound regression
# ---------------------------------------------------------------------------

def compute_bound_weights(treatment_data: Cohort, bundle: NuisanceBundle,
                          scheme: str = "w2", clip: tuple = DEFAULT_CLIP,
                          density_ratio: Optional[DensityRatio] = None,
                          clip_surrogate_score: bool = False) -> np.ndarray:
    """Per-unit regression weights from the nuisance scores.

    w2    = (rho/e - (1-rho)/(1-e))^2
    wplus =  rho/e + (1-rho)/(1-e)
    w1    = |rho/e - (1-rho)/(1-e)|

    Clipping bounds the propensity e-hat, which enters through its
    reciprocal; the surrogate score rho-hat is bounded multiplicatively and
    is left unclipped by default (clip it via ``clip_surrogate_score``).
    A non-identity density ratio multiplies each unit's weight.
    """
    if bundle.e_hat is None or bundle.rho_hat is None:
        raise UnfittedNuisance("bound weights need fitted e_hat and rho_hat")
    lo, hi = clip
    e = np.clip(bundle.e_hat.predict(treatment_data.x), lo, hi)
    rho = bundle.rho_hat.predict(
        _concat_xs(treatment_data.x, treatment_data.s))
    if clip_surrogate_score:
        rho = np.clip(rho, lo, hi)
    eta = rho / e - (1.0 - rho) / (1.0 - e)
    if scheme == "w2":
        weights = eta ** 2
    elif scheme == "wplus":
        weights = rho / e + (1.0 - rho) / (1.0 - e)
    elif scheme == "w1":
        weights = np.abs(eta)
    else:
        raise ValueError(f"unknown bound-weight scheme {scheme!r}")
    if density_ratio is not None and density_ratio.kind != "identity":
        weights = weights * density_ratio.values(treatment_data.x)
    return weights


def fit_bound_regression(treatment_data: Cohort, bundle: NuisanceBundle,
                         scheme: str = "w2", family: str = "linear-lasso",
                         l1_strength: float = DEFAULT_L1,
                         clip: tuple = DEFAULT_CLIP,
                         density_ratio: Optional[DensityRatio] = None,
                         rng: Optional[RandomSource] = None,
                         n_bins: int = 9,
                         tree_params: Optional[dict] = None,
                         grid: Optional[dict] = None) -> SurrogateModel:
    """Weighted regression of h_hat(x, s) on s under a bound-weight scheme."""
    weights = compute_bound_weights(treatment_data, bundle, scheme=scheme,
                                    clip=clip, density_ratio=density_ratio)
    if float(weights.mean()) < DEGENERATE_WEIGHT_MEAN:
        raise AllZeroWeights(
            "bound weights are numerically zero: the surrogates carry no "
            "treatment information given x")
    s = treatment_data.s
    targets = bundle.predict_h(treatment_data.x, s)
    d = treatment_data.d

    if family == "linear-ols":
        return SurrogateModel(form="linear", input_dim=d,
                              linear=fit_linear(s, targets, weights=weights))
    if family == "linear-lasso":
        model = fit_linear(s, targets, weights=weights, l1_strength=l1_strength)
        return SurrogateModel(form="linear", input_dim=d, linear=model)
    if family == "tree":
        best = cross_validate_grid(_tree_trainer, grid or TREE_GRID, s, targets,
                                   weights=weights, rng=rng)
        tree = fit_tree(s, targets, weights=weights, params=TreeParams(**best))
        return SurrogateModel(form="tree", input_dim=d, tree=tree)
    if family == "bintree":
        return _fit_binarized_tree(s, targets, weights, d, n_bins,
                                   tree_params or {})
    raise ValueError(f"unknown bound-regression family {family!r}")


def _fit_binarized_tree(s, targets, weights, d, n_bins, tree_params) -> SurrogateModel:
    """Greedy weighted CART over quantile threshold indicators 1[s_j <= q].

    Stand-in for an exact binary-feature tree search: same weighted
    squared-error objective and weighted-mean leaf rule, greedy splits.
    """
    quantiles = np.linspace(0.0, 1.0, n_bins + 2)[1:-1]
    pairs = []
    columns = []
    for j in range(d):
        qs = np.quantile(s[:, j], quantiles)
        for q in np.unique(qs):
            pairs.append((j, q))
            columns.append((s[:, j] <= q).astype(float))
    z = np.column_stack(columns)
    params = TreeParams(
        max_depth=int(tree_params.get("max_depth", 3)),
        min_samples_leaf=int(tree_params.get("min_samples_leaf", 50)),
        min_samples_split=int(tree_params.get("min_samples_split", 100)),
        ccp_alpha=float(tree_params.get("ccp_alpha", 0.0)),
    )
    tree = fit_tree(z, targets, weights=weights, params=params)
    return SurrogateModel(form="binarized_tree", input_dim=d, tree=tree,
                          binarize_thresholds=np.array(pairs, dtype=float))


# ---------------------------------------------------------------------------
# surrogate sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingContrasts:
    """Per-unit averaged counterfactual draws used by surrogate sampling.

    h_contrast[j] = mean_l h(x_j, s1_jl) - mean_l h(x_j, s0_jl)
    s_contrast[j] = mean_l s1_jl - mean_l s0_jl
    """

    h_contrast: np.ndarray      # (m,)
    s_contrast: np.ndarray      # (m, d)
    draws0: Optional[np.ndarray] = None   # (m, L, d)
    draws1: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None  # density-ratio values


def sample_counterfactual_contrasts(treatment_data: Cohort,
                                    bundle: NuisanceBundle,
                                    L: int = DEFAULT_L,
                                    rng: Optional[RandomSource] = None,
                                    density_ratio: Optional[DensityRatio] = None,
                                    keep_draws: bool = True) -> SamplingContrasts:
    """Draw L counterfactual surrogates per arm per unit and average."""
    if bundle.sampler is None:
        raise UnfittedNuisance("surrogate sampling needs a fitted sampler")
    if bundle.h_hat is None:
        raise UnfittedNuisance("surrogate sampling needs a fitted h_hat")
    rng = rng or make_rng(0)
    x = treatment_data.x
    n, d = x.shape[0], treatment_data.d
    draws0 = bundle.sampler.draw(x, 0, L, rng.substream(0))
    draws1 = bundle.sampler.draw(x, 1, L, rng.substream(1))

    def h_mean(draws):
        flat = draws.reshape(n * L, d)
        xs = _concat_xs(np.repeat(x, L, axis=0), flat)
        return bundle.h_hat.predict(xs).reshape(n, L).mean(axis=1)

    h_contrast = h_mean(draws1) - h_mean(draws0)
    s_contrast = draws1.mean(axis=1) - draws0.mean(axis=1)
    weights = None
    if density_ratio is not None and density_ratio.kind != "identity":
        weights = density_ratio.values(x)
    return SamplingContrasts(
        h_contrast=h_contrast, s_contrast=s_contrast,
        draws0=draws0 if keep_draws else None,
        draws1=draws1 if keep_draws else None,
        weights=weights)


def _ista_minimize(d_mat, c, weights, lam, max_iter=200_000, tol=1e-12):
    """Proximal-gradient minimizer of the surrogate-sampling objective.

    (1/2m) sum_j w_j (c_j - beta . d_j)^2 + lam ||beta||_1
    """
    m, p = d_mat.shape
    w = np.ones(m) if weights is None else weights
    wd = d_mat * w[:, None]
    hess = wd.T @ d_mat / m
    lip = float(np.linalg.eigvalsh(hess).max())
    step = 1.0 / max(lip, 1e-12)
    beta = np.zeros(p)
    for _ in range(max_iter):
        grad = -(wd.T @ (c - d_mat @ beta)) / m
        candidate = beta - step * grad
        new = np.sign(candidate) * np.maximum(np.abs(candidate) - lam * step, 0.0)
        if np.max(np.abs(new - beta)) < tol:
            beta = new
            break
        beta = new
    return beta


def fit_surrogate_sampling(treatment_data: Cohort, bundle: NuisanceBundle,
                           L: int = DEFAULT_L,
                           l1_strength: float = DEFAULT_L1,
                           density_ratio: Optional[DensityRatio] = None,
                           rng: Optional[RandomSource] = None,
                           solver: str = "closed_form",
                           contrasts: Optional[SamplingContrasts] = None,
                           calibrate: bool = True):
    """Fit a linear endpoint by matching per-unit counterfactual contrasts.

    For a linear f the per-unit objective term reduces to
    (c_j - beta . d_j)^2 with c_j the averaged h-hat contrast and d_j the
    averaged surrogate contrast, solved by (Lasso) regression of c on d
    without an intercept; translation invariance of the objective leaves the
    level to post-calibration against h-hat.

    Returns (model, contrasts).
    """
    if contrasts is None:
        contrasts = sample_counterfactual_contrasts(
            treatment_data, bundle, L=L, rng=rng, density_ratio=density_ratio)
    d_mat, c = contrasts.s_contrast, contrasts.h_contrast
    if float(np.max(np.abs(d_mat))) < DEGENERATE_CONTRAST:
        raise DegenerateContrasts(
            "all counterfactual surrogate contrasts are zero: treatment has "
            "no measurable effect on the surrogates")

    if solver == "closed_form":
        fitted = fit_linear(d_mat, c, weights=contrasts.weights,
                            l1_strength=l1_strength, fit_intercept=False)
        beta = fitted.coefficients
    elif solver == "gradient":
        beta = _ista_minimize(d_mat, c, contrasts.weights, l1_strength)
    else:
        raise ValueError(f"unknown solver {solver!r}")

    model = SurrogateModel(form="linear", input_dim=treatment_data.d,
                           linear=LinearModel(coefficients=beta, intercept=0.0))
    if calibrate:
        model = calibrate_surrogate(model, treatment_data, h_hat=bundle.h_hat)
    return model, contrasts


def estimate_sampling_risk(f: SurrogateModel, contrasts: SamplingContrasts,
                           h_hat=None) -> float:
    """Training-objective value of f on the augmented contrasts.

    Mean over units of the squared difference between the h-hat contrast and
    the f contrast; reusable for comparing candidate endpoints.
    """
    if contrasts.draws0 is not None:
        n, L, d = contrasts.draws0.shape
        f0 = f.predict(contrasts.draws0.reshape(n * L, d)).reshape(n, L).mean(axis=1)
        f1 = f.predict(contrasts.draws1.reshape(n * L, d)).reshape(n, L).mean(axis=1)
        f_contrast = f1 - f0
    else:
        # affine fallback: the mean of an affine f over draws is f at the mean
        f_contrast = f.scale * (contrasts.s_contrast @ f.linear.coefficients)
    gap = contrasts.h_contrast - f_contrast
    if contrasts.weights is None:
        return float(np.mean(gap ** 2))
    return float(np.mean(contrasts.weights * gap ** 2))


def calibrate_surrogate(f: SurrogateModel, outcome_data: Cohort,
                        h_hat=None) -> SurrogateModel:
    """Shift the endpoint so its cohort mean matches the outcome level.

    Uses the observed y when present, otherwise the fitted h_hat over the
    cohort.  Only the offset moves; the scale is pinned by the objective.
    """
    if outcome_data.y is not None:
        target = float(outcome_data.y.mean())
    elif h_hat is not None:
        target = float(h_hat.predict(
            _concat_xs(outcome_data.x, outcome_data.s)).mean())
    else:
        raise MissingOutcome("calibration needs y or a fitted h_hat")
    current = float(f.predict(outcome_data.s).mean())
    return f.with_calibration(scale=f.scale, offset=f.offset + target - current)


# ---------------------------------------------------------------------------
# learner registry (method identifiers used by experiment configs)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FittedEndpoint:
    """A fitted method plus how to evaluate it in a trial."""

    method_id: str
    surrogate: Optional[SurrogateModel]
    h_model: object = None
    uses_pretreatment: bool = False
    options: dict = field(default_factory=dict)

    def trial_values(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        if self.uses_pretreatment:
            return self.h_model.predict(_concat_xs(x, s))
        return self.surrogate.predict(s)


def fit_learner(method_id: str, treatment_data: Cohort, outcome_data: Cohort,
                options: Optional[dict] = None,
                bundle: Optional[NuisanceBundle] = None,
                rng: Optional[RandomSource] = None) -> FittedEndpoint:
    """Fit one registered method by identifier string."""
    if method_id not in LEARNER_IDS:
        raise ValueError(f"unknown learner id {method_id!r}")
    options = dict(options or {})
    rng = rng or make_rng(0)
    clip = tuple(options.get("clip", DEFAULT_CLIP))
    lam = float(options.get("l1_strength", DEFAULT_L1))
    L = int(options.get("L", DEFAULT_L))
    dr = options.get("density_ratio")
    grid = options.get("tree_grid")

    def need_bundle() -> NuisanceBundle:
        if bundle is not None:
            return bundle
        return fit_nuisances(
            treatment_data, outcome_data,
            h_family=options.get("h_family", "gbm"),
            sampler_config=options.get("sampler"),
            rng=rng.substream(99))

    if method_id.startswith("outcome_reg"):
        family = "tree" if method_id.endswith("tree") else "linear"
        model = fit_outcome_regression(outcome_data, family=family,
                                       rng=rng.substream(1), grid=grid)
        return FittedEndpoint(method_id, model, options=options)
    if method_id.startswith("reg_sel_reg"):
        family = "tree" if method_id.endswith("tree") else "linear"
        model = fit_reg_sel_reg(outcome_data, family=family,
                                rng=rng.substream(1), grid=grid)
        return FittedEndpoint(method_id, model, options=options)
    if method_id.startswith("surrogate_index"):
        family = method_id.rsplit("_", 1)[1]
        family = {"lin": "linear"}.get(family, family)
        h_model = fit_surrogate_index(outcome_data, family=family,
                                      rng=rng.substream(1), grid=grid)
        return FittedEndpoint(method_id, None, h_model=h_model,
                              uses_pretreatment=True, options=options)
    if method_id.startswith("bound_reg"):
        family = {"bound_reg_lin": options.get("linear_family", "linear-lasso"),
                  "bound_reg_tree": "tree",
                  "bound_reg_bintree": "bintree"}[method_id]
        model = fit_bound_regression(
            treatment_data, need_bundle(), scheme=options.get("scheme", "w2"),
            family=family, l1_strength=lam, clip=clip, density_ratio=dr,
            rng=rng.substream(2),
            tree_params=options.get("tree_params"), grid=grid)
        return FittedEndpoint(method_id, model, options=options)
    if method_id == "surrogate_sampling_lin":
        model, _ = fit_surrogate_sampling(
            treatment_data, need_bundle(), L=L, l1_strength=lam,
            density_ratio=dr, rng=rng.substream(3))
        return FittedEndpoint(method_id, model, options=options)
    raise ValueError(f"unhandled learner id {method_id!r}")
