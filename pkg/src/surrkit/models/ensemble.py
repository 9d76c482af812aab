"""Random forests and exact-split least-squares gradient boosting."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core import RandomSource, make_rng
from ..errors import NonFiniteInput, TooFewSamples, WidthMismatch
from .tree import TreeModel, TreeParams, fit_tree

FOREST = "forest"
BOOSTING = "boosting"


@dataclass(frozen=True)
class EnsembleModel:
    """Bagged or boosted collection of TreeModels.

    forest:   prediction = unweighted mean of member predictions
    boosting: prediction = base_score + learning_rate * sum of members
    """

    trees: tuple
    kind: str
    learning_rate: float = 1.0
    base_score: float = 0.0
    n_features: int = 0

    def predict(self, features: np.ndarray) -> np.ndarray:
        z = np.asarray(features, dtype=float)
        if z.ndim == 1:
            z = z.reshape(1, -1)
        if z.shape[1] != self.n_features:
            raise WidthMismatch(
                f"expected {self.n_features} features, got {z.shape[1]}")
        if self.kind == BOOSTING:
            out = np.full(z.shape[0], self.base_score)
            for tree in self.trees:
                out += self.learning_rate * tree.predict(z)
            return out
        out = np.zeros(z.shape[0])
        for tree in self.trees:
            out += tree.predict(z)
        return out / max(len(self.trees), 1)


@dataclass
class ForestParams:
    n_trees: int = 100
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    min_samples_split: int = 2
    features_per_split: Optional[int] = None
    bootstrap: bool = True


def fit_forest(features, targets, params: Optional[ForestParams] = None,
               rng: Optional[RandomSource] = None) -> EnsembleModel:
    """Bagged CART trees with per-split feature subsampling."""
    params = params or ForestParams()
    rng = rng or make_rng(0)
    z = np.asarray(features, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    y = np.asarray(targets, dtype=float).ravel()
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(y))):
        raise NonFiniteInput("input contains NaN or infinity")
    n, p = z.shape
    if n < 2:
        raise TooFewSamples("forest fitting needs n >= 2")

    tree_params = TreeParams(
        max_depth=params.max_depth,
        min_samples_leaf=params.min_samples_leaf,
        min_samples_split=params.min_samples_split,
    )
    trees = []
    for i in range(params.n_trees):
        gen = rng.substream(i).generator()
        if params.bootstrap:
            idx = gen.integers(0, n, size=n)
            zi, yi = z[idx], y[idx]
        else:
            zi, yi = z, y
        if params.features_per_split is None:
            sampler = None
        else:
            mtry = min(params.features_per_split, p)

            def sampler(n_feat, _gen=gen, _mtry=mtry):
                return _gen.choice(n_feat, size=_mtry, replace=False)

        trees.append(fit_tree(zi, yi, params=tree_params, _feature_sampler=sampler))
    return EnsembleModel(trees=tuple(trees), kind=FOREST, n_features=p)


@dataclass
class GbmParams:
    """Exact-split gradient-boosting defaults for the surrogate index."""

    max_depth: int = 6
    min_samples_leaf: int = 50
    learning_rate: float = 0.05
    max_iter: int = 400
    l2_regularization: float = 0.0
    early_stopping: bool = True
    validation_fraction: float = 0.1
    n_iter_no_change: int = 20


def _validation_mask(n: int, fraction: float) -> np.ndarray:
    """Deterministic interleaved validation slice (every round(1/f)-th row)."""
    period = max(2, int(round(1.0 / fraction)))
    return (np.arange(n) % period) == (period - 1)


def fit_gbm(features, targets, params: Optional[GbmParams] = None) -> EnsembleModel:
    """Least-squares gradient boosting with squared-loss residual targets.

    Stops early when the held-out validation loss fails to improve for
    ``n_iter_no_change`` consecutive rounds.
    """
    params = params or GbmParams()
    z = np.asarray(features, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    y = np.asarray(targets, dtype=float).ravel()
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(y))):
        raise NonFiniteInput("input contains NaN or infinity")
    n, p = z.shape
    if params.early_stopping and n < 20:
        raise TooFewSamples("early stopping needs n >= 20")

    if params.early_stopping:
        val_mask = _validation_mask(n, params.validation_fraction)
        z_tr, y_tr = z[~val_mask], y[~val_mask]
        z_val, y_val = z[val_mask], y[val_mask]
    else:
        z_tr, y_tr = z, y
        z_val = y_val = None

    base = float(y_tr.mean())
    f_tr = np.full(y_tr.shape[0], base)
    f_val = np.full(y_val.shape[0], base) if y_val is not None else None

    tree_params = TreeParams(
        max_depth=params.max_depth,
        min_samples_leaf=params.min_samples_leaf,
        min_samples_split=max(2, 2 * params.min_samples_leaf),
    )
    trees = []
    best_val = np.inf
    rounds_since_best = 0
    for _ in range(params.max_iter):
        resid = y_tr - f_tr
        if np.max(np.abs(resid)) < 1e-12:
            break
        tree = fit_tree(z_tr, resid, params=tree_params)
        if params.l2_regularization > 0.0:
            shrink = tree.weight / (tree.weight + params.l2_regularization)
            tree = TreeModel(
                feature=tree.feature, threshold=tree.threshold,
                children_left=tree.children_left, children_right=tree.children_right,
                value=tree.value * shrink, weight=tree.weight, count=tree.count,
                n_features=tree.n_features, depth=tree.depth,
            )
        trees.append(tree)
        f_tr += params.learning_rate * tree.predict(z_tr)
        if params.early_stopping:
            f_val += params.learning_rate * tree.predict(z_val)
            val_loss = float(np.mean((y_val - f_val) ** 2))
            if val_loss < best_val - 1e-12:
                best_val = val_loss
                rounds_since_best = 0
            else:
                rounds_since_best += 1
                if rounds_since_best >= params.n_iter_no_change:
                    break

    return EnsembleModel(
        trees=tuple(trees), kind=BOOSTING,
        learning_rate=params.learning_rate, base_score=base, n_features=p,
    )
