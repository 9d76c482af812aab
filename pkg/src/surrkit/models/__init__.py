"""Self-contained supervised-learning primitives used as nuisance and
surrogate model families."""

import numpy as np

from ..errors import WidthMismatch
from .ensemble import (
    BOOSTING,
    FOREST,
    EnsembleModel,
    ForestParams,
    GbmParams,
    fit_forest,
    fit_gbm,
)
from .linear import (
    LinearModel,
    LogisticModel,
    fit_linear,
    fit_logistic,
    lasso_kkt_residuals,
    logistic_gradient,
)
from .selection import cross_validate_grid, grid_points
from .serialize import model_from_dict, model_from_json, model_to_dict, model_to_json
from .tree import TreeModel, TreeParams, best_split, fit_tree

#: hyperparameter lattice for cross-validated tree models
TREE_GRID = {
    "max_depth": [3, 4, None],
    "min_samples_leaf": [50, 100, 200],
    "min_samples_split": [100, 200, 400],
    "ccp_alpha": [0.0, 1e-3],
}


def predict(model, features) -> np.ndarray:
    """Evaluate any fitted model on a feature matrix."""
    return model.predict(np.asarray(features, dtype=float))


__all__ = [
    "BOOSTING",
    "FOREST",
    "EnsembleModel",
    "ForestParams",
    "GbmParams",
    "LinearModel",
    "LogisticModel",
    "TreeModel",
    "TreeParams",
    "TREE_GRID",
    "best_split",
    "cross_validate_grid",
    "fit_forest",
    "fit_gbm",
    "fit_linear",
    "fit_logistic",
    "fit_tree",
    "grid_points",
    "lasso_kkt_residuals",
    "logistic_gradient",
    "model_from_dict",
    "model_from_json",
    "model_to_dict",
    "model_to_json",
    "predict",
]
