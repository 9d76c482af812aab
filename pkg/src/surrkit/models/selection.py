"""K-fold cross-validated grid search (out-of-fold MSE)."""

from __future__ import annotations

import itertools
from typing import Callable, Optional

import numpy as np

from ..core import RandomSource
from ..errors import TooFewSamples


def grid_points(grid: dict) -> list[dict]:
    """Expand a parameter lattice into a list of dicts, preserving order."""
    keys = list(grid.keys())
    return [dict(zip(keys, combo))
            for combo in itertools.product(*(grid[k] for k in keys))]


def cross_validate_grid(trainer: Callable, grid: dict, features, targets,
                        weights=None, folds: int = 5,
                        rng: Optional[RandomSource] = None) -> dict:
    """Select the grid point with the lowest mean out-of-fold MSE.

    ``trainer(features, targets, weights, **params)`` must return a model
    with a ``predict`` method.  Ties are broken by grid order.
    """
    z = np.asarray(features, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    y = np.asarray(targets, dtype=float).ravel()
    n = z.shape[0]
    if n < folds:
        raise TooFewSamples(f"need at least {folds} samples for {folds}-fold CV")
    w = None if weights is None else np.asarray(weights, dtype=float).ravel()

    order = np.arange(n)
    if rng is not None:
        order = rng.generator().permutation(n)
    fold_slices = np.array_split(order, folds)

    candidates = grid_points(grid)
    best_score, best_params = np.inf, candidates[0]
    for params in candidates:
        fold_mse = []
        for held_out in fold_slices:
            mask = np.ones(n, dtype=bool)
            mask[held_out] = False
            model = trainer(z[mask], y[mask],
                            None if w is None else w[mask], **params)
            pred = model.predict(z[held_out])
            fold_mse.append(float(np.mean((y[held_out] - pred) ** 2)))
        score = float(np.mean(fold_mse))
        if score < best_score:
            best_score = score
            best_params = params
    return best_params
