import numpy as np
import pytest

from surrkit.core import make_rng
from surrkit.errors import TooFewSamples
from surrkit.models import TreeParams, cross_validate_grid, fit_tree, grid_points


def tree_trainer(z, y, w, **params):
    return fit_tree(z, y, weights=w, params=TreeParams(**params))


class TestCrossValidateGrid:
    def test_single_point_grid(self):
        rng = np.random.default_rng(0)
        z = rng.normal(size=(50, 2))
        y = rng.normal(size=50)
        best = cross_validate_grid(tree_trainer, {"max_depth": [2]}, z, y)
        assert best == {"max_depth": 2}

    def test_selects_true_depth(self):
        rng = np.random.default_rng(1)
        z = rng.uniform(size=(600, 2))
        # depth-2 rule: XOR-like quadrant means
        y = (np.where(z[:, 0] > 0.5, 2.0, 0.0) + np.where(z[:, 1] > 0.5, 1.0, 0.0)
             + rng.normal(scale=0.05, size=600))
        grid = {"max_depth": [1, 2]}
        best = cross_validate_grid(tree_trainer, grid, z, y, rng=make_rng(3))
        assert best["max_depth"] == 2

        # direct fold-wise oracle: recompute both scores by hand
        order = make_rng(3).generator().permutation(600)
        folds = np.array_split(order, 5)
        scores = {}
        for depth in (1, 2):
            mses = []
            for held in folds:
                mask = np.ones(600, dtype=bool)
                mask[held] = False
                model = tree_trainer(z[mask], y[mask], None, max_depth=depth)
                mses.append(np.mean((y[held] - model.predict(z[held])) ** 2))
            scores[depth] = np.mean(mses)
        assert scores[2] < scores[1]

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(2)
        z = rng.normal(size=(100, 2))
        y = rng.normal(size=100)
        grid = {"max_depth": [1, 2, 3], "min_samples_leaf": [1, 5]}
        a = cross_validate_grid(tree_trainer, grid, z, y, rng=make_rng(11))
        b = cross_validate_grid(tree_trainer, grid, z, y, rng=make_rng(11))
        assert a == b

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            cross_validate_grid(tree_trainer, {"max_depth": [1]},
                                np.zeros((3, 1)), np.zeros(3), folds=5)

    def test_grid_points_order(self):
        pts = grid_points({"a": [1, 2], "b": ["x", "y"]})
        assert pts == [{"a": 1, "b": "x"}, {"a": 1, "b": "y"},
                       {"a": 2, "b": "x"}, {"a": 2, "b": "y"}]
