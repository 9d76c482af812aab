"""JSON round-trip for fitted models; predictions are preserved bit-exactly
because floats are serialized with shortest round-trip repr."""

from __future__ import annotations

import json

import numpy as np

from .ensemble import EnsembleModel
from .linear import LinearModel, LogisticModel
from .tree import TreeModel


def _tree_payload(tree: TreeModel) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "children_left": tree.children_left.tolist(),
        "children_right": tree.children_right.tolist(),
        "value": tree.value.tolist(),
        "weight": tree.weight.tolist(),
        "count": tree.count.tolist(),
        "n_features": tree.n_features,
        "depth": tree.depth,
    }


def _tree_from_payload(doc: dict) -> TreeModel:
    return TreeModel(
        feature=np.array(doc["feature"], dtype=np.int64),
        threshold=np.array(doc["threshold"], dtype=float),
        children_left=np.array(doc["children_left"], dtype=np.int64),
        children_right=np.array(doc["children_right"], dtype=np.int64),
        value=np.array(doc["value"], dtype=float),
        weight=np.array(doc["weight"], dtype=float),
        count=np.array(doc["count"], dtype=np.int64),
        n_features=int(doc["n_features"]),
        depth=int(doc["depth"]),
    )


def model_to_dict(model) -> dict:
    if isinstance(model, LinearModel):
        return {"kind": "linear", "coefficients": model.coefficients.tolist(),
                "intercept": model.intercept}
    if isinstance(model, LogisticModel):
        return {"kind": "logistic", "coefficients": model.coefficients.tolist(),
                "intercept": model.intercept}
    if isinstance(model, TreeModel):
        return {"kind": "tree", **_tree_payload(model)}
    if isinstance(model, EnsembleModel):
        return {
            "kind": "ensemble",
            "ensemble_kind": model.kind,
            "learning_rate": model.learning_rate,
            "base_score": model.base_score,
            "n_features": model.n_features,
            "trees": [_tree_payload(t) for t in model.trees],
        }
    raise TypeError(f"cannot serialize model of type {type(model).__name__}")


def model_from_dict(doc: dict):
    kind = doc["kind"]
    if kind == "linear":
        return LinearModel(coefficients=np.array(doc["coefficients"], dtype=float),
                           intercept=float(doc["intercept"]))
    if kind == "logistic":
        return LogisticModel(coefficients=np.array(doc["coefficients"], dtype=float),
                             intercept=float(doc["intercept"]))
    if kind == "tree":
        return _tree_from_payload(doc)
    if kind == "ensemble":
        return EnsembleModel(
            trees=tuple(_tree_from_payload(t) for t in doc["trees"]),
            kind=doc["ensemble_kind"],
            learning_rate=float(doc["learning_rate"]),
            base_score=float(doc["base_score"]),
            n_features=int(doc["n_features"]),
        )
    raise ValueError(f"unknown model kind {kind!r}")


def model_to_json(model) -> str:
    return json.dumps(model_to_dict(model))


def model_from_json(text: str):
    return model_from_dict(json.loads(text))
