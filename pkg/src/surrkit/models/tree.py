"""Greedy weighted regression trees (CART) with cost-complexity pruning.

Each split maximizes the weighted-SSE reduction over every (feature,
midpoint-between-sorted-unique-values) candidate.  Ties are broken by lowest
feature index, then lowest threshold.  Leaf values are the weighted mean of
the targets routed to the leaf.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import NonFiniteInput, WidthMismatch

_LEAF = -1


@dataclass
class TreeParams:
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    min_samples_split: int = 2
    ccp_alpha: float = 0.0


@dataclass(frozen=True)
class TreeModel:
    """Flat-array binary regression tree.

    Node i is a leaf when feature[i] == -1; otherwise rows with
    z[feature[i]] <= threshold[i] go to children_left[i].
    """

    feature: np.ndarray
    threshold: np.ndarray
    children_left: np.ndarray
    children_right: np.ndarray
    value: np.ndarray
    weight: np.ndarray          # total training weight per node
    count: np.ndarray           # training sample count per node
    n_features: int
    depth: int

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == _LEAF))

    def predict(self, features: np.ndarray) -> np.ndarray:
        z = np.asarray(features, dtype=float)
        if z.ndim == 1:
            z = z.reshape(1, -1)
        if z.shape[1] != self.n_features:
            raise WidthMismatch(
                f"expected {self.n_features} features, got {z.shape[1]}")
        idx = np.zeros(z.shape[0], dtype=np.int64)
        active = self.feature[idx] != _LEAF
        while np.any(active):
            rows = np.nonzero(active)[0]
            nodes = idx[rows]
            go_left = z[rows, self.feature[nodes]] <= self.threshold[nodes]
            idx[rows] = np.where(go_left, self.children_left[nodes],
                                 self.children_right[nodes])
            active = self.feature[idx] != _LEAF
        return self.value[idx]

    def leaf_index(self, features: np.ndarray) -> np.ndarray:
        """Index of the leaf each row is routed to."""
        z = np.asarray(features, dtype=float)
        if z.ndim == 1:
            z = z.reshape(1, -1)
        idx = np.zeros(z.shape[0], dtype=np.int64)
        active = self.feature[idx] != _LEAF
        while np.any(active):
            rows = np.nonzero(active)[0]
            nodes = idx[rows]
            go_left = z[rows, self.feature[nodes]] <= self.threshold[nodes]
            idx[rows] = np.where(go_left, self.children_left[nodes],
                                 self.children_right[nodes])
            active = self.feature[idx] != _LEAF
        return idx


def best_split(z, y, w, min_samples_leaf: int, feature_subset=None):
    """Exhaustive best weighted-SSE split for one node.

    Returns (feature, threshold, gain) or None when no valid split improves
    the weighted SSE.  Candidates are midpoints between consecutive sorted
    unique values.  Both children must keep at least min_samples_leaf samples
    and strictly positive total weight.
    """
    n, p = z.shape
    w_tot = w.sum()
    c_tot = float(w @ y)
    features = range(p) if feature_subset is None else sorted(feature_subset)
    best = None  # (gain, feature, threshold)
    for j in features:
        order = np.argsort(z[:, j], kind="mergesort")
        zj = z[order, j]
        wj = w[order]
        wyj = wj * y[order]
        w_left = np.cumsum(wj)[:-1]
        c_left = np.cumsum(wyj)[:-1]
        w_right = w_tot - w_left
        c_right = c_tot - c_left
        counts_left = np.arange(1, n)
        valid = (
            (zj[:-1] < zj[1:])
            & (counts_left >= min_samples_leaf)
            & (n - counts_left >= min_samples_leaf)
            & (w_left > 0.0)
            & (w_right > 0.0)
        )
        if not np.any(valid):
            continue
        gains = np.full(n - 1, -np.inf)
        vi = np.nonzero(valid)[0]
        gains[vi] = (c_left[vi] ** 2 / w_left[vi]
                     + c_right[vi] ** 2 / w_right[vi])
        i = int(np.argmax(gains))  # first max = lowest threshold
        gain = gains[i] - c_tot ** 2 / w_tot
        if gain <= 0.0:
            continue
        if best is None or gain > best[0]:
            best = (gain, j, 0.5 * (zj[i] + zj[i + 1]))
    if best is None:
        return None
    return best[1], best[2], best[0]


def fit_tree(features, targets, weights=None, params: Optional[TreeParams] = None,
             _feature_sampler=None) -> TreeModel:
    """Fit a greedy weighted CART tree, then apply cost-complexity pruning.

    ``_feature_sampler``, when given, is called with the feature count at each
    node and returns the candidate feature indices (used by random forests).
    """
    from .linear import _check_finite, _prepare_weights

    params = params or TreeParams()
    z = np.asarray(features, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    y = np.asarray(targets, dtype=float).ravel()
    _check_finite(z, y)
    n, p = z.shape
    w = _prepare_weights(weights, n)

    feature, threshold = [], []
    left, right, value = [], [], []
    weight_sum, count = [], []
    sse = []

    def node_stats(idx):
        wi = w[idx]
        yi = y[idx]
        wt = wi.sum()
        mean = float(wi @ yi / wt) if wt > 0 else 0.0
        err = float(wi @ (yi - mean) ** 2) if wt > 0 else 0.0
        return wt, mean, err

    def grow(idx, depth):
        node = len(feature)
        wt, mean, err = node_stats(idx)
        feature.append(_LEAF)
        threshold.append(0.0)
        left.append(_LEAF)
        right.append(_LEAF)
        value.append(mean)
        weight_sum.append(wt)
        count.append(idx.shape[0])
        sse.append(err)

        if (params.max_depth is not None and depth >= params.max_depth) \
                or idx.shape[0] < params.min_samples_split or err <= 0.0:
            return node, depth
        subset = None if _feature_sampler is None else _feature_sampler(p)
        found = best_split(z[idx], y[idx], w[idx], params.min_samples_leaf, subset)
        if found is None:
            return node, depth
        f, thr, _ = found
        mask = z[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        lnode, ldepth = grow(idx[mask], depth + 1)
        left[node] = lnode
        rnode, rdepth = grow(idx[~mask], depth + 1)
        right[node] = rnode
        return node, max(ldepth, rdepth)

    _, depth = grow(np.arange(n), 0)
    tree = TreeModel(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=float),
        children_left=np.array(left, dtype=np.int64),
        children_right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=float),
        weight=np.array(weight_sum, dtype=float),
        count=np.array(count, dtype=np.int64),
        n_features=p,
        depth=depth,
    )
    if params.ccp_alpha > 0.0:
        tree = _ccp_prune(tree, np.array(sse, dtype=float), params.ccp_alpha)
    return tree


def _ccp_prune(tree: TreeModel, sse: np.ndarray, alpha: float) -> TreeModel:
    """Minimal cost-complexity (weakest-link) pruning.

    Node risk is the node's weighted SSE divided by the root weight, so the
    pruning outcome is invariant to rescaling all sample weights.
    """
    w_root = tree.weight[0]
    risk = sse / w_root
    leaf = tree.feature.copy()
    children_left = tree.children_left.copy()
    children_right = tree.children_right.copy()

    def subtree(node):
        """(subtree risk, leaf count) below node given current pruning."""
        if leaf[node] == _LEAF:
            return risk[node], 1
        rl, nl = subtree(children_left[node])
        rr, nr = subtree(children_right[node])
        return rl + rr, nl + nr

    while True:
        # weakest link among current internal nodes
        best_g, best_node = None, None
        stack = [0]
        while stack:
            node = stack.pop()
            if leaf[node] == _LEAF:
                continue
            sub_risk, leaves = subtree(node)
            g = (risk[node] - sub_risk) / (leaves - 1)
            if best_g is None or g < best_g or (g == best_g and node < best_node):
                best_g, best_node = g, node
            stack.append(children_left[node])
            stack.append(children_right[node])
        if best_node is None or best_g > alpha:
            break
        leaf[best_node] = _LEAF

    # rebuild a compact tree containing only reachable nodes
    keep = []
    stack = [0]
    while stack:
        node = stack.pop()
        keep.append(node)
        if leaf[node] != _LEAF:
            stack.append(children_right[node])
            stack.append(children_left[node])
    keep = sorted(keep)
    remap = {old: new for new, old in enumerate(keep)}
    feature = np.array([leaf[i] for i in keep], dtype=np.int64)
    new_left = np.array(
        [remap[children_left[i]] if leaf[i] != _LEAF else _LEAF for i in keep],
        dtype=np.int64)
    new_right = np.array(
        [remap[children_right[i]] if leaf[i] != _LEAF else _LEAF for i in keep],
        dtype=np.int64)

    def depth_of(node, d=0):
        if feature[node] == _LEAF:
            return d
        return max(depth_of(new_left[node], d + 1), depth_of(new_right[node], d + 1))

    return TreeModel(
        feature=feature,
        threshold=tree.threshold[keep],
        children_left=new_left,
        children_right=new_right,
        value=tree.value[keep],
        weight=tree.weight[keep],
        count=tree.count[keep],
        n_features=tree.n_features,
        depth=depth_of(0),
    )
