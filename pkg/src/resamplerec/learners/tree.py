"""CART trees (Gini classification, squared-error regression) with sample weights.

Splits are axis-aligned thresholds at midpoints between consecutive distinct
feature values. A split is accepted only if it strictly reduces the weighted
impurity; ties go to the lower feature index and lower threshold, so fitting
is fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instrument import count_fit

_GAIN_TOL = 1e-12


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float = 0.0     # leaf: minor-class weight fraction / weighted mean target
    n_samples: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"value": self.value, "n": self.n_samples}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "n": self.n_samples,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "TreeNode":
        if "feature" not in d:
            return TreeNode(value=float(d["value"]), n_samples=int(d["n"]))
        return TreeNode(
            feature=int(d["feature"]),
            threshold=float(d["threshold"]),
            n_samples=int(d["n"]),
            left=TreeNode.from_dict(d["left"]),
            right=TreeNode.from_dict(d["right"]),
        )


def _best_split_gini(x, y, w, min_leaf):
    """Scan all features for the split with the largest weighted Gini decrease."""
    n = y.shape[0]
    w_total = w.sum()
    w_pos = float(w[y == 1].sum())
    p = w_pos / w_total
    parent_imp = 2.0 * p * (1.0 - p)  # binary Gini: 1 - p^2 - (1-p)^2
    best_gain, best_feature, best_threshold = _GAIN_TOL, -1, 0.0
    for f in range(x.shape[1]):
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        ws = w[order]
        wy = ws * y[order]
        cw = np.cumsum(ws)
        cwy = np.cumsum(wy)
        # candidate split after position i requires a value change and min_leaf rows
        pos = np.arange(n - 1)
        valid = (xs[:-1] < xs[1:]) & (pos + 1 >= min_leaf) & (n - pos - 1 >= min_leaf)
        if not valid.any():
            continue
        idx = pos[valid]
        wl = cw[idx]
        wr = w_total - wl
        pl = cwy[idx] / wl
        pr = (w_pos - cwy[idx]) / wr
        child = (wl * 2.0 * pl * (1.0 - pl) + wr * 2.0 * pr * (1.0 - pr)) / w_total
        gains = parent_imp - child
        j = int(np.argmax(gains))
        if gains[j] > best_gain:
            best_gain = float(gains[j])
            best_feature = f
            best_threshold = float((xs[idx[j]] + xs[idx[j] + 1]) / 2.0)
    if best_feature < 0:
        return None
    return best_feature, best_threshold


def _best_split_sse(x, y, w, min_leaf):
    """Split with the largest weighted squared-error decrease."""
    n = y.shape[0]
    w_total = w.sum()
    sum_wy = float((w * y).sum())
    sum_wy2 = float((w * y * y).sum())
    parent_sse = sum_wy2 - sum_wy * sum_wy / w_total
    best_gain, best_feature, best_threshold = _GAIN_TOL, -1, 0.0
    for f in range(x.shape[1]):
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        ws = w[order]
        ys = y[order]
        cw = np.cumsum(ws)
        cwy = np.cumsum(ws * ys)
        cwy2 = np.cumsum(ws * ys * ys)
        pos = np.arange(n - 1)
        valid = (xs[:-1] < xs[1:]) & (pos + 1 >= min_leaf) & (n - pos - 1 >= min_leaf)
        if not valid.any():
            continue
        idx = pos[valid]
        wl = cw[idx]
        wr = w_total - wl
        sse_l = cwy2[idx] - cwy[idx] ** 2 / wl
        sse_r = (sum_wy2 - cwy2[idx]) - (sum_wy - cwy[idx]) ** 2 / wr
        gains = parent_sse - (sse_l + sse_r)
        j = int(np.argmax(gains))
        if gains[j] > best_gain:
            best_gain = float(gains[j])
            best_feature = f
            best_threshold = float((xs[idx[j]] + xs[idx[j] + 1]) / 2.0)
    if best_feature < 0:
        return None
    return best_feature, best_threshold


def _grow(x, y, w, depth, max_depth, min_leaf, splitter, leaf_value):
    node = TreeNode(value=leaf_value(y, w), n_samples=y.shape[0])
    if max_depth is not None and depth >= max_depth:
        return node
    if y.shape[0] < 2 * min_leaf:
        return node
    found = splitter(x, y, w, min_leaf)
    if found is None:
        return node
    f, t = found
    mask = x[:, f] <= t
    node.feature, node.threshold = f, t
    node.left = _grow(x[mask], y[mask], w[mask], depth + 1, max_depth, min_leaf, splitter, leaf_value)
    node.right = _grow(x[~mask], y[~mask], w[~mask], depth + 1, max_depth, min_leaf, splitter, leaf_value)
    return node


def _minor_fraction(y, w):
    return float(w[y == 1].sum() / w.sum())


def _weighted_mean(y, w):
    return float((w * y).sum() / w.sum())


def build_classification_tree(x: np.ndarray, y: np.ndarray, *, max_depth: int | None,
                              min_leaf: int, sample_weight: np.ndarray | None = None) -> TreeNode:
    count_fit()
    w = _norm_weights(sample_weight, x.shape[0])
    return _grow(x, y.astype(np.float64), w, 0, max_depth, min_leaf,
                 _best_split_gini, _minor_fraction)


def build_regression_tree(x: np.ndarray, y: np.ndarray, *, max_depth: int | None,
                          min_leaf: int, sample_weight: np.ndarray | None = None) -> TreeNode:
    count_fit()
    w = _norm_weights(sample_weight, x.shape[0])
    return _grow(x, y.astype(np.float64), w, 0, max_depth, min_leaf,
                 _best_split_sse, _weighted_mean)


def _norm_weights(sample_weight, n):
    if sample_weight is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(sample_weight, dtype=np.float64)
    if w.shape != (n,) or (w < 0).any() or w.sum() <= 0:
        raise ValueError("sample weights must be non-negative with positive sum")
    return w / w.sum()


def tree_predict(node: TreeNode, x: np.ndarray) -> np.ndarray:
    """Evaluate leaf values for a batch of rows."""
    out = np.empty(x.shape[0])
    stack = [(node, np.arange(x.shape[0]))]
    while stack:
        nd, idx = stack.pop()
        if nd.is_leaf:
            out[idx] = nd.value
            continue
        mask = x[idx, nd.feature] <= nd.threshold
        stack.append((nd.left, idx[mask]))
        stack.append((nd.right, idx[~mask]))
    return out
