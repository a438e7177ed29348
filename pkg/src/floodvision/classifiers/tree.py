"""CART-style binary decision tree with gini or entropy splitting.

Candidate thresholds are midpoints between consecutive distinct feature
values; the split with the largest impurity decrease wins, with ties going
to the lowest feature index and then the lowest threshold.  Rows with
feature value <= threshold go left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..features import FeatureVector
from .dataset import Dataset

__all__ = ["TreeNode", "TreeModel", "train_tree", "tree_predict", "tree_predict_proba", "tree_predict_batch"]

CRITERIA = ("gini", "entropy")

# Splits with a gain below this are treated as no improvement; guards
# against accepting float dust as progress.
_MIN_GAIN = 1e-12


@dataclass(frozen=True, eq=False)
class TreeNode:
    """Internal node (feature/threshold set) or leaf (class/p1 set)."""

    klass: int
    p1: float
    n: int
    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass(frozen=True, eq=False)
class TreeModel:
    root: TreeNode
    criterion: str
    max_depth: Optional[int]
    min_samples_split: int
    feature_dim: int


def _impurity(n0: float, n1: float, criterion: str) -> float:
    n = n0 + n1
    if n == 0:
        return 0.0
    p0 = n0 / n
    p1 = n1 / n
    if criterion == "gini":
        return 1.0 - p0 * p0 - p1 * p1
    # entropy in bits
    ent = 0.0
    if p0 > 0:
        ent -= p0 * math.log2(p0)
    if p1 > 0:
        ent -= p1 * math.log2(p1)
    return ent


def _impurity_curve(n0_left: np.ndarray, n1_left: np.ndarray, criterion: str) -> np.ndarray:
    n = n0_left + n1_left
    out = np.zeros_like(n, dtype=np.float64)
    nz = n > 0
    p0 = np.zeros_like(out)
    p1 = np.zeros_like(out)
    p0[nz] = n0_left[nz] / n[nz]
    p1[nz] = n1_left[nz] / n[nz]
    if criterion == "gini":
        out[nz] = 1.0 - p0[nz] ** 2 - p1[nz] ** 2
        return out
    for p in (p0, p1):
        pos = nz & (p > 0)
        out[pos] -= p[pos] * np.log2(p[pos])
    return out


def _best_split(X: np.ndarray, y: np.ndarray, criterion: str) -> tuple[float, int, float]:
    """Return (gain, feature, threshold) of the best candidate split."""
    n = y.size
    total1 = int(y.sum())
    total0 = n - total1
    parent = _impurity(total0, total1, criterion)
    best_gain, best_feature, best_threshold = 0.0, -1, 0.0
    for f in range(X.shape[1]):
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sv = col[order]
        sy = y[order]
        distinct = np.flatnonzero(sv[1:] != sv[:-1])  # split after these positions
        if distinct.size == 0:
            continue
        cum1 = np.cumsum(sy)
        left_n = distinct + 1
        left1 = cum1[distinct]
        left0 = left_n - left1
        right_n = n - left_n
        right1 = total1 - left1
        right0 = right_n - right1
        child = (
            left_n * _impurity_curve(left0.astype(float), left1.astype(float), criterion)
            + right_n * _impurity_curve(right0.astype(float), right1.astype(float), criterion)
        ) / n
        gains = parent - child
        idx = int(np.argmax(gains))  # first maximum = lowest threshold on ties
        if gains[idx] > best_gain:  # strict: the earlier feature keeps exact ties
            best_gain = float(gains[idx])
            best_feature = f
            best_threshold = float((sv[distinct[idx]] + sv[distinct[idx] + 1]) / 2.0)
    return best_gain, best_feature, best_threshold


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    criterion: str,
    max_depth: Optional[int],
    min_samples_split: int,
    depth: int,
) -> TreeNode:
    n = y.size
    n1 = int(y.sum())
    p1 = n1 / n
    klass = 1 if p1 > 0.5 else 0  # exact tie goes to class 0
    if (
        n1 == 0
        or n1 == n
        or n < min_samples_split
        or (max_depth is not None and depth >= max_depth)
    ):
        return TreeNode(klass, p1, n)
    gain, feature, threshold = _best_split(X, y, criterion)
    if feature < 0 or gain <= _MIN_GAIN:
        return TreeNode(klass, p1, n)
    go_left = X[:, feature] <= threshold
    left = _grow(X[go_left], y[go_left], criterion, max_depth, min_samples_split, depth + 1)
    right = _grow(X[~go_left], y[~go_left], criterion, max_depth, min_samples_split, depth + 1)
    return TreeNode(klass, p1, n, feature, threshold, left, right)


def train_tree(
    data: Dataset,
    criterion: str = "gini",
    max_depth: Optional[int] = None,
    min_samples_split: int = 2,
) -> TreeModel:
    """Grow a tree by greedy impurity-decrease splitting."""
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}; choose from {CRITERIA}")
    if max_depth is not None and max_depth < 0:
        raise ValueError("max_depth must be non-negative")
    if min_samples_split < 2:
        raise ValueError("min_samples_split must be at least 2")
    root = _grow(data.X, data.y, criterion, max_depth, min_samples_split, 0)
    return TreeModel(root, criterion, max_depth, min_samples_split, data.feature_dim)


def _as_row(model: TreeModel, x: FeatureVector | np.ndarray) -> np.ndarray:
    values = x.values if isinstance(x, FeatureVector) else np.asarray(x, dtype=np.float64)
    if values.ndim != 1 or values.size != model.feature_dim:
        raise ValueError(f"expected a feature vector of length {model.feature_dim}")
    return values


def _descend(node: TreeNode, row: np.ndarray) -> TreeNode:
    while not node.is_leaf:
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node


def tree_predict(model: TreeModel, x: FeatureVector | np.ndarray) -> int:
    return _descend(model.root, _as_row(model, x)).klass


def tree_predict_proba(model: TreeModel, x: FeatureVector | np.ndarray) -> float:
    """Class-1 fraction of the training rows that reached the same leaf."""
    return _descend(model.root, _as_row(model, x)).p1


def tree_predict_batch(model: TreeModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.feature_dim:
        raise ValueError(f"expected an (n, {model.feature_dim}) matrix")
    return np.array([_descend(model.root, row).klass for row in X], dtype=np.int64)


def tree_proba_batch(model: TreeModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.feature_dim:
        raise ValueError(f"expected an (n, {model.feature_dim}) matrix")
    return np.array([_descend(model.root, row).p1 for row in X], dtype=np.float64)
