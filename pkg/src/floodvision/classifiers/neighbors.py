"""K-nearest-neighbors voting on standardized features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import FeatureVector
from .dataset import Dataset, Standardization

__all__ = [
    "KnnModel",
    "train_knn",
    "knn_predict",
    "knn_predict_proba",
    "knn_predict_batch",
    "knn_vote_fractions",
]


@dataclass(frozen=True, eq=False)
class KnnModel:
    k: int
    rows: np.ndarray  # standardized training features
    labels: np.ndarray
    standardization: Standardization

    @property
    def feature_dim(self) -> int:
        return self.rows.shape[1]


def train_knn(data: Dataset, k: int) -> KnnModel:
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > data.n:
        raise ValueError(f"k={k} exceeds the {data.n} stored training rows")
    std = Standardization.fit(data.X)
    return KnnModel(k, std.transform(data.X), data.y.copy(), std)


def _neighbor_order(model: KnnModel, z: np.ndarray) -> np.ndarray:
    # Squared Euclidean distance preserves the ordering; stable argsort
    # breaks distance ties by the lower training-row index.
    d2 = ((model.rows - z) ** 2).sum(axis=1)
    return np.argsort(d2, kind="stable")


def _vote(model: KnnModel, order: np.ndarray) -> tuple[int, float]:
    nearest = order[: model.k]
    ones = int(model.labels[nearest].sum())
    if 2 * ones > model.k:
        label = 1
    elif 2 * ones < model.k:
        label = 0
    else:
        label = int(model.labels[order[0]])  # tied vote: side with the closest point
    return label, ones / model.k


def _as_row(model: KnnModel, x: FeatureVector | np.ndarray) -> np.ndarray:
    values = x.values if isinstance(x, FeatureVector) else np.asarray(x, dtype=np.float64)
    if values.ndim != 1 or values.size != model.feature_dim:
        raise ValueError(f"expected a feature vector of length {model.feature_dim}")
    return values


def knn_predict(model: KnnModel, x: FeatureVector | np.ndarray) -> int:
    """Majority label among the k nearest training rows."""
    z = model.standardization.transform(_as_row(model, x))
    label, _ = _vote(model, _neighbor_order(model, z))
    return label


def knn_predict_proba(model: KnnModel, x: FeatureVector | np.ndarray) -> float:
    """Fraction of the k nearest neighbors voting for class 1."""
    z = model.standardization.transform(_as_row(model, x))
    _, fraction = _vote(model, _neighbor_order(model, z))
    return fraction


def _order_matrix(model: KnnModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.feature_dim:
        raise ValueError(f"expected an (n, {model.feature_dim}) matrix")
    Z = model.standardization.transform(X)
    # ||a-b||^2 expansion keeps this a single matrix product; adding the
    # per-query constant does not change the ordering, so it is skipped.
    d2 = -2.0 * Z @ model.rows.T + (model.rows**2).sum(axis=1)[None, :]
    return np.argsort(d2, axis=1, kind="stable")


def knn_vote_fractions(model: KnnModel, X: np.ndarray) -> np.ndarray:
    """Class-1 vote fraction for each row of X."""
    order = _order_matrix(model, X)
    return model.labels[order[:, : model.k]].sum(axis=1) / model.k


def knn_predict_batch(model: KnnModel, X: np.ndarray) -> np.ndarray:
    """Majority-vote labels for each row of X (same tie rules as knn_predict)."""
    order = _order_matrix(model, X)
    ones = model.labels[order[:, : model.k]].sum(axis=1)
    labels = np.where(2 * ones > model.k, 1, 0)
    if model.k % 2 == 0:
        tied = 2 * ones == model.k
        labels = np.where(tied, model.labels[order[:, 0]], labels)
    return labels.astype(np.int64)
