"""Training data container and per-feature standardization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..features import Extractor, FeatureVector

__all__ = ["Dataset", "Standardization"]

# Features with a standard deviation below this are frozen to zero after
# standardization instead of being divided by a vanishing scale.
_STD_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix plus binary labels; rows share one extractor identity."""

    X: np.ndarray
    y: np.ndarray
    extractor: Extractor

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
            raise ValueError("X must be a non-empty (n, d) matrix")
        if y.shape != (X.shape[0],):
            raise ValueError("y must have one label per row of X")
        if not np.isfinite(X).all():
            raise ValueError("features must be finite")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "extractor", Extractor(self.extractor))

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[FeatureVector, int]]) -> "Dataset":
        rows = list(rows)
        if not rows:
            raise ValueError("dataset needs at least one row")
        first_vec, _ = rows[0]
        extractor = first_vec.extractor
        dim = len(first_vec)
        for vec, _ in rows:
            if vec.extractor is not extractor:
                raise ValueError(f"mixed extractors: {vec.extractor} vs {extractor}")
            if len(vec) != dim:
                raise ValueError(f"mixed feature lengths: {len(vec)} vs {dim}")
        X = np.stack([vec.values for vec, _ in rows])
        y = np.array([label for _, label in rows])
        return cls(X, y, extractor)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.X.shape[1]

    def subset(self, indices: Sequence[int] | np.ndarray) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx], self.extractor)

    def has_both_classes(self) -> bool:
        return bool((self.y == 0).any() and (self.y == 1).any())


@dataclass(frozen=True, eq=False)
class Standardization:
    """Per-feature (mean, scale) pairs; near-constant features map to 0."""

    mean: np.ndarray
    scale: np.ndarray
    frozen: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardization":
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        frozen = std < _STD_FLOOR
        scale = np.where(frozen, 1.0, std)
        return cls(mean, scale, frozen)

    def transform(self, X: np.ndarray) -> np.ndarray:
        z = (np.asarray(X, dtype=np.float64) - self.mean) / self.scale
        if self.frozen.any():
            z = np.where(self.frozen, 0.0, z)
        return z

    def as_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "frozen": self.frozen.astype(bool).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Standardization":
        return cls(
            np.asarray(d["mean"], dtype=np.float64),
            np.asarray(d["scale"], dtype=np.float64),
            np.asarray(d["frozen"], dtype=bool),
        )
