"""Seeded k-fold cross-validation and exhaustive grid search."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..evaluation import confusion, scores
from .dataset import Dataset
from .logistic import LogisticModel, predict_proba_batch, train_logreg
from .neighbors import KnnModel, knn_predict_batch, train_knn
from .tree import TreeModel, train_tree, tree_predict_batch

__all__ = ["MODEL_KINDS", "GridSearchSpec", "GridSearchResult", "kfold_split", "grid_search", "fit_model", "predict_batch"]

MODEL_KINDS = ("logistic", "knn", "tree")
SCORE_KINDS = ("f1", "accuracy")


def kfold_split(n: int, folds: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Disjoint, covering (train, validation) index pairs from a seeded shuffle.

    The first n % folds validation sets get the extra element.
    """
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if folds > n:
        raise ValueError(f"cannot split {n} rows into {folds} folds")
    perm = np.random.default_rng(seed).permutation(n)
    base, extra = divmod(n, folds)
    out = []
    start = 0
    for i in range(folds):
        size = base + (1 if i < extra else 0)
        val = perm[start : start + size]
        train = np.concatenate([perm[:start], perm[start + size :]])
        out.append((train, val))
        start += size
    return out


@dataclass(frozen=True)
class GridSearchSpec:
    """Grid-search configuration for one model kind.

    `param_grid` maps hyperparameter names to candidate value lists;
    candidates enumerate in the order given (last parameter fastest).
    `fixed_params` are passed to every fit unchanged.
    """

    model_kind: str
    param_grid: dict[str, list[Any]]
    folds: int = 5
    seed: int = 0
    score: str = "f1"
    fixed_params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.model_kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.model_kind!r}; choose from {MODEL_KINDS}")
        if self.folds < 2:
            raise ValueError("need at least 2 folds")
        if self.score not in SCORE_KINDS:
            raise ValueError(f"unknown score {self.score!r}; choose from {SCORE_KINDS}")
        if not self.param_grid or any(len(v) == 0 for v in self.param_grid.values()):
            raise ValueError("every hyperparameter grid must be non-empty")

    def candidates(self) -> list[dict[str, Any]]:
        names = list(self.param_grid)
        return [dict(zip(names, combo)) for combo in itertools.product(*(self.param_grid[n] for n in names))]


@dataclass(frozen=True, eq=False)
class GridSearchResult:
    best_params: dict[str, Any]
    best_mean_score: float
    candidates: list[dict[str, Any]]  # {"params", "fold_scores", "mean_score"}
    model: LogisticModel | KnnModel | TreeModel


def fit_model(kind: str, data: Dataset, params: dict[str, Any], seed: int = 0):
    if kind == "logistic":
        return train_logreg(data, seed=seed, **params)
    if kind == "knn":
        return train_knn(data, **params)
    if kind == "tree":
        return train_tree(data, **params)
    raise ValueError(f"unknown model kind {kind!r}")


def predict_batch(model, X: np.ndarray) -> np.ndarray:
    if isinstance(model, LogisticModel):
        return (predict_proba_batch(model, X) >= 0.5).astype(np.int64)
    if isinstance(model, KnnModel):
        return knn_predict_batch(model, X)
    if isinstance(model, TreeModel):
        return tree_predict_batch(model, X)
    raise TypeError(f"unsupported model type {type(model).__name__}")


def _score(pred: np.ndarray, truth: np.ndarray, kind: str) -> float:
    if kind == "accuracy":
        return float((pred == truth).mean())
    return scores(confusion(pred, truth)).f1


def grid_search(data: Dataset, spec: GridSearchSpec) -> GridSearchResult:
    """Mean CV score for every grid point; refit the best on the full data.

    A fold whose training half cannot be fit (e.g. one class only) scores
    0 for that candidate with a warning.  Ties keep the earliest grid point.
    """
    folds = kfold_split(data.n, spec.folds, spec.seed)
    candidates = spec.candidates()
    records = []
    best_idx, best_mean = 0, -1.0
    for ci, params in enumerate(candidates):
        full = dict(spec.fixed_params, **params)
        fold_scores = []
        for fi, (train_idx, val_idx) in enumerate(folds):
            try:
                model = fit_model(spec.model_kind, data.subset(train_idx), full, seed=spec.seed + fi + 1)
                pred = predict_batch(model, data.X[val_idx])
                fold_scores.append(_score(pred, data.y[val_idx], spec.score))
            except ValueError as exc:
                warnings.warn(f"fold {fi} failed for {full}: {exc}; scoring it 0", stacklevel=2)
                fold_scores.append(0.0)
        mean = float(np.mean(fold_scores))
        records.append({"params": params, "fold_scores": fold_scores, "mean_score": mean})
        if mean > best_mean:
            best_idx, best_mean = ci, mean
    best_params = candidates[best_idx]
    final = fit_model(
        spec.model_kind, data, dict(spec.fixed_params, **best_params), seed=spec.seed
    )
    return GridSearchResult(best_params, best_mean, records, final)
