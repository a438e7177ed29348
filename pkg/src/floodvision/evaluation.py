"""Confusion-matrix accounting and precision/recall/F1 scoring.

Class 1 (flood) is the positive class.  Degenerate 0/0 rates become 0.0
with a flag instead of NaN so aggregation stays well defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = ["ConfusionMatrix", "Scores", "confusion", "scores", "merge_confusions"]


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def as_dict(self) -> dict[str, int]:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


@dataclass(frozen=True)
class Scores:
    precision: float
    recall: float
    f1: float
    degenerate: bool = False

    def as_dict(self) -> dict[str, float | bool]:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "degenerate": self.degenerate,
        }


def confusion(pred: Sequence[int] | np.ndarray, truth: Sequence[int] | np.ndarray) -> ConfusionMatrix:
    """Count TP/FP/FN/TN for binary predictions against binary truth."""
    p = np.asarray(pred).ravel()
    t = np.asarray(truth).ravel()
    if p.size == 0:
        raise ValueError("cannot build a confusion matrix from empty input")
    if p.size != t.size:
        raise ValueError(f"prediction length {p.size} != truth length {t.size}")
    if not (np.isin(p, (0, 1)).all() and np.isin(t, (0, 1)).all()):
        raise ValueError("predictions and truth must be 0/1 valued")
    p = p.astype(bool)
    t = t.astype(bool)
    return ConfusionMatrix(
        tp=int(np.count_nonzero(p & t)),
        fp=int(np.count_nonzero(p & ~t)),
        fn=int(np.count_nonzero(~p & t)),
        tn=int(np.count_nonzero(~p & ~t)),
    )


def scores(cm: ConfusionMatrix) -> Scores:
    """Precision, recall and F1; 0/0 denominators yield 0 with the degenerate flag."""
    if cm.total == 0:
        raise ValueError("confusion matrix is empty")
    degenerate = False
    if cm.tp + cm.fp > 0:
        precision = cm.tp / (cm.tp + cm.fp)
    else:
        precision, degenerate = 0.0, True
    if cm.tp + cm.fn > 0:
        recall = cm.tp / (cm.tp + cm.fn)
    else:
        recall, degenerate = 0.0, True
    if precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1, degenerate = 0.0, True
    return Scores(precision, recall, f1, degenerate)


def merge_confusions(parts: Iterable[ConfusionMatrix]) -> ConfusionMatrix:
    """Micro-aggregation: pool counts before computing rates."""
    tp = fp = fn = tn = 0
    for cm in parts:
        tp += cm.tp
        fp += cm.fp
        fn += cm.fn
        tn += cm.tn
    return ConfusionMatrix(tp, fp, fn, tn)
