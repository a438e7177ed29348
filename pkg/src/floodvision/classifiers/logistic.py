"""Binary logistic regression trained with full-batch gradient descent.

The optimizer is deterministic by construction: weights start at zero,
features are standardized inside the model, and the training loss (mean
negative log-likelihood plus the penalty) is recorded every epoch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..features import FeatureVector
from .dataset import Dataset, Standardization

__all__ = [
    "LogisticModel",
    "sigmoid",
    "logistic_loss_and_gradient",
    "train_logreg",
    "predict_proba",
    "predict_proba_batch",
    "predict_label",
]

PENALTIES = ("l1", "l2")


def sigmoid(t):
    """Numerically safe logistic function 1 / (1 + exp(-t)).

    Negative inputs go through the equivalent exp(t) / (1 + exp(t)) branch
    so large magnitudes never overflow.
    """
    arr = np.asarray(t, dtype=np.float64)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    e = np.exp(arr[~pos])
    out[~pos] = e / (1.0 + e)
    return float(out) if np.isscalar(t) or arr.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class LogisticModel:
    weights: np.ndarray
    bias: float
    penalty: str
    reg_strength: float
    standardization: Standardization
    loss_history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[0]


def logistic_loss_and_gradient(
    w: np.ndarray,
    b: float,
    Z: np.ndarray,
    y: np.ndarray,
    penalty: str,
    reg_strength: float,
) -> tuple[float, np.ndarray, float]:
    """Regularized mean NLL with its exact gradient.

    L2 adds (lambda/2)||w||^2, L1 adds lambda*||w||_1 with the subgradient
    sign(w); the bias is never penalized.
    """
    n = Z.shape[0]
    z = Z @ w + b
    # softplus(z) - y*z is the per-row negative log-likelihood.
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    p = sigmoid(z)
    residual = p - y
    grad_w = Z.T @ residual / n
    grad_b = float(residual.mean())
    if penalty == "l2":
        loss += 0.5 * reg_strength * float(w @ w)
        grad_w = grad_w + reg_strength * w
    elif penalty == "l1":
        loss += reg_strength * float(np.abs(w).sum())
        grad_w = grad_w + reg_strength * np.sign(w)
    else:
        raise ValueError(f"unknown penalty {penalty!r}; choose from {PENALTIES}")
    return loss, grad_w, grad_b


def train_logreg(
    data: Dataset,
    penalty: str = "l2",
    reg_strength: float = 0.01,
    lr: float = 0.1,
    epochs: int = 300,
    seed: int = 0,
) -> LogisticModel:
    """Fit by full-batch gradient descent from zero-initialized weights.

    `seed` is accepted for interface uniformity; the optimizer itself is
    deterministic and does not consume randomness.
    """
    del seed
    if penalty not in PENALTIES:
        raise ValueError(f"unknown penalty {penalty!r}; choose from {PENALTIES}")
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    if epochs < 1:
        raise ValueError("epochs must be at least 1")
    if reg_strength < 0:
        raise ValueError("reg_strength must be non-negative")
    if not data.has_both_classes():
        raise ValueError("training data must contain both classes")

    std = Standardization.fit(data.X)
    Z = std.transform(data.X)
    y = data.y.astype(np.float64)
    w = np.zeros(data.feature_dim)
    b = 0.0
    losses = []
    for _ in range(epochs):
        loss, grad_w, grad_b = logistic_loss_and_gradient(w, b, Z, y, penalty, reg_strength)
        losses.append(loss)
        w = w - lr * grad_w
        b = b - lr * grad_b
    return LogisticModel(w, b, penalty, reg_strength, std, tuple(losses))


def _as_row(model: LogisticModel, x: FeatureVector | np.ndarray) -> np.ndarray:
    values = x.values if isinstance(x, FeatureVector) else np.asarray(x, dtype=np.float64)
    if values.ndim != 1 or values.size != model.feature_dim:
        raise ValueError(f"expected a feature vector of length {model.feature_dim}")
    return values


def predict_proba(model: LogisticModel, x: FeatureVector | np.ndarray) -> float:
    """Probability of class 1 for a single feature vector."""
    z = model.standardization.transform(_as_row(model, x))
    return float(sigmoid(float(z @ model.weights + model.bias)))


def predict_proba_batch(model: LogisticModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.feature_dim:
        raise ValueError(f"expected an (n, {model.feature_dim}) matrix")
    Z = model.standardization.transform(X)
    return sigmoid(Z @ model.weights + model.bias)


def predict_label(model: LogisticModel, x: FeatureVector | np.ndarray) -> int:
    return int(predict_proba(model, x) >= 0.5)
