"""Versioned JSON serialization for trained models.

Floats are written with Python's shortest round-trip representation, so
loading a saved model reproduces every finite double exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .dataset import Standardization
from .logistic import LogisticModel
from .neighbors import KnnModel
from .tree import TreeModel, TreeNode

__all__ = ["model_to_dict", "model_from_dict", "save_model", "load_model"]

FORMAT_VERSION = 1


def _node_to_dict(node: TreeNode) -> dict[str, Any]:
    d: dict[str, Any] = {"class": node.klass, "p1": node.p1, "n": node.n}
    if not node.is_leaf:
        d["feature"] = node.feature
        d["threshold"] = node.threshold
        d["left"] = _node_to_dict(node.left)
        d["right"] = _node_to_dict(node.right)
    return d


def _node_from_dict(d: dict[str, Any]) -> TreeNode:
    if "feature" in d:
        return TreeNode(
            d["class"], d["p1"], d["n"], d["feature"], d["threshold"],
            _node_from_dict(d["left"]), _node_from_dict(d["right"]),
        )
    return TreeNode(d["class"], d["p1"], d["n"])


def model_to_dict(model) -> dict[str, Any]:
    if isinstance(model, LogisticModel):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "logistic",
            "hyperparameters": {"penalty": model.penalty, "reg_strength": model.reg_strength},
            "standardization": model.standardization.as_dict(),
            "parameters": {"weights": model.weights.tolist(), "bias": model.bias},
        }
    if isinstance(model, KnnModel):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "knn",
            "hyperparameters": {"k": model.k},
            "standardization": model.standardization.as_dict(),
            "parameters": {"rows": model.rows.tolist(), "labels": model.labels.tolist()},
        }
    if isinstance(model, TreeModel):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "tree",
            "hyperparameters": {
                "criterion": model.criterion,
                "max_depth": model.max_depth,
                "min_samples_split": model.min_samples_split,
            },
            "standardization": None,
            "parameters": {"feature_dim": model.feature_dim, "tree": _node_to_dict(model.root)},
        }
    raise TypeError(f"unsupported model type {type(model).__name__}")


def model_from_dict(doc: dict[str, Any]):
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r}")
    kind = doc.get("kind")
    hp = doc["hyperparameters"]
    params = doc["parameters"]
    if kind == "logistic":
        return LogisticModel(
            np.asarray(params["weights"], dtype=np.float64),
            float(params["bias"]),
            hp["penalty"],
            float(hp["reg_strength"]),
            Standardization.from_dict(doc["standardization"]),
        )
    if kind == "knn":
        return KnnModel(
            int(hp["k"]),
            np.asarray(params["rows"], dtype=np.float64),
            np.asarray(params["labels"], dtype=np.int64),
            Standardization.from_dict(doc["standardization"]),
        )
    if kind == "tree":
        return TreeModel(
            _node_from_dict(params["tree"]),
            hp["criterion"],
            hp["max_depth"],
            int(hp["min_samples_split"]),
            int(params["feature_dim"]),
        )
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(model_to_dict(model), sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: str | Path):
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
