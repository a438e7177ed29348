"""Supervised classifiers, cross-validation, and model serialization."""

from .dataset import Dataset, Standardization
from .logistic import (
    LogisticModel,
    logistic_loss_and_gradient,
    predict_label,
    predict_proba,
    predict_proba_batch,
    sigmoid,
    train_logreg,
)
from .neighbors import (
    KnnModel,
    knn_predict,
    knn_predict_batch,
    knn_predict_proba,
    knn_vote_fractions,
    train_knn,
)
from .selection import (
    MODEL_KINDS,
    GridSearchResult,
    GridSearchSpec,
    fit_model,
    grid_search,
    kfold_split,
    predict_batch,
)
from .serialize import load_model, model_from_dict, model_to_dict, save_model
from .tree import (
    TreeModel,
    TreeNode,
    train_tree,
    tree_predict,
    tree_predict_batch,
    tree_predict_proba,
    tree_proba_batch,
)

__all__ = [
    "Dataset",
    "Standardization",
    "LogisticModel",
    "KnnModel",
    "TreeModel",
    "TreeNode",
    "GridSearchSpec",
    "GridSearchResult",
    "MODEL_KINDS",
    "sigmoid",
    "logistic_loss_and_gradient",
    "train_logreg",
    "predict_proba",
    "predict_proba_batch",
    "predict_label",
    "train_knn",
    "knn_predict",
    "knn_predict_proba",
    "knn_predict_batch",
    "knn_vote_fractions",
    "train_tree",
    "tree_predict",
    "tree_predict_proba",
    "tree_predict_batch",
    "tree_proba_batch",
    "kfold_split",
    "grid_search",
    "fit_model",
    "predict_batch",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
]
