"""Road-scene floodwater detection: classification and pixel segmentation.

The library pairs classical texture descriptors (LBP, HOG) and superpixel
region features with simple supervised classifiers, smooths pixel labels
with a pairwise energy model, and ships a CLI for running full experiments
against manifest-described datasets.
"""

from .classifiers import (
    Dataset,
    GridSearchResult,
    GridSearchSpec,
    KnnModel,
    LogisticModel,
    TreeModel,
    grid_search,
    kfold_split,
    knn_predict,
    knn_predict_proba,
    load_model,
    predict_label,
    predict_proba,
    save_model,
    sigmoid,
    train_knn,
    train_logreg,
    train_tree,
    tree_predict,
)
from .crf import CrfParams, ProbMap, crf_energy, icm_refine, icm_refine_trace
from .evaluation import ConfusionMatrix, Scores, confusion, merge_confusions, scores
from .features import (
    EmbeddingTable,
    Extractor,
    FeatureVector,
    HogParams,
    LbpParams,
    hog_feature,
    lbp_code,
    lbp_feature,
    load_embeddings,
)
from .imaging import (
    GradientField,
    GrayImage,
    Image,
    LabelMask,
    gradients,
    load_image,
    load_mask,
    resize_bilinear,
    save_image,
    save_mask,
    to_grayscale,
)
from .manifest import DatasetManifest, ManifestEntry, ValidationError, derive_manifest, ingest, split
from .pipeline import (
    RunConfig,
    render_overlay,
    run_classify,
    run_segment,
)
from .superpixels import (
    RegionFeature,
    SlicParams,
    SuperpixelMap,
    paint_regions,
    region_features,
    region_labels,
    slic,
)
from .synth import generate_classification_dataset, generate_segmentation_dataset

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # imaging
    "Image",
    "GrayImage",
    "GradientField",
    "LabelMask",
    "load_image",
    "save_image",
    "load_mask",
    "save_mask",
    "to_grayscale",
    "resize_bilinear",
    "gradients",
    # features
    "Extractor",
    "FeatureVector",
    "LbpParams",
    "HogParams",
    "EmbeddingTable",
    "lbp_code",
    "lbp_feature",
    "hog_feature",
    "load_embeddings",
    # superpixels
    "SlicParams",
    "SuperpixelMap",
    "RegionFeature",
    "slic",
    "region_features",
    "region_labels",
    "paint_regions",
    # classifiers
    "Dataset",
    "LogisticModel",
    "KnnModel",
    "TreeModel",
    "GridSearchSpec",
    "GridSearchResult",
    "sigmoid",
    "train_logreg",
    "predict_proba",
    "predict_label",
    "train_knn",
    "knn_predict",
    "knn_predict_proba",
    "train_tree",
    "tree_predict",
    "kfold_split",
    "grid_search",
    "save_model",
    "load_model",
    # crf
    "ProbMap",
    "CrfParams",
    "crf_energy",
    "icm_refine",
    "icm_refine_trace",
    # evaluation
    "ConfusionMatrix",
    "Scores",
    "confusion",
    "scores",
    "merge_confusions",
    # manifests and pipelines
    "DatasetManifest",
    "ManifestEntry",
    "ValidationError",
    "derive_manifest",
    "ingest",
    "split",
    "RunConfig",
    "run_classify",
    "run_segment",
    "render_overlay",
    "generate_classification_dataset",
    "generate_segmentation_dataset",
]
