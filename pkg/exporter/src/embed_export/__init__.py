"""Batch export of deep convolutional image embeddings to CSV."""

from .export import ExportJob, ExportResult, export, iter_image_paths
from .model import EMBEDDING_DIM, build_extractor, embed_batch, preprocess

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "EMBEDDING_DIM",
    "ExportJob",
    "ExportResult",
    "build_extractor",
    "embed_batch",
    "preprocess",
    "export",
    "iter_image_paths",
]
