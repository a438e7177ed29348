"""Walk an image tree, embed every image, and write one CSV row per file.

The CSV is the interchange format of the classification pipeline: UTF-8,
LF line endings, header `path,f0,...,f{d-1}`, each row keyed by the
root-relative POSIX path.  Floats are written with Python's shortest
round-trip representation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from .model import EMBEDDING_DIM, embed_batch, preprocess

__all__ = ["ExportJob", "ExportResult", "iter_image_paths", "export"]

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


@dataclass(frozen=True)
class ExportJob:
    root: Path
    out_csv: Path
    batch_size: int = 8

    def __post_init__(self) -> None:
        object.__setattr__(self, "root", Path(self.root))
        object.__setattr__(self, "out_csv", Path(self.out_csv))
        if not self.root.is_dir():
            raise FileNotFoundError(f"image root {self.root} is not a directory")
        if self.batch_size < 1:
            raise ValueError("batch size must be at least 1")


@dataclass(frozen=True)
class ExportResult:
    written: int
    skipped: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.skipped


def iter_image_paths(root: Path) -> list[str]:
    """Root-relative POSIX paths of all images under root, sorted."""
    found = [
        p.relative_to(root).as_posix()
        for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    ]
    return sorted(found)


def _load_rgb(path: Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def _format_row(key: str, values: np.ndarray) -> str:
    if "," in key:
        raise ValueError(f"image path {key!r} contains a comma and cannot be a CSV key")
    return key + "," + ",".join(repr(float(v)) for v in values)


def export(job: ExportJob, trunk: torch.nn.Module) -> ExportResult:
    """Embed every image under the job root into the output CSV.

    Undecodable images are skipped with a warning and reported in the
    result so the caller can exit nonzero.  An empty tree still yields a
    valid header-only file.
    """
    keys = iter_image_paths(job.root)
    if not keys:
        warnings.warn(f"{job.root}: no images found; writing a header-only file", stacklevel=2)

    job.out_csv.parent.mkdir(parents=True, exist_ok=True)
    header = "path," + ",".join(f"f{i}" for i in range(EMBEDDING_DIM))
    written = 0
    skipped: list[str] = []
    with open(job.out_csv, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        batch_keys: list[str] = []
        batch_tensors: list[torch.Tensor] = []

        def flush() -> None:
            nonlocal written
            if not batch_keys:
                return
            rows = embed_batch(trunk, torch.stack(batch_tensors))
            for key, row in zip(batch_keys, rows):
                fh.write(_format_row(key, row) + "\n")
                written += 1
            batch_keys.clear()
            batch_tensors.clear()

        for key in keys:
            try:
                rgb = _load_rgb(job.root / key)
            except (UnidentifiedImageError, OSError) as exc:
                warnings.warn(f"skipping {key}: {exc}", stacklevel=2)
                skipped.append(key)
                continue
            batch_keys.append(key)
            batch_tensors.append(preprocess(rgb))
            if len(batch_keys) >= job.batch_size:
                flush()
        flush()
    return ExportResult(written, tuple(skipped))
