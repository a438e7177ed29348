"""Dataset manifests: discovery, validation, and seeded train/test splits.

A manifest is a JSON document {"root": ..., "entries": [{"image": ...,
"label": 0|1, "mask": ...}, ...]} with paths relative to the root.  For
datasets laid out as flood/, dry/ and masks/ directories the manifest can
be derived directly from the tree (masks share their flood image's
filename).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .imaging import load_image, load_mask

__all__ = ["ManifestEntry", "DatasetManifest", "ValidationError", "load_manifest", "derive_manifest", "ingest", "split"]

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


class ValidationError(ValueError):
    """Input data failed validation; the message lists the offending entries."""


@dataclass(frozen=True)
class ManifestEntry:
    image: str
    label: int
    mask: Optional[str] = None

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValidationError(f"{self.image}: label must be 0 or 1, got {self.label!r}")
        for rel in (self.image, self.mask):
            if rel is None:
                continue
            p = Path(rel)
            if p.is_absolute() or ".." in p.parts:
                raise ValidationError(f"{rel}: entry paths must stay inside the dataset root")


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    entries: tuple[ManifestEntry, ...]
    split_seed: int = 42
    train_fraction: float = 0.8

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError("train_fraction must lie in (0, 1)")
        object.__setattr__(self, "root", Path(self.root))
        object.__setattr__(self, "entries", tuple(self.entries))

    def image_path(self, entry: ManifestEntry) -> Path:
        return self.root / entry.image

    def mask_path(self, entry: ManifestEntry) -> Optional[Path]:
        return self.root / entry.mask if entry.mask else None

    def class_counts(self) -> dict[int, int]:
        counts = {0: 0, 1: 0}
        for e in self.entries:
            counts[e.label] += 1
        return counts


def load_manifest(path: str | Path) -> DatasetManifest:
    """Read a manifest JSON file; a relative root resolves against the file."""
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such manifest: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{p}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "entries" not in doc:
        raise ValidationError(f"{p}: manifest must be an object with an 'entries' list")
    root = Path(doc.get("root", "."))
    if not root.is_absolute():
        root = p.parent / root
    entries = []
    for i, raw in enumerate(doc["entries"]):
        if not isinstance(raw, dict) or "image" not in raw or "label" not in raw:
            raise ValidationError(f"{p}: entry {i} must carry 'image' and 'label'")
        entries.append(ManifestEntry(raw["image"], raw["label"], raw.get("mask")))
    return DatasetManifest(
        root,
        tuple(entries),
        split_seed=int(doc.get("split_seed", 42)),
        train_fraction=float(doc.get("train_fraction", 0.8)),
    )


def derive_manifest(root: str | Path) -> DatasetManifest:
    """Build a manifest from the flood/, dry/, masks/ directory convention."""
    root = Path(root)
    flood_dir = root / "flood"
    dry_dir = root / "dry"
    masks_dir = root / "masks"
    if not flood_dir.is_dir() and not dry_dir.is_dir():
        raise ValidationError(f"{root}: expected flood/ and/or dry/ subdirectories")
    entries = []
    if flood_dir.is_dir():
        for img in sorted(flood_dir.iterdir()):
            if img.suffix.lower() not in IMAGE_SUFFIXES:
                continue
            mask = masks_dir / img.name
            entries.append(
                ManifestEntry(
                    str(img.relative_to(root)),
                    1,
                    str(mask.relative_to(root)) if mask.exists() else None,
                )
            )
    if dry_dir.is_dir():
        for img in sorted(dry_dir.iterdir()):
            if img.suffix.lower() in IMAGE_SUFFIXES:
                entries.append(ManifestEntry(str(img.relative_to(root)), 0))
    if not entries:
        raise ValidationError(f"{root}: no images found under flood/ or dry/")
    return DatasetManifest(root, tuple(entries))


def ingest(source: str | Path, require_masks: bool = False) -> DatasetManifest:
    """Load and fully validate a manifest (file path or dataset directory).

    Every referenced image must exist and decode; masks must decode to
    binary rasters whose dimensions match their image.  With
    `require_masks`, every class-1 entry must carry a mask.  All problems
    are collected and reported together.
    """
    source = Path(source)
    manifest = derive_manifest(source) if source.is_dir() else load_manifest(source)
    problems: list[str] = []
    for entry in manifest.entries:
        img_path = manifest.image_path(entry)
        img = None
        try:
            img = load_image(img_path)
        except (FileNotFoundError, ValueError) as exc:
            problems.append(str(exc))
        if entry.mask is None:
            if require_masks and entry.label == 1:
                problems.append(f"{entry.image}: flood entry is missing a mask")
            continue
        try:
            mask = load_mask(manifest.mask_path(entry))
        except (FileNotFoundError, ValueError) as exc:
            problems.append(str(exc))
            continue
        if img is not None and (mask.height, mask.width) != (img.height, img.width):
            problems.append(
                f"{entry.image}: mask is {mask.width}x{mask.height}, image is {img.width}x{img.height}"
            )
    if problems:
        raise ValidationError("dataset validation failed:\n  " + "\n  ".join(problems))
    return manifest


def split(
    manifest: DatasetManifest, seed: Optional[int] = None
) -> tuple[tuple[ManifestEntry, ...], tuple[ManifestEntry, ...]]:
    """Seeded shuffle into train/test; the first ceil(fraction*n) go to train."""
    n = len(manifest.entries)
    if n < 2:
        raise ValidationError("need at least 2 entries to split")
    if seed is None:
        seed = manifest.split_seed
    perm = np.random.default_rng(seed).permutation(n)
    n_train = math.ceil(manifest.train_fraction * n)
    train = tuple(manifest.entries[i] for i in perm[:n_train])
    test = tuple(manifest.entries[i] for i in perm[n_train:])
    return train, test
