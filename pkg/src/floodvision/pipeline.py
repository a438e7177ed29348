"""Experiment orchestration: feature extraction, training, evaluation, artifacts.

Two pipelines share the same reporting machinery.  The classification
pipeline resizes every image to a fixed size, extracts a whole-image
descriptor (or looks one up from an embedding table), grid-searches a
classifier with k-fold cross-validation and evaluates on the held-out
split.  The segmentation pipeline classifies superpixel regions, paints
region probabilities back to pixels, smooths with the pairwise energy
model and scores pixel-level confusion counts (micro-aggregated across
images, per-image scores also reported).

All randomness flows from one config seed through fixed per-stage offsets,
and per-image work is merged in manifest order, so reports are
byte-identical across runs and worker counts.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .classifiers import (
    Dataset,
    GridSearchResult,
    GridSearchSpec,
    KnnModel,
    LogisticModel,
    TreeModel,
    grid_search,
    knn_vote_fractions,
    predict_batch,
    predict_proba_batch,
    save_model,
    tree_proba_batch,
)
from .crf import CrfParams, ProbMap, icm_refine
from .evaluation import ConfusionMatrix, Scores, confusion, merge_confusions, scores
from .features import (
    EmbeddingTable,
    Extractor,
    HogParams,
    LbpParams,
    hog_feature,
    lbp_feature,
    load_embeddings,
)
from .imaging import Image, LabelMask, load_image, load_mask, resize_bilinear, save_image, save_mask, to_grayscale
from .manifest import DatasetManifest, ManifestEntry, ValidationError, ingest, split
from .superpixels import SlicParams, region_feature_matrix, region_labels, slic

__all__ = [
    "RunConfig",
    "DEFAULT_GRIDS",
    "REFERENCE_BASELINES",
    "stage_seed",
    "run_classify",
    "run_segment",
    "evaluate_classify",
    "evaluate_segment",
    "render_overlay",
    "predict_images",
]

REPORT_VERSION = 1

DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "logistic": {"reg_strength": [0.001, 0.01, 0.1, 1.0, 10.0]},
    "knn": {"k": [1, 3, 5, 7, 11]},
    "tree": {"max_depth": [3, 5, 10, None], "criterion": ["gini", "entropy"]},
}

# Published precision/recall/F1 for the original road-flood dataset, used
# for non-gating comparison reports.
REFERENCE_BASELINES: dict[str, dict[tuple[str, str], tuple[float, float, float]]] = {
    "classify": {
        ("lbp", "logistic"): (0.76, 0.72, 0.74),
        ("lbp", "knn"): (0.63, 0.76, 0.69),
        ("lbp", "tree"): (0.61, 0.68, 0.64),
        ("hog", "logistic"): (0.70, 0.82, 0.76),
        ("hog", "knn"): (0.56, 0.88, 0.69),
        ("hog", "tree"): (0.71, 0.60, 0.65),
        ("embedding", "logistic"): (0.94, 0.97, 0.95),
        ("embedding", "knn"): (0.67, 0.89, 0.77),
        ("embedding", "tree"): (0.80, 0.77, 0.79),
    },
    "segment": {
        ("region", "logistic"): (0.89, 0.84, 0.86),
        ("region", "knn"): (0.83, 0.82, 0.82),
    },
}

# Per-stage seed offsets keep every stage independently reproducible.
_STAGE_OFFSETS = {"split": 1, "cv": 2, "train": 3, "synth": 4}

_CLASSIFY_FEATURES = ("lbp", "hog", "embedding")
_CLASSIFIERS = ("logistic", "knn", "tree")


def stage_seed(seed: int, stage: str) -> int:
    return seed + _STAGE_OFFSETS[stage]


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration for one classification or segmentation run."""

    pipeline: str
    feature: str
    classifier: str
    manifest: Path
    out: Path
    embeddings: Optional[Path] = None
    seed: int = 42
    workers: int = 1
    folds: int = 5
    score: str = "f1"
    grid: Optional[dict[str, list]] = None
    train_params: dict[str, Any] = field(default_factory=dict)
    lbp: LbpParams = field(default_factory=LbpParams)
    hog: HogParams = field(default_factory=HogParams)
    slic: SlicParams = field(default_factory=SlicParams)
    crf: CrfParams = field(default_factory=CrfParams)
    region_label_threshold: float = 0.5
    resize_to: tuple[int, int] = (224, 224)
    overlay_alpha: float = 0.5

    def __post_init__(self) -> None:
        if self.pipeline not in ("classify", "segment"):
            raise ValidationError(f"unknown pipeline {self.pipeline!r}")
        if self.pipeline == "classify":
            if self.feature not in _CLASSIFY_FEATURES:
                raise ValidationError(f"classification feature must be one of {_CLASSIFY_FEATURES}")
            if self.feature == "embedding" and self.embeddings is None:
                raise ValidationError("the embedding feature requires an --embeddings file")
        else:
            if self.feature != "region":
                raise ValidationError("the segmentation pipeline uses the 'region' feature")
        if self.classifier not in _CLASSIFIERS:
            raise ValidationError(f"classifier must be one of {_CLASSIFIERS}")
        if self.workers < 1:
            raise ValidationError("workers must be at least 1")
        if not 0.0 <= self.overlay_alpha <= 1.0:
            raise ValidationError("overlay alpha must lie in [0, 1]")
        object.__setattr__(self, "manifest", Path(self.manifest))
        object.__setattr__(self, "out", Path(self.out))
        if self.embeddings is not None:
            object.__setattr__(self, "embeddings", Path(self.embeddings))
        object.__setattr__(self, "resize_to", tuple(self.resize_to))

    @classmethod
    def from_dict(cls, doc: dict[str, Any], base_dir: Optional[Path] = None) -> "RunConfig":
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        doc = dict(doc)
        for name, klass in (("lbp", LbpParams), ("hog", HogParams), ("slic", SlicParams), ("crf", CrfParams)):
            if name in doc and isinstance(doc[name], dict):
                doc[name] = klass(**doc[name])
        for name in ("manifest", "out", "embeddings"):
            if doc.get(name) is not None:
                p = Path(doc[name])
                if base_dir is not None and not p.is_absolute():
                    p = base_dir / p
                doc[name] = p
        return cls(**doc)

    def canonical_dict(self) -> dict[str, Any]:
        """Semantic fields only; paths and worker counts are excluded so the
        hash (and therefore report bytes) survive relocation."""
        doc = asdict(self)
        for name in ("manifest", "out", "embeddings", "workers"):
            doc.pop(name)
        doc["resize_to"] = list(self.resize_to)
        return doc

    def config_hash(self) -> str:
        canonical = json.dumps(self.canonical_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def effective_grid(self) -> dict[str, list]:
        return self.grid if self.grid is not None else DEFAULT_GRIDS[self.classifier]

    def fixed_params(self) -> dict[str, Any]:
        return dict(self.train_params) if self.classifier == "logistic" else {}


def _map_ordered(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _write_json(path: Path, doc: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def _score_block(cm: ConfusionMatrix, sc: Scores) -> dict[str, Any]:
    return {"confusion": cm.as_dict(), **sc.as_dict()}


def _reference_block(cfg: RunConfig, test_scores: Scores) -> Optional[dict[str, Any]]:
    row = REFERENCE_BASELINES.get(cfg.pipeline, {}).get((cfg.feature, cfg.classifier))
    if row is None:
        return None
    precision, recall, f1 = row
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "delta": {
            "precision": round(test_scores.precision - precision, 6),
            "recall": round(test_scores.recall - recall, 6),
            "f1": round(test_scores.f1 - f1, 6),
        },
    }


def _cv_block(cfg: RunConfig, result: GridSearchResult) -> dict[str, Any]:
    return {
        "folds": cfg.folds,
        "score": cfg.score,
        "grid": cfg.effective_grid(),
        "candidates": result.candidates,
        "best_params": result.best_params,
        "best_mean_score": result.best_mean_score,
    }


# ---------------------------------------------------------------------------
# Classification pipeline
# ---------------------------------------------------------------------------


def _classify_vector(cfg: RunConfig, manifest: DatasetManifest, table: Optional[EmbeddingTable], entry: ManifestEntry) -> np.ndarray:
    if cfg.feature == "embedding":
        return table.vector(entry.image).values
    img = load_image(manifest.image_path(entry))
    img = resize_bilinear(img, cfg.resize_to[0], cfg.resize_to[1])
    gray = to_grayscale(img)
    if cfg.feature == "lbp":
        return lbp_feature(gray, cfg.lbp).values
    return hog_feature(gray, cfg.hog).values


def _classify_dataset(cfg: RunConfig, manifest: DatasetManifest, entries: Sequence[ManifestEntry], table: Optional[EmbeddingTable]) -> Dataset:
    vectors = _map_ordered(lambda e: _classify_vector(cfg, manifest, table, e), entries, cfg.workers)
    extractor = Extractor(cfg.feature)
    return Dataset(np.stack(vectors), np.array([e.label for e in entries]), extractor)


def _load_table(cfg: RunConfig) -> Optional[EmbeddingTable]:
    if cfg.feature != "embedding":
        return None
    table = load_embeddings(cfg.embeddings)
    return table


def run_classify(cfg: RunConfig) -> dict[str, Any]:
    """Train, select, and evaluate an image classifier; write all artifacts."""
    if cfg.pipeline != "classify":
        raise ValidationError("run_classify needs a classify config")
    manifest = ingest(cfg.manifest)
    table = _load_table(cfg)
    if table is not None:
        missing = [e.image for e in manifest.entries if e.image not in table.entries]
        if missing:
            raise ValidationError(f"embedding file lacks {len(missing)} entries, e.g. {missing[:3]}")
    train_entries, test_entries = split(manifest, stage_seed(cfg.seed, "split"))

    train_ds = _classify_dataset(cfg, manifest, train_entries, table)
    test_ds = _classify_dataset(cfg, manifest, test_entries, table)

    spec = GridSearchSpec(
        cfg.classifier,
        cfg.effective_grid(),
        folds=cfg.folds,
        seed=stage_seed(cfg.seed, "cv"),
        score=cfg.score,
        fixed_params=cfg.fixed_params(),
    )
    result = grid_search(train_ds, spec)

    pred = predict_batch(result.model, test_ds.X)
    cm = confusion(pred, test_ds.y)
    sc = scores(cm)

    report: dict[str, Any] = {
        "format_version": REPORT_VERSION,
        "pipeline": "classify",
        "feature": cfg.feature,
        "classifier": cfg.classifier,
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "dataset": {
            "n_entries": len(manifest.entries),
            "n_train": len(train_entries),
            "n_test": len(test_entries),
            "train_class_counts": _count_labels(train_entries),
            "test_class_counts": _count_labels(test_entries),
        },
        "cv": _cv_block(cfg, result),
        "test": {**_score_block(cm, sc), "accuracy": float((pred == test_ds.y).mean())},
    }
    reference = _reference_block(cfg, sc)
    if reference is not None:
        report["reference_baseline"] = reference

    _write_json(cfg.out / "report.json", report)
    save_model(result.model, cfg.out / "model.json")
    _write_json(cfg.out / "run_config.json", _config_doc(cfg))
    return report


def evaluate_classify(cfg: RunConfig, model, which: str = "test") -> dict[str, Any]:
    """Evaluate a trained classifier on the manifest's chosen split."""
    manifest = ingest(cfg.manifest)
    table = _load_table(cfg)
    entries = _pick_split(manifest, cfg, which)
    ds = _classify_dataset(cfg, manifest, entries, table)
    pred = predict_batch(model, ds.X)
    cm = confusion(pred, ds.y)
    sc = scores(cm)
    return {
        "format_version": REPORT_VERSION,
        "pipeline": "classify-eval",
        "feature": cfg.feature,
        "classifier": cfg.classifier,
        "split": which,
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "n_images": len(entries),
        "test": {**_score_block(cm, sc), "accuracy": float((pred == ds.y).mean())},
    }


def _count_labels(entries: Sequence[ManifestEntry]) -> dict[str, int]:
    return {
        "0": sum(1 for e in entries if e.label == 0),
        "1": sum(1 for e in entries if e.label == 1),
    }


def _pick_split(manifest: DatasetManifest, cfg: RunConfig, which: str) -> tuple[ManifestEntry, ...]:
    if which == "all":
        return manifest.entries
    train_entries, test_entries = split(manifest, stage_seed(cfg.seed, "split"))
    if which == "train":
        return train_entries
    if which == "test":
        return test_entries
    raise ValidationError(f"unknown split {which!r}; choose train, test, or all")


def _config_doc(cfg: RunConfig) -> dict[str, Any]:
    doc = asdict(cfg)
    for name in ("manifest", "out", "embeddings"):
        doc[name] = str(doc[name]) if doc[name] is not None else None
    doc["resize_to"] = list(cfg.resize_to)
    return doc


# ---------------------------------------------------------------------------
# Segmentation pipeline
# ---------------------------------------------------------------------------


def _flood_manifest(manifest: DatasetManifest) -> DatasetManifest:
    flood = tuple(e for e in manifest.entries if e.label == 1)
    if not flood:
        raise ValidationError("segmentation needs at least one flood entry with a mask")
    return replace(manifest, entries=flood)


def _region_training_rows(cfg: RunConfig, manifest: DatasetManifest, entry: ManifestEntry) -> tuple[np.ndarray, np.ndarray]:
    img = load_image(manifest.image_path(entry))
    truth = load_mask(manifest.mask_path(entry))
    if (truth.height, truth.width) != (img.height, img.width):
        raise ValidationError(f"{entry.image}: mask dimensions do not match the image")
    sp = slic(img, cfg.slic)
    features = region_feature_matrix(img, sp)
    labels = region_labels(sp, truth, cfg.region_label_threshold)
    return features, labels


def _region_probabilities(model, features: np.ndarray) -> np.ndarray:
    if isinstance(model, LogisticModel):
        return predict_proba_batch(model, features)
    if isinstance(model, KnnModel):
        return knn_vote_fractions(model, features)
    if isinstance(model, TreeModel):
        return tree_proba_batch(model, features)
    raise TypeError(f"unsupported model type {type(model).__name__}")


def _mask_file_stem(entry: ManifestEntry) -> str:
    return entry.image.replace("/", "__").replace("\\", "__")


def _segment_one(cfg: RunConfig, manifest: DatasetManifest, model, entry: ManifestEntry, write_artifacts: bool) -> dict[str, Any]:
    img = load_image(manifest.image_path(entry))
    truth = load_mask(manifest.mask_path(entry))
    sp = slic(img, cfg.slic)
    features = region_feature_matrix(img, sp)
    probs = _region_probabilities(model, features)
    prob_map = ProbMap(probs[sp.labels])

    unary_mask = LabelMask((prob_map.p_flood > 0.5).astype(np.uint8))
    crf_mask = icm_refine(prob_map, img, cfg.crf)

    cm_crf = confusion(crf_mask.labels, truth.labels)
    cm_unary = confusion(unary_mask.labels, truth.labels)

    if write_artifacts:
        stem = _mask_file_stem(entry)
        save_mask(crf_mask, cfg.out / "masks" / stem)
        save_image(render_overlay(img, crf_mask, cfg.overlay_alpha), cfg.out / "overlays" / stem)

    return {
        "image": entry.image,
        "crf": cm_crf,
        "unary": cm_unary,
    }


def _segment_metrics(per_image: list[dict[str, Any]]) -> dict[str, Any]:
    micro_crf = merge_confusions(r["crf"] for r in per_image)
    micro_unary = merge_confusions(r["unary"] for r in per_image)
    return {
        "aggregation": "micro",
        "pixel": {
            "crf": _score_block(micro_crf, scores(micro_crf)),
            "unary": _score_block(micro_unary, scores(micro_unary)),
        },
        "per_image": [
            {
                "image": r["image"],
                "crf": _score_block(r["crf"], scores(r["crf"])),
                "unary": _score_block(r["unary"], scores(r["unary"])),
            }
            for r in per_image
        ],
    }


def run_segment(cfg: RunConfig) -> dict[str, Any]:
    """Train a region classifier, smooth pixel maps, and score test masks."""
    if cfg.pipeline != "segment":
        raise ValidationError("run_segment needs a segment config")
    manifest = _flood_manifest(ingest(cfg.manifest, require_masks=True))
    train_entries, test_entries = split(manifest, stage_seed(cfg.seed, "split"))

    rows = _map_ordered(lambda e: _region_training_rows(cfg, manifest, e), train_entries, cfg.workers)
    X = np.concatenate([r[0] for r in rows])
    y = np.concatenate([r[1] for r in rows])
    train_ds = Dataset(X, y, Extractor.REGION)

    spec = GridSearchSpec(
        cfg.classifier,
        cfg.effective_grid(),
        folds=cfg.folds,
        seed=stage_seed(cfg.seed, "cv"),
        score=cfg.score,
        fixed_params=cfg.fixed_params(),
    )
    result = grid_search(train_ds, spec)

    per_image = _map_ordered(
        lambda e: _segment_one(cfg, manifest, result.model, e, write_artifacts=True),
        test_entries,
        cfg.workers,
    )

    report: dict[str, Any] = {
        "format_version": REPORT_VERSION,
        "pipeline": "segment",
        "feature": cfg.feature,
        "classifier": cfg.classifier,
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "dataset": {
            "n_entries": len(manifest.entries),
            "n_train": len(train_entries),
            "n_test": len(test_entries),
            "train_regions": int(train_ds.n),
        },
        "cv": _cv_block(cfg, result),
        **_segment_metrics(per_image),
    }
    reference = _reference_block(cfg, scores(merge_confusions(r["crf"] for r in per_image)))
    if reference is not None:
        report["reference_baseline"] = reference

    _write_json(cfg.out / "report.json", report)
    save_model(result.model, cfg.out / "model.json")
    _write_json(cfg.out / "run_config.json", _config_doc(cfg))
    return report


def evaluate_segment(cfg: RunConfig, model, which: str = "test", write_artifacts: bool = False) -> dict[str, Any]:
    """Segment and score the chosen split with an already-trained model."""
    manifest = _flood_manifest(ingest(cfg.manifest, require_masks=True))
    entries = _pick_split(manifest, cfg, which)
    per_image = _map_ordered(
        lambda e: _segment_one(cfg, manifest, model, e, write_artifacts), entries, cfg.workers
    )
    return {
        "format_version": REPORT_VERSION,
        "pipeline": "segment-eval",
        "feature": cfg.feature,
        "classifier": cfg.classifier,
        "split": which,
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "n_images": len(entries),
        **_segment_metrics(per_image),
    }


# ---------------------------------------------------------------------------
# Prediction and overlays
# ---------------------------------------------------------------------------


def render_overlay(img: Image, mask: LabelMask, alpha: float = 0.5) -> Image:
    """Blend flood pixels toward pure yellow; other pixels pass through."""
    if (mask.height, mask.width) != (img.height, img.width):
        raise ValueError("mask dimensions do not match the image")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    out = img.pixels.astype(np.float64).copy()
    flood = mask.labels.astype(bool)
    yellow = np.array([255.0, 255.0, 0.0])
    out[flood] = (1.0 - alpha) * out[flood] + alpha * yellow
    return Image(np.floor(out + 0.5).astype(np.uint8))


def predict_images(cfg: RunConfig, model, image_paths: Sequence[str | Path], out_dir: Optional[Path] = None) -> list[dict[str, Any]]:
    """Apply a trained model to loose image files.

    Classification returns label/probability records; segmentation writes
    a mask and overlay per image and returns flood-fraction records.
    """
    results = []
    table = _load_table(cfg)
    for path in image_paths:
        path = Path(path)
        img = load_image(path)
        if cfg.pipeline == "classify":
            if cfg.feature == "embedding":
                vec = table.vector(path.name).values
            else:
                small = resize_bilinear(img, cfg.resize_to[0], cfg.resize_to[1])
                gray = to_grayscale(small)
                vec = (lbp_feature(gray, cfg.lbp) if cfg.feature == "lbp" else hog_feature(gray, cfg.hog)).values
            prob = float(_region_probabilities(model, vec[None, :])[0])
            results.append({"image": str(path), "label": int(prob >= 0.5), "p_flood": prob})
        else:
            sp = slic(img, cfg.slic)
            features = region_feature_matrix(img, sp)
            probs = _region_probabilities(model, features)
            prob_map = ProbMap(probs[sp.labels])
            mask = icm_refine(prob_map, img, cfg.crf)
            record = {"image": str(path), "flood_fraction": float(mask.labels.mean())}
            if out_dir is not None:
                save_mask(mask, Path(out_dir) / "masks" / f"{path.stem}.png")
                save_image(render_overlay(img, mask, cfg.overlay_alpha), Path(out_dir) / "overlays" / f"{path.stem}.png")
                record["mask"] = f"masks/{path.stem}.png"
                record["overlay"] = f"overlays/{path.stem}.png"
            results.append(record)
    return results
