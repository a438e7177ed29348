"""Command-line entry points for dataset checks, training, and prediction.

Exit codes: 0 on success, 1 for validation problems (bad paths, malformed
inputs, impossible configurations), 2 for unexpected runtime failures.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from .classifiers import load_model
from .imaging import load_image, load_mask, save_image
from .manifest import ValidationError, ingest
from .pipeline import (
    RunConfig,
    evaluate_classify,
    evaluate_segment,
    predict_images,
    render_overlay,
    run_classify,
    run_segment,
    stage_seed,
)
from .synth import generate_classification_dataset, generate_segmentation_dataset

__all__ = ["main"]


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"no such config file: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{p}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{p}: config must be a JSON object")
    for name in ("manifest", "out", "embeddings"):
        if doc.get(name) and not Path(doc[name]).is_absolute():
            doc[name] = str(p.parent / doc[name])
    return doc


def _build_config(args: argparse.Namespace, pipeline: str, feature: str | None = None) -> RunConfig:
    doc: dict = {}
    if getattr(args, "config", None):
        doc = _load_config_file(args.config)
    doc["pipeline"] = pipeline
    for name in ("manifest", "out", "embeddings", "seed", "workers", "feature", "classifier"):
        value = getattr(args, name, None)
        if value is not None:
            doc[name] = value
    if feature is not None:
        doc["feature"] = feature
    if "manifest" not in doc:
        raise ValidationError("a dataset manifest is required (--manifest or config file)")
    if "out" not in doc:
        raise ValidationError("an output directory is required (--out or config file)")
    doc.setdefault("classifier", "logistic")
    return RunConfig.from_dict(doc)


def _add_common(parser: argparse.ArgumentParser, with_feature: bool) -> None:
    parser.add_argument("--config", help="JSON run-config file; flags override its fields")
    parser.add_argument("--manifest", help="manifest JSON or dataset directory")
    parser.add_argument("--out", help="output directory for reports and artifacts")
    parser.add_argument("--seed", type=int, default=None, help="global seed (default 42)")
    parser.add_argument("--workers", type=int, default=None, help="parallel per-image workers")
    parser.add_argument("--embeddings", help="embedding CSV (required for the embedding feature)")
    if with_feature:
        parser.add_argument("--feature", choices=("lbp", "hog", "embedding"), help="feature extractor")
    parser.add_argument("--classifier", choices=("logistic", "knn", "tree"), help="classifier kind (default logistic)")


def _cmd_ingest_check(args: argparse.Namespace) -> int:
    manifest = ingest(args.manifest, require_masks=args.require_masks)
    counts = manifest.class_counts()
    masked = sum(1 for e in manifest.entries if e.mask)
    print(f"ok: {len(manifest.entries)} entries under {manifest.root}")
    print(f"  class 1 (flood): {counts[1]}   class 0 (dry): {counts[0]}   with masks: {masked}")
    return 0


def _cmd_classify_train(args: argparse.Namespace) -> int:
    cfg = _build_config(args, "classify")
    if cfg.feature not in ("lbp", "hog", "embedding"):
        raise ValidationError("classify-train needs --feature lbp|hog|embedding")
    report = run_classify(cfg)
    test = report["test"]
    print(f"wrote {cfg.out / 'report.json'}")
    print(
        f"test precision {test['precision']:.4f}  recall {test['recall']:.4f}  f1 {test['f1']:.4f}"
    )
    return 0


def _cmd_segment_train(args: argparse.Namespace) -> int:
    cfg = _build_config(args, "segment", feature="region")
    report = run_segment(cfg)
    crf_scores = report["pixel"]["crf"]
    print(f"wrote {cfg.out / 'report.json'}")
    print(
        f"pixel micro precision {crf_scores['precision']:.4f}  recall {crf_scores['recall']:.4f}  f1 {crf_scores['f1']:.4f}"
    )
    return 0


def _load_run(run_dir: str) -> tuple[RunConfig, object]:
    run = Path(run_dir)
    config_path = run / "run_config.json"
    model_path = run / "model.json"
    if not config_path.exists() or not model_path.exists():
        raise ValidationError(f"{run}: expected run_config.json and model.json from a training run")
    doc = json.loads(config_path.read_text(encoding="utf-8"))
    cfg = RunConfig.from_dict(doc)
    return cfg, load_model(model_path)


def _cmd_classify_eval(args: argparse.Namespace) -> int:
    cfg, model = _load_run(args.run)
    cfg = _override_eval_config(cfg, args)
    report = evaluate_classify(cfg, model, which=args.split)
    out = Path(args.out) if args.out else Path(args.run)
    path = out / f"report-eval-{args.split}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    test = report["test"]
    print(f"wrote {path}")
    print(
        f"{args.split} precision {test['precision']:.4f}  recall {test['recall']:.4f}  f1 {test['f1']:.4f}"
    )
    return 0


def _cmd_segment_eval(args: argparse.Namespace) -> int:
    cfg, model = _load_run(args.run)
    cfg = _override_eval_config(cfg, args)
    report = evaluate_segment(cfg, model, which=args.split, write_artifacts=args.write_masks)
    out = Path(args.out) if args.out else Path(args.run)
    path = out / f"report-eval-{args.split}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    crf_scores = report["pixel"]["crf"]
    print(f"wrote {path}")
    print(
        f"pixel micro precision {crf_scores['precision']:.4f}  recall {crf_scores['recall']:.4f}  f1 {crf_scores['f1']:.4f}"
    )
    return 0


def _override_eval_config(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    from dataclasses import replace

    updates = {}
    if getattr(args, "manifest", None):
        updates["manifest"] = Path(args.manifest)
    if getattr(args, "out", None):
        updates["out"] = Path(args.out)
    if getattr(args, "workers", None):
        updates["workers"] = args.workers
    return replace(cfg, **updates) if updates else cfg


def _cmd_predict(args: argparse.Namespace) -> int:
    cfg, model = _load_run(args.run)
    out_dir = Path(args.out) if args.out else None
    results = predict_images(cfg, model, args.images, out_dir)
    for record in results:
        print(json.dumps(record, sort_keys=True))
    return 0


def _cmd_overlay(args: argparse.Namespace) -> int:
    img = load_image(args.image)
    mask = load_mask(args.mask)
    save_image(render_overlay(img, mask, args.alpha), args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_synth_gen(args: argparse.Namespace) -> int:
    seed = stage_seed(args.seed if args.seed is not None else 42, "synth")
    if args.task == "classify":
        size = (args.width or 256, args.height or 192)
        count = args.count if args.count is not None else 120
        path = generate_classification_dataset(args.out, count=count, seed=seed, size=size)
    else:
        size = (args.width or 176, args.height or 132)
        count = args.count if args.count is not None else 60
        path = generate_segmentation_dataset(args.out, count=count, seed=seed, size=size)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floodvision", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-check", help="validate a dataset manifest or directory")
    p.add_argument("--manifest", required=True, help="manifest JSON or dataset directory")
    p.add_argument("--require-masks", action="store_true", help="demand a mask for every flood entry")
    p.set_defaults(func=_cmd_ingest_check)

    p = sub.add_parser("classify-train", help="train and evaluate an image classifier")
    _add_common(p, with_feature=True)
    p.set_defaults(func=_cmd_classify_train)

    p = sub.add_parser("classify-eval", help="re-evaluate a trained classifier")
    p.add_argument("--run", required=True, help="directory written by classify-train")
    p.add_argument("--manifest", help="override the manifest")
    p.add_argument("--out", help="where to write the evaluation report")
    p.add_argument("--workers", type=int)
    p.add_argument("--split", choices=("train", "test", "all"), default="test")
    p.set_defaults(func=_cmd_classify_eval)

    p = sub.add_parser("segment-train", help="train and evaluate a floodwater segmenter")
    _add_common(p, with_feature=False)
    p.set_defaults(func=_cmd_segment_train)

    p = sub.add_parser("segment-eval", help="re-evaluate a trained segmenter")
    p.add_argument("--run", required=True, help="directory written by segment-train")
    p.add_argument("--manifest", help="override the manifest")
    p.add_argument("--out", help="where to write the evaluation report")
    p.add_argument("--workers", type=int)
    p.add_argument("--split", choices=("train", "test", "all"), default="test")
    p.add_argument("--write-masks", action="store_true", help="also write mask/overlay PNGs")
    p.set_defaults(func=_cmd_segment_eval)

    p = sub.add_parser("predict", help="apply a trained run to loose images")
    p.add_argument("--run", required=True, help="training run directory")
    p.add_argument("--out", help="output directory for masks/overlays (segmentation)")
    p.add_argument("images", nargs="+", help="image files")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("overlay", help="blend a mask over an image in yellow")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=_cmd_overlay)

    p = sub.add_parser("synth-gen", help="generate a seeded synthetic dataset")
    p.add_argument("--task", choices=("classify", "segment"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.set_defaults(func=_cmd_synth_gen)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args) or 0)
    except (ValidationError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:  # pragma: no cover - defensive
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
