"""CLI: embed-export --root <dir> --out <csv> [--batch <n>] [--weights ...]."""

from __future__ import annotations

import argparse
import sys

from .export import ExportJob, export
from .model import build_extractor

__all__ = ["main"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="embed-export", description=__doc__)
    parser.add_argument("--root", required=True, help="directory tree of images to embed")
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--batch", type=int, default=8, help="images per forward pass")
    parser.add_argument(
        "--weights",
        choices=("pretrained", "random"),
        default="pretrained",
        help="'random' builds a seeded untrained extractor for offline testing",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for --weights random")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        trunk = build_extractor(args.weights, seed=args.seed)
        result = export(ExportJob(args.root, args.out, args.batch), trunk)
    except (FileNotFoundError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {result.written} embeddings to {args.out}")
    if result.skipped:
        print(f"skipped {len(result.skipped)} undecodable images", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
