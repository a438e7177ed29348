"""Hand-crafted feature extractors (LBP, HOG) and deep-embedding ingestion.

LBP encodes each pixel as an 8-bit word of neighbor-vs-center comparisons
and summarizes cells of the image with 256-bin code histograms.  HOG builds
per-cell orientation histograms of gradient magnitude with block-level L2
normalization.  Deep features are never computed here; they arrive through
a CSV produced by an external exporter and are only parsed and validated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .imaging import GrayImage, gradients

__all__ = [
    "Extractor",
    "FeatureVector",
    "LbpParams",
    "HogParams",
    "EmbeddingTable",
    "lbp_code",
    "lbp_code_map",
    "lbp_feature",
    "hog_feature",
    "load_embeddings",
]


class Extractor(str, Enum):
    """Identity of the method that produced a feature vector."""

    LBP = "lbp"
    HOG = "hog"
    EMBEDDING = "embedding"
    REGION = "region"


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Ordered real-valued features tagged with their extractor."""

    values: np.ndarray
    extractor: Extractor

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("feature vector must be a non-empty 1-d array")
        if not np.isfinite(v).all():
            raise ValueError("feature values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "extractor", Extractor(self.extractor))

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class LbpParams:
    """LBP configuration: square cells, 8 neighbors at radius 1."""

    cell_size: int = 16
    neighbors: int = 8
    radius: int = 1

    def __post_init__(self) -> None:
        if self.cell_size < 2:
            raise ValueError("cell_size must be at least 2")
        if self.neighbors != 8:
            raise ValueError("only the 8-neighbor variant is supported")
        if self.radius != 1:
            raise ValueError("only radius 1 is supported")


@dataclass(frozen=True)
class HogParams:
    """HOG configuration; defaults are the canonical detector settings."""

    cell_size: int = 8
    block_size: int = 2  # cells per block side
    block_stride: int = 1  # cells
    orientation_bins: int = 9
    signed: bool = False

    def __post_init__(self) -> None:
        if self.cell_size < 1:
            raise ValueError("cell_size must be positive")
        if self.block_size < 1 or self.block_stride < 1:
            raise ValueError("block_size and block_stride must be positive")
        if self.orientation_bins < 2:
            raise ValueError("need at least 2 orientation bins")


# Clockwise neighborhood starting at the top-left pixel; the first offset
# contributes bit 7 of the code and the last (left) contributes bit 0.
# Offsets are (dx, dy) with y growing downward.
_LBP_OFFSETS: tuple[tuple[int, int], ...] = (
    (-1, -1),  # top-left
    (0, -1),  # top
    (1, -1),  # top-right
    (1, 0),  # right
    (1, 1),  # bottom-right
    (0, 1),  # bottom
    (-1, 1),  # bottom-left
    (-1, 0),  # left
)


def lbp_code(g: GrayImage, x: int, y: int) -> int:
    """8-bit LBP code at (x, y); a bit is set iff the neighbor >= center."""
    if not (1 <= x <= g.width - 2 and 1 <= y <= g.height - 2):
        raise ValueError(f"pixel ({x}, {y}) has no full 8-neighborhood")
    v = g.values
    center = v[y, x]
    code = 0
    for dx, dy in _LBP_OFFSETS:
        code = (code << 1) | int(v[y + dy, x + dx] >= center)
    return code


def lbp_code_map(g: GrayImage) -> np.ndarray:
    """Vectorized LBP codes for every interior pixel; border cells hold -1."""
    v = g.values
    h, w = v.shape
    out = np.full((h, w), -1, dtype=np.int16)
    if h < 3 or w < 3:
        return out
    center = v[1:-1, 1:-1]
    codes = np.zeros_like(center, dtype=np.int16)
    bit = 7
    for dx, dy in _LBP_OFFSETS:
        nb = v[1 + dy : h - 1 + dy, 1 + dx : w - 1 + dx]
        codes |= (nb >= center).astype(np.int16) << bit
        bit -= 1
    out[1:-1, 1:-1] = codes
    return out


def lbp_feature(g: GrayImage, p: LbpParams = LbpParams()) -> FeatureVector:
    """Concatenated per-cell 256-bin histograms of LBP codes.

    The cell grid tiles the coded interior (border pixels carry no code and
    are skipped); a trailing partial cell along either axis becomes a cell
    of its own.  Cells are concatenated in row-major order.
    """
    if g.width < 3 or g.height < 3:
        raise ValueError("image too small to code any pixel (need at least 3x3)")
    codes = lbp_code_map(g)[1:-1, 1:-1]
    ih, iw = codes.shape
    n_cy = math.ceil(ih / p.cell_size)
    n_cx = math.ceil(iw / p.cell_size)
    hists = np.zeros((n_cy, n_cx, 256), dtype=np.float64)
    for cy in range(n_cy):
        rows = codes[cy * p.cell_size : (cy + 1) * p.cell_size]
        for cx in range(n_cx):
            cell = rows[:, cx * p.cell_size : (cx + 1) * p.cell_size]
            hists[cy, cx] = np.bincount(cell.ravel(), minlength=256)
    return FeatureVector(hists.reshape(-1), Extractor.LBP)


def hog_descriptor_length(width: int, height: int, p: HogParams) -> int:
    """Closed-form descriptor length for an image of the given size."""
    n_cx = width // p.cell_size
    n_cy = height // p.cell_size
    if n_cx < p.block_size or n_cy < p.block_size:
        raise ValueError("image smaller than one block")
    n_bx = (n_cx - p.block_size) // p.block_stride + 1
    n_by = (n_cy - p.block_size) // p.block_stride + 1
    return n_bx * n_by * p.block_size * p.block_size * p.orientation_bins


def hog_feature(g: GrayImage, p: HogParams = HogParams()) -> FeatureVector:
    """Block-normalized histogram-of-oriented-gradients descriptor.

    Orientations are unsigned over [0, 180) degrees unless `signed`; votes
    are gradient magnitudes shared linearly between the two nearest bins
    (with wraparound).  Each block of block_size x block_size cells is
    L2-normalized as v / (||v|| + 1e-6) and blocks are concatenated in
    row-major order.
    """
    n_cx = g.width // p.cell_size
    n_cy = g.height // p.cell_size
    if n_cx < p.block_size or n_cy < p.block_size:
        raise ValueError("image smaller than one block")
    if g.width < 3 or g.height < 3:
        raise ValueError("image too small for gradient estimation")
    grad = gradients(g)
    span = 360.0 if p.signed else 180.0
    bin_width = span / p.orientation_bins

    # Pixels beyond the last full cell are dropped.
    gx = grad.gx[: n_cy * p.cell_size, : n_cx * p.cell_size]
    gy = grad.gy[: n_cy * p.cell_size, : n_cx * p.cell_size]
    mag = np.hypot(gx, gy)
    ang = np.degrees(np.arctan2(gy, gx)) % span

    pos = ang / bin_width
    lo = np.minimum(np.floor(pos), p.orientation_bins - 1).astype(np.int64)
    frac = pos - lo
    hi = (lo + 1) % p.orientation_bins

    h, w = mag.shape
    cy = (np.arange(h) // p.cell_size)[:, None] * np.ones(w, dtype=np.int64)[None, :]
    cx = (np.arange(w) // p.cell_size)[None, :] * np.ones(h, dtype=np.int64)[:, None]
    hist = np.zeros((n_cy, n_cx, p.orientation_bins), dtype=np.float64)
    np.add.at(hist, (cy.ravel(), cx.ravel(), lo.ravel()), (mag * (1.0 - frac)).ravel())
    np.add.at(hist, (cy.ravel(), cx.ravel(), hi.ravel()), (mag * frac).ravel())

    eps = 1e-6
    blocks = []
    for by in range(0, n_cy - p.block_size + 1, p.block_stride):
        for bx in range(0, n_cx - p.block_size + 1, p.block_stride):
            v = hist[by : by + p.block_size, bx : bx + p.block_size].ravel()
            blocks.append(v / (np.linalg.norm(v) + eps))
    return FeatureVector(np.concatenate(blocks), Extractor.HOG)


@dataclass(frozen=True)
class EmbeddingTable:
    """Mapping from dataset-relative image path to an embedding vector."""

    entries: dict[str, FeatureVector]
    dim: int = field(default=0)

    def __post_init__(self) -> None:
        for key, vec in self.entries.items():
            if len(vec) != self.dim:
                raise ValueError(f"embedding for {key!r} has length {len(vec)}, expected {self.dim}")
            if vec.extractor is not Extractor.EMBEDDING:
                raise ValueError(f"embedding for {key!r} has extractor {vec.extractor}")

    def __len__(self) -> int:
        return len(self.entries)

    def vector(self, key: str) -> FeatureVector:
        try:
            return self.entries[key]
        except KeyError:
            raise KeyError(f"no embedding for image {key!r}") from None


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Parse an embedding CSV: header `path,f0,...,f{d-1}`, one row per image.

    Rows are validated strictly: the header fixes the dimensionality, every
    row must carry exactly that many numeric cells, and identifiers must be
    unique.  Paths may not contain commas.
    """
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such embedding file: {p}")
    with open(p, encoding="utf-8", newline="") as fh:
        header = fh.readline()
        if not header.strip():
            raise ValueError(f"{p}: missing header line")
        cols = header.rstrip("\r\n").split(",")
        if cols[0] != "path" or len(cols) < 2:
            raise ValueError(f"{p}: header must be 'path,f0,f1,...'")
        expected = [f"f{i}" for i in range(len(cols) - 1)]
        if cols[1:] != expected:
            raise ValueError(f"{p}: feature columns must be named f0..f{len(cols) - 2} in order")
        dim = len(cols) - 1

        entries: dict[str, FeatureVector] = {}
        for lineno, line in enumerate(fh, start=2):
            stripped = line.rstrip("\r\n")
            if stripped == "":
                continue  # tolerate a trailing newline
            parts = stripped.split(",")
            if len(parts) != dim + 1:
                raise ValueError(f"{p}:{lineno}: expected {dim + 1} fields, got {len(parts)}")
            key = parts[0]
            if key in entries:
                raise ValueError(f"{p}:{lineno}: duplicate identifier {key!r}")
            try:
                values = np.array([float(s) for s in parts[1:]], dtype=np.float64)
            except ValueError:
                raise ValueError(f"{p}:{lineno}: non-numeric feature cell") from None
            if not np.isfinite(values).all():
                raise ValueError(f"{p}:{lineno}: non-finite feature value")
            entries[key] = FeatureVector(values, Extractor.EMBEDDING)
    return EmbeddingTable(entries, dim)
