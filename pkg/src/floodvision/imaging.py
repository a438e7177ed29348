"""Image loading, color conversion, resizing, and gradient primitives.

All raster types wrap read-only numpy arrays in (row, column) layout, so
every function here is a pure function that is safe to call concurrently.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as _PilImage
from PIL import UnidentifiedImageError

__all__ = [
    "Image",
    "GrayImage",
    "GradientField",
    "LabelMask",
    "GRAY_WEIGHTS",
    "load_image",
    "save_image",
    "load_mask",
    "save_mask",
    "to_grayscale",
    "resize_bilinear",
    "gradients",
]

# Rec. 601 luma weights for R, G, B.
GRAY_WEIGHTS = (0.299, 0.587, 0.114)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Image:
    """8-bit RGB raster; `pixels` has shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected an (h, w, 3) RGB array, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image dimensions must be at least 1x1")
        if px.dtype != np.uint8:
            if not np.issubdtype(px.dtype, np.integer):
                raise TypeError("pixel channels must be integers; round and clip before constructing")
            if px.min() < 0 or px.max() > 255:
                raise ValueError("channel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        else:
            px = px.copy()
        object.__setattr__(self, "pixels", _frozen(px))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Single-channel raster with real-valued intensities in [0, 255]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError(f"expected an (h, w) array, got shape {v.shape}")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("image dimensions must be at least 1x1")
        if not np.isfinite(v).all():
            raise ValueError("intensities must be finite")
        if v.min() < 0.0 or v.max() > 255.0:
            raise ValueError("intensities must lie in [0, 255]")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class GradientField:
    """Per-pixel horizontal (gx) and vertical (gy) derivatives."""

    gx: np.ndarray
    gy: np.ndarray

    def __post_init__(self) -> None:
        gx = np.asarray(self.gx, dtype=np.float64)
        gy = np.asarray(self.gy, dtype=np.float64)
        if gx.ndim != 2 or gx.shape != gy.shape:
            raise ValueError("gx and gy must be 2-d arrays of identical shape")
        if not (np.isfinite(gx).all() and np.isfinite(gy).all()):
            raise ValueError("gradient values must be finite")
        object.__setattr__(self, "gx", _frozen(gx))
        object.__setattr__(self, "gy", _frozen(gy))

    @property
    def height(self) -> int:
        return self.gx.shape[0]

    @property
    def width(self) -> int:
        return self.gx.shape[1]


@dataclass(frozen=True, eq=False)
class LabelMask:
    """Per-pixel binary labels; 1 marks floodwater."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        lab = np.asarray(self.labels)
        if lab.ndim != 2:
            raise ValueError(f"expected an (h, w) array, got shape {lab.shape}")
        if lab.shape[0] < 1 or lab.shape[1] < 1:
            raise ValueError("mask dimensions must be at least 1x1")
        arr = lab.astype(np.uint8)
        if not np.isin(arr, (0, 1)).all() or (np.asarray(lab) != arr).any():
            raise ValueError("mask values must be 0 or 1")
        object.__setattr__(self, "labels", _frozen(arr))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


_16BIT_MODES = {"I", "I;16", "I;16B", "I;16L", "I;16N"}


def load_image(path: str | Path) -> Image:
    """Decode a PNG or JPEG file into an RGB `Image`.

    16-bit sources are truncated to 8 bits with a warning.
    """
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such image file: {p}")
    try:
        with _PilImage.open(p) as im:
            im.load()
            if im.mode in _16BIT_MODES:
                warnings.warn(f"{p}: truncating 16-bit intensities to 8 bits", stacklevel=2)
                arr = (np.asarray(im, dtype=np.uint32) >> 8).astype(np.uint8)
                arr = np.repeat(arr[:, :, None], 3, axis=2)
            else:
                if im.mode != "RGB":
                    im = im.convert("RGB")
                arr = np.asarray(im, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise ValueError(f"cannot decode {p}: not a recognized raster format") from exc
    except OSError as exc:
        raise ValueError(f"cannot decode {p}: {exc}") from exc
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{p}: image has a zero dimension")
    return Image(arr)


def save_image(img: Image, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    _PilImage.fromarray(np.asarray(img.pixels)).save(path)


def load_mask(path: str | Path) -> LabelMask:
    """Read a grayscale PNG as a binary mask (any nonzero pixel = flood)."""
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such mask file: {p}")
    try:
        with _PilImage.open(p) as im:
            arr = np.asarray(im.convert("L"))
    except (UnidentifiedImageError, OSError) as exc:
        raise ValueError(f"cannot decode mask {p}: {exc}") from exc
    if not np.isin(arr, (0, 255)).all():
        warnings.warn(f"{p}: mask has values besides 0/255; treating any nonzero pixel as flood", stacklevel=2)
    return LabelMask((arr > 0).astype(np.uint8))


def save_mask(mask: LabelMask, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    _PilImage.fromarray((mask.labels * np.uint8(255))).save(path)


def to_grayscale(img: Image) -> GrayImage:
    """Convert to luma with Rec. 601 weights (0.299 R + 0.587 G + 0.114 B)."""
    wr, wg, wb = GRAY_WEIGHTS
    px = img.pixels.astype(np.float64)
    return GrayImage(wr * px[:, :, 0] + wg * px[:, :, 1] + wb * px[:, :, 2])


def _axis_coords(dst_n: int, src_n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Half-pixel-center mapping: destination center i+0.5 lands at source
    # coordinate (i+0.5)*scale, clamped so corners keep their source values.
    scale = src_n / dst_n
    coords = (np.arange(dst_n, dtype=np.float64) + 0.5) * scale - 0.5
    coords = np.clip(coords, 0.0, src_n - 1.0)
    lo = np.floor(coords).astype(np.int64)
    hi = np.minimum(lo + 1, src_n - 1)
    frac = coords - lo
    return lo, hi, frac


def resize_bilinear(img: Image, width: int, height: int) -> Image:
    """Resize with bilinear interpolation; identical dimensions return an exact copy."""
    if width < 1 or height < 1:
        raise ValueError("target dimensions must be at least 1x1")
    x0, x1, fx = _axis_coords(width, img.width)
    y0, y1, fy = _axis_coords(height, img.height)
    px = img.pixels.astype(np.float64)
    fx = fx[None, :, None]
    fy = fy[:, None, None]
    top = (1.0 - fx) * px[y0][:, x0] + fx * px[y0][:, x1]
    bot = (1.0 - fx) * px[y1][:, x0] + fx * px[y1][:, x1]
    out = (1.0 - fy) * top + fy * bot
    return Image(np.floor(out + 0.5).astype(np.uint8))


def gradients(g: GrayImage) -> GradientField:
    """Central-difference gradients with kernel [-1, 0, 1] per axis.

    Border pixels use replicated-edge neighbors, so the field keeps the
    full image dimensions.
    """
    if g.width < 3 or g.height < 3:
        raise ValueError("gradients need an image of at least 3x3 pixels")
    padded = np.pad(g.values, 1, mode="edge")
    gx = padded[1:-1, 2:] - padded[1:-1, :-2]
    gy = padded[2:, 1:-1] - padded[:-2, 1:-1]
    return GradientField(gx, gy)
