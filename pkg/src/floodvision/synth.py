"""Seeded synthetic datasets for end-to-end pipeline checks.

"Flood-like" images are low-texture smooth gradients; "dry" images are
high-frequency noise textures.  Segmentation samples embed a smooth
elliptical water region in a textured background and come with exact
pixel masks.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .imaging import Image, LabelMask, _axis_coords, save_image, save_mask

__all__ = ["generate_classification_dataset", "generate_segmentation_dataset"]


def _bilinear_upsample(coarse: np.ndarray, width: int, height: int) -> np.ndarray:
    x0, x1, fx = _axis_coords(width, coarse.shape[1])
    y0, y1, fy = _axis_coords(height, coarse.shape[0])
    fx = fx[None, :]
    fy = fy[:, None]
    top = (1.0 - fx) * coarse[y0][:, x0] + fx * coarse[y0][:, x1]
    bot = (1.0 - fx) * coarse[y1][:, x0] + fx * coarse[y1][:, x1]
    return (1.0 - fy) * top + fy * bot


def _smooth_field(rng: np.random.Generator, width: int, height: int, base: np.ndarray) -> np.ndarray:
    """Slowly varying RGB field: oriented ramp plus low-frequency noise."""
    theta = rng.uniform(0.0, 2.0 * np.pi)
    amp = rng.uniform(25.0, 60.0)
    xs = np.linspace(0.0, 1.0, width)
    ys = np.linspace(0.0, 1.0, height)
    ramp = np.cos(theta) * xs[None, :] + np.sin(theta) * ys[:, None]
    span = ramp.max() - ramp.min()
    if span > 0:
        ramp = (ramp - ramp.min()) / span - 0.5
    wobble = _bilinear_upsample(rng.normal(0.0, 4.0, size=(4, 5)), width, height)
    channel_gain = rng.uniform(0.5, 1.0, size=3)
    img = base[None, None, :] + (amp * ramp + wobble)[:, :, None] * channel_gain[None, None, :]
    return np.clip(img, 0.0, 255.0)


def _textured_field(rng: np.random.Generator, width: int, height: int, base: np.ndarray) -> np.ndarray:
    """Per-pixel noise texture, sometimes with a fine checker overlay."""
    amp = rng.uniform(35.0, 80.0)
    img = base[None, None, :] + rng.uniform(-amp, amp, size=(height, width, 3))
    if rng.random() < 0.5:
        cell = int(rng.integers(2, 5))
        checker = ((np.arange(height)[:, None] // cell + np.arange(width)[None, :] // cell) % 2).astype(np.float64)
        img += ((checker - 0.5) * rng.uniform(20.0, 50.0))[:, :, None]
    return np.clip(img, 0.0, 255.0)


def _to_image(arr: np.ndarray) -> Image:
    return Image(np.floor(arr + 0.5).astype(np.uint8))


def _write_manifest(out_dir: Path, entries: list[dict]) -> Path:
    doc = {"root": ".", "entries": entries}
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def generate_classification_dataset(
    out_dir: str | Path,
    count: int = 120,
    seed: int = 42,
    size: tuple[int, int] = (256, 192),
) -> Path:
    """Write count/2 smooth and count/2 textured images plus a manifest."""
    if count < 2 or count % 2:
        raise ValueError("count must be an even number of at least 2")
    out = Path(out_dir)
    width, height = size
    rng = np.random.default_rng(seed)
    entries = []
    half = count // 2
    for i in range(half):
        base = rng.uniform(60.0, 170.0, size=3)
        img = _to_image(_smooth_field(rng, width, height, base))
        rel = f"flood/flood_{i:03d}.png"
        save_image(img, out / rel)
        entries.append({"image": rel, "label": 1})
    for i in range(half):
        base = rng.uniform(70.0, 170.0, size=3)
        img = _to_image(_textured_field(rng, width, height, base))
        rel = f"dry/dry_{i:03d}.png"
        save_image(img, out / rel)
        entries.append({"image": rel, "label": 0})
    return _write_manifest(out, entries)


def _ellipse_mask(
    rng: np.random.Generator, width: int, height: int
) -> np.ndarray:
    cx = rng.uniform(0.32, 0.68) * width
    cy = rng.uniform(0.45, 0.72) * height
    rx = rng.uniform(0.22, 0.40) * width
    ry = rng.uniform(0.18, 0.32) * height
    phi = rng.uniform(0.0, np.pi)
    xs = np.arange(width)[None, :] - cx
    ys = np.arange(height)[:, None] - cy
    xr = xs * np.cos(phi) + ys * np.sin(phi)
    yr = -xs * np.sin(phi) + ys * np.cos(phi)
    return (xr / rx) ** 2 + (yr / ry) ** 2 <= 1.0


def generate_segmentation_dataset(
    out_dir: str | Path,
    count: int = 60,
    seed: int = 42,
    size: tuple[int, int] = (176, 132),
) -> Path:
    """Write flood-class images with smooth water ellipses and exact masks."""
    if count < 2:
        raise ValueError("count must be at least 2")
    out = Path(out_dir)
    width, height = size
    rng = np.random.default_rng(seed)
    entries = []
    for i in range(count):
        ground = np.array([rng.uniform(90.0, 150.0), rng.uniform(75.0, 140.0), rng.uniform(50.0, 105.0)])
        water = np.array([rng.uniform(55.0, 105.0), rng.uniform(75.0, 125.0), rng.uniform(110.0, 170.0)])
        background = _textured_field(rng, width, height, ground)
        pool = _smooth_field(rng, width, height, water)
        inside = _ellipse_mask(rng, width, height)
        img = np.where(inside[:, :, None], pool, background)
        rel = f"flood/scene_{i:03d}.png"
        mask_rel = f"masks/scene_{i:03d}.png"
        save_image(_to_image(img), out / rel)
        save_mask(LabelMask(inside.astype(np.uint8)), out / mask_rel)
        entries.append({"image": rel, "label": 1, "mask": mask_rel})
    return _write_manifest(out, entries)
