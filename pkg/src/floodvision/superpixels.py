"""SLIC superpixel segmentation and per-region feature construction.

SLIC runs localized k-means over 5-d (L, a, b, x, y) points: each cluster
center only competes for pixels inside a window of twice the expected
superpixel spacing, which keeps regions compact and the cost linear in the
pixel count.  A post-pass reassigns fragments below a size threshold to
their largest neighbor so that every region is 4-connected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .features import Extractor, FeatureVector, lbp_code_map
from .imaging import Image, LabelMask, to_grayscale

__all__ = [
    "SlicParams",
    "SuperpixelMap",
    "RegionFeature",
    "rgb_to_lab",
    "slic",
    "slic_with_objective",
    "region_features",
    "region_feature_matrix",
    "region_labels",
    "paint_regions",
]


@dataclass(frozen=True)
class SlicParams:
    """SLIC configuration; compactness trades color fit for spatial regularity."""

    n_segments: int = 250
    compactness: float = 10.0
    max_iter: int = 10
    enforce_connectivity: bool = True

    def __post_init__(self) -> None:
        if self.n_segments < 1:
            raise ValueError("n_segments must be at least 1")
        if self.compactness <= 0:
            raise ValueError("compactness must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True, eq=False)
class SuperpixelMap:
    """Per-pixel region ids in [0, n_regions); every id occurs at least once."""

    labels: np.ndarray
    n_regions: int

    def __post_init__(self) -> None:
        lab = np.asarray(self.labels, dtype=np.int32)
        if lab.ndim != 2:
            raise ValueError("labels must be a 2-d array")
        if self.n_regions < 1:
            raise ValueError("n_regions must be at least 1")
        present = np.unique(lab)
        if present[0] < 0 or present[-1] >= self.n_regions or present.size != self.n_regions:
            raise ValueError("region ids must be exactly 0..n_regions-1, each occurring at least once")
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass(frozen=True, eq=False)
class RegionFeature:
    """Per-region descriptor: normalized centroid, mean color, LBP histogram."""

    mean_x: float
    mean_y: float
    mean_r: float
    mean_g: float
    mean_b: float
    lbp_hist: np.ndarray

    def as_vector(self) -> FeatureVector:
        head = np.array([self.mean_x, self.mean_y, self.mean_r, self.mean_g, self.mean_b])
        return FeatureVector(np.concatenate([head, self.lbp_hist]), Extractor.REGION)


# sRGB (D65) -> XYZ, then XYZ -> CIELAB with the D65 white point.
_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE_D65 = np.array([0.95047, 1.0, 1.08883])


def rgb_to_lab(pixels: np.ndarray) -> np.ndarray:
    """Convert an (h, w, 3) uint8 sRGB array to CIELAB (float64)."""
    c = np.asarray(pixels, dtype=np.float64) / 255.0
    linear = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _SRGB_TO_XYZ.T
    t = xyz / _WHITE_D65
    delta = 6.0 / 29.0
    f = np.where(t > delta**3, np.cbrt(t), t / (3.0 * delta**2) + 4.0 / 29.0)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def _seed_grid(width: int, height: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Roughly k seeds on a grid whose aspect follows the image."""
    nx = max(1, min(round(math.sqrt(k * width / height)), k, width))
    ny = max(1, min(round(k / nx), height))
    xs = np.clip(np.round((np.arange(nx) + 0.5) * (width / nx)).astype(np.int64), 0, width - 1)
    ys = np.clip(np.round((np.arange(ny) + 0.5) * (height / ny)).astype(np.int64), 0, height - 1)
    return xs, ys


def _perturb_seeds(lab: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Move each grid seed to the lowest-gradient pixel in its 3x3 window."""
    h, w = lab.shape[:2]
    padded = np.pad(lab, ((1, 1), (1, 1), (0, 0)), mode="edge")
    grad = ((padded[1:-1, 2:] - padded[1:-1, :-2]) ** 2).sum(axis=2)
    grad += ((padded[2:, 1:-1] - padded[:-2, 1:-1]) ** 2).sum(axis=2)
    seeds = []
    for sy in ys:
        for sx in xs:
            y0, y1 = max(0, sy - 1), min(h, sy + 2)
            x0, x1 = max(0, sx - 1), min(w, sx + 2)
            window = grad[y0:y1, x0:x1]
            best = np.unravel_index(np.argmin(window), window.shape)
            # Only move off the grid point when strictly better; keeps seeds
            # stationary on uniform images.
            if window[best] < grad[sy, sx]:
                seeds.append((y0 + best[0], x0 + best[1]))
            else:
                seeds.append((sy, sx))
    return np.asarray(seeds, dtype=np.int64)


def slic(img: Image, p: SlicParams = SlicParams()) -> SuperpixelMap:
    """Segment an image into compact superpixels."""
    sp, _ = slic_with_objective(img, p)
    return sp


def slic_with_objective(img: Image, p: SlicParams = SlicParams()) -> tuple[SuperpixelMap, list[float]]:
    """Like `slic`, but also returns the k-means objective after each iteration.

    The objective is the sum over pixels of squared 5-d distance to the
    assigned center and is non-increasing across iterations.
    """
    h, w = img.height, img.width
    n = h * w
    if p.n_segments > n:
        raise ValueError(f"n_segments={p.n_segments} exceeds pixel count {n}")

    lab = rgb_to_lab(img.pixels)
    step = math.sqrt(n / p.n_segments)
    spatial_w = (p.compactness / step) ** 2

    xs, ys = _seed_grid(w, h, p.n_segments)
    seeds = _perturb_seeds(lab, xs, ys)
    k = seeds.shape[0]

    # Centers are (L, a, b, x, y).
    centers = np.empty((k, 5), dtype=np.float64)
    centers[:, :3] = lab[seeds[:, 0], seeds[:, 1]]
    centers[:, 3] = seeds[:, 1]
    centers[:, 4] = seeds[:, 0]

    xcoords = np.arange(w, dtype=np.float64)
    ycoords = np.arange(h, dtype=np.float64)
    labels = np.full((h, w), -1, dtype=np.int64)
    objective: list[float] = []
    reach = int(math.ceil(step))

    for iteration in range(p.max_iter):
        if iteration == 0:
            best = np.full((h, w), np.inf)
        else:
            # Seed the sweep with each pixel's distance to its current
            # center so reassignment can only lower the objective.
            cur = centers[labels]
            best = ((lab - cur[:, :, :3]) ** 2).sum(axis=2)
            best += spatial_w * ((xcoords[None, :] - cur[:, :, 3]) ** 2 + (ycoords[:, None] - cur[:, :, 4]) ** 2)
        prev = labels.copy()

        for ci in range(k):
            cx, cy = centers[ci, 3], centers[ci, 4]
            x0, x1 = max(0, int(cx) - reach), min(w, int(cx) + reach + 1)
            y0, y1 = max(0, int(cy) - reach), min(h, int(cy) + reach + 1)
            if x0 >= x1 or y0 >= y1:
                continue
            window = lab[y0:y1, x0:x1]
            d2 = ((window - centers[ci, :3]) ** 2).sum(axis=2)
            d2 += spatial_w * (
                (xcoords[x0:x1][None, :] - cx) ** 2 + (ycoords[y0:y1][:, None] - cy) ** 2
            )
            sub_best = best[y0:y1, x0:x1]
            improved = d2 < sub_best
            sub_best[improved] = d2[improved]
            labels[y0:y1, x0:x1][improved] = ci

        unassigned = labels < 0
        if unassigned.any():
            # Windows missed these pixels (extreme aspect ratios); fall back
            # to a global nearest-center assignment.
            yy, xx = np.nonzero(unassigned)
            pts = np.concatenate([lab[yy, xx], xx[:, None], yy[:, None]], axis=1)
            d2 = ((pts[:, None, :3] - centers[None, :, :3]) ** 2).sum(axis=2)
            d2 += spatial_w * ((pts[:, None, 3] - centers[None, :, 3]) ** 2 + (pts[:, None, 4] - centers[None, :, 4]) ** 2)
            labels[yy, xx] = np.argmin(d2, axis=1)
            best[yy, xx] = np.min(d2, axis=1)

        objective.append(float(best.sum()))
        if iteration > 0 and np.array_equal(labels, prev):
            break

        flat = labels.ravel()
        counts = np.bincount(flat, minlength=k).astype(np.float64)
        occupied = counts > 0
        for dim, values in enumerate(
            (lab[:, :, 0].ravel(), lab[:, :, 1].ravel(), lab[:, :, 2].ravel(),
             np.tile(xcoords, h), np.repeat(ycoords, w))
        ):
            sums = np.bincount(flat, weights=values, minlength=k)
            centers[occupied, dim] = sums[occupied] / counts[occupied]

    labels = _relabel_contiguous(labels)
    if p.enforce_connectivity:
        min_size = step * step / 4.0
        labels, n_regions = _enforce_connectivity(labels, min_size)
    else:
        n_regions = int(labels.max()) + 1
    return SuperpixelMap(labels, n_regions), objective


def _relabel_contiguous(labels: np.ndarray) -> np.ndarray:
    """Map labels to 0..n-1 ordered by first raster appearance."""
    flat = labels.ravel()
    uniq, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse].reshape(labels.shape).astype(np.int64)


def _connected_components(labels: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """4-connected components of equal-label pixels, ids in raster order.

    Works on horizontal runs instead of single pixels: rows are split into
    maximal constant-label runs, vertically overlapping runs with equal
    labels are unioned, and component ids are assigned by the raster
    position of each component's first run.
    """
    h, w = labels.shape
    run_start: list[int] = []
    run_end: list[int] = []
    run_label: list[int] = []
    row_first = np.empty(h + 1, dtype=np.int64)
    for y in range(h):
        row = labels[y]
        row_first[y] = len(run_start)
        breaks = np.flatnonzero(row[1:] != row[:-1]) + 1
        starts = np.concatenate(([0], breaks))
        ends = np.concatenate((breaks, [w]))
        run_start.extend(starts.tolist())
        run_end.extend(ends.tolist())
        run_label.extend(row[starts].tolist())
    row_first[h] = len(run_start)
    n_runs = len(run_start)

    parent = list(range(n_runs))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for y in range(1, h):
        i, i_end = int(row_first[y - 1]), int(row_first[y])
        j, j_end = int(row_first[y]), int(row_first[y + 1])
        while i < i_end and j < j_end:
            if run_label[i] == run_label[j] and run_start[i] < run_end[j] and run_start[j] < run_end[i]:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
            if run_end[i] <= run_end[j]:
                i += 1
            else:
                j += 1

    comp_of_root: dict[int, int] = {}
    run_comp = np.empty(n_runs, dtype=np.int64)
    sizes: list[int] = []
    for r in range(n_runs):
        root = find(r)
        cid = comp_of_root.get(root)
        if cid is None:
            cid = len(sizes)
            comp_of_root[root] = cid
            sizes.append(0)
        run_comp[r] = cid
        sizes[cid] += run_end[r] - run_start[r]

    comp = np.empty((h, w), dtype=np.int64)
    for y in range(h):
        for r in range(int(row_first[y]), int(row_first[y + 1])):
            comp[y, run_start[r] : run_end[r]] = run_comp[r]
    return comp, sizes


def _enforce_connectivity(labels: np.ndarray, min_size: float) -> tuple[np.ndarray, int]:
    """Split disconnected regions, then merge fragments below min_size.

    Each small fragment joins its largest adjacent region (ties broken by
    the smaller fragment id), which keeps every surviving region
    4-connected.
    """
    comp, sizes = _connected_components(labels)
    n = len(sizes)
    size = list(sizes)

    # Component adjacency from horizontally/vertically touching pixels.
    adj: list[set[int]] = [set() for _ in range(n)]
    left, right = comp[:, :-1], comp[:, 1:]
    up, down = comp[:-1, :], comp[1:, :]
    for a, b in ((left, right), (up, down)):
        diff = a != b
        pairs = np.unique(np.stack([a[diff], b[diff]], axis=1), axis=0) if diff.any() else []
        for u, v in pairs:
            adj[int(u)].add(int(v))
            adj[int(v)].add(int(u))

    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for cid in range(n):
        if find(cid) != cid or size[cid] >= min_size:
            continue
        candidates = {find(nb) for nb in adj[cid]} - {cid}
        if not candidates:
            continue  # component spans the whole image
        target = min(candidates, key=lambda r: (-size[r], r))
        parent[cid] = target
        size[target] += size[cid]
        adj[target] |= adj[cid]

    roots = np.array([find(i) for i in range(n)], dtype=np.int64)
    merged = _relabel_contiguous(roots[comp])
    return merged, int(merged.max()) + 1


def region_features(img: Image, sp: SuperpixelMap) -> list[RegionFeature]:
    """Mean position/color and normalized LBP histogram for every region."""
    return [
        RegionFeature(row[0], row[1], row[2], row[3], row[4], row[5:])
        for row in region_feature_matrix(img, sp)
    ]


def region_feature_matrix(img: Image, sp: SuperpixelMap) -> np.ndarray:
    """Region features as an (n_regions, 261) array; rows match region ids.

    Columns are mean_x, mean_y (normalized to [0, 1]), mean R/G/B, then the
    256-bin L1-normalized LBP histogram of the region's coded pixels.
    """
    if (sp.height, sp.width) != (img.height, img.width):
        raise ValueError("superpixel map dimensions do not match the image")
    h, w = img.height, img.width
    ids = sp.labels.ravel()
    n = sp.n_regions
    counts = np.bincount(ids, minlength=n).astype(np.float64)

    xs = np.tile(np.arange(w, dtype=np.float64), h)
    ys = np.repeat(np.arange(h, dtype=np.float64), w)
    mean_x = np.bincount(ids, weights=xs, minlength=n) / counts
    mean_y = np.bincount(ids, weights=ys, minlength=n) / counts
    if w > 1:
        mean_x /= w - 1
    if h > 1:
        mean_y /= h - 1

    px = img.pixels.reshape(-1, 3).astype(np.float64)
    means_rgb = np.stack(
        [np.bincount(ids, weights=px[:, c], minlength=n) / counts for c in range(3)], axis=1
    )

    codes = lbp_code_map(to_grayscale(img))
    coded = codes.ravel() >= 0
    hist = np.zeros((n, 256), dtype=np.float64)
    if coded.any():
        combined = ids[coded] * 256 + codes.ravel()[coded]
        hist = np.bincount(combined, minlength=n * 256).astype(np.float64).reshape(n, 256)
        mass = hist.sum(axis=1, keepdims=True)
        np.divide(hist, mass, out=hist, where=mass > 0)

    return np.concatenate([mean_x[:, None], mean_y[:, None], means_rgb, hist], axis=1)


def region_labels(sp: SuperpixelMap, truth: LabelMask, threshold: float = 0.5) -> np.ndarray:
    """Binary label per region: 1 iff the flood fraction reaches `threshold`."""
    if (sp.height, sp.width) != (truth.height, truth.width):
        raise ValueError("superpixel map and mask dimensions differ")
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must lie in (0, 1]")
    ids = sp.labels.ravel()
    counts = np.bincount(ids, minlength=sp.n_regions).astype(np.float64)
    flooded = np.bincount(ids, weights=truth.labels.ravel().astype(np.float64), minlength=sp.n_regions)
    return (flooded / counts >= threshold).astype(np.int64)


def paint_regions(sp: SuperpixelMap, labels: np.ndarray) -> LabelMask:
    """Expand per-region binary labels back to a pixel mask."""
    lab = np.asarray(labels)
    if lab.ndim != 1 or lab.size != sp.n_regions:
        raise ValueError(f"expected {sp.n_regions} region labels, got shape {lab.shape}")
    if not np.isin(lab, (0, 1)).all():
        raise ValueError("region labels must be 0 or 1")
    return LabelMask(lab.astype(np.uint8)[sp.labels])
