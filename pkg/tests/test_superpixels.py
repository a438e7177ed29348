import numpy as np
import pytest
from scipy import ndimage
from skimage import color as skcolor

from floodvision import (
    Image,
    LabelMask,
    SlicParams,
    SuperpixelMap,
    paint_regions,
    region_features,
    region_labels,
    slic,
    to_grayscale,
)
from floodvision.features import lbp_code_map
from floodvision.superpixels import region_feature_matrix, rgb_to_lab, slic_with_objective
from tests.conftest import make_rgb, random_rgb


def smooth_random_image(rng, width, height):
    coarse = rng.uniform(0.0, 255.0, size=(5, 6, 3))
    zoom = (height / coarse.shape[0], width / coarse.shape[1], 1)
    arr = ndimage.zoom(coarse, zoom, order=1)[:height, :width]
    arr += rng.normal(0, 5, size=arr.shape)
    return Image(np.clip(np.floor(arr + 0.5), 0, 255).astype(np.uint8))


class TestLabConversion:
    def test_matches_reference_library(self, rng):
        px = rng.integers(0, 256, size=(30, 20, 3), dtype=np.uint8)
        mine = rgb_to_lab(px)
        ref = skcolor.rgb2lab(px / 255.0)
        assert np.abs(mine - ref).max() < 0.01

    def test_black_and_white(self):
        lab = rgb_to_lab(np.array([[[0, 0, 0], [255, 255, 255]]], dtype=np.uint8))
        assert lab[0, 0, 0] == pytest.approx(0.0, abs=1e-6)
        assert lab[0, 1, 0] == pytest.approx(100.0, abs=1e-3)


class TestSlic:
    def test_single_segment(self, rng):
        img = random_rgb(rng, 13, 9)
        sp = slic(img, SlicParams(n_segments=1))
        assert sp.n_regions == 1
        assert not sp.labels.any()

    def test_single_segment_extreme_aspect(self, rng):
        img = random_rgb(rng, 1, 50)
        sp = slic(img, SlicParams(n_segments=1))
        assert sp.n_regions == 1

    def test_uniform_color_gives_spatial_quadrants(self):
        # Exact boundary pixels are equidistant ties and go to the first
        # processed center, so quadrants are ~10x10 rather than exact.
        img = make_rgb(np.full((20, 20, 3), 90))
        sp = slic(img, SlicParams(n_segments=4))
        assert sp.n_regions == 4
        sizes = np.bincount(sp.labels.ravel())
        assert (sizes >= 81).all() and (sizes <= 121).all()
        corners = {sp.labels[4, 4], sp.labels[4, 15], sp.labels[15, 4], sp.labels[15, 15]}
        assert len(corners) == 4
        for rid, (cy, cx) in enumerate(((4, 4), (4, 15), (15, 4), (15, 15))):
            ys, xs = np.nonzero(sp.labels == sp.labels[cy, cx])
            assert abs(ys.mean() - cy) < 2.0 and abs(xs.mean() - cx) < 2.0

    def test_two_tone_split_matches_plain_kmeans(self):
        # Left half black, right half white; the color term dominates, so
        # both windowed SLIC and an unwindowed Lloyd oracle converge to the
        # color boundary.
        pixels = np.zeros((10, 20, 3), dtype=np.uint8)
        pixels[:, 10:] = 255
        img = Image(pixels)
        params = SlicParams(n_segments=2, enforce_connectivity=False)
        sp = slic(img, params)

        lab = rgb_to_lab(pixels)
        h, w = 10, 20
        points = np.concatenate(
            [
                lab.reshape(-1, 3),
                np.tile(np.arange(w), h)[:, None],
                np.repeat(np.arange(h), w)[:, None],
            ],
            axis=1,
        ).astype(np.float64)
        step = np.sqrt(h * w / 2)
        weight = (params.compactness / step) ** 2
        scale = np.array([1.0, 1.0, 1.0, np.sqrt(weight), np.sqrt(weight)])
        scaled = points * scale
        centers = scaled[[5 * w + 5, 5 * w + 15]]  # the two grid seeds
        for _ in range(50):
            d2 = ((scaled[:, None] - centers[None]) ** 2).sum(axis=2)
            assign = d2.argmin(axis=1)
            new = np.stack([scaled[assign == c].mean(axis=0) for c in (0, 1)])
            if np.allclose(new, centers):
                break
            centers = new
        oracle = assign.reshape(h, w)

        expected = (np.arange(w)[None, :] >= 10).astype(int)
        oracle_norm = oracle if oracle[0, 0] == 0 else 1 - oracle
        mine_norm = sp.labels if sp.labels[0, 0] == 0 else 1 - sp.labels
        assert np.array_equal(oracle_norm, np.broadcast_to(expected, (h, w)))
        assert np.array_equal(mine_norm, np.broadcast_to(expected, (h, w)))

    def test_objective_non_increasing(self, rng):
        img = smooth_random_image(rng, 60, 40)
        _, objective = slic_with_objective(img, SlicParams(n_segments=12))
        assert len(objective) >= 1
        for a, b in zip(objective, objective[1:]):
            assert b <= a * (1 + 1e-12) + 1e-9

    def test_partition_and_connectivity(self, rng):
        img = smooth_random_image(rng, 50, 35)
        sp = slic(img, SlicParams(n_segments=15))
        ids = np.unique(sp.labels)
        assert ids.tolist() == list(range(sp.n_regions))
        for rid in range(sp.n_regions):
            _, n_comp = ndimage.label(sp.labels == rid)
            assert n_comp == 1

    def test_region_means_match_brute_force(self, rng):
        img = smooth_random_image(rng, 30, 22)
        sp = slic(img, SlicParams(n_segments=8))
        feats = region_feature_matrix(img, sp)
        px = img.pixels.astype(np.float64)
        for rid in range(sp.n_regions):
            ys, xs = np.nonzero(sp.labels == rid)
            assert feats[rid, 0] == pytest.approx(xs.mean() / (img.width - 1), rel=1e-9)
            assert feats[rid, 1] == pytest.approx(ys.mean() / (img.height - 1), rel=1e-9)
            for c in range(3):
                assert feats[rid, 2 + c] == pytest.approx(px[ys, xs, c].mean(), rel=1e-9)

    def test_too_many_segments_rejected(self, rng):
        with pytest.raises(ValueError):
            slic(random_rgb(rng, 3, 3), SlicParams(n_segments=10))


class TestRegionFeatures:
    def test_whole_image_uniform(self):
        img = make_rgb(np.tile(np.array([10, 20, 30], dtype=np.uint8), (9, 9, 1)))
        sp = SuperpixelMap(np.zeros((9, 9), dtype=np.int32), 1)
        (feat,) = region_features(img, sp)
        assert feat.mean_x == pytest.approx(0.5)
        assert feat.mean_y == pytest.approx(0.5)
        assert (feat.mean_r, feat.mean_g, feat.mean_b) == (10, 20, 30)
        assert feat.lbp_hist.sum() == pytest.approx(1.0)

    def test_single_pixel_region_at_origin(self, rng):
        img = random_rgb(rng, 4, 4)
        labels = np.ones((4, 4), dtype=np.int32)
        labels[0, 0] = 0
        sp = SuperpixelMap(labels, 2)
        feats = region_features(img, sp)
        assert feats[0].mean_x == 0.0 and feats[0].mean_y == 0.0
        assert not feats[0].lbp_hist.any()  # no coded pixel in the corner

    def test_half_split_against_pixel_scan(self):
        pixels = np.zeros((8, 8, 3), dtype=np.uint8)
        pixels[:, 4:] = 255
        img = Image(pixels)
        labels = (np.arange(8)[None, :] >= 4).astype(np.int32) * np.ones((8, 1), dtype=np.int32)
        sp = SuperpixelMap(labels, 2)
        feats = region_feature_matrix(img, sp)

        codes = lbp_code_map(to_grayscale(img))
        for rid in range(2):
            member = labels == rid
            expected = np.zeros(256)
            for y in range(8):
                for x in range(8):
                    if member[y, x] and codes[y, x] >= 0:
                        expected[codes[y, x]] += 1
            expected /= expected.sum()
            assert np.allclose(feats[rid, 5:], expected)
        assert not np.array_equal(feats[0, 5:], feats[1, 5:])

    def test_dimension_mismatch(self, rng):
        img = random_rgb(rng, 5, 5)
        sp = SuperpixelMap(np.zeros((4, 4), dtype=np.int32), 1)
        with pytest.raises(ValueError):
            region_features(img, sp)


class TestRegionLabels:
    def _halves(self):
        labels = (np.arange(10)[None, :] >= 5).astype(np.int32) * np.ones((4, 1), dtype=np.int32)
        return SuperpixelMap(labels, 2)

    def test_pure_regions(self):
        sp = self._halves()
        mask = LabelMask((np.arange(10)[None, :] >= 5).astype(np.uint8) * np.ones((4, 1), dtype=np.uint8))
        assert region_labels(sp, mask).tolist() == [0, 1]

    def test_threshold_rule(self):
        sp = self._halves()
        # region 1 has 5 columns; flood 2 of them -> fraction 0.4
        flood = np.zeros((4, 10), dtype=np.uint8)
        flood[:, 5:7] = 1
        mask = LabelMask(flood)
        assert region_labels(sp, mask, threshold=0.5).tolist() == [0, 0]
        assert region_labels(sp, mask, threshold=0.3).tolist() == [0, 1]

    def test_validation(self):
        sp = self._halves()
        mask = LabelMask(np.zeros((4, 10), dtype=np.uint8))
        with pytest.raises(ValueError):
            region_labels(sp, mask, threshold=0.0)
        with pytest.raises(ValueError):
            region_labels(sp, LabelMask(np.zeros((3, 10), dtype=np.uint8)))


class TestPaintRegions:
    def test_all_ones(self):
        sp = SuperpixelMap(np.zeros((3, 3), dtype=np.int32), 1)
        assert paint_regions(sp, np.array([1])).labels.all()

    def test_round_trip_on_pure_regions(self):
        labels = (np.arange(10)[None, :] >= 5).astype(np.int32) * np.ones((4, 1), dtype=np.int32)
        sp = SuperpixelMap(labels, 2)
        mask = LabelMask((labels == 1).astype(np.uint8))
        painted = paint_regions(sp, region_labels(sp, mask))
        assert np.array_equal(painted.labels, mask.labels)

    def test_random_map_per_pixel_scan(self, rng):
        raw = rng.integers(0, 5, size=(6, 7))
        # make every id present
        raw.ravel()[:5] = np.arange(5)
        sp = SuperpixelMap(raw.astype(np.int32), 5)
        values = rng.integers(0, 2, size=5)
        painted = paint_regions(sp, values)
        for y in range(6):
            for x in range(7):
                assert painted.labels[y, x] == values[sp.labels[y, x]]

    def test_length_mismatch(self):
        sp = SuperpixelMap(np.zeros((2, 2), dtype=np.int32), 1)
        with pytest.raises(ValueError):
            paint_regions(sp, np.array([1, 0]))


class TestSuperpixelMapValidation:
    def test_requires_every_id_present(self):
        with pytest.raises(ValueError):
            SuperpixelMap(np.zeros((2, 2), dtype=np.int32), 2)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            SuperpixelMap(np.array([[0, 3]], dtype=np.int32), 2)
