import numpy as np
import pytest

from floodvision import (
    Extractor,
    FeatureVector,
    HogParams,
    LbpParams,
    hog_feature,
    lbp_code,
    lbp_feature,
    load_embeddings,
)
from floodvision.features import hog_descriptor_length, lbp_code_map
from tests.conftest import make_gray, random_gray


def checkerboard(n: int) -> np.ndarray:
    board = np.zeros((n, n))
    board[(np.add.outer(np.arange(n), np.arange(n)) % 2) == 1] = 255.0
    return board


class TestLbpCode:
    def test_constant_image_all_bits_set(self):
        g = make_gray(np.full((5, 5), 42.0))
        assert lbp_code(g, 2, 2) == 255

    def test_all_neighbors_below_center(self):
        values = np.full((3, 3), 3.0)
        values[1, 1] = 5.0
        assert lbp_code(make_gray(values), 1, 1) == 0

    def test_clockwise_bit_order(self):
        # Neighbors (TL, T, TR, R, BR, B, BL, L) = (1..8) around center 6:
        # only B, BL, L reach the center, giving bits 00000111 = 7.
        values = np.array([[1, 2, 3], [8, 6, 4], [7, 6, 5]], dtype=np.float64)
        assert lbp_code(make_gray(values), 1, 1) == 7

    def test_border_rejected(self):
        g = make_gray(np.zeros((4, 4)))
        for x, y in ((0, 1), (3, 1), (1, 0), (1, 3)):
            with pytest.raises(ValueError):
                lbp_code(g, x, y)

    def test_code_map_matches_scalar(self, rng):
        g = random_gray(rng, 9, 7)
        codes = lbp_code_map(g)
        assert (codes[0, :] == -1).all() and (codes[:, 0] == -1).all()
        for y in range(1, 6):
            for x in range(1, 8):
                assert codes[y, x] == lbp_code(g, x, y)


class TestLbpFeature:
    def test_constant_18x18_single_cell(self):
        g = make_gray(np.full((18, 18), 7.0))
        vec = lbp_feature(g, LbpParams(cell_size=16))
        assert len(vec) == 256
        assert vec.extractor is Extractor.LBP
        assert vec.values[255] == 16 * 16
        assert vec.values.sum() == 16 * 16

    def test_grid_with_trailing_partial_cell(self):
        # 36x18 image codes a 34x16 interior; cells of 16 tile it as two
        # full-width cells plus a partial, a 3x1 grid of length 768.
        g = make_gray(np.zeros((18, 36)))
        vec = lbp_feature(g, LbpParams(cell_size=16))
        assert len(vec) == 3 * 256
        assert vec.values.sum() == 34 * 16

    def test_checkerboard_codes(self):
        g = make_gray(checkerboard(18))
        vec = lbp_feature(g, LbpParams(cell_size=16))
        hist = vec.values
        assert len(hist) == 256
        # brute-force oracle over the interior: exactly two phase codes
        expected = np.zeros(256)
        for y in range(1, 17):
            for x in range(1, 17):
                expected[lbp_code(g, x, y)] += 1
        assert np.array_equal(hist, expected)
        assert sorted(np.nonzero(hist)[0].tolist()) == [170, 255]
        assert hist[170] == 128 and hist[255] == 128

    def test_mass_equals_coded_pixels(self, rng):
        for _ in range(10):
            w = int(rng.integers(3, 40))
            h = int(rng.integers(3, 40))
            cell = int(rng.integers(2, 20))
            g = random_gray(rng, w, h)
            vec = lbp_feature(g, LbpParams(cell_size=cell))
            assert vec.values.sum() == (w - 2) * (h - 2)

    def test_monotone_remap_invariance(self, rng):
        g = random_gray(rng, 21, 15)
        base = lbp_feature(g).values
        squeezed = make_gray(255.0 * (g.values / 255.0) ** 2)
        affine = make_gray(0.5 * g.values + 10.0)
        assert np.array_equal(lbp_feature(squeezed).values, base)
        assert np.array_equal(lbp_feature(affine).values, base)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            lbp_feature(make_gray(np.zeros((2, 8))))

    def test_cell_size_validation(self):
        with pytest.raises(ValueError):
            LbpParams(cell_size=1)
        with pytest.raises(ValueError):
            LbpParams(neighbors=4)


class TestHogFeature:
    def test_constant_image_zero_descriptor(self):
        g = make_gray(np.full((32, 32), 50.0))
        vec = hog_feature(g)
        assert not vec.values.any()
        assert vec.extractor is Extractor.HOG

    def test_length_formula_224(self):
        g = make_gray(np.zeros((224, 224)))
        vec = hog_feature(g, HogParams(cell_size=8, block_size=2, block_stride=1, orientation_bins=9))
        assert len(vec) == 27 * 27 * 2 * 2 * 9 == 26244

    @pytest.mark.parametrize(
        "w,h,cell,block,stride,bins",
        [
            (64, 48, 8, 2, 1, 9),
            (50, 50, 5, 2, 2, 6),
            (40, 30, 10, 1, 1, 4),
            (33, 33, 4, 3, 1, 12),
            (128, 96, 16, 2, 1, 9),
        ],
    )
    def test_length_formula_parametrized(self, w, h, cell, block, stride, bins):
        p = HogParams(cell_size=cell, block_size=block, block_stride=stride, orientation_bins=bins)
        g = make_gray(np.zeros((h, w)))
        assert len(hog_feature(g, p)) == hog_descriptor_length(w, h, p)

    def test_step_edge_mass_in_zero_degree_bin(self):
        values = np.zeros((8, 8))
        values[:, 4:] = 255.0
        p = HogParams(cell_size=4, block_size=1, block_stride=1, orientation_bins=9)
        vec = hog_feature(make_gray(values), p).values.reshape(-1, 9)
        total = vec.sum()
        assert total > 0
        assert vec[:, 0].sum() == pytest.approx(total)

    def test_block_norms_bounded(self, rng):
        p = HogParams(cell_size=6, block_size=2, block_stride=1, orientation_bins=9)
        for _ in range(5):
            g = random_gray(rng, 30, 24)
            vec = hog_feature(g, p).values.reshape(-1, p.block_size**2 * p.orientation_bins)
            norms = np.linalg.norm(vec, axis=1)
            assert (norms <= 1.0 + 1e-9).all()

    def test_intensity_offset_invariance(self, rng):
        base = rng.integers(0, 200, size=(24, 24)).astype(np.float64)
        p = HogParams(cell_size=6)
        a = hog_feature(make_gray(base), p).values
        b = hog_feature(make_gray(base + 30.0), p).values
        assert np.array_equal(a, b)

    def test_smaller_than_block_rejected(self):
        with pytest.raises(ValueError):
            hog_feature(make_gray(np.zeros((8, 8))), HogParams(cell_size=8, block_size=2))


class TestFeatureVector:
    def test_validation(self):
        with pytest.raises(ValueError):
            FeatureVector(np.array([]), Extractor.LBP)
        with pytest.raises(ValueError):
            FeatureVector(np.array([1.0, np.inf]), Extractor.LBP)


class TestLoadEmbeddings:
    def _write(self, tmp_path, text):
        path = tmp_path / "emb.csv"
        path.write_text(text, encoding="utf-8")
        return path

    def test_minimal_file(self, tmp_path):
        table = load_embeddings(self._write(tmp_path, "path,f0,f1\na.png,1.0,2.0\n"))
        assert table.dim == 2
        assert len(table) == 1
        assert table.vector("a.png").values.tolist() == [1.0, 2.0]
        assert table.vector("a.png").extractor is Extractor.EMBEDDING

    def test_ragged_row(self, tmp_path):
        path = self._write(tmp_path, "path,f0,f1\na.png,1.0,2.0,3.0\n")
        with pytest.raises(ValueError, match="expected 3 fields"):
            load_embeddings(path)

    def test_duplicate_identifier(self, tmp_path):
        path = self._write(tmp_path, "path,f0\na.png,1.0\na.png,2.0\n")
        with pytest.raises(ValueError, match="duplicate"):
            load_embeddings(path)

    def test_non_numeric_cell(self, tmp_path):
        path = self._write(tmp_path, "path,f0\na.png,abc\n")
        with pytest.raises(ValueError, match="non-numeric"):
            load_embeddings(path)

    def test_missing_header(self, tmp_path):
        with pytest.raises(ValueError, match="header"):
            load_embeddings(self._write(tmp_path, ""))

    def test_bad_header_names(self, tmp_path):
        with pytest.raises(ValueError):
            load_embeddings(self._write(tmp_path, "path,a,b\nx.png,1,2\n"))

    def test_unknown_key(self, tmp_path):
        table = load_embeddings(self._write(tmp_path, "path,f0\na.png,1.0\n"))
        with pytest.raises(KeyError):
            table.vector("missing.png")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_embeddings(tmp_path / "none.csv")
