import itertools
import math

import numpy as np
import pytest

from floodvision import CrfParams, Image, LabelMask, ProbMap, crf_energy, icm_refine, icm_refine_trace
from tests.conftest import random_rgb


def random_instance(rng, width, height, sigma=120.0, weight=None):
    """Random probabilities over a mildly varying image, pairwise active."""
    img = Image(rng.integers(80, 176, size=(height, width, 3), dtype=np.uint8))
    pm = ProbMap(rng.uniform(0.0, 1.0, size=(height, width)))
    w = float(rng.uniform(0.3, 2.5)) if weight is None else weight
    return pm, img, CrfParams(pairwise_weight=w, color_sigma=sigma)


def all_labelings(height, width):
    for bits in itertools.product((0, 1), repeat=height * width):
        yield LabelMask(np.array(bits, dtype=np.uint8).reshape(height, width))


class TestEnergy:
    def test_zero_weight_is_unary_only(self, rng):
        pm, img, _ = random_instance(rng, 5, 4)
        params = CrfParams(pairwise_weight=0.0)
        mask = LabelMask((pm.p_flood > 0.5).astype(np.uint8))
        p = np.clip(pm.p_flood, params.prob_floor, 1 - params.prob_floor)
        unary = np.where(mask.labels == 1, -np.log(p), -np.log(1 - p)).sum()
        assert crf_energy(pm, img, mask, params) == pytest.approx(unary, rel=1e-12)

    def test_uniform_labels_have_no_pairwise_cost(self, rng):
        pm, img, params = random_instance(rng, 6, 3)
        ones = LabelMask(np.ones((3, 6), dtype=np.uint8))
        heavy = CrfParams(pairwise_weight=50.0, color_sigma=params.color_sigma)
        light = CrfParams(pairwise_weight=0.0, color_sigma=params.color_sigma)
        assert crf_energy(pm, img, ones, heavy) == pytest.approx(crf_energy(pm, img, ones, light))

    def test_two_pixel_worked_example(self):
        img = Image(np.full((1, 2, 3), 100, dtype=np.uint8))
        pm = ProbMap(np.array([[0.1, 0.6]]))
        params = CrfParams(pairwise_weight=1.0, color_sigma=13.0)
        e = crf_energy(pm, img, LabelMask(np.array([[0, 1]])), params)
        assert e == pytest.approx(-math.log(0.9) - math.log(0.6) + 1.0, abs=1e-12)

    def test_dimension_mismatch(self, rng):
        pm, img, params = random_instance(rng, 4, 4)
        with pytest.raises(ValueError):
            crf_energy(pm, random_rgb(rng, 5, 4), LabelMask(np.zeros((4, 4), dtype=np.uint8)), params)
        with pytest.raises(ValueError):
            crf_energy(pm, img, LabelMask(np.zeros((3, 4), dtype=np.uint8)), params)


class TestIcm:
    def test_zero_weight_equals_argmax(self, rng):
        for _ in range(10):
            pm, img, _ = random_instance(rng, 7, 5)
            params = CrfParams(pairwise_weight=0.0)
            mask, energies = icm_refine_trace(pm, img, params)
            assert np.array_equal(mask.labels, (pm.p_flood > 0.5).astype(np.uint8))
            assert len(energies) == 2  # initial + the single no-change sweep
            assert energies[0] == energies[1]

    def test_two_pixel_instance_reaches_global_minimum(self):
        img = Image(np.full((1, 2, 3), 100, dtype=np.uint8))
        pm = ProbMap(np.array([[0.1, 0.6]]))
        params = CrfParams(pairwise_weight=1.0, color_sigma=13.0)
        mask, energies = icm_refine_trace(pm, img, params)
        assert mask.labels.tolist() == [[0, 0]]
        # exhaustive oracle over the four labelings
        best = min(all_labelings(1, 2), key=lambda m: crf_energy(pm, img, m, params))
        assert np.array_equal(mask.labels, best.labels)
        assert energies[-1] == pytest.approx(-math.log(0.9) - math.log(0.4), abs=1e-12)

    def test_certain_probabilities_win_for_any_weight(self, rng):
        img = random_rgb(rng, 6, 4)
        pm = ProbMap(np.ones((4, 6)))
        for w in (0.0, 1.0, 25.0):
            mask = icm_refine(pm, img, CrfParams(pairwise_weight=w))
            assert mask.labels.all()

    def test_never_worse_than_initial_labeling(self, rng):
        for _ in range(20):
            pm, img, params = random_instance(rng, 8, 8)
            init = LabelMask((pm.p_flood > 0.5).astype(np.uint8))
            mask, _ = icm_refine_trace(pm, img, params)
            assert crf_energy(pm, img, mask, params) <= crf_energy(pm, img, init, params) + 1e-9

    def test_sweep_energies_non_increasing(self, rng):
        for _ in range(20):
            pm, img, params = random_instance(rng, 8, 8, sigma=200.0)
            _, energies = icm_refine_trace(pm, img, params)
            for a, b in zip(energies, energies[1:]):
                assert b <= a + 1e-9

    @pytest.mark.parametrize("height,width", [(2, 2), (3, 3)])
    def test_output_is_single_flip_local_minimum(self, rng, height, width):
        for _ in range(10):
            pm, img, params = random_instance(rng, width, height, sigma=150.0)
            mask, _ = icm_refine_trace(pm, img, params)
            base = crf_energy(pm, img, mask, params)
            for y in range(height):
                for x in range(width):
                    flipped = mask.labels.copy()
                    flipped[y, x] = 1 - flipped[y, x]
                    assert crf_energy(pm, img, LabelMask(flipped), params) >= base - 1e-9

    def test_unary_argmax_monotone_in_probability(self, rng):
        # with no pairwise term, raising one pixel's probability can only
        # move its label from 0 to 1, never back
        pm, img, _ = random_instance(rng, 5, 5)
        params = CrfParams(pairwise_weight=0.0)
        before = icm_refine(pm, img, params).labels
        bumped = pm.p_flood.copy()
        bumped[2, 2] = min(1.0, bumped[2, 2] + 0.4)
        after = icm_refine(ProbMap(bumped), img, params).labels
        assert not (before[2, 2] == 1 and after[2, 2] == 0)

    def test_max_sweeps_cap(self, rng):
        pm, img, _ = random_instance(rng, 6, 6)
        params = CrfParams(pairwise_weight=2.0, color_sigma=300.0, max_sweeps=1)
        _, energies = icm_refine_trace(pm, img, params)
        assert len(energies) <= 2

    def test_dimension_mismatch(self, rng):
        pm, img, params = random_instance(rng, 4, 4)
        with pytest.raises(ValueError):
            icm_refine(pm, random_rgb(rng, 5, 4), params)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            CrfParams(pairwise_weight=-1.0)
        with pytest.raises(ValueError):
            CrfParams(color_sigma=0.0)
        with pytest.raises(ValueError):
            CrfParams(prob_floor=0.5)
        with pytest.raises(ValueError):
            CrfParams(max_sweeps=0)

    def test_probmap_validation(self):
        with pytest.raises(ValueError):
            ProbMap(np.array([[0.5, 1.2]]))
        with pytest.raises(ValueError):
            ProbMap(np.array([0.5]))
