import numpy as np
import pytest

from floodvision import GrayImage, Image


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_gray(values) -> GrayImage:
    return GrayImage(np.asarray(values, dtype=np.float64))


def make_rgb(pixels) -> Image:
    return Image(np.asarray(pixels, dtype=np.uint8))


def random_rgb(rng, width: int, height: int) -> Image:
    return Image(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


def random_gray(rng, width: int, height: int) -> GrayImage:
    return GrayImage(rng.uniform(0.0, 255.0, size=(height, width)))
