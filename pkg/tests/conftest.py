import numpy as np
import pytest

from helfrich_flow.curve import circle, fourier_curve


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_circle():
    return circle(1.0, N=512)


@pytest.fixture
def wobbly():
    return fourier_curve(modes=5, amplitude=0.3, seed=7, n=3, N=256)
