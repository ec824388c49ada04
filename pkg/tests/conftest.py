import numpy as np
import pytest

from direct_mixture import (
    ChiSquared,
    DirectConfig,
    Logistic,
    SkewNormal,
    convolution_grid,
    direct_sequential,
    from_grid,
    normal_scale_family,
)

# chi-square(5) quantile at 0.0005, rounded as used for the t example
T_START = 0.158


@pytest.fixture(scope="session")
def t_family():
    return normal_scale_family(5)


@pytest.fixture(scope="session")
def t_grid(t_family):
    return direct_sequential(t_family, ChiSquared(5), DirectConfig(0.01, 0.001, start=T_START))


@pytest.fixture(scope="session")
def t_mixture(t_grid, t_family):
    return from_grid(t_grid, t_family)


@pytest.fixture(scope="session")
def conv():
    return convolution_grid(SkewNormal(0, 1, 4), Logistic(0, 1), DirectConfig(0.01, 0.001))


@pytest.fixture(scope="session")
def conv_mixture(conv):
    return from_grid(conv.grid, conv.family)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
