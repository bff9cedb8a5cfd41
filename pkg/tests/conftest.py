import numpy as np
import pytest

from scatterprint.filterbank import build_filter_bank


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def small_bank():
    """16x16 bank with 3 scales, 2 orientations; cheap enough for oracles."""
    return build_filter_bank(3, 2, 16, 16)


@pytest.fixture(scope="session")
def default_bank():
    """The default operating point: 5 scales, 6 orientations, 80x60 input."""
    return build_filter_bank(5, 6, 80, 60)
