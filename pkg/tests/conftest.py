import pytest

from embcom import ArrayConfig, SceneConfig


@pytest.fixture
def ref_array():
    """64x16 UPA used by the reference numerical setup (7 GHz carrier)."""
    return ArrayConfig(64, 16)


@pytest.fixture
def ref_scene():
    """2 m x 2 m plane at 100 m, gamma0 = 10 (10 dB), L = 5 snapshots."""
    return SceneConfig(100.0, 2.0, 2.0, 10.0, 1.0, 5, 1.0)


@pytest.fixture
def small_array():
    """8x4 UPA for dense-matrix oracles."""
    return ArrayConfig(8, 4)
