import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "bedfall",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    max_examples=50,
)
settings.load_profile("bedfall")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def naive_dft(x):
    """O(n^2) discrete Fourier transform used as the transform oracle."""
    x = np.asarray(x, dtype=np.complex128)
    n = len(x)
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x


def rel_err(actual, expected):
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    scale = max(float(np.max(np.abs(expected))), 1e-300)
    return float(np.max(np.abs(actual - expected))) / scale
