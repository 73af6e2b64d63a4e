import numpy as np
import pytest

from fracform.grids import GridFunction


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def cos2_bump(center, width, height=1.0):
    """Raised-cosine bump: exact zeros outside |x - center| < width."""
    def fn(x):
        mask = np.abs(x - center) < width
        out = np.zeros_like(x)
        out[mask] = height * np.cos(np.pi * (x[mask] - center)
                                    / (2.0 * width)) ** 2
        return out
    return fn


def sample_bump(center=0.0, width=1.0, height=1.0, step=1.0 / 256.0):
    return GridFunction.from_callable(cos2_bump(center, width, height),
                                      center - width, center + width, step,
                                      pad=4)
