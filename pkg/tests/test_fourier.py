import math

import numpy as np
import pytest

from fracform.fourier import discrete_fourier, transform_at
from fracform.grids import GridFunction, StepFunction

from conftest import sample_bump


def test_zero_function_transforms_to_zero():
    f = GridFunction(0.0, 0.5, [0.0, 0.0, 0.0])
    table = discrete_fourier(f, 10.0, 64)
    assert np.all(table.amplitudes == 0.0)


def test_indicator_matches_analytic_modulus():
    # |fhat(xi)| of the indicator of [0, 1] is |2 sin(xi/2) / (xi sqrt(2 pi))|
    ind = StepFunction(np.array([0.0, 1.0]), np.array([1.0])).sample(1 / 512)
    xi = 1.0
    expected = abs(2.0 * math.sin(xi / 2.0) / (xi * math.sqrt(2.0 * math.pi)))
    got = abs(transform_at(ind, xi)[0])
    assert got == pytest.approx(expected, abs=1e-3)


def test_translation_leaves_modulus_invariant():
    f = sample_bump(step=1.0 / 128.0)
    g = f.shifted_by_steps(128)  # translate by exactly 1
    xi = np.linspace(-20.0, 20.0, 301)
    assert np.allclose(np.abs(transform_at(f, xi)), np.abs(transform_at(g, xi)),
                       atol=1e-13)


def test_plancherel_within_one_percent():
    f = sample_bump(width=0.7, step=1.0 / 256.0)
    table = discrete_fourier(f, 400.0, 8001)
    assert table.plancherel_l2() == pytest.approx(f.l2_norm_sq(), rel=0.01)


def test_nonfinite_samples_rejected():
    f = GridFunction(0.0, 1.0, [0.0, np.nan, 0.0])
    with pytest.raises(ValueError):
        discrete_fourier(f, 1.0, 16)


def test_grid_validation():
    f = sample_bump()
    with pytest.raises(ValueError):
        discrete_fourier(f, 1.0, 1)
    with pytest.raises(ValueError):
        discrete_fourier(f, -1.0, 16)


def test_exactness_against_quadrature():
    # the closed-form transform of the interpolant agrees with brute-force
    # quadrature of the same interpolant
    f = sample_bump(center=0.3, width=0.5, step=1.0 / 64.0)
    xs = np.linspace(-0.5, 1.5, 200001)
    vals = f(xs)
    for xi in (0.0, 0.7, 3.3, 19.0):
        brute = np.trapezoid(vals * np.exp(1j * xi * xs), xs) \
            / math.sqrt(2.0 * math.pi)
        assert transform_at(f, xi)[0] == pytest.approx(brute, abs=5e-9)
