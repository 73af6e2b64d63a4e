"""Triangulation of the exact fractional quadrature engine: high-precision
reference values, polarization consistency, and the closed-form stiffness
row."""

import math

import mpmath
import numpy as np
import pytest

from fracform.quadcells import (gagliardo_of_values, hat_energy_row,
                                rho_profile)


def mp_reference_energy(values, h, alpha, dps=50):
    """50-digit reference: integrate the piecewise-cubic increment
    correlation against the kernel cell by cell with mpmath."""
    with mpmath.workdps(dps):
        v = [mpmath.mpf(x) for x in values]
        hh = mpmath.mpf(h)
        a = mpmath.mpf(alpha)
        s = [(v[i + 1] - v[i]) / hh for i in range(len(v) - 1)]
        m = len(s)
        c = [sum(s[i] * s[i + k] for i in range(m - k)) for k in range(m)]
        r2 = [2 * hh * ck for ck in c] + [mpmath.mpf(0)]
        rhop = [mpmath.mpf(0)]
        rho = [mpmath.mpf(0)]
        for k in range(m):
            rhop.append(rhop[-1] + hh * (r2[k] + r2[k + 1]) / 2)
            rho.append(rho[-1] + hh * rhop[-2]
                       + hh * hh * (2 * r2[k] + r2[k + 1]) / 6)
        total = mpmath.mpf(0)
        # singular cell in closed form (rho and rho' vanish at 0)
        d0 = r2[1] - r2[0]
        total += (r2[0] / 2 * hh ** (2 - a) / (2 - a)
                  + d0 * hh ** (2 - a) / (6 * (3 - a)))
        for k in range(1, m):
            d = r2[k + 1] - r2[k]

            def cell(t, k=k, d=d):
                poly = (rho[k] + rhop[k] * t + r2[k] * t ** 2 / 2
                        + d * t ** 3 / (6 * hh))
                return (k * hh + t) ** (-1 - a) * poly

            total += mpmath.quad(cell, [0, hh])
        seg = sum((v[i] ** 2 + v[i] * v[i + 1] + v[i + 1] ** 2)
                  for i in range(len(v) - 1)) * hh / 3
        total += 2 * seg * (m * hh) ** (-a) / a
        return float(2 * total)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0, 1.5, 1.9])
def test_engine_matches_high_precision_reference(alpha, rng):
    vals = np.zeros(10)
    vals[1:-1] = rng.normal(size=8)
    h = 0.17
    got = gagliardo_of_values(vals, h, alpha)
    ref = mp_reference_energy(vals, h, alpha)
    assert got == pytest.approx(ref, rel=5e-13)


def test_rho_profile_matches_brute_correlation(rng):
    vals = np.zeros(30)
    vals[1:-1] = rng.normal(size=28)
    h = 0.05
    prof = rho_profile(vals, h)
    # cover the support and every shifted copy: x and x + tau, tau <= 2
    xs = np.linspace(-2.6, 2.1, 300001)
    nodes = h * np.arange(30)
    for tau in (0.01, 0.07, 0.2, 0.9, 2.0):
        d = np.interp(xs + tau, nodes, vals) - np.interp(xs, nodes, vals)
        brute = np.trapezoid(d * d, xs)
        assert prof.value_at(tau)[0] == pytest.approx(brute, rel=1e-4, abs=1e-9)


def test_row_matches_polarization(rng):
    h = 0.1
    alpha = 0.7
    row = hat_energy_row(40, h, alpha)
    e0 = gagliardo_of_values(np.array([0.0, 1.0, 0.0]), h, alpha)
    for m in (1, 2, 3, 10, 30):
        vv = np.zeros(m + 3)
        vv[1] = 1.0
        vv[m + 1] += 1.0
        pol = (gagliardo_of_values(vv, h, alpha) - 2.0 * e0) / 2.0
        assert row[m] == pytest.approx(pol, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.5, 1.9])
def test_row_matches_fourth_difference_closed_form(alpha):
    row = hat_energy_row(10, 1.0, alpha)
    c = 2.0 / (alpha * (1.0 - alpha) * (2.0 - alpha) * (3.0 - alpha))

    def w(m):
        return abs(m) ** (3.0 - alpha)

    for m in range(10):
        ref = c * (w(m + 2) - 4 * w(m + 1) + 6 * w(m) - 4 * w(m - 1)
                   + w(m - 2))
        assert row[m] == pytest.approx(ref, rel=1e-9)


def test_row_log_branch_at_alpha_one():
    row = hat_energy_row(10, 1.0, 1.0)

    def w(m):
        return m * m * math.log(abs(m)) if m != 0 else 0.0

    for m in range(10):
        ref = w(m + 2) - 4 * w(m + 1) + 6 * w(m) - 4 * w(m - 1) + w(m - 2)
        assert row[m] == pytest.approx(ref, rel=1e-9)


def test_quadratic_form_equals_direct_energy(rng):
    from scipy.linalg import toeplitz

    n = 120
    h = 0.04
    vals = np.zeros(n)
    vals[1:-1] = rng.normal(size=n - 2)
    for alpha in (0.5, 1.0, 1.5):
        k = toeplitz(hat_energy_row(n, h, alpha))
        quadform = float(vals @ k @ vals)
        direct = gagliardo_of_values(vals, h, alpha)
        assert quadform == pytest.approx(direct, rel=1e-12)


def test_contraction_decreases_energy(rng):
    # removing the small band is a normal contraction, so the form decreases
    from fracform.grids import GridFunction, epsilon_contraction

    for _ in range(10):
        vals = np.zeros(50)
        vals[1:-1] = rng.normal(size=48)
        f = GridFunction(0.0, 0.1, vals)
        g = epsilon_contraction(f, float(rng.uniform(0.1, 1.0)))
        for alpha in (0.5, 1.5):
            ef = gagliardo_of_values(f.values, f.step, alpha)
            eg = gagliardo_of_values(g.values, g.step, alpha)
            assert eg <= ef + 1e-12