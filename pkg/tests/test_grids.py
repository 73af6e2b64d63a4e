import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracform.grids import (GridFunction, IntervalSet, PlateauSpec,
                            StepFunction, epsilon_contraction, make_plateau,
                            snap_to_dyadic_step)

from conftest import sample_bump


class TestGridFunction:
    def test_support_tracking(self):
        f = GridFunction(0.0, 0.5, [0.0, 0.0, 1.0, 2.0, 0.0])
        assert (f.support_lo, f.support_hi) == (2, 3)
        assert f.support_interval() == (1.0, 1.5)
        assert GridFunction(0.0, 1.0, [0.0, 0.0]).is_zero

    def test_eval_interpolates_and_vanishes_outside(self):
        f = GridFunction(0.0, 1.0, [0.0, 2.0, 0.0])
        assert f(0.5) == 1.0
        assert f(-3.0) == 0.0
        assert f(7.0) == 0.0

    def test_l2_exact_for_linear_pieces(self):
        f = GridFunction(0.0, 1.0, [0.0, 1.0, 0.0])
        # int over the unit triangle of height 1: 2 * int_0^1 t^2 dt = 2/3
        assert f.l2_norm_sq() == pytest.approx(2.0 / 3.0, rel=1e-14)

    def test_refined_is_exact(self):
        f = sample_bump(step=1.0 / 32.0)
        g = f.refined(4)
        assert np.allclose(g(f.x), f.values, atol=1e-15)
        assert g.step == f.step / 4

    def test_aligned_binary_ops(self):
        f = GridFunction(0.0, 0.5, [0.0, 1.0, 0.0])
        g = GridFunction(1.0, 0.5, [0.0, 2.0, 0.0])
        s = f + g
        assert s(0.5) == 1.0 and s(1.5) == 2.0
        with pytest.raises(ValueError):
            f + GridFunction(0.25, 0.5, [0.0, 1.0, 0.0])

    def test_json_csv_roundtrip(self):
        f = sample_bump(step=1.0 / 16.0)
        g = GridFunction.from_json_dict(f.to_json_dict())
        assert np.array_equal(g.values, f.values)
        h = GridFunction.from_csv(f.to_csv())
        assert np.allclose(h.values, f.values, atol=1e-12)

    def test_rejects_bad_grid(self):
        with pytest.raises(ValueError):
            GridFunction(0.0, 0.0, [0.0, 1.0])
        with pytest.raises(ValueError):
            GridFunction(0.0, 1.0, [1.0])


class TestEpsilonContraction:
    def test_full_contraction_gives_exact_zero(self):
        h = sample_bump(height=0.8)
        out = epsilon_contraction(h, 1.0)
        assert out.is_zero

    def test_zero_eps_is_identity(self):
        h = sample_bump()
        out = epsilon_contraction(h, 0.0)
        assert np.array_equal(out.values, h.values)

    def test_plateau_height_two(self):
        f = make_plateau(PlateauSpec(0.0, 1.0, 0.5), 1.0 / 64.0).scaled(2.0)
        out = epsilon_contraction(f, 1.0)
        assert out.linf() == pytest.approx(1.0, abs=1e-15)
        # the band |h| <= 1 is removed pointwise
        assert np.array_equal(out.values, np.maximum(f.values - 1.0, 0.0))

    def test_negative_eps_rejected(self):
        with pytest.raises(ValueError):
            epsilon_contraction(sample_bump(), -0.1)

    def test_sign_preserved(self):
        h = GridFunction(0.0, 1.0, [0.0, -2.0, 3.0, 0.0])
        out = epsilon_contraction(h, 1.0)
        assert list(out.values) == [0.0, -1.0, 2.0, 0.0]

    def test_normal_contraction_property(self, rng):
        # |h_eps(x) - h_eps(y)| <= |h(x) - h(y)| at all node pairs
        for _ in range(100):
            n = 40
            vals = np.zeros(n)
            vals[1:-1] = rng.normal(size=n - 2)
            h = GridFunction(0.0, 0.1, vals)
            out = epsilon_contraction(h, float(rng.uniform(0.0, 1.5)))
            dh = np.abs(h.values[:, None] - h.values[None, :])
            dc = np.abs(out.values[:, None] - out.values[None, :])
            assert np.all(dc <= dh + 1e-15)


class TestMakePlateau:
    def test_linear_trapezoid_knots(self):
        f = make_plateau(PlateauSpec(0.0, 1.0, 0.5), 1.0 / 64.0)
        for x, v in ((-0.5, 0.0), (-0.25, 0.5), (0.0, 1.0), (0.5, 1.0),
                     (1.0, 1.0), (1.25, 0.5), (1.5, 0.0)):
            assert f(x) == pytest.approx(v, abs=1e-9)

    @pytest.mark.parametrize("profile", ["linear", "smooth", "concave"])
    def test_total_variation_two(self, profile):
        # monotone ramps hit exact 0 and exact 1, so the interpolant's total
        # variation is 2; the float sum of increments rounds at ~1e-16
        f = make_plateau(PlateauSpec(-0.3, 0.9, 0.37, profile), 1.0 / 128.0)
        assert f.total_variation() == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("profile", ["linear", "smooth", "concave"])
    def test_membership(self, profile):
        spec = PlateauSpec(0.0, 1.0, 0.25, profile)
        f = make_plateau(spec, 1.0 / 128.0)
        x = f.x
        assert np.all(f.values[(x >= 0.0) & (x <= 1.0)] == 1.0)
        assert np.all(f.values[(x <= -0.25) | (x >= 1.25)] == 0.0)
        up = f.values[(x > -0.25) & (x <= 0.0 + 1e-12)]
        assert np.all(np.diff(up) >= 0)

    def test_degenerate_spec_rejected(self):
        with pytest.raises(ValueError):
            make_plateau(PlateauSpec(0.0, 1.0, 0.01), 0.01)

    def test_bad_spec_rejected(self):
        with pytest.raises(ValueError):
            PlateauSpec(1.0, 0.0, 0.5)
        with pytest.raises(ValueError):
            PlateauSpec(0.0, 1.0, 0.5, "cubic")


class TestSnapToDyadic:
    def test_zero_function_empty(self):
        f = GridFunction(0.0, 1.0, [0.0, 0.0, 0.0])
        st_fn = snap_to_dyadic_step(f, 3)
        assert st_fn.is_zero and st_fn.breakpoints.size == 0

    def test_triangle_depth_one(self):
        f = GridFunction.from_callable(
            lambda x: np.clip(1.0 - np.abs(2.0 * x - 1.0), 0.0, None),
            0.0, 1.0, 1.0 / 64.0, pad=2)
        st_fn = snap_to_dyadic_step(f, 1)
        assert np.allclose(st_fn.breakpoints, [0.0, 0.5, 1.0])
        assert np.allclose(st_fn.levels, [f(0.0), f(0.5)])

    def test_sup_error_bound_and_halving(self, rng):
        for _ in range(10):
            c = float(rng.uniform(0.2, 0.8))
            w = float(rng.uniform(0.25, 0.45))
            f = sample_bump(c, w, height=float(rng.uniform(0.5, 2.0)),
                            step=1.0 / 1024.0)
            lip = f.lipschitz()
            xs = np.linspace(c - w - 0.05, c + w + 0.05, 16001)
            errors = []
            for n in (6, 7, 8):
                approx = snap_to_dyadic_step(f, n)
                err = float(np.max(np.abs(f(xs) - approx(xs))))
                assert err <= lip / 2.0 ** n + 1e-12
                errors.append(err)
            for e1, e2 in zip(errors[:-1], errors[1:]):
                assert 0.45 * e1 <= e2 <= 0.55 * e1


class TestStepFunction:
    def test_left_open_right_closed(self):
        s = StepFunction(np.array([0.0, 1.0]), np.array([1.0]))
        assert s(0.0) == 0.0
        assert s(0.5) == 1.0
        assert s(1.0) == 1.0
        assert s(1.0 + 1e-12) == 0.0

    def test_l2_and_tv(self):
        s = StepFunction(np.array([0.0, 1.0, 3.0]), np.array([2.0, -1.0]))
        assert s.l2_norm_sq() == pytest.approx(4.0 + 2.0)
        assert s.total_variation() == pytest.approx(2.0 + 3.0 + 1.0)

    def test_sample_ramps_over_one_cell(self):
        s = StepFunction(np.array([0.0, 1.0]), np.array([1.0]))
        f = s.sample(1.0 / 8.0)
        assert f(0.5) == 1.0
        assert f(-0.5) == 0.0
        assert f.total_variation() == pytest.approx(2.0)


class TestIntervalSet:
    def test_normalization_merges_overlaps_only(self):
        s = IntervalSet.of((0.0, 2.0), (1.0, 3.0), (4.0, 5.0), (5.0, 6.0))
        assert s.intervals == ((0.0, 3.0), (4.0, 5.0), (5.0, 6.0))

    def test_measure_between_matches_brute_force(self, rng):
        s = IntervalSet.of((-math.inf, -1.0), (-0.3, 0.1), (0.5, 0.8),
                           (2.0, math.inf))
        xs = np.linspace(-3.0, 3.0, 200001)
        ind = s.indicator(xs)
        for _ in range(50):
            a, b = sorted(rng.uniform(-3.0, 3.0, size=2))
            brute = float(np.sum(ind[(xs >= a) & (xs <= b)])) * (xs[1] - xs[0])
            assert s.measure_between(a, b) == pytest.approx(brute, abs=2e-4)

    def test_complement_within(self):
        s = IntervalSet.of((0.2, 0.4), (0.6, 0.7))
        gaps = s.complement_within((0.0, 1.0))
        assert gaps.intervals == ((0.0, 0.2), (0.4, 0.6), (0.7, 1.0))
        assert s.max_gap_within((0.0, 1.0)) == pytest.approx(0.3)

    def test_intersect(self):
        a = IntervalSet.of((0.0, 2.0), (3.0, 4.0))
        b = IntervalSet.of((1.0, 3.5))
        assert a.intersect(b).intervals == ((1.0, 2.0), (3.0, 3.5))

    def test_json_sentinels(self):
        s = IntervalSet.of((-math.inf, -1.0), (0.0, 1.0), (2.0, math.inf))
        data = s.to_json_list()
        assert data[0][0] == "-inf" and data[-1][1] == "inf"
        assert IntervalSet.from_json_list(data) == s

    @given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)),
                    max_size=8))
    @settings(max_examples=200, deadline=None)
    def test_normalization_invariants(self, pairs):
        s = IntervalSet(tuple(pairs))
        for (lo, hi) in s.intervals:
            assert lo < hi
        for (a, b), (c, d) in zip(s.intervals, s.intervals[1:]):
            assert b <= c
