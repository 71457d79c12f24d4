import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sidebyside.best_response import best_response, grid_oracle
from sidebyside.counterexample import (
    br_curve,
    counterexample_config,
    equilibrium_interval,
    piecewise_br,
    piecewise_payoff,
)
from sidebyside.errors import InvalidParameter
from sidebyside.payoff import payoff


class TestPiecewisePayoff:
    @pytest.mark.parametrize(
        "b, b_opp, expected",
        [
            (0.5, 0.8, 0.15625),  # 0.5 * 0.5 * 0.625
            (0.1, 0.1, 0.09),  # at the opponent level both branches give (1 - b) b
            (1.0, 0.5, 0.0),
        ],
    )
    def test_examples(self, b, b_opp, expected):
        assert piecewise_payoff(1.0, b, b_opp) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("b_opp", [0.2, 0.5, 0.6, 2 / 3, 0.9, 1.0])
    def test_matches_generic_payoff(self, b_opp):
        cfg = counterexample_config()
        grid = np.linspace(0, 1, 10_001)
        np.testing.assert_allclose(piecewise_payoff(1.0, grid, b_opp), payoff(cfg, 1, grid, b_opp), rtol=0, atol=1e-12)

    def test_continuous_at_opponent_level(self):
        for b_opp in (0.3, 0.55, 0.8):
            eps = 1e-12
            left = piecewise_payoff(1.0, b_opp - eps, b_opp)
            right = piecewise_payoff(1.0, b_opp + eps, b_opp)
            assert left == pytest.approx(right, abs=1e-10)

    def test_rejects_nonpositive_opponent(self):
        with pytest.raises(InvalidParameter):
            piecewise_payoff(1.0, 0.5, 0.0)


class TestPiecewiseBestResponse:
    @pytest.mark.parametrize("b_opp", [0.51, 0.55, 0.60, 0.65, 0.66])
    def test_interior_points_are_exact_fixed_points(self, b_opp):
        assert piecewise_br(1.0, b_opp) == b_opp

    @pytest.mark.parametrize("b_opp", [0.1, 0.3, 0.45, 0.7, 0.9])
    def test_outside_points_move(self, b_opp):
        assert piecewise_br(1.0, b_opp) != b_opp

    @pytest.mark.parametrize("b_opp, expected", [(0.1, 0.5), (0.5, 0.5), (0.7, 2 / 3), (1.0, 2 / 3)])
    def test_clamped_values(self, b_opp, expected):
        assert piecewise_br(1.0, b_opp) == pytest.approx(expected, abs=1e-15)

    def test_matches_brute_force_grid(self):
        # dense grid argmax of the branch formula, no solver involved
        grid = np.linspace(0, 1, 200_001)
        for b_opp in (0.2, 0.52, 0.6, 0.64, 0.8):
            brute = grid[int(np.argmax(piecewise_payoff(1.0, grid, b_opp)))]
            assert piecewise_br(1.0, b_opp) == pytest.approx(brute, abs=1e-5)

    def test_matches_generic_solvers(self):
        cfg = counterexample_config()
        for b_opp in (0.3, 0.55, 0.62, 0.9):
            expected = piecewise_br(1.0, b_opp)
            assert best_response(cfg, 1, b_opp).bid == pytest.approx(expected, abs=1e-6)
            assert grid_oracle(cfg, 1, b_opp).bid == pytest.approx(expected, abs=1e-5)

    @pytest.mark.parametrize("b_opp", [0.0, -0.2, 1.2])
    def test_rejects_out_of_range(self, b_opp):
        with pytest.raises(InvalidParameter):
            piecewise_br(1.0, b_opp)


@settings(max_examples=200, deadline=None)
@given(b_opp=st.floats(0.01, 1.0), b=st.floats(0.0, 1.0))
def test_br_is_optimal_property(b_opp, b):
    best = piecewise_br(1.0, b_opp)
    assert piecewise_payoff(1.0, best, b_opp) >= piecewise_payoff(1.0, b, b_opp) - 1e-15


@settings(max_examples=100, deadline=None)
@given(b_opp=st.floats(0.01, 1.0), scale=st.floats(0.1, 10.0))
def test_br_scales_with_value_property(b_opp, scale):
    assert piecewise_br(scale, scale * b_opp) == pytest.approx(scale * piecewise_br(1.0, b_opp), rel=1e-12)


class TestEquilibriumInterval:
    def test_unit_value(self):
        report = equilibrium_interval(1.0, 1e-4)
        assert report.lo == pytest.approx(0.5, abs=1e-4)
        assert report.hi == pytest.approx(0.6666, abs=1e-4)
        assert report.lo < report.hi
        assert not report.low_resolution

    def test_doubled_value(self):
        report = equilibrium_interval(2.0, 1e-4)
        assert report.lo == pytest.approx(1.0, abs=2e-4)
        assert report.hi == pytest.approx(1.3333, abs=2e-4)

    def test_coarse_grid_is_flagged(self):
        report = equilibrium_interval(1.0, 1.0)
        assert report.low_resolution
        assert math.isnan(report.lo) and math.isnan(report.hi)

    def test_fixed_point_count(self):
        # grid k/10000 hits 0.5000 .. 0.6666
        assert equilibrium_interval(1.0, 1e-4).n_fixed_points == 1667

    @pytest.mark.parametrize("args", [(0.0, 1e-4), (1.0, 0.0), (-1.0, 1e-3)])
    def test_rejects_bad_arguments(self, args):
        with pytest.raises(InvalidParameter):
            equilibrium_interval(*args)


class TestBrCurve:
    def test_shape_and_range(self):
        curve = br_curve(1.0, 201)
        assert len(curve) == 201
        assert curve[-1] == (1.0, pytest.approx(2 / 3))
        assert all(0.5 <= br <= 2 / 3 for _, br in curve)

    def test_nondecreasing(self):
        values = [br for _, br in br_curve(1.0, 500)]
        assert np.all(np.diff(values) >= 0)
