import importlib
import math

import numpy as np
import pytest
from scipy import optimize

from sidebyside.best_response import BestResponseResult, best_response
from sidebyside.counterexample import counterexample_config
from sidebyside.distributions import Exponential, LogNormal, PowerOnInterval
from sidebyside.dynamics import equilibrium, extremal_equilibria, iterate, uniqueness_probe
from sidebyside.errors import InvalidParameter, NotAnEquilibrium
from sidebyside.payoff import MarketConfig

from conftest import STANDARD

# Exp(2) competition, unit-mean lognormal(0.3) noise on both sides, v = 1
EXP2_LN03_LIMIT = 0.7360121067


def _lognormal_score_at_one(sigma):
    # z = (log 1 + sigma^2/2) / sigma; score = phi(z) / (sigma * Phi(z))
    z = sigma / 2
    phi = math.exp(-z * z / 2) / math.sqrt(2 * math.pi)
    Phi = 0.5 * (1 + math.erf(z / math.sqrt(2)))
    return phi / (sigma * Phi)


def symmetric_equilibrium_oracle(rate, sigma, v=1.0):
    """Root of 1/(v-b) = Q'/Q(b) + N'(1)/(N(1) b), the symmetric FOC at b_opp = b."""
    s = _lognormal_score_at_one(sigma)
    gap = lambda b: 1 / (v - b) - rate / math.expm1(rate * b) - s / b
    return optimize.brentq(gap, 1e-6 * v, v * (1 - 1e-9), xtol=1e-15)


class TestIterate:
    def test_uncoupled_converges_in_two_steps(self):
        # noise capped at 1e-9: the opponent cdf is 1 on every relevant bid
        cfg = MarketConfig(1.0, PowerOnInterval(1, 1), PowerOnInterval(1, 1e-9), PowerOnInterval(1, 1e-9))
        trace = iterate(cfg, 0.1)
        assert trace.stop_reason == "converged"
        assert trace.iterations == 2
        assert trace.last == pytest.approx((0.5, 0.5), abs=1e-12)

    def test_lognormal_from_low_start(self, lognormal_cfg):
        trace = iterate(lognormal_cfg, 0.1)
        assert trace.direction == "nondecreasing"
        assert trace.stop_reason == "converged"
        assert trace.is_monotone()
        b1, b2 = trace.last
        assert b1 == pytest.approx(EXP2_LN03_LIMIT, abs=1e-8)
        assert b2 == pytest.approx(EXP2_LN03_LIMIT, abs=1e-8)

    def test_frozen_limit_matches_independent_oracle(self):
        assert symmetric_equilibrium_oracle(2.0, 0.3) == pytest.approx(EXP2_LN03_LIMIT, abs=1e-9)

    def test_frozen_limit_matches_grid_oracle_iteration(self, lognormal_cfg):
        from sidebyside.best_response import grid_oracle

        b2 = 0.9
        for _ in range(30):
            b1 = grid_oracle(lognormal_cfg, 1, b2).bid
            b2 = grid_oracle(lognormal_cfg, 2, b1).bid
        assert b1 == pytest.approx(EXP2_LN03_LIMIT, abs=1e-6)
        assert b2 == pytest.approx(EXP2_LN03_LIMIT, abs=1e-6)

    def test_high_start_is_nonincreasing(self, lognormal_cfg):
        trace = iterate(lognormal_cfg, 0.9)
        assert trace.direction == "nonincreasing"
        assert trace.is_monotone()
        assert trace.last[0] == pytest.approx(EXP2_LN03_LIMIT, abs=1e-8)

    def test_start_at_fixed_point(self, lognormal_cfg):
        b2_star = iterate(lognormal_cfg, 0.1).last[1]
        trace = iterate(lognormal_cfg, b2_star)
        assert trace.iterations <= 2
        assert trace.direction == "constant"
        assert trace.stop_reason == "converged"

    def test_update_order(self, lognormal_cfg):
        trace = iterate(lognormal_cfg, 0.2, max_iter=3)
        b2_prev = 0.2
        for _, b1, b2 in trace.steps:
            assert b1 == best_response(lognormal_cfg, 1, b2_prev).bid
            assert b2 == best_response(lognormal_cfg, 2, b1).bid
            b2_prev = b2

    def test_bids_stay_in_range(self, std_cfg):
        for start in (0.0, std_cfg.v):
            trace = iterate(std_cfg, start)
            for _, b1, b2 in trace.steps:
                assert 0 <= b1 <= std_cfg.v and 0 <= b2 <= std_cfg.v

    @pytest.mark.parametrize("kwargs", [{"b2_0": -0.1}, {"b2_0": 1.5}, {"b2_0": 0.5, "tol": 0}, {"b2_0": 0.5, "max_iter": 0}])
    def test_rejects_bad_arguments(self, lognormal_cfg, kwargs):
        with pytest.raises(InvalidParameter):
            iterate(lognormal_cfg, **kwargs)

    def test_csv_export(self, lognormal_cfg):
        text = iterate(lognormal_cfg, 0.1).to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "k,b1,b2"
        b1 = [float(line.split(",")[1]) for line in lines[1:]]
        assert np.all(np.diff(b1) >= -1e-10)


class TestMonotoneTrajectories:
    def test_all_standard_configs(self, std_cfg):
        for start in (0.0, 0.3 * std_cfg.v, 0.7 * std_cfg.v, std_cfg.v):
            trace = iterate(std_cfg, start)
            assert trace.stop_reason == "converged"
            assert trace.is_monotone()
            # direction follows the sign of the first move of bidder 2
            delta = trace.steps[0][2] - start
            if abs(delta) > 1e-9:
                assert trace.direction == ("nondecreasing" if delta > 0 else "nonincreasing")

    def test_limit_is_stable(self, std_cfg):
        tol = 1e-9
        b1, b2 = iterate(std_cfg, 0.0, tol=tol).last
        n1 = best_response(std_cfg, 1, b2).bid
        n2 = best_response(std_cfg, 2, n1).bid
        assert abs(n1 - b1) < 10 * tol and abs(n2 - b2) < 10 * tol


class TestEquilibrium:
    def test_foc_residuals(self, lognormal_cfg):
        report = equilibrium(lognormal_cfg, 0.1)
        assert report.converged
        assert max(abs(r) for r in report.foc_residuals) < 1e-6

    def test_truncated_run_makes_no_claim(self, lognormal_cfg):
        report = equilibrium(lognormal_cfg, 0.1, max_iter=1)
        assert report.trace.stop_reason == "max_iter"
        assert not report.converged
        assert all(math.isnan(r) for r in report.foc_residuals)

    def test_counterexample_start_is_already_equilibrium(self):
        report = equilibrium(counterexample_config(), 0.6)
        assert report.converged
        assert report.iterations <= 2
        assert (report.b1_star, report.b2_star) == pytest.approx((0.6, 0.6), abs=1e-12)

    def test_inconsistent_solver_is_caught(self, lognormal_cfg, monkeypatch):
        mod = importlib.import_module("sidebyside.dynamics")
        calls = {"n": 0}

        def flaky(cfg, bidder, b_opp, bracket=None):
            calls["n"] += 1
            bid = 0.5 if calls["n"] <= 2 else 0.7
            return BestResponseResult(bid, 0.0, "golden_section", 0.0)

        monkeypatch.setattr(mod, "best_response", flaky)
        with pytest.raises(NotAnEquilibrium):
            mod.equilibrium(lognormal_cfg, 0.5)

    def test_asymmetric_noise(self):
        cfg = STANDARD["exp2-ln0.1-ln0.5"]
        report = equilibrium(cfg, 0.0)
        assert report.b1_star != pytest.approx(report.b2_star, abs=1e-3)
        assert max(abs(r) for r in report.foc_residuals) < 1e-6


class TestUniquenessProbe:
    def test_standard_start_independence(self, std_cfg):
        v = std_cfg.v
        report = uniqueness_probe(std_cfg, [0, v / 4, v / 2, 3 * v / 4, v])
        assert report.max_spread < 1e-7
        assert report.passed

    def test_counterexample_detects_multiple_equilibria(self):
        report = uniqueness_probe(counterexample_config(), [0.65, 0.55])
        assert report.starts == [0.55, 0.65]
        assert report.limits[0] == pytest.approx((0.55, 0.55), abs=1e-9)
        assert report.limits[1] == pytest.approx((0.65, 0.65), abs=1e-9)
        assert report.max_spread == pytest.approx(0.1, abs=1e-9)
        assert not report.passed

    def test_single_start_rejected(self, lognormal_cfg):
        with pytest.raises(InvalidParameter):
            uniqueness_probe(lognormal_cfg, [0.5])

    def test_concurrent_matches_serial(self, lognormal_cfg):
        starts = [1.0, 0.0, 0.5]
        serial = uniqueness_probe(lognormal_cfg, starts)
        threaded = uniqueness_probe(lognormal_cfg, starts, workers=3)
        assert serial.to_dict() == threaded.to_dict()


class TestExtremal:
    def test_standard_pairs_coincide(self, std_cfg):
        report = extremal_equilibria(std_cfg)
        assert report.spread < 1e-7
        assert report.lower_trace.direction == "nondecreasing"
        assert report.upper_trace.direction == "nonincreasing"

    def test_counterexample_brackets_interval(self):
        report = extremal_equilibria(counterexample_config())
        assert report.lower_pair == pytest.approx((0.5, 0.5), abs=1e-3)
        assert report.upper_pair == pytest.approx((2 / 3, 2 / 3), abs=1e-3)

    @pytest.mark.parametrize("name", sorted(STANDARD))
    def test_lower_below_upper(self, name):
        report = extremal_equilibria(STANDARD[name])
        for lo, hi in zip(report.lower_pair, report.upper_pair):
            assert lo <= hi + 1e-7

    @pytest.mark.parametrize(
        "cfg",
        [
            MarketConfig(1.0, Exponential(2), LogNormal(0.3), LogNormal(0.3)),
            MarketConfig(1.0, PowerOnInterval(2, 1), LogNormal(0.5), LogNormal(0.1)),
        ],
    )
    def test_scale_invariance(self, cfg):
        base = extremal_equilibria(cfg)
        big = extremal_equilibria(cfg.rescaled(10.0))
        for small, large in ((base.lower_pair, big.lower_pair), (base.upper_pair, big.upper_pair)):
            for s, l in zip(small, large):
                assert l == pytest.approx(10 * s, rel=1e-6)
