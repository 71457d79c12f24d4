"""Best responses ``BR_i(b_opp) = argmax_b pi_i(b, b_opp)``.

The main solver runs golden-section search on ``log pi`` (unimodal under
log-concavity) and then polishes an interior maximiser by bisection on the
first-order residual.  :func:`grid_oracle` is an independent brute-force
check that only ever compares raw payoff values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateSupport, DivisionByZeroCdf, InvalidParameter
from .payoff import MarketConfig, foc_residual, log_payoff, payoff
from .solvers import bisect, golden_section_max

GOLDEN_TOL = 1e-10
LOWER_NUDGE = 1e-12
MONOTONE_SLACK = 1e-7

GOLDEN = "golden_section"
FOC_BISECTION = "foc_bisection"
GRID_ORACLE = "grid_oracle"


@dataclass(frozen=True)
class BestResponseResult:
    bid: float
    foc_residual: float
    method: str
    payoff_at_bid: float

    def to_dict(self) -> dict:
        return {
            "bid": self.bid,
            "foc_residual": self.foc_residual,
            "method": self.method,
            "payoff_at_bid": self.payoff_at_bid,
        }


def lower_support(cfg: MarketConfig, bidder: int, b_opp: float) -> float:
    """``inf{b : Q(b) > 0 and F_opp(b) > 0}`` clipped to ``[0, v]``."""
    opp = cfg.opponent(bidder, b_opp)
    lo = max(cfg.Q.lower, 0.0 if opp.absent else b_opp * opp.noise.lower)
    return min(lo, cfg.v)


def _safe_foc(cfg, bidder, b, b_opp) -> float:
    if b <= 0:
        return -math.inf
    if b >= cfg.v:
        return math.inf
    try:
        return foc_residual(cfg, bidder, b, b_opp)
    except DivisionByZeroCdf:
        return -math.inf


def _maximize(
    log_objective: Callable[[float], float],
    residual: Callable[[float], float],
    lo: float,
    hi: float,
    scale: float,
):
    """Golden section on ``log_objective`` over ``[lo, hi]``, then FOC bisection.

    ``residual`` must be increasing with its root at the interior maximiser.
    Returns ``(bid, method)``.
    """
    (a, c), best, best_val = golden_section_max(log_objective, lo, hi, GOLDEN_TOL * scale)
    if best_val == -math.inf:
        raise DegenerateSupport("payoff is identically zero on the search interval")
    x = 0.5 * (a + c)
    edge = 1e-9 * scale
    if x - lo <= edge or hi - x <= edge:
        return x, GOLDEN
    # golden section only resolves ~sqrt(eps); widen until the residual changes sign
    step = 1e-6 * scale
    left, right = max(lo, x - step), min(hi, x + step)
    while residual(left) >= 0 and left > lo:
        left = max(lo, left - 4 * step)
        step *= 4
    step = 1e-6 * scale
    while residual(right) < 0 and right < hi:
        right = min(hi, right + 4 * step)
        step *= 4
    if not (residual(left) < 0 <= residual(right)):
        return x, GOLDEN
    return bisect(residual, left, right), FOC_BISECTION


def _search_interval(cfg, bidder, b_opp, bracket):
    lo = lower_support(cfg, bidder, b_opp) + LOWER_NUDGE * cfg.v
    hi = cfg.v
    if bracket is not None:
        # a caller-supplied bracket must cover the admissible interval
        lo, hi = min(bracket[0], lo), max(bracket[1], hi)
    return lo, hi


def best_response(
    cfg: MarketConfig,
    bidder: int,
    b_opp: float,
    bracket: tuple[float, float] | None = None,
) -> BestResponseResult:
    """Unique maximiser of the payoff over ``[b_lo, v]``.

    ``b_opp == 0`` means the opponent is absent.  ``bracket`` overrides the
    golden-section starting interval; points outside ``[0, v]`` score ``-inf``.
    """
    b_opp = float(b_opp)
    if not math.isfinite(b_opp) or b_opp < 0:
        raise InvalidParameter(f"b_opp must be finite and >= 0, got {b_opp!r}")
    lo, hi = _search_interval(cfg, bidder, b_opp, bracket)

    def objective(b):
        if b < 0 or b > cfg.v:
            return -math.inf
        return log_payoff(cfg, bidder, b, b_opp)

    bid, method = _maximize(objective, lambda b: _safe_foc(cfg, bidder, b, b_opp), lo, hi, cfg.v)
    bid = min(max(bid, 0.0), cfg.v)
    return _result(cfg, bidder, bid, b_opp, method)


def _result(cfg, bidder, bid, b_opp, method) -> BestResponseResult:
    if 0 < bid < cfg.v:
        res = _safe_foc(cfg, bidder, bid, b_opp)
    else:
        res = math.nan
    return BestResponseResult(bid, res, method, payoff(cfg, bidder, bid, b_opp))


def grid_oracle(
    cfg: MarketConfig,
    bidder: int,
    b_opp: float,
    n_coarse: int = 1000,
    n_refine: int = 2,
) -> BestResponseResult:
    """Brute-force argmax of the payoff on uniform grids.

    The coarse grid spans ``[0, v]``; each refinement re-grids a window
    100x narrower centred on the incumbent.  Ties go to the smallest bid.
    """
    if n_coarse < 2:
        raise InvalidParameter("n_coarse must be at least 2")
    lo, hi = 0.0, cfg.v
    width = cfg.v
    best = 0.0
    for _ in range(n_refine + 1):
        grid = np.linspace(lo, hi, n_coarse)
        values = payoff(cfg, bidder, grid, b_opp)
        best = float(grid[int(np.argmax(values))])
        width /= 100.0
        lo, hi = max(0.0, best - width / 2), min(cfg.v, best + width / 2)
    return _result(cfg, bidder, best, b_opp, GRID_ORACLE)


def scaled_argmax(cfg: MarketConfig, bidder: int, b_opp: float, alpha: float) -> float:
    """``argmax_b (v - alpha b) Q(alpha b) N_opp(b / b_opp)``.

    This is the payoff after the substitution ``b -> alpha b`` applied to
    both the own bid and the opponent level; the search runs over
    ``b in [0, v / alpha]``.
    """
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0:
        raise InvalidParameter(f"alpha must be positive, got {alpha!r}")
    b_opp = float(b_opp)
    v = cfg.v
    opp = cfg.opponent(bidder, b_opp)
    hi = v / alpha
    lo = min(max(cfg.Q.lower / alpha, 0.0 if opp.absent else b_opp * opp.noise.lower), hi) + LOWER_NUDGE * hi

    def objective(b):
        if b < 0 or b > hi:
            return -math.inf
        x = np.asarray(b)
        with np.errstate(divide="ignore"):
            margin = math.log(v - alpha * b) if alpha * b < v else -math.inf
        return float(margin + cfg.Q._logcdf(alpha * x) + opp._logcdf(x))

    def residual(b):
        # d/db of minus the log objective, increasing in b
        x = np.asarray(b)
        q, f = cfg.Q._cdf(alpha * x), opp._cdf(x)
        if q <= 0 or f <= 0:
            return -math.inf
        return float(alpha / (v - alpha * b) - alpha * cfg.Q._score(alpha * x) - opp._score(x))

    bid, _ = _maximize(objective, residual, lo, hi, hi)
    return bid


@dataclass(frozen=True)
class MonotoneReport:
    grid: list[float]
    responses: list[float]
    violations: list[tuple[float, float, float]]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_monotone_br(cfg: MarketConfig, bidder: int, b_opp_grid: Sequence[float]) -> MonotoneReport:
    """Best responses along an increasing opponent grid.

    Each violation is ``(b_opp_left, b_opp_right, drop)`` for an adjacent pair
    whose best response falls by more than ``MONOTONE_SLACK``.
    """
    grid = [float(x) for x in b_opp_grid]
    responses = [best_response(cfg, bidder, x).bid for x in grid]
    violations = []
    for j in range(len(grid) - 1):
        drop = responses[j] - responses[j + 1]
        if drop > MONOTONE_SLACK:
            violations.append((grid[j], grid[j + 1], drop))
    return MonotoneReport(grid, responses, violations)
