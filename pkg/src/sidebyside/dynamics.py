"""Sequential best-response iterations and equilibrium probes.

Bidder 1 moves first against bidder 2's previous bid, then bidder 2
answers bidder 1's new bid::

    b1[k] = BR_1(b2[k-1]),   b2[k] = BR_2(b1[k]),   k = 1, 2, ...

Under log-concavity both coordinate sequences are monotone and bounded by
``v``, so they converge; starting from ``b2[0] = 0`` and ``b2[0] = v``
yields the least and greatest equilibria reachable this way.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .best_response import best_response
from .errors import InvalidParameter, NotAnEquilibrium
from .payoff import MarketConfig

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10000
MONOTONE_SLACK = 1e-10

NONDECREASING = "nondecreasing"
NONINCREASING = "nonincreasing"
CONSTANT = "constant"
CONVERGED = "converged"
MAX_ITER = "max_iter"


@dataclass
class IterationTrace:
    start: float
    steps: list[tuple[int, float, float]] = field(default_factory=list)
    direction: str = CONSTANT
    stop_reason: str = MAX_ITER

    @property
    def iterations(self) -> int:
        return len(self.steps)

    @property
    def last(self) -> tuple[float, float]:
        _, b1, b2 = self.steps[-1]
        return b1, b2

    def b1(self) -> list[float]:
        return [s[1] for s in self.steps]

    def b2(self) -> list[float]:
        # the start is part of bidder 2's sequence
        return [self.start] + [s[2] for s in self.steps]

    def is_monotone(self, slack: float = MONOTONE_SLACK) -> bool:
        sign = {NONDECREASING: 1.0, NONINCREASING: -1.0, CONSTANT: 0.0}[self.direction]
        for seq in (self.b1(), self.b2()):
            for prev, cur in zip(seq, seq[1:]):
                step = cur - prev
                if sign == 0.0 and abs(step) > slack:
                    return False
                if sign * step < -slack:
                    return False
        return True

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", "b1", "b2"])
        for k, b1, b2 in self.steps:
            writer.writerow([k, repr(b1), repr(b2)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "direction": self.direction,
            "stop_reason": self.stop_reason,
            "iterations": self.iterations,
            "steps": [list(s) for s in self.steps],
        }


def iterate(
    cfg: MarketConfig,
    b2_0: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> IterationTrace:
    """Run alternating best responses from ``b2[0] = b2_0``.

    Stops once both ``|b1[k] - b1[k-1]|`` and ``|b2[k] - b2[k-1]|`` fall below
    ``tol``.  At ``k = 1`` only bidder 2's move is available; if it is
    below ``tol`` the next round would repeat the first, so the run stops.
    Hitting ``max_iter`` is a normal outcome recorded in ``stop_reason``.
    """
    b2_0 = float(b2_0)
    if not (0 <= b2_0 <= cfg.v):
        raise InvalidParameter(f"b2_0 must lie in [0, v={cfg.v}], got {b2_0!r}")
    if not tol > 0:
        raise InvalidParameter("tol must be positive")
    if max_iter < 1:
        raise InvalidParameter("max_iter must be at least 1")

    trace = IterationTrace(start=b2_0)
    b1_prev, b2_prev = math.nan, b2_0
    for k in range(1, max_iter + 1):
        b1 = best_response(cfg, 1, b2_prev).bid
        b2 = best_response(cfg, 2, b1).bid
        trace.steps.append((k, b1, b2))
        if k == 1:
            delta = b2 - b2_0
            if abs(delta) <= tol:
                trace.direction = CONSTANT
            else:
                trace.direction = NONDECREASING if delta > 0 else NONINCREASING
        moved_b1 = k > 1 and abs(b1 - b1_prev) >= tol
        if abs(b2 - b2_prev) < tol and not moved_b1:
            trace.stop_reason = CONVERGED
            break
        b1_prev, b2_prev = b1, b2
    logger.debug("iterate from %g: %s after %d steps", b2_0, trace.stop_reason, trace.iterations)
    return trace


@dataclass
class EquilibriumReport:
    b1_star: float
    b2_star: float
    foc_residuals: tuple[float, float]
    iterations: int
    trace: IterationTrace
    converged: bool = True

    def to_dict(self, include_trace: bool = False) -> dict:
        out = {
            "b1_star": self.b1_star,
            "b2_star": self.b2_star,
            "foc_residuals": list(self.foc_residuals),
            "iterations": self.iterations,
            "converged": self.converged,
            "direction": self.trace.direction,
            "stop_reason": self.trace.stop_reason,
            "start": self.trace.start,
        }
        if include_trace:
            out["trace"] = self.trace.to_dict()
        return out


def equilibrium(
    cfg: MarketConfig,
    b2_0: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> EquilibriumReport:
    """Iterate to convergence and confirm the limit is a mutual best response.

    When the run stops on ``max_iter`` the report carries ``converged=False``
    and no equilibrium check is made.
    """
    trace = iterate(cfg, b2_0, tol, max_iter)
    b1, b2 = trace.last
    if trace.stop_reason != CONVERGED:
        return EquilibriumReport(b1, b2, (math.nan, math.nan), trace.iterations, trace, converged=False)
    r1 = best_response(cfg, 1, b2)
    r2 = best_response(cfg, 2, b1)
    gap = max(abs(r1.bid - b1), abs(r2.bid - b2))
    if gap >= 10 * tol:
        raise NotAnEquilibrium(f"limit ({b1}, {b2}) is off its best responses by {gap:.3g}")
    return EquilibriumReport(b1, b2, (r1.foc_residual, r2.foc_residual), trace.iterations, trace)


@dataclass
class UniquenessReport:
    starts: list[float]
    limits: list[tuple[float, float]]
    max_spread: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_spread < self.threshold

    def to_dict(self) -> dict:
        return {
            "starts": self.starts,
            "limits": [list(p) for p in self.limits],
            "max_spread": self.max_spread,
            "threshold": self.threshold,
            "pass": self.passed,
        }


def _spread(pairs: Sequence[tuple[float, float]]) -> float:
    worst = 0.0
    for i, (a1, a2) in enumerate(pairs):
        for b1, b2 in pairs[i + 1 :]:
            worst = max(worst, abs(a1 - b1), abs(a2 - b2))
    return worst


def uniqueness_probe(
    cfg: MarketConfig,
    starts: Sequence[float],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    workers: int = 1,
) -> UniquenessReport:
    """Run :func:`equilibrium` from several starts and measure the spread.

    Passes when the largest pairwise sup-norm distance between limits is
    below ``100 * tol``.  Results are ordered by start value whatever
    ``workers`` is.
    """
    starts = sorted(float(s) for s in starts)
    if len(starts) < 2:
        raise InvalidParameter("uniqueness_probe needs at least two starts")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda s: equilibrium(cfg, s, tol, max_iter), starts))
    else:
        reports = [equilibrium(cfg, s, tol, max_iter) for s in starts]
    limits = [(r.b1_star, r.b2_star) for r in reports]
    return UniquenessReport(starts, limits, _spread(limits), 100 * tol)


@dataclass
class ExtremalReport:
    lower_pair: tuple[float, float]
    upper_pair: tuple[float, float]
    lower_trace: IterationTrace
    upper_trace: IterationTrace

    @property
    def spread(self) -> float:
        return _spread([self.lower_pair, self.upper_pair])

    def to_dict(self) -> dict:
        return {
            "lower_pair": list(self.lower_pair),
            "upper_pair": list(self.upper_pair),
            "spread": self.spread,
            "lower_iterations": self.lower_trace.iterations,
            "upper_iterations": self.upper_trace.iterations,
        }


def extremal_equilibria(
    cfg: MarketConfig,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ExtremalReport:
    """Least and greatest equilibria, from the starts ``0`` and ``v``."""
    low = iterate(cfg, 0.0, tol, max_iter)
    high = iterate(cfg, cfg.v, tol, max_iter)
    return ExtremalReport(low.last, high.last, low, high)
