"""Closed-form non-uniqueness example with ``N1 = N2 = Q = min(x, 1)``.

With ``v = 1`` the payoff of a bidder is::

    (v - b) * min(b, 1) * min(b / b_opp, 1)

which is ``(v - b) b**2 / b_opp`` below the opponent level and
``(v - b) b`` above it.  Any ``b_opp`` in ``(v/2, 2v/3)`` is its own best
response, so every such symmetric pair is an equilibrium.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import CappedLinear
from .errors import InvalidParameter
from .payoff import COUNTEREXAMPLE, MarketConfig

DEFAULT_RESOLUTION = 1e-4


def counterexample_config(v: float = 1.0) -> MarketConfig:
    return MarketConfig(v, CappedLinear(), CappedLinear(), CappedLinear(), mode=COUNTEREXAMPLE)


def piecewise_payoff(v: float, b_i, b_opp: float):
    """Payoff written branch by branch; vectorised over ``b_i``."""
    if not b_opp > 0:
        raise InvalidParameter(f"b_opp must be positive, got {b_opp!r}")
    b = np.asarray(b_i, dtype=float)
    below = (v - b) * np.minimum(b, 1.0) * b / b_opp  # b <= b_opp
    above = (v - b) * np.minimum(b, 1.0)  # b >= b_opp
    out = np.where(b <= b_opp, below, above)
    return float(out) if np.ndim(b_i) == 0 else out


def piecewise_br(v: float, b_opp: float) -> float:
    """Best response from the sign of each branch's derivative.

    Below ``b_opp`` the derivative is ``(b/b_opp)(2v - 3b)``, above it
    ``v - 2b``.  Hence the answer is ``v/2`` for ``b_opp <= v/2``, ``2v/3``
    for ``b_opp >= 2v/3`` and ``b_opp`` itself in between.  For ``v != 1``
    this is the rescaled instance ``Q(x) = min(x/v, 1)``.
    """
    if not v > 0:
        raise InvalidParameter(f"v must be positive, got {v!r}")
    if not 0 < b_opp <= v:
        raise InvalidParameter(f"b_opp must lie in (0, v], got {b_opp!r}")
    if b_opp <= v / 2:
        return v / 2
    if b_opp >= 2 * v / 3:
        return 2 * v / 3
    return b_opp


@dataclass(frozen=True)
class IntervalReport:
    lo: float
    hi: float
    n_fixed_points: int
    resolution: float

    @property
    def low_resolution(self) -> bool:
        return self.n_fixed_points < 2

    def to_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "n_fixed_points": self.n_fixed_points,
            "resolution": self.resolution,
            "low_resolution": self.low_resolution,
        }


def equilibrium_interval(v: float = 1.0, resolution: float = DEFAULT_RESOLUTION) -> IntervalReport:
    """Scan ``(0, v]`` for fixed points of :func:`piecewise_br`.

    ``resolution`` is the absolute grid spacing.

    Returns the smallest and largest detected fixed point (``nan`` when
    none is found).  Endpoints are whatever the grid hits, so they are
    closures of the open interval rather than a claim about ``v/2``
    and ``2v/3`` themselves.
    """
    if not (v > 0 and resolution > 0):
        raise InvalidParameter("v and resolution must be positive")
    n = max(1, int(math.ceil(v / resolution - 1e-9)))
    grid = v * np.arange(1, n + 1) / n
    fixed = [b for b in grid if piecewise_br(v, float(b)) == b]
    if not fixed:
        return IntervalReport(float("nan"), float("nan"), 0, resolution)
    return IntervalReport(float(fixed[0]), float(fixed[-1]), len(fixed), resolution)


def br_curve(v: float = 1.0, n: int = 201) -> list[tuple[float, float]]:
    """``(b_opp, BR(b_opp))`` samples on ``(0, v]`` for plotting against the identity."""
    grid = v * np.arange(1, n + 1) / n
    return [(float(b), piecewise_br(v, float(b))) for b in grid]
