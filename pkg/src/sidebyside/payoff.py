"""Expected payoff of one side-by-side bidder and its first-order machinery.

Bidder ``i`` bidding ``b`` against an opponent whose intended bid is
``b_opp`` earns in expectation::

    pi_i(b) = (v - b) * Q(b) * N_opp(b / b_opp)

where ``Q`` is the CDF of the highest exogenous bid and ``N_opp`` the CDF
of the opponent's multiplicative noise.  ``b_opp == 0`` is read as the
opponent-absent limit (``N_opp(b / b_opp) -> 1`` for ``b > 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import CappedLinear, Cdf, OpponentBidCdf, verify_log_concavity
from .errors import (
    DivisionByZeroCdf,
    InvalidParameter,
    LogConcavityViolated,
    NonpositiveGammaPrime,
    NotSmooth,
    OutOfRangeBid,
    QDerivativeNotPositive,
)

STANDARD = "standard"
COUNTEREXAMPLE = "counterexample"
MODES = (STANDARD, COUNTEREXAMPLE)

Q_CHECK_POINTS = 256


@dataclass(frozen=True)
class MarketConfig:
    """One side-by-side instance ``(v, Q, N1, N2)``.

    In ``"standard"`` mode construction checks the modelling assumptions:
    every family smooth (no ``CappedLinear``), ``Q' > 0`` on a 256-point grid
    over ``(0, v]`` and log-concavity of ``Q``, ``N1``, ``N2`` on
    ``[v/1000, v]``.  ``"counterexample"`` mode skips all checks.
    """

    v: float
    Q: Cdf
    N1: Cdf
    N2: Cdf
    mode: str = STANDARD
    checks: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        v = float(self.v)
        if not math.isfinite(v) or v <= 0:
            raise InvalidParameter(f"v must be a finite positive number, got {self.v!r}")
        object.__setattr__(self, "v", v)
        if self.mode not in MODES:
            raise InvalidParameter(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == STANDARD:
            self._check_assumptions()

    def _check_assumptions(self):
        for name, dist in (("Q", self.Q), ("N1", self.N1), ("N2", self.N2)):
            if isinstance(dist, CappedLinear):
                raise NotSmooth(f"{name}: capped_linear is kinked; use mode 'counterexample'")
        # t = 0 is left out: power families with k > 1 have Q'(0) = 0
        grid = np.linspace(self.v / Q_CHECK_POINTS, self.v, Q_CHECK_POINTS)
        slopes = self.Q._pdf(grid)
        if not np.all(slopes > 0):
            bad = float(grid[~(slopes > 0)][0])
            raise QDerivativeNotPositive(f"Q' vanishes at t={bad:.6g} inside [0, v]")
        for name, dist in (("Q", self.Q), ("N1", self.N1), ("N2", self.N2)):
            report = verify_log_concavity(dist, self.v * 1e-3, self.v, Q_CHECK_POINTS)
            if not report.passed:
                raise LogConcavityViolated(
                    f"{name}: log cdf second difference {report.max_second_difference:.3g} > slack"
                )
            self.checks[name] = report

    def noise(self, bidder: int) -> Cdf:
        return {1: self.N1, 2: self.N2}[_check_bidder(bidder)]

    def opponent_noise(self, bidder: int) -> Cdf:
        return {1: self.N2, 2: self.N1}[_check_bidder(bidder)]

    def opponent(self, bidder: int, b_opp: float) -> OpponentBidCdf:
        """CDF of the opponent's submitted bid when it intends ``b_opp``."""
        return OpponentBidCdf(self.opponent_noise(bidder), b_opp)

    def rescaled(self, factor: float) -> "MarketConfig":
        """Same market with every money amount multiplied by ``factor``."""
        return MarketConfig(self.v * factor, _rescale(self.Q, factor), self.N1, self.N2, self.mode)

    def to_dict(self) -> dict:
        return {
            "v": self.v,
            "Q": self.Q.to_dict(),
            "N1": self.N1.to_dict(),
            "N2": self.N2.to_dict(),
            "mode": self.mode,
        }


def _rescale(dist: Cdf, factor: float) -> Cdf:
    from .distributions import Exponential, PowerOnInterval

    if isinstance(dist, PowerOnInterval):
        return PowerOnInterval(dist.k, dist.c * factor)
    if isinstance(dist, Exponential):
        return Exponential(dist.rate / factor)
    raise InvalidParameter(f"no rescaling rule for family {dist.family!r}")


def _check_bidder(bidder: int) -> int:
    if bidder not in (1, 2):
        raise InvalidParameter(f"bidder must be 1 or 2, got {bidder!r}")
    return bidder


def _check_bid(cfg: MarketConfig, b) -> np.ndarray:
    arr = np.asarray(b, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > cfg.v):
        raise OutOfRangeBid(f"bid must lie in [0, v={cfg.v}], got {b!r}")
    return arr


def _check_opp(b_opp) -> float:
    b_opp = float(b_opp)
    if not math.isfinite(b_opp) or b_opp < 0:
        raise InvalidParameter(f"b_opp must be finite and >= 0, got {b_opp!r}")
    return b_opp


def _shape(b, values):
    return float(values) if np.ndim(b) == 0 else values


def payoff(cfg: MarketConfig, bidder: int, b, b_opp: float):
    """Expected payoff ``(v - b) * Q(b) * F_opp(b)``; vectorised over ``b``."""
    arr = _check_bid(cfg, b)
    opp = cfg.opponent(bidder, _check_opp(b_opp))
    return _shape(b, (cfg.v - arr) * cfg.Q._cdf(arr) * opp._cdf(arr))


def log_payoff(cfg: MarketConfig, bidder: int, b, b_opp: float):
    """Logarithm of :func:`payoff`, ``-inf`` where the payoff is zero.

    Summed in log space so deep tails of the noise do not underflow.
    """
    arr = _check_bid(cfg, b)
    opp = cfg.opponent(bidder, _check_opp(b_opp))
    with np.errstate(divide="ignore"):
        margin = np.log(cfg.v - arr)
    total = margin + cfg.Q._logcdf(arr) + opp._logcdf(arr)
    total = np.where(np.isnan(total), -np.inf, total)
    return _shape(b, total)


def _interior(cfg: MarketConfig, bidder: int, b: float, b_opp: float):
    b = float(b)
    if not (0 < b < cfg.v):
        raise OutOfRangeBid(f"bid must lie strictly inside (0, v={cfg.v}), got {b!r}")
    opp = cfg.opponent(bidder, _check_opp(b_opp))
    # log space: a cdf that merely underflows is still positive
    if cfg.Q._logcdf(np.asarray(b)) == -np.inf:
        raise DivisionByZeroCdf(f"Q({b}) = 0")
    if opp._logcdf(np.asarray(b)) == -np.inf:
        raise DivisionByZeroCdf(f"F_opp({b}) = 0")
    return b, opp


def foc_residual(cfg: MarketConfig, bidder: int, b: float, b_opp: float) -> float:
    """``1/(v-b) - Q'/Q - F'/F`` at ``b``; zero at an interior best response.

    Strictly increasing in ``b`` when ``Q`` and the noise are log-concave.
    Note the sign: negative means the payoff is still rising.
    """
    b, opp = _interior(cfg, bidder, b, b_opp)
    x = np.asarray(b)
    return float(1.0 / (cfg.v - b) - cfg.Q._score(x) - opp._score(x))


def phi_map(cfg: MarketConfig, bidder: int, b: float, b_opp: float) -> float:
    """``v - gamma/gamma'`` with ``gamma = Q * F_opp``.

    ``gamma'/gamma`` is assembled from the analytic scores of the two
    factors (product rule), never by differencing.
    """
    b, opp = _interior(cfg, bidder, b, b_opp)
    x = np.asarray(b)
    log_slope = float(cfg.Q._score(x) + opp._score(x))
    if not log_slope > 0:
        raise NonpositiveGammaPrime(f"gamma'({b}) <= 0")
    return cfg.v - 1.0 / log_slope


def phi_fixed_point(cfg: MarketConfig, bidder: int, b_opp: float, xtol: float = 1e-14) -> float:
    """Root of ``b - phi(b)`` on ``(0, v)`` by bisection.

    ``b - phi(b)`` is increasing (``phi`` is nonincreasing), so the root is
    unique when it exists.
    """
    from .solvers import bisect

    def gap(b):
        try:
            return b - phi_map(cfg, bidder, b, b_opp)
        except (DivisionByZeroCdf, NonpositiveGammaPrime):
            return -math.inf

    lo, hi = cfg.v * 1e-12, cfg.v * (1 - 1e-12)
    return bisect(gap, lo, hi, xtol=xtol * cfg.v)
