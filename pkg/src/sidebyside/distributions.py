"""One-dimensional distributions on the nonnegative reals.

These serve both as the CDF ``Q`` of the highest competing bid and as the
CDFs ``N_i`` of the multiplicative bid noise.  All methods accept scalars
or numpy arrays and return the same shape (a plain ``float`` for scalar
input).

Families
--------
PowerOnInterval(k, c)   F(x) = min(x/c, 1)**k
Exponential(rate)       F(x) = 1 - exp(-rate * x)
LogNormal(sigma)        log X ~ Normal(-sigma**2/2, sigma), so E[X] = 1
CappedLinear()          F(x) = min(x, 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import special

from .errors import DivisionByZeroCdf, InvalidParameter, ZeroCdfOnGrid

LOG_CONCAVITY_SLACK = 1e-8

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _out(x, values):
    if np.ndim(x) == 0:
        return float(values)
    return values


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise InvalidParameter(f"{name} must be a finite positive number, got {value!r}")
    return value


class Cdf:
    """Base class; subclasses implement the ``_``-prefixed array kernels."""

    family: str = ""
    lower: float = 0.0

    @property
    def upper(self) -> float:
        return math.inf

    # array kernels, no validation
    def _cdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _logcdf(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self._cdf(x))

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _score(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._pdf(x) / self._cdf(x)

    def _ppf(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def cdf(self, x):
        return _out(x, self._cdf(np.asarray(x, dtype=float)))

    def logcdf(self, x):
        return _out(x, self._logcdf(np.asarray(x, dtype=float)))

    def pdf(self, x):
        return _out(x, self._pdf(np.asarray(x, dtype=float)))

    def score(self, x):
        """pdf/cdf, the log-derivative of the CDF. Raises where cdf is 0."""
        arr = np.asarray(x, dtype=float)
        if np.any(self._cdf(arr) <= 0):
            raise DivisionByZeroCdf(f"{self.family} cdf vanishes at {x!r}")
        return _out(x, self._score(arr))

    def quantile(self, u):
        arr = np.asarray(u, dtype=float)
        if np.any(~((arr > 0) & (arr < 1))):
            raise InvalidParameter(f"quantile level must lie in (0, 1), got {u!r}")
        return _out(u, self._ppf(arr))

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerOnInterval(Cdf):
    k: float
    c: float = 1.0
    family = "power"

    def __post_init__(self):
        object.__setattr__(self, "k", _check_positive("k", self.k))
        object.__setattr__(self, "c", _check_positive("c", self.c))

    @property
    def upper(self) -> float:
        return self.c

    def _cdf(self, x):
        return np.minimum(x / self.c, 1.0) ** self.k

    def _logcdf(self, x):
        with np.errstate(divide="ignore"):
            return self.k * np.log(np.minimum(x / self.c, 1.0))

    def _pdf(self, x):
        # left derivative at the cap
        with np.errstate(divide="ignore", invalid="ignore"):
            inside = self.k * x ** (self.k - 1.0) / self.c**self.k
        return np.where(x <= self.c, inside, 0.0)

    def _score(self, x):
        with np.errstate(divide="ignore"):
            return np.where(x <= self.c, self.k / x, 0.0)

    def _ppf(self, u):
        return self.c * u ** (1.0 / self.k)

    def to_dict(self):
        return {"family": self.family, "k": self.k, "c": self.c}


@dataclass(frozen=True)
class Exponential(Cdf):
    rate: float
    family = "exponential"

    def __post_init__(self):
        object.__setattr__(self, "rate", _check_positive("rate", self.rate))

    def _cdf(self, x):
        return -np.expm1(-self.rate * x)

    def _logcdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(-np.expm1(-self.rate * x))

    def _pdf(self, x):
        return self.rate * np.exp(-self.rate * x)

    def _score(self, x):
        with np.errstate(divide="ignore"):
            return self.rate / np.expm1(self.rate * x)

    def _ppf(self, u):
        return -np.log1p(-u) / self.rate

    def to_dict(self):
        return {"family": self.family, "rate": self.rate}


@dataclass(frozen=True)
class LogNormal(Cdf):
    """Lognormal with unit mean: ``mu`` is pinned to ``-sigma**2 / 2``."""

    sigma: float
    family = "lognormal"

    def __post_init__(self):
        object.__setattr__(self, "sigma", _check_positive("sigma", self.sigma))

    @property
    def mu(self) -> float:
        return -0.5 * self.sigma**2

    def _z(self, x):
        with np.errstate(divide="ignore"):
            return (np.log(x) - self.mu) / self.sigma

    def _cdf(self, x):
        return special.ndtr(self._z(x))

    def _logcdf(self, x):
        return special.log_ndtr(self._z(x))

    def _logpdf(self, x):
        z = self._z(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -0.5 * z * z - np.log(x * self.sigma) - _LOG_SQRT_2PI

    def _pdf(self, x):
        with np.errstate(invalid="ignore"):
            return np.where(x > 0, np.exp(self._logpdf(x)), 0.0)

    def _score(self, x):
        # log-space ratio stays accurate deep in the lower tail
        with np.errstate(invalid="ignore"):
            return np.exp(self._logpdf(x) - self._logcdf(x))

    def _ppf(self, u):
        return np.exp(self.mu + self.sigma * special.ndtri(u))

    def to_dict(self):
        return {"family": self.family, "sigma": self.sigma}


@dataclass(frozen=True)
class CappedLinear(Cdf):
    """``min(x, 1)``; kinked at 1, so only admitted in counterexample mode."""

    family = "capped_linear"

    @property
    def upper(self) -> float:
        return 1.0

    def _cdf(self, x):
        return np.minimum(x, 1.0)

    def _pdf(self, x):
        return np.where(x <= 1.0, 1.0, 0.0)

    def _score(self, x):
        with np.errstate(divide="ignore"):
            return np.where(x <= 1.0, 1.0 / x, 0.0)

    def _ppf(self, u):
        return np.array(u, dtype=float)

    def to_dict(self):
        return {"family": self.family}


@dataclass(frozen=True)
class OpponentBidCdf(Cdf):
    """CDF of the opponent's submitted bid ``scale * eps``.

    ``scale == 0`` is the opponent-absent limit: a point mass at zero, so
    the CDF is 1 for every positive bid.
    """

    noise: Cdf
    scale: float

    def __post_init__(self):
        scale = float(self.scale)
        if not math.isfinite(scale) or scale < 0:
            raise InvalidParameter(f"opponent scale must be >= 0, got {scale!r}")
        object.__setattr__(self, "scale", scale)

    @property
    def family(self) -> str:
        return "opponent_bid"

    @property
    def absent(self) -> bool:
        return self.scale == 0.0

    @property
    def upper(self) -> float:
        return 0.0 if self.absent else self.scale * self.noise.upper

    def _ratio(self, x):
        # a subnormal scale overflows to inf, which the noise cdf maps to 1
        with np.errstate(over="ignore"):
            return x / self.scale

    def _cdf(self, x):
        if self.absent:
            return np.where(x > 0, 1.0, 0.0)
        return self.noise._cdf(self._ratio(x))

    def _logcdf(self, x):
        if self.absent:
            return np.where(x > 0, 0.0, -np.inf)
        return self.noise._logcdf(self._ratio(x))

    def _pdf(self, x):
        if self.absent:
            return np.zeros_like(x)
        return self.noise._pdf(x / self.scale) / self.scale

    def _score(self, x):
        if self.absent:
            return np.zeros_like(x)
        return self.noise._score(x / self.scale) / self.scale

    def _ppf(self, u):
        if self.absent:
            return np.zeros_like(u)
        return self.scale * self.noise._ppf(u)

    def to_dict(self):
        return {"family": self.family, "noise": self.noise.to_dict(), "scale": self.scale}


FAMILIES = {
    "power": PowerOnInterval,
    "exponential": Exponential,
    "lognormal": LogNormal,
    "capped_linear": CappedLinear,
}


def _validate_x(x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise InvalidParameter(f"x must be finite, got {x!r}")
    if x < 0:
        raise InvalidParameter(f"x must be nonnegative, got {x!r}")
    return x


def cdf_eval(dist: Cdf, x: float) -> float:
    return dist.cdf(_validate_x(x))


def pdf_eval(dist: Cdf, x: float) -> float:
    return dist.pdf(_validate_x(x))


def score(dist: Cdf, x: float) -> float:
    """Return ``pdf(x) / cdf(x)``; nonincreasing in x for log-concave CDFs."""
    return dist.score(_validate_x(x))


def quantile(dist: Cdf, u: float) -> float:
    return dist.quantile(u)


@dataclass(frozen=True)
class LogConcavityReport:
    max_second_difference: float
    passed: bool
    grid_lo: float
    grid_hi: float
    n_points: int


def verify_log_concavity(dist: Cdf, grid_lo: float, grid_hi: float, n_points: int) -> LogConcavityReport:
    """Check concavity of ``log cdf`` through second differences on a uniform grid.

    Passes when the largest second difference is at most ``LOG_CONCAVITY_SLACK``.
    """
    if not (0 < grid_lo < grid_hi):
        raise InvalidParameter(f"need 0 < grid_lo < grid_hi, got ({grid_lo}, {grid_hi})")
    if n_points < 3:
        raise InvalidParameter("n_points must be at least 3")
    grid = np.linspace(grid_lo, grid_hi, int(n_points))
    logf = dist._logcdf(grid)
    if np.any(~np.isfinite(logf)):
        bad = grid[~np.isfinite(logf)][0]
        raise ZeroCdfOnGrid(f"{dist.family} cdf is zero at grid point {bad!r}")
    worst = float(np.max(np.diff(logf, 2)))
    return LogConcavityReport(worst, worst <= LOG_CONCAVITY_SLACK, float(grid_lo), float(grid_hi), int(n_points))


def from_dict(spec: dict[str, Any]) -> Cdf:
    """Build a distribution from ``{"family": name, **params}``."""
    from .errors import ConfigError

    if not isinstance(spec, dict):
        raise ConfigError("family", "distribution spec must be an object")
    if "family" not in spec:
        raise ConfigError("family", "missing distribution family")
    name = spec["family"]
    if name not in FAMILIES:
        raise ConfigError("family", f"unknown family {name!r}; expected one of {sorted(FAMILIES)}")
    params = {key: val for key, val in spec.items() if key != "family"}
    required = {"power": ("k",), "exponential": ("rate",), "lognormal": ("sigma",), "capped_linear": ()}[name]
    allowed = {"power": ("k", "c"), "exponential": ("rate",), "lognormal": ("sigma",), "capped_linear": ()}[name]
    for key in required:
        if key not in params:
            raise ConfigError(key, f"missing parameter for family {name!r}")
    for key in params:
        if key not in allowed:
            raise ConfigError(key, f"unexpected parameter for family {name!r}")
        if isinstance(params[key], bool) or not isinstance(params[key], (int, float)):
            raise ConfigError(key, "must be a number")
    try:
        return FAMILIES[name](**params)
    except InvalidParameter as exc:
        key = next((key for key in params if str(exc).startswith(key)), "family")
        raise ConfigError(key, str(exc)) from exc
