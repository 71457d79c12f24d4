"""Seeded Monte Carlo simulation of side-by-side first-price auctions.

Random numbers
--------------
Samples are generated in fixed-size blocks.  Block ``j`` draws from its own
PCG64 stream seeded by ``SeedSequence(seed, spawn_key=(j,))``, as a
``(m, 3)`` array of uniforms whose columns are, in order, ``eps1``,
``eps2`` and the competing highest bid.  Each column goes through the
matching inverse CDF.  Shards only decide which worker computes which
blocks; per-block accumulators are merged in block order, so results are
bit-identical for any shard count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .payoff import MarketConfig

BLOCK_SIZE = 1 << 16
MIN_SAMPLES = 1000
_TINY_U = 2.0**-54


@dataclass
class RunningStats:
    """Count, mean and sum of squared deviations; merges exactly as Chan et al."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, values: np.ndarray) -> "RunningStats":
        if values.size == 0:
            return cls()
        mean = float(values.mean())
        return cls(int(values.size), mean, float(((values - mean) ** 2).sum()))

    def merge(self, other: "RunningStats") -> "RunningStats":
        if other.count == 0:
            return RunningStats(self.count, self.mean, self.m2)
        if self.count == 0:
            return RunningStats(other.count, other.mean, other.m2)
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return RunningStats(n, mean, m2)

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else math.nan

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 1 else math.nan


def _blocks(n: int) -> list[tuple[int, int]]:
    return [(j, min(BLOCK_SIZE, n - j * BLOCK_SIZE)) for j in range(-(-n // BLOCK_SIZE))]


def _uniforms(seed: int, block: int, size: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))
    return np.maximum(rng.random((size, 3)), _TINY_U)


def _run_blocks(kernel, n: int, seed: int, shards: int) -> list:
    """Apply ``kernel(block_index, uniforms)`` to every block, results in block order."""
    blocks = _blocks(n)
    if shards < 1:
        raise InvalidParameter("shards must be at least 1")

    def work(shard: int):
        return [(j, kernel(_uniforms(seed, j, m))) for j, m in blocks[shard::shards]]

    if shards == 1:
        done = work(0)
    else:
        with ThreadPoolExecutor(max_workers=shards) as pool:
            done = [item for part in pool.map(work, range(shards)) for item in part]
    done.sort(key=lambda item: item[0])
    return [result for _, result in done]


def _check_n(n: int) -> int:
    if n < MIN_SAMPLES:
        raise InvalidParameter(f"n must be at least {MIN_SAMPLES}, got {n}")
    return int(n)


@dataclass(frozen=True)
class PayoffEstimate:
    mean: float
    stderr: float
    n: int
    seed: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "n": self.n, "seed": self.seed}


def empirical_payoff(
    cfg: MarketConfig,
    bidder: int,
    b: float,
    b_opp: float,
    n: int,
    seed: int,
    shards: int = 1,
) -> PayoffEstimate:
    """Sample mean of ``(v - b) 1{b > competition} 1{b > opponent bid}``.

    The opponent's submitted bid is ``b_opp * eps_opp``; ``b_opp = 0`` is
    the absent opponent.  Ties lose.
    """
    n = _check_n(n)
    if not 0 <= b <= cfg.v:
        raise InvalidParameter(f"bid must lie in [0, v], got {b!r}")
    noise = cfg.opponent_noise(bidder)
    col = 1 if bidder == 1 else 0

    def kernel(u):
        competition = cfg.Q._ppf(u[:, 2])
        opponent = b_opp * noise._ppf(u[:, col])
        gain = np.where((b > competition) & (b > opponent), cfg.v - b, 0.0)
        return RunningStats.of(gain)

    total = RunningStats()
    for part in _run_blocks(kernel, n, seed, shards):
        total = total.merge(part)
    return PayoffEstimate(total.mean, total.stderr, n, seed)


@dataclass(frozen=True)
class SimStats:
    """Summary of ``n`` simulated auctions.

    ``mean_payoff_i`` is bidder i's payoff at its intended bid ``b_i`` (own
    noise does not enter), which is what the analytic payoff measures.
    ``win_rate_i`` counts auctions where bidder i's noisy bid is the strict
    overall maximum.  Cost and overpayment are averaged over the auctions
    the buyer wins.
    """

    n: int
    seed: int
    shards: int
    b1: float
    b2: float
    win_rate_1: float
    win_rate_2: float
    mean_payoff_1: float
    stderr_payoff_1: float
    mean_payoff_2: float
    stderr_payoff_2: float
    buyer_win_rate: float
    mean_buyer_cost: float
    stderr_buyer_cost: float
    mean_overpayment: float
    stderr_overpayment: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def simulate_auctions(cfg: MarketConfig, b1: float, b2: float, n: int, seed: int, shards: int = 1) -> SimStats:
    """Simulate ``n`` auctions with intended bids ``b1`` and ``b2``.

    The buyer wins when ``max(b1 eps1, b2 eps2)`` beats the competition and
    then pays that maximum.  Overpayment is the maximum minus the larger of
    the other agent's bid and the competition, the least it could have paid
    and still won.
    """
    n = _check_n(n)
    for name, bid in (("b1", b1), ("b2", b2)):
        if not (math.isfinite(bid) and bid > 0):
            raise InvalidParameter(f"{name} must be positive, got {bid!r}")
    v = cfg.v

    def kernel(u):
        hat1 = b1 * cfg.N1._ppf(u[:, 0])
        hat2 = b2 * cfg.N2._ppf(u[:, 1])
        competition = cfg.Q._ppf(u[:, 2])
        top = np.maximum(hat1, hat2)
        won = top > competition
        second = np.maximum(np.minimum(hat1, hat2), competition)
        return {
            "win1": int(np.count_nonzero((hat1 > hat2) & (hat1 > competition))),
            "win2": int(np.count_nonzero((hat2 > hat1) & (hat2 > competition))),
            "buyer": int(np.count_nonzero(won)),
            "pay1": RunningStats.of(np.where((b1 > competition) & (b1 > hat2), v - b1, 0.0)),
            "pay2": RunningStats.of(np.where((b2 > competition) & (b2 > hat1), v - b2, 0.0)),
            "cost": RunningStats.of(top[won]),
            "over": RunningStats.of((top - second)[won]),
        }

    counts = {"win1": 0, "win2": 0, "buyer": 0}
    stats = {key: RunningStats() for key in ("pay1", "pay2", "cost", "over")}
    for part in _run_blocks(kernel, n, seed, shards):
        for key in counts:
            counts[key] += part[key]
        for key in stats:
            stats[key] = stats[key].merge(part[key])

    return SimStats(
        n=n,
        seed=seed,
        shards=shards,
        b1=float(b1),
        b2=float(b2),
        win_rate_1=counts["win1"] / n,
        win_rate_2=counts["win2"] / n,
        mean_payoff_1=stats["pay1"].mean,
        stderr_payoff_1=stats["pay1"].stderr,
        mean_payoff_2=stats["pay2"].mean,
        stderr_payoff_2=stats["pay2"].stderr,
        buyer_win_rate=counts["buyer"] / n,
        mean_buyer_cost=stats["cost"].mean if stats["cost"].count else math.nan,
        stderr_buyer_cost=stats["cost"].stderr,
        mean_overpayment=stats["over"].mean if stats["over"].count else math.nan,
        stderr_overpayment=stats["over"].stderr,
    )
