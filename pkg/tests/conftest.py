import pytest

from sidebyside.distributions import Exponential, LogNormal, PowerOnInterval
from sidebyside.payoff import MarketConfig


def standard_configs():
    """Power/exponential competition crossed with lognormal noise levels."""
    return {
        "power1-ln0.1": MarketConfig(1.0, PowerOnInterval(1, 1), LogNormal(0.1), LogNormal(0.1)),
        "power2-ln0.3": MarketConfig(1.0, PowerOnInterval(2, 1), LogNormal(0.3), LogNormal(0.3)),
        "exp2-ln0.3": MarketConfig(1.0, Exponential(2), LogNormal(0.3), LogNormal(0.3)),
        "exp1-ln0.5": MarketConfig(1.0, Exponential(1), LogNormal(0.5), LogNormal(0.5)),
        "power3-ln0.5-v2": MarketConfig(2.0, PowerOnInterval(3, 2.5), LogNormal(0.5), LogNormal(0.5)),
        "exp2-ln0.1-ln0.5": MarketConfig(1.0, Exponential(2), LogNormal(0.1), LogNormal(0.5)),
    }


STANDARD = standard_configs()


@pytest.fixture(params=sorted(STANDARD))
def std_cfg(request):
    return STANDARD[request.param]


@pytest.fixture
def lognormal_cfg():
    return MarketConfig(1.0, Exponential(2), LogNormal(0.3), LogNormal(0.3))


@pytest.fixture
def absent_power():
    """Power competition; used with ``b_opp = 0`` (opponent absent)."""

    def make(k, v=1.0):
        return MarketConfig(v, PowerOnInterval(k, v), LogNormal(0.3), LogNormal(0.3))

    return make
