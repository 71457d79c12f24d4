"""Equilibria of side-by-side bidding in first-price auctions.

Two noisy agents bid for the same buyer against fixed exogenous
competition.  The package computes their best responses, runs sequential
best-response iterations to equilibrium, probes uniqueness and checks the
results against a seeded Monte Carlo simulator.
"""

from .best_response import BestResponseResult, best_response, check_monotone_br, grid_oracle, scaled_argmax
from .distributions import (
    CappedLinear,
    Cdf,
    Exponential,
    LogNormal,
    OpponentBidCdf,
    PowerOnInterval,
    cdf_eval,
    pdf_eval,
    quantile,
    score,
    verify_log_concavity,
)
from .dynamics import EquilibriumReport, IterationTrace, equilibrium, extremal_equilibria, iterate, uniqueness_probe
from .montecarlo import SimStats, empirical_payoff, simulate_auctions
from .payoff import MarketConfig, foc_residual, log_payoff, payoff, phi_map

__version__ = "0.1.0"
