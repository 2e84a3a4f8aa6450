"""Large deviations of censored sums ``Y_n = sum_j min(xi_j, M)`` with heavy-tailed jumps.

The package has four layers:

* :mod:`~censored_ldp.distributions`: the standardized Pareto jump law and
  its exact, optionally band-conditioned, inverse-CDF samplers;
* :mod:`~censored_ldp.special`: normal tail, adaptive Gauss-Kronrod
  quadrature and the generalized incomplete beta function;
* :mod:`~censored_ldp.asymptotics`: the ``W_k`` simplex functions and the
  approximations of ``P(Y_n > x)`` in each deviation regime;
* :mod:`~censored_ldp.simulation`: plain and stratified Monte Carlo
  references with deterministic counter-based randomness.

:mod:`~censored_ldp.validation` runs the formulas against the simulations
and :mod:`~censored_ldp.cli` exposes everything on the command line.
"""
from __future__ import annotations

from .asymptotics import (
    K_MAX,
    Approximation,
    Regime,
    W,
    W1_closed,
    W2_closed,
    WalkConfig,
    approx_auto,
    approx_below,
    approx_interior,
    approx_near_multiple,
    capital_H,
    classify_regime,
    s_n,
)
from .distributions import (
    ConditionedSampler,
    JumpModel,
    TailSpec,
    make_standardized_pareto,
    parse_jump,
    sample,
    sample_conditioned,
    tail_V,
)
from .errors import ConvergenceError, DomainError, HardRegimeError, RangeError, StratumOverflow
from .simulation import (
    Estimate,
    MCConfig,
    estimate_plain,
    estimate_stratified,
    oracle_W_simplex,
    simulate_uncensored_tail,
    stratum_weights,
)
from .special import QuadratureSettings, gen_incomplete_beta, integrate_adaptive, normal_tail

__version__ = "0.1.0"

__all__ = [
    "K_MAX",
    "Approximation",
    "ConditionedSampler",
    "ConvergenceError",
    "DomainError",
    "Estimate",
    "HardRegimeError",
    "JumpModel",
    "MCConfig",
    "QuadratureSettings",
    "RangeError",
    "Regime",
    "StratumOverflow",
    "TailSpec",
    "W",
    "W1_closed",
    "W2_closed",
    "WalkConfig",
    "approx_auto",
    "approx_below",
    "approx_interior",
    "approx_near_multiple",
    "capital_H",
    "classify_regime",
    "estimate_plain",
    "estimate_stratified",
    "gen_incomplete_beta",
    "integrate_adaptive",
    "make_standardized_pareto",
    "normal_tail",
    "oracle_W_simplex",
    "parse_jump",
    "s_n",
    "sample",
    "sample_conditioned",
    "simulate_uncensored_tail",
    "stratum_weights",
    "tail_V",
]
