"""Equilibrium solver for currency competition on payment networks."""
from .allocation import (
    Allocation,
    allocate,
    allocate_T,
    allocate_two,
    euler_residual,
    gini,
    gini_centrality_decomposition,
)
from .analysis import RegimeMap, classify_regime, find_thresholds, integration_comparative, sweep
from .errors import *  # noqa: F401,F403
from .issuer_game import (
    Regime,
    SpeOutcome,
    best_response_follower,
    commitment_effectiveness,
    deterrence_commitment,
    issuer_utility,
    solve_spe,
    spe_T,
    spe_two,
)
from .network import (
    TradeNetwork,
    UserVolumes,
    adjusted_katz,
    is_more_integrated,
    katz_bonacich,
    load_edge_list,
)
from .numerics import Tolerances, find_root_decreasing, maximize_scalar, solve_linear, spectral_radius
from .scenario import CommitCostFn, CommitmentProfile, Issuer, LiquidityFn, Scenario, symmetric_scenario

__version__ = "0.1.0"
