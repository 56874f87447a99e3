"""Issuer-side solvers: utilities, best replies, deterrence and SPE.

Every solver here works on the aggregate form of usage totals. For
liquidity ``bias_it * level_t(e)`` the total usage of an active currency is

    X_t = M/T' + s_t - mean_tau s_tau,    s_t = sigma_t * level_t(e_t),

with ``sigma_t = 1' (beta I - w)^-1 bias_t``. Issuer payoffs are therefore
cheap scalars once ``sigma`` is known, and the full allocation matrix is only
built for the reported outcome.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .allocation import Allocation, allocate
from .errors import BetaTooSmall, BudgetExceeded, DerivativeAtZero, NoIssuerIn
from .numerics import RootVerdict, find_root_decreasing, maximize_scalar
from .scenario import CommitmentProfile, Scenario

DEFAULT_BUDGET = 1e9
ZERO_COMMIT = 1e-6  # commitments at or below this count as zero for labels


class Regime(str, enum.Enum):
    MONOPOLY_ZERO_COMMIT = "MonopolyZeroCommit"
    MONOPOLY_DETERRENCE = "MonopolyDeterrence"
    SHARED_MARKET = "SharedMarket"
    FOLLOWER_MONOPOLY = "FollowerMonopoly"
    ALL_OUT = "AllOut"
    MIXED = "Mixed"

    def __str__(self):
        return self.value


class Deterrence(str, enum.Enum):
    FREE = "Free"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"

    def __str__(self):
        return self.value


class DeterrenceResult(NamedTuple):
    kind: Deterrence
    e: Optional[float]  # smallest deterring commitment; None if infeasible


@dataclass(frozen=True, eq=False)
class SpeOutcome:
    profile: CommitmentProfile
    alloc: Optional[Allocation]
    utilities: np.ndarray
    regime: Regime
    diagnostics: dict = field(default_factory=dict)

    @property
    def X(self) -> np.ndarray:
        if self.alloc is None:
            return np.zeros(len(self.profile))
        return self.alloc.X


# --------------------------------------------------------------------------
# scalar building blocks


def _require_two(scn: Scenario) -> None:
    if scn.T != 2:
        raise ValueError(f"two-issuer solver called with {scn.T} issuers")


def _check_beta(scn: Scenario) -> None:
    bound = scn.beta_bound()
    if scn.beta < bound * (1 - 1e-12):
        raise BetaTooSmall(scn.beta, bound)


def _level(scn: Scenario, t: int, e):
    return scn.issuers[t].liquidity.level(e)


def _cost(scn: Scenario, t: int, e):
    return scn.k * scn.issuers[t].cost(e)


def usage_totals(scn: Scenario, profile: CommitmentProfile) -> np.ndarray:
    """Total usage per currency from the aggregate formula (zeros for Out)."""
    active = profile.active
    X = np.zeros(scn.T)
    if not active:
        return X
    s = np.array([scn.sigma[t] * _level(scn, t, profile[t]) for t in active])
    X[active] = scn.M / len(active) + s - s.mean()
    return X


def issuer_utility(scn: Scenario, profile: CommitmentProfile, p: int) -> float:
    """``X_p - k c_p(e_p)`` for an issuer in, zero for an issuer out."""
    if not profile.is_in(p):
        return 0.0
    X = allocate(scn, profile).X[p]
    return float(X - _cost(scn, p, profile[p]))


def _follower_utility(scn: Scenario, e_a: float):
    """``u_b(e_a, .)`` vectorized over the follower's commitment."""
    half_M = 0.5 * scn.M
    s_a = scn.sigma[0] * _level(scn, 0, e_a)

    def u_b(e_b):
        s_b = scn.sigma[1] * _level(scn, 1, e_b)
        return half_M + 0.5 * (s_b - s_a) - _cost(scn, 1, e_b)

    return u_b


def _follower_value(scn: Scenario, e_a: float) -> tuple[float, float]:
    """Unconstrained best commitment of the follower and its utility."""
    return maximize_scalar(_follower_utility(scn, e_a), 0.0, 1.0, tol=scn.tol, vectorized=True)


def best_response_follower(scn: Scenario, e_a: Optional[float]) -> Optional[float]:
    """Second mover's reply; ``None`` means it stays out."""
    _require_two(scn)
    if e_a is None:
        return 0.0 if scn.M - _cost(scn, 1, 0.0) > 0 else None
    e_b, u = _follower_value(scn, e_a)
    return e_b if u > 0 else None


def deterrence_commitment(scn: Scenario) -> DeterrenceResult:
    """Smallest leader commitment that leaves the follower no profitable entry."""
    _require_two(scn)
    root = find_root_decreasing(lambda e: _follower_value(scn, e)[1], 0.0, 1.0, scn.tol)
    if root.verdict is RootVerdict.BELOW_RANGE:
        return DeterrenceResult(Deterrence.FREE, 0.0)
    if root.verdict is RootVerdict.ABOVE_RANGE:
        return DeterrenceResult(Deterrence.INFEASIBLE, None)
    return DeterrenceResult(Deterrence.FEASIBLE, root.x)


def _regime(profile: CommitmentProfile) -> Regime:
    active = profile.active
    if not active:
        return Regime.ALL_OUT
    if len(active) == 1:
        t = active[0]
        if t != 0:
            return Regime.FOLLOWER_MONOPOLY
        if profile[0] <= ZERO_COMMIT:
            return Regime.MONOPOLY_ZERO_COMMIT
        return Regime.MONOPOLY_DETERRENCE
    if len(profile) == 2:
        return Regime.SHARED_MARKET
    return Regime.MIXED


def _outcome(scn: Scenario, profile: CommitmentProfile, diagnostics: dict) -> SpeOutcome:
    try:
        alloc = allocate(scn, profile)
    except NoIssuerIn:
        alloc = None
    u = np.zeros(scn.T)
    if alloc is not None:
        for t in profile.active:
            u[t] = alloc.X[t] - _cost(scn, t, profile[t])
    return SpeOutcome(profile, alloc, u, _regime(profile), diagnostics)


def spe_two(scn: Scenario) -> SpeOutcome:
    """Subgame-perfect outcome of the two-issuer game.

    The leader compares its best shared-market commitment with the cheapest
    deterring commitment and with staying out. Deterrence wins ties.
    """
    _require_two(scn)
    _check_beta(scn)

    def u_share(e_a):
        e_b, _ = _follower_value(scn, e_a)
        s_a = scn.sigma[0] * _level(scn, 0, e_a)
        s_b = scn.sigma[1] * _level(scn, 1, e_b)
        return 0.5 * scn.M + 0.5 * (s_a - s_b) - _cost(scn, 0, e_a)

    e_share, u_shared = maximize_scalar(u_share, 0.0, 1.0, tol=scn.tol)
    e_follow, _ = _follower_value(scn, e_share)
    det = deterrence_commitment(scn)
    u_deter = None if det.e is None else float(scn.M - _cost(scn, 0, det.e))

    if u_deter is not None and u_shared <= u_deter + scn.tol.tie_tol:
        e_a, u_a = det.e, u_deter
    else:
        e_a, u_a = e_share, u_shared
    if not u_a > 0:
        e_a = None
    e_b = best_response_follower(scn, e_a)

    diagnostics = {
        "e_share": e_share,
        "e_follow": e_follow,
        "u_share": float(u_shared),
        "deterrence": str(det.kind),
        "e_deter": det.e,
        "u_deter": u_deter,
    }
    return _outcome(scn, CommitmentProfile((e_a, e_b)), diagnostics)


def spe_T(
    scn: Scenario,
    grid_n: int = 20,
    refine_rounds: int = 3,
    budget: float = DEFAULT_BUDGET,
    backend: Optional[str] = None,
) -> SpeOutcome:
    """Subgame-perfect outcome for any number of issuers by backward induction.

    Each mover scans ``grid_n + 1`` uniform commitments plus staying out, then
    ``refine_rounds`` rounds of local refinement that shrink the step
    five-fold around the incumbent best. Final resolution is
    ``1 / (grid_n * 5**refine_rounds)``.
    """
    if scn.T < 1:
        raise ValueError("need at least one issuer")
    if grid_n < 1 or refine_rounds < 0:
        raise ValueError("grid_n must be >= 1 and refine_rounds >= 0")
    if scn.T >= 2:
        _check_beta(scn)
    projected = _kernels.projected_leaves(scn.T, grid_n, refine_rounds)
    if projected > budget:
        raise BudgetExceeded(projected, budget)

    liq = [iss.liquidity for iss in scn.issuers]
    costs = [iss.cost for iss in scn.issuers]
    actions, leaves = _kernels.solve_sequential(
        scn.sigma,
        [f.mu for f in liq],
        [f.alpha for f in liq],
        [f.offset for f in liq],
        [c.c0 for c in costs],
        [c.rho for c in costs],
        scn.k,
        scn.M,
        grid_n,
        refine_rounds,
        scn.tol.tie_tol,
        backend=backend,
    )
    profile = CommitmentProfile(tuple(None if a < 0 else float(a) for a in actions))
    diagnostics = {
        "leaves": leaves,
        "backend": backend or _kernels.BACKEND,
        "resolution": 1.0 / (grid_n * _kernels.REFINE_SPLIT ** refine_rounds),
    }
    return _outcome(scn, profile, diagnostics)


def solve_spe(scn: Scenario, **solver) -> SpeOutcome:
    """``spe_two`` for two issuers, ``spe_T`` otherwise."""
    if scn.T == 2 and not solver.get("force_grid"):
        return spe_two(scn)
    solver.pop("force_grid", None)
    return spe_T(scn, **solver)


def commitment_effectiveness(scn: Scenario, profile: CommitmentProfile, p: int) -> float:
    """Marginal usage gain ``dX_p/de_p`` holding the other commitments fixed.

    Equals ``(1 - 1/T') 1' (beta I - w)^-1 f'_p(e_p)``; for two currencies this
    is ``(1/2beta) 1' (I - w/beta)^-1 f'_p``.
    """
    if not profile.is_in(p):
        raise ValueError(f"issuer {p} is out")
    e = profile[p]
    liq = scn.issuers[p].liquidity
    if e == 0.0 and liq.alpha < 1:
        raise DerivativeAtZero(f"liquidity of issuer {p} has infinite slope at zero commitment")
    Tp = len(profile.active)
    if Tp < 2:
        return 0.0
    slope = np.broadcast_to(liq.prime(e), (scn.n,))
    return float((1 - 1 / Tp) * scn.spillover_weights @ slope)
