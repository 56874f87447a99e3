"""User-side equilibrium: currency allocations given issuer commitments."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BetaTooSmall, NoIssuerIn
from .network import adjusted_katz
from .numerics import solve_linear
from .scenario import CommitCostFn, CommitmentProfile, LiquidityFn, Scenario

__all__ = [
    "Allocation",
    "CommitCostFn",
    "CommitmentProfile",
    "LiquidityFn",
    "allocate",
    "allocate_T",
    "allocate_two",
    "euler_residual",
    "gamma_two",
    "gini",
    "gini_centrality_decomposition",
    "marginal_costs",
    "user_cost",
]


@dataclass(frozen=True, eq=False)
class Allocation:
    """Usage matrix ``x`` (users by issuers) with the mask of issuers in."""

    x: np.ndarray
    active: tuple[bool, ...]

    @property
    def X(self) -> np.ndarray:
        return self.x.sum(axis=0)

    @property
    def active_idx(self) -> list[int]:
        return [t for t, a in enumerate(self.active) if a]

    @property
    def d(self) -> np.ndarray:
        """Usage differences between consecutive active currencies (n by T'-1)."""
        xa = self.x[:, self.active_idx]
        return xa[:, :-1] - xa[:, 1:]


def _require_beta(scn: Scenario, active) -> None:
    bound = scn.beta_bound(active)
    if scn.beta < bound * (1 - 1e-12):
        raise BetaTooSmall(scn.beta, bound)


def _monopoly(scn: Scenario, t: int) -> Allocation:
    x = np.zeros((scn.n, scn.T))
    x[:, t] = scn.m
    active = tuple(s == t for s in range(scn.T))
    return Allocation(x, active)


def gamma_two(scn: Scenario, e_a: float, e_b: float) -> np.ndarray:
    """Non-network preference for the first currency over the second."""
    return (scn.liquidity(0, e_a) - scn.liquidity(1, e_b)) / scn.beta


def allocate_two(scn: Scenario, e_a, e_b) -> Allocation:
    """Closed-form two-currency allocation; ``None`` means the issuer is out."""
    if scn.T != 2:
        raise ValueError("allocate_two needs exactly two issuers")
    if e_a is None and e_b is None:
        raise NoIssuerIn()
    if e_a is None:
        return _monopoly(scn, 1)
    if e_b is None:
        return _monopoly(scn, 0)
    _require_beta(scn, [0, 1])
    d = adjusted_katz(scn.net, scn.beta, gamma_two(scn, e_a, e_b), scn.tol)
    m = scn.m
    x = np.column_stack([(m + d) / 2, (m - d) / 2])
    return Allocation(x, (True, True))


def allocate_T(scn: Scenario, profile: CommitmentProfile) -> Allocation:
    """Multi-currency allocation from the Euler system and the budget rows.

    With ``S = (beta I - w)^-1`` the usage of active currency ``t`` is
    ``m/T' + S (f_t - mean_tau f_tau)``.
    """
    if len(profile) != scn.T:
        raise ValueError("profile length does not match the issuer count")
    active = profile.active
    if not active:
        raise NoIssuerIn()
    if len(active) == 1:
        return _monopoly(scn, active[0])
    _require_beta(scn, active)
    F = np.column_stack([scn.liquidity(t, profile[t]) for t in active])
    Tp = len(active)
    dev = F - F.mean(axis=1, keepdims=True)
    resp = solve_linear(scn.beta * np.eye(scn.n) - scn.net.w, dev, scn.tol)
    xa = scn.m[:, None] / Tp + resp
    # remove the rounding drift from the budget rows
    xa[:, -1] = scn.m - xa[:, :-1].sum(axis=1)
    x = np.zeros((scn.n, scn.T))
    x[:, active] = xa
    return Allocation(x, tuple(profile.is_in(t) for t in range(scn.T)))


def allocate(scn: Scenario, profile: CommitmentProfile) -> Allocation:
    if scn.T == 2:
        return allocate_two(scn, profile[0], profile[1])
    return allocate_T(scn, profile)


def marginal_costs(scn: Scenario, profile: CommitmentProfile, alloc: Allocation) -> np.ndarray:
    """``beta x_it - sum_j w_ij x_jt - f_it`` for every active currency."""
    idx = alloc.active_idx
    x = alloc.x[:, idx]
    F = np.column_stack([scn.liquidity(t, profile[t]) for t in idx])
    return scn.beta * x - scn.net.w @ x - F


def euler_residual(scn: Scenario, profile: CommitmentProfile, alloc: Allocation) -> float:
    mc = marginal_costs(scn, profile, alloc)
    if mc.shape[1] < 2:
        return 0.0
    return float(np.abs(np.diff(mc, axis=1)).max())


def user_cost(scn: Scenario, profile: CommitmentProfile, alloc: Allocation, i: int, row=None) -> float:
    """Perceived settlement cost of user ``i``.

    ``row`` substitutes a different usage row for user ``i`` while the other
    users keep their allocation, which is how unilateral deviations are
    priced.
    """
    x = alloc.x
    xi = x[i] if row is None else np.asarray(row, float)
    spill = scn.net.w[i] @ x
    total = 0.0
    for t in alloc.active_idx:
        f = scn.liquidity(t, profile[t])[i]
        total += 0.5 * scn.beta * xi[t] ** 2 - spill[t] * xi[t] - f * xi[t]
    return float(total)


def gini(alloc: Allocation, i: int, include_out: bool = False) -> float:
    """Gini coefficient of user ``i``'s usage across currencies.

    Only currencies in circulation are counted unless ``include_out``.
    """
    row = alloc.x[i] if include_out else alloc.x[i, alloc.active_idx]
    T = len(row)
    m = row.sum()
    return float(np.abs(row[:, None] - row[None, :]).sum() / (2 * T * m))


def gini_centrality_decomposition(alloc: Allocation, i: int) -> tuple[float, bool]:
    """Sum of ``t (T-t) |d_it| / (T m_i)`` over consecutive active currencies.

    Equals the Gini coefficient when the user's usage is monotone along the
    issuer order; the flag reports whether that holds.
    """
    row = alloc.x[i, alloc.active_idx]
    T = len(row)
    m = row.sum()
    d = row[:-1] - row[1:]
    t = np.arange(1, T)
    value = float((t * (T - t) * np.abs(d)).sum() / (T * m))
    monotone = bool((d >= 0).all() or (d <= 0).all())
    return value, monotone
