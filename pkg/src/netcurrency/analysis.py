"""Regime classification, thresholds in k, and parameter sweeps."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BetaTooSmall, NetCurrencyError, NotComparable
from .issuer_game import (
    Regime,
    SpeOutcome,
    commitment_effectiveness,
    solve_spe,
    spe_two,
)
from .network import Integration, TradeNetwork, is_more_integrated
from .scenario import CommitmentProfile, Scenario

# expected left-to-right order along k in symmetric two-issuer games
SYMMETRIC_ORDER = (
    Regime.SHARED_MARKET,
    Regime.MONOPOLY_DETERRENCE,
    Regime.MONOPOLY_ZERO_COMMIT,
)
SWEEP_PARAMS = ("beta", "k", "M_scale", "bias")


def classify_regime(scn: Scenario) -> Regime:
    return spe_two(scn).regime


def is_symmetric(scn: Scenario) -> bool:
    first = scn.issuers[0]
    return all(iss.liquidity == first.liquidity and iss.cost == first.cost for iss in scn.issuers)


@dataclass(frozen=True)
class Boundary:
    k_low: float
    k_high: float
    regime_left: Regime
    regime_right: Regime

    @property
    def k(self) -> float:
        return 0.5 * (self.k_low + self.k_high)


@dataclass(frozen=True, eq=False)
class RegimeMap:
    k_grid: np.ndarray
    regimes: tuple[Regime, ...]
    boundaries: tuple[Boundary, ...]
    k_max: float
    monotone: bool
    diagnostics: tuple[str, ...] = ()

    def _find(self, left, right) -> Optional[float]:
        for b in self.boundaries:
            if b.regime_left == left and b.regime_right == right:
                return b.k
        return None

    @property
    def k_lower(self) -> Optional[float]:
        """Smallest k at which the leader takes the whole market."""
        for b in self.boundaries:
            if b.regime_left == Regime.SHARED_MARKET:
                return b.k
        return None

    @property
    def k_upper(self) -> Optional[float]:
        """Smallest k at which the monopoly needs no commitment."""
        return self._find(Regime.MONOPOLY_DETERRENCE, Regime.MONOPOLY_ZERO_COMMIT)

    @property
    def bracket_width(self) -> float:
        if not self.boundaries:
            return 0.0
        return max(b.k_high - b.k_low for b in self.boundaries)


def find_thresholds(
    scn: Scenario,
    k_max: Optional[float] = None,
    n_grid: int = 64,
    rel_width: float = 1e-4,
) -> RegimeMap:
    """Scan k over ``[0, k_max)`` and bisect every regime change.

    ``k_max`` defaults to ``M / c(0)``. The right end is left open: there the
    best monopoly utility is exactly zero and the leader stays out.
    """
    if scn.T != 2:
        raise ValueError("threshold search needs a two-issuer scenario")
    k_max = scn.k_max if k_max is None else float(k_max)
    if not k_max > 0:
        raise ValueError("k_max must be positive")
    ks = np.linspace(0.0, k_max, n_grid, endpoint=False)
    regimes = [classify_regime(scn.replace(k=float(k))) for k in ks]
    width = k_max * rel_width

    boundaries = []
    for i in range(len(ks) - 1):
        left, right = regimes[i], regimes[i + 1]
        if left == right:
            continue
        lo, hi = float(ks[i]), float(ks[i + 1])
        while hi - lo > width:
            mid = 0.5 * (lo + hi)
            if classify_regime(scn.replace(k=mid)) == left:
                lo = mid
            else:
                hi = mid
        right = classify_regime(scn.replace(k=hi))
        boundaries.append(Boundary(lo, hi, left, right))

    diagnostics = []
    rank = {r: i for i, r in enumerate(SYMMETRIC_ORDER)}
    seq = [rank.get(r, -1) for r in regimes]
    monotone = all(s >= 0 for s in seq) and all(a <= b for a, b in zip(seq, seq[1:]))
    if not monotone:
        what = "symmetric" if is_symmetric(scn) else "asymmetric"
        diagnostics.append(
            f"{what} scenario: regime sequence {[str(r) for r in _runs(regimes)]} "
            "is not SharedMarket -> MonopolyDeterrence -> MonopolyZeroCommit"
        )
    return RegimeMap(ks, tuple(regimes), tuple(boundaries), k_max, monotone, tuple(diagnostics))


def _runs(regimes: Sequence[Regime]) -> list[Regime]:
    out = []
    for r in regimes:
        if not out or out[-1] != r:
            out.append(r)
    return out


@dataclass(frozen=True, eq=False)
class IntegrationReport:
    k_lower: Optional[float]
    k_lower_integrated: Optional[float]
    effectiveness: np.ndarray
    effectiveness_integrated: np.ndarray
    outcome: SpeOutcome
    outcome_integrated: SpeOutcome

    @property
    def effectiveness_gain(self) -> np.ndarray:
        return self.effectiveness_integrated - self.effectiveness


def integration_comparative(
    scn: Scenario,
    w_prime: TradeNetwork,
    e_ref: float = 0.5,
    n_grid: int = 64,
) -> IntegrationReport:
    """Thresholds, SPE outcomes and commitment effectiveness before and after integration.

    Effectiveness is evaluated with every issuer at ``e_ref``.
    """
    if is_more_integrated(w_prime, scn.net) is not Integration.STRICTLY_MORE:
        raise NotComparable("the second network is not a strict integration of the first")
    order = [w_prime.index(lab) for lab in scn.net.labels]
    w_aligned = TradeNetwork(scn.net.labels, w_prime.w[np.ix_(order, order)])
    scn2 = scn.replace(net=w_aligned)
    for s in (scn, scn2):
        bound = s.beta_bound()
        if s.beta < bound * (1 - 1e-12):
            raise BetaTooSmall(s.beta, bound)

    ref = CommitmentProfile(tuple([e_ref] * scn.T))
    eff = np.array([commitment_effectiveness(scn, ref, p) for p in range(scn.T)])
    eff2 = np.array([commitment_effectiveness(scn2, ref, p) for p in range(scn.T)])
    k1 = find_thresholds(scn, n_grid=n_grid).k_lower if scn.T == 2 else None
    k2 = find_thresholds(scn2, n_grid=n_grid).k_lower if scn.T == 2 else None
    return IntegrationReport(k1, k2, eff, eff2, solve_spe(scn), solve_spe(scn2))


@dataclass(frozen=True, eq=False)
class SweepRow:
    value: float
    regime: Optional[Regime]
    profile: Optional[CommitmentProfile]
    X: Optional[np.ndarray]
    k_lower: Optional[float] = None
    error: Optional[str] = None


def apply_param(scn: Scenario, param: str, value: float) -> Scenario:
    """Scenario with one swept parameter replaced.

    ``M_scale`` multiplies every user's volume; ``bias`` sets a uniform bias
    on the last issuer's liquidity.
    """
    if param == "beta":
        return scn.replace(beta=float(value))
    if param == "k":
        return scn.replace(k=float(value))
    if param == "M_scale":
        return scn.replace(vols=scn.vols.scaled(float(value)))
    if param == "bias":
        last = scn.issuers[-1]
        liq = last.liquidity.with_bias(np.full(scn.n, float(value)))
        issuers = scn.issuers[:-1] + (type(last)(last.label, liq, last.cost),)
        return scn.replace(issuers=issuers)
    raise ValueError(f"unknown sweep parameter {param!r}; choose from {SWEEP_PARAMS}")


def sweep(
    scn: Scenario,
    param: str,
    values: Sequence[float],
    thresholds: bool = False,
    **solver,
) -> list[SweepRow]:
    """One SPE solve per parameter value, rows in ascending parameter order.

    Errors at a point are recorded on that row. ``thresholds`` adds the
    lower regime threshold in k (two issuers only).
    """
    if param not in SWEEP_PARAMS:
        raise ValueError(f"unknown sweep parameter {param!r}; choose from {SWEEP_PARAMS}")
    rows = []
    for v in sorted(float(x) for x in values):
        try:
            s = apply_param(scn, param, v)
            out = solve_spe(s, **solver)
            k_lo = find_thresholds(s).k_lower if thresholds and s.T == 2 else None
            rows.append(SweepRow(v, out.regime, out.profile, out.X, k_lo))
        except (NetCurrencyError, ValueError) as exc:
            rows.append(SweepRow(v, None, None, None, None, f"{type(exc).__name__}: {exc}"))
    return rows
