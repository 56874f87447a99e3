"""Game instances: function families, issuers, commitment profiles."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .network import TradeNetwork, UserVolumes, beta_lower_bound_T, beta_lower_bound_two
from .numerics import DEFAULT_TOL, Tolerances, solve_linear

OUT = None


@dataclass(frozen=True, eq=False)
class LiquidityFn:
    """Power liquidity ``f_i(e) = bias_i * (mu * e**alpha + offset)``.

    With ``bias=None`` every user has bias 1 and calls return a scalar that
    broadcasts against per-user arrays.
    """

    mu: float = 1.0
    alpha: float = 0.5
    offset: float = 0.0
    bias: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.offset < 0:
            raise ValueError("offset must be non-negative")
        if self.bias is not None:
            b = np.array(self.bias, dtype=float).ravel()
            if not (b > 0).all():
                raise ValueError("biases must be positive")
            b.setflags(write=False)
            object.__setattr__(self, "bias", b)

    def level(self, e):
        """Bias-free part ``mu * e**alpha + offset``."""
        return self.mu * np.power(e, self.alpha) + self.offset

    def level_prime(self, e):
        with np.errstate(divide="ignore"):
            return self.mu * self.alpha * np.power(e, self.alpha - 1.0)

    def __call__(self, e):
        lev = self.level(e)
        return lev if self.bias is None else self.bias * lev

    def prime(self, e):
        d = self.level_prime(e)
        return d if self.bias is None else self.bias * d

    def bias_vector(self, n: int) -> np.ndarray:
        return np.ones(n) if self.bias is None else np.asarray(self.bias)

    def with_bias(self, bias) -> "LiquidityFn":
        return dataclasses.replace(self, bias=None if bias is None else np.asarray(bias, float))

    def __eq__(self, other):
        if not isinstance(other, LiquidityFn):
            return NotImplemented
        same_bias = (self.bias is None and other.bias is None) or (
            self.bias is not None and other.bias is not None
            and np.array_equal(self.bias, other.bias)
        )
        return (self.mu, self.alpha, self.offset) == (other.mu, other.alpha, other.offset) and same_bias


@dataclass(frozen=True)
class CommitCostFn:
    """Commitment cost ``c(e) = c0 * exp(rho * e)``."""

    c0: float = 1.0
    rho: float = 1.0

    def __post_init__(self):
        if not self.c0 > 0:
            raise ValueError("c0 must be positive")
        if self.rho < 0:
            raise ValueError("rho must be non-negative")

    def __call__(self, e):
        return self.c0 * np.exp(self.rho * e)

    def prime(self, e):
        return self.c0 * self.rho * np.exp(self.rho * e)


@dataclass(frozen=True)
class Issuer:
    label: str
    liquidity: LiquidityFn
    cost: CommitCostFn = CommitCostFn()


@dataclass(frozen=True)
class CommitmentProfile:
    """Issuer choices in move order; ``None`` marks an issuer that stays out."""

    choices: tuple[Optional[float], ...]

    def __post_init__(self):
        clean = []
        for e in self.choices:
            if e is None:
                clean.append(None)
                continue
            e = float(e)
            if not 0.0 <= e <= 1.0:
                raise ValueError(f"commitment {e} outside [0, 1]")
            clean.append(e)
        object.__setattr__(self, "choices", tuple(clean))

    @classmethod
    def of(cls, *choices) -> "CommitmentProfile":
        return cls(tuple(choices))

    @classmethod
    def parse(cls, text: str) -> "CommitmentProfile":
        out = []
        for tok in text.split(","):
            tok = tok.strip().lower()
            out.append(None if tok in ("out", "none", "-") else float(tok))
        return cls(tuple(out))

    def __len__(self):
        return len(self.choices)

    def __getitem__(self, i):
        return self.choices[i]

    @property
    def active(self) -> list[int]:
        return [t for t, e in enumerate(self.choices) if e is not None]

    def is_in(self, t: int) -> bool:
        return self.choices[t] is not None

    def replace(self, t: int, e: Optional[float]) -> "CommitmentProfile":
        ch = list(self.choices)
        ch[t] = e
        return CommitmentProfile(tuple(ch))

    def format(self, digits: int = 2) -> str:
        return ",".join("out" if e is None else f"{e:.{digits}f}" for e in self.choices)


@dataclass(frozen=True, eq=False)
class Scenario:
    """A complete game instance; issuer order is the move order."""

    net: TradeNetwork
    vols: UserVolumes
    beta: float
    k: float
    issuers: tuple[Issuer, ...]
    tol: Tolerances = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "issuers", tuple(self.issuers))
        if len(self.vols.m) != self.net.n:
            raise ValueError("volume vector length does not match the network")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        for iss in self.issuers:
            b = iss.liquidity.bias
            if b is not None and len(b) != self.net.n:
                raise ValueError(f"bias vector of issuer {iss.label!r} has wrong length")
        if len({iss.label for iss in self.issuers}) != len(self.issuers):
            raise ValueError("issuer labels must be unique")

    @property
    def n(self) -> int:
        return self.net.n

    @property
    def T(self) -> int:
        return len(self.issuers)

    @property
    def M(self) -> float:
        return self.vols.M

    @property
    def m(self) -> np.ndarray:
        return self.vols.m

    @property
    def k_max(self) -> float:
        """``M / c(0)``; beyond it no issuer can profit even as a monopolist."""
        return self.M / min(float(iss.cost(0.0)) for iss in self.issuers)

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    def liquidity(self, t: int, e: float) -> np.ndarray:
        return np.broadcast_to(self.issuers[t].liquidity(e), (self.n,)).astype(float)

    def beta_bound(self, active: Iterable[int] | None = None) -> float:
        idx = list(range(self.T)) if active is None else list(active)
        fs = [self.issuers[t].liquidity for t in idx]
        if len(fs) == 2:
            return beta_lower_bound_two(self.net, self.vols, fs[0], fs[1])
        return beta_lower_bound_T(self.net, self.vols, fs)

    @cached_property
    def spillover_weights(self) -> np.ndarray:
        """``(beta I - w)^-T 1``: column sums of the usage response operator."""
        A = self.beta * np.eye(self.n) - self.net.w
        return solve_linear(A.T, np.ones(self.n), self.tol)

    @cached_property
    def sigma(self) -> np.ndarray:
        """Aggregate usage response per unit of each issuer's liquidity level."""
        u = self.spillover_weights
        return np.array([u @ iss.liquidity.bias_vector(self.n) for iss in self.issuers])


def symmetric_scenario(
    net: TradeNetwork,
    beta: float,
    k: float,
    m: Sequence[float] | float = 1.0,
    liquidity: LiquidityFn = LiquidityFn(1.0, 0.5),
    cost: CommitCostFn = CommitCostFn(1.0, 1.0),
    labels: Sequence[str] = ("a", "b"),
) -> Scenario:
    vols = UserVolumes(np.broadcast_to(np.asarray(m, float), (net.n,)).copy())
    issuers = tuple(Issuer(lab, liquidity, cost) for lab in labels)
    return Scenario(net, vols, beta, k, issuers)
