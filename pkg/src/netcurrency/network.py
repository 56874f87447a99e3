"""Trade networks: ingestion, centralities and validity bounds on beta."""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BetaTooSmall,
    DecayTooLarge,
    DuplicateEdge,
    NegativeWeight,
    NodeSetMismatch,
    ParseError,
    SelfLoop,
)
from .numerics import DEFAULT_TOL, Tolerances, solve_linear, spectral_radius

BETA_MARGIN = 1e-9


@dataclass(frozen=True, eq=False)
class TradeNetwork:
    """Weighted directed payment network.

    ``w[i, j]`` is the weight importer ``i`` places on exporter ``j``.
    """

    labels: tuple[str, ...]
    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        n = len(self.labels)
        if w.shape != (n, n):
            raise ValueError(f"w has shape {w.shape}, expected {(n, n)}")
        if len(set(self.labels)) != n:
            raise ValueError("labels must be unique")
        if (w < 0).any():
            raise ValueError("weights must be non-negative")
        if np.diag(w).any():
            raise ValueError("w must have a zero diagonal")
        w.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "w", w)

    @classmethod
    def from_matrix(cls, w, labels: Sequence[str] | None = None) -> "TradeNetwork":
        w = np.asarray(w, dtype=float)
        if labels is None:
            labels = [str(i + 1) for i in range(w.shape[0])]
        return cls(tuple(labels), w)

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def spectral_radius(self) -> float:
        return spectral_radius(self.w)

    def out_degree(self) -> np.ndarray:
        return (self.w > 0).sum(axis=1)

    def with_weight(self, src: str, dst: str, weight: float) -> "TradeNetwork":
        w = self.w.copy()
        w[self.index(src), self.index(dst)] = weight
        return TradeNetwork(self.labels, w)

    def __eq__(self, other):
        if not isinstance(other, TradeNetwork):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.w, other.w)

    def __hash__(self):
        return hash((self.labels, self.w.tobytes()))


@dataclass(frozen=True, eq=False)
class UserVolumes:
    m: np.ndarray
    M: float = field(init=False)

    def __post_init__(self):
        m = np.array(self.m, dtype=float).ravel()
        if not (m > 0).all():
            raise ValueError("transaction volumes must be strictly positive")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "M", float(m.sum()))

    @classmethod
    def uniform(cls, n: int, value: float = 1.0) -> "UserVolumes":
        return cls(np.full(n, float(value)))

    def scaled(self, factor: float) -> "UserVolumes":
        return UserVolumes(self.m * factor)

    def __eq__(self, other):
        if not isinstance(other, UserVolumes):
            return NotImplemented
        return np.array_equal(self.m, other.m)

    def __hash__(self):
        return hash(self.m.tobytes())


def load_edge_list(text: str) -> TradeNetwork:
    """Parse ``src,dst,weight`` CSV text into a network.

    Nodes are ordered by first appearance. Missing edges have weight zero.
    """
    reader = csv.reader(io.StringIO(text.replace("\r\n", "\n")))
    rows = list(reader)
    if not rows or [c.strip() for c in rows[0]] != ["src", "dst", "weight"]:
        raise ParseError(1, "header must be exactly 'src,dst,weight'")
    labels: dict[str, int] = {}
    edges: dict[tuple[str, str], float] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(lineno, f"expected 3 fields, got {len(row)}")
        src, dst, raw = (c.strip() for c in row)
        if not src or not dst:
            raise ParseError(lineno, "empty node label")
        try:
            weight = float(raw)
        except ValueError:
            raise ParseError(lineno, f"weight {raw!r} is not a number") from None
        if not np.isfinite(weight):
            raise ParseError(lineno, f"weight {raw!r} is not finite")
        if weight < 0:
            raise NegativeWeight(lineno, f"negative weight {raw}")
        if src == dst:
            raise SelfLoop(lineno, f"self-loop on {src!r}")
        if (src, dst) in edges:
            raise DuplicateEdge(lineno, f"duplicate edge {src!r} -> {dst!r}")
        edges[(src, dst)] = weight
        for lab in (src, dst):
            labels.setdefault(lab, len(labels))
    w = np.zeros((len(labels), len(labels)))
    for (src, dst), weight in edges.items():
        w[labels[src], labels[dst]] = weight
    return TradeNetwork(tuple(labels), w)


def to_edge_list(net: TradeNetwork) -> str:
    out = ["src,dst,weight"]
    for i, j in zip(*np.nonzero(net.w)):
        out.append(f"{net.labels[i]},{net.labels[j]},{float(net.w[i, j])!r}")
    return "\n".join(out) + "\n"


def katz_bonacich(net: TradeNetwork, lam: float, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Katz-Bonacich centrality ``(I - lam w)^-1 1``."""
    r = net.spectral_radius()
    limit = np.inf if r == 0 else 1.0 / r
    if not lam > 0:
        raise ValueError("decay must be positive")
    if lam >= limit - 1e-12:
        raise DecayTooLarge(lam, limit)
    return solve_linear(np.eye(net.n) - lam * net.w, np.ones(net.n), tol)


def check_beta(net: TradeNetwork, beta: float) -> None:
    r = net.spectral_radius()
    if beta <= r * (1 + BETA_MARGIN):
        raise BetaTooSmall(beta, r)


def adjusted_katz(net: TradeNetwork, beta: float, gamma, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """``(I - w/beta)^-1 gamma``; ``gamma`` may be a vector or an n-by-k matrix."""
    check_beta(net, beta)
    return solve_linear(np.eye(net.n) - net.w / beta, np.asarray(gamma, dtype=float), tol)


def _bound(net: TradeNetwork, vols: UserVolumes, hi_vals, lo_vals) -> float:
    spill = net.w @ vols.m
    best = -np.inf
    for hi in hi_vals:
        for lo in lo_vals:
            best = max(best, float(np.max((spill + hi - lo) / vols.m)))
    return max(best, net.spectral_radius() + BETA_MARGIN)


def beta_lower_bound_two(net: TradeNetwork, vols: UserVolumes, f_a, f_b) -> float:
    """Smallest beta keeping every two-currency allocation interior.

    ``f_a`` and ``f_b`` are liquidity functions mapping a commitment to the
    per-user liquidity vector.
    """
    return max(
        _bound(net, vols, [f_a(1.0)], [f_b(0.0)]),
        _bound(net, vols, [f_b(1.0)], [f_a(0.0)]),
    )


def beta_lower_bound_T(net: TradeNetwork, vols: UserVolumes, fs) -> float:
    """Multi-currency analogue, with every issuer pair at extreme commitments."""
    return _bound(net, vols, [f(1.0) for f in fs], [f(0.0) for f in fs])


class Integration(enum.Enum):
    STRICTLY_MORE = "strictly_more"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def is_more_integrated(w_prime: TradeNetwork, w: TradeNetwork) -> Integration:
    if set(w_prime.labels) != set(w.labels):
        raise NodeSetMismatch("networks have different node sets")
    order = [w_prime.index(lab) for lab in w.labels]
    wp = w_prime.w[np.ix_(order, order)]
    if np.array_equal(wp, w.w):
        return Integration.EQUAL
    if (wp >= w.w).all():
        return Integration.STRICTLY_MORE
    return Integration.INCOMPARABLE
