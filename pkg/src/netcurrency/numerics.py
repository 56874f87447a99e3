"""Scalar and matrix kernels used by the solvers.

Everything here is a pure function of its arguments; nothing is cached at
module level.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg
from scipy.sparse.csgraph import connected_components

from .errors import NoConvergence, NotDecreasing, SingularMatrix

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Tolerances:
    solve_tol: float = 1e-12
    opt_tol: float = 1e-6
    root_tol: float = 1e-8
    tie_tol: float = 1e-9
    max_iter: int = 10_000

    def __post_init__(self):
        for name in ("solve_tol", "opt_tol", "root_tol", "tie_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


DEFAULT_TOL = Tolerances()


def solve_linear(M, rhs, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Solve ``M @ z = rhs`` by LU with partial pivoting.

    Up to three rounds of iterative refinement are applied when the scaled
    residual exceeds ``tol.solve_tol``.
    """
    M = np.asarray(M, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("M must be square")
    if n == 0:
        return rhs.copy()
    with warnings.catch_warnings():
        # exact zero pivots are reported below as SingularMatrix
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    pivots = np.abs(np.diag(lu))
    scale = max(np.abs(M).max(), 1.0)
    if pivots.min() <= n * np.finfo(float).eps * scale:
        raise SingularMatrix(f"pivot {pivots.min():.3e} is numerically zero")
    z = scipy.linalg.lu_solve((lu, piv), rhs)
    denom = max(1.0, np.abs(rhs).max()) if rhs.size else 1.0
    for _ in range(3):
        resid = rhs - M @ z
        if np.abs(resid).max() / denom <= tol.solve_tol:
            break
        z = z + scipy.linalg.lu_solve((lu, piv), resid)
    return z


def _perron_root(block: np.ndarray, tol: float, max_iter: int) -> float:
    # block is irreducible; shifting by I makes it primitive, so the
    # Collatz-Wielandt bounds of the shifted iteration close onto r.
    n = block.shape[0]
    if n == 1:
        return float(block[0, 0])
    x = np.ones(n)
    lo, hi = 0.0, np.inf
    for _ in range(max_iter):
        y = block @ x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        if hi - lo <= tol * max(1.0, hi):
            return 0.5 * (lo + hi)
        x = x + y
        x /= x.max()
    raise NoConvergence(
        f"power iteration did not converge in {max_iter} steps",
        best=0.5 * (lo + hi),
        gap=hi - lo,
    )


def spectral_radius(w, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Perron root of a non-negative square matrix.

    The matrix is split into strongly connected components and a shifted
    power iteration is run on each irreducible diagonal block.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("w must be square")
    if (w < 0).any():
        raise ValueError("w must be non-negative")
    if not w.any():
        return 0.0
    ncomp, labels = connected_components(w > 0, directed=True, connection="strong")
    r = 0.0
    for comp in range(ncomp):
        idx = np.flatnonzero(labels == comp)
        block = w[np.ix_(idx, idx)]
        if not block.any():
            continue
        r = max(r, _perron_root(block, tol, max_iter))
    return r


def maximize_scalar(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    grid_n: int = 64,
    tol: Tolerances = DEFAULT_TOL,
    vectorized: bool = False,
) -> tuple[float, float]:
    """Maximize ``g`` on ``[lo, hi]`` by a uniform grid then golden section.

    Ties within ``tol.tie_tol`` go to the larger argument. ``vectorized``
    lets ``g`` evaluate the whole grid in one call.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    xs = np.linspace(lo, hi, grid_n + 1)
    if vectorized:
        vals = np.asarray(g(xs), dtype=float)
    else:
        vals = np.array([g(float(x)) for x in xs])
    top = vals.max()
    i = int(np.flatnonzero(vals >= top - tol.tie_tol)[-1])
    best_x, best_v = float(xs[i]), float(vals[i])

    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, grid_n)])
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = g(c), g(d)
    for _ in range(tol.max_iter):
        if b - a <= tol.opt_tol:
            break
        # >= keeps the upper bracket on flat stretches
        if fd >= fc:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = g(d)
        else:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = g(c)
    for x, v in ((c, fc), (d, fd)):
        v = float(v)
        if v > best_v + tol.tie_tol or (abs(v - best_v) <= tol.tie_tol and x > best_x):
            best_x, best_v = float(x), v
    return best_x, best_v


class RootVerdict(enum.Enum):
    ROOT = "root"
    BELOW_RANGE = "below_range"
    ABOVE_RANGE = "above_range"


class RootResult(NamedTuple):
    verdict: RootVerdict
    x: float | None
    bracket: tuple[float, float] | None = None


def find_root_decreasing(
    g: Callable[[float], float], lo: float, hi: float, tol: Tolerances = DEFAULT_TOL
) -> RootResult:
    """Locate the sign change of a non-increasing function.

    ``BELOW_RANGE`` means ``g(lo) <= 0`` already; ``ABOVE_RANGE`` means
    ``g(hi) > 0``. Otherwise the returned ``x`` is the upper end of the final
    bracket, so ``g(x) <= 0`` holds exactly.
    """
    glo, ghi = g(lo), g(hi)
    if ghi > glo:
        raise NotDecreasing(f"g({lo}) = {glo} < g({hi}) = {ghi}")
    if glo <= 0:
        return RootResult(RootVerdict.BELOW_RANGE, None)
    if ghi > 0:
        return RootResult(RootVerdict.ABOVE_RANGE, None)
    a, b = lo, hi
    for _ in range(tol.max_iter):
        if b - a <= tol.root_tol:
            break
        mid = 0.5 * (a + b)
        if g(mid) > 0:
            a = mid
        else:
            b = mid
    return RootResult(RootVerdict.ROOT, b, (a, b))
