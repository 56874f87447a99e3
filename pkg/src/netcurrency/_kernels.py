"""Backward-induction kernel for the sequential issuer game.

Two interchangeable implementations:

* a numba ``@njit`` scalar recursion (default when numba imports), and
* a pure-numpy path that batches the last two move levels.

Set ``NETCURRENCY_BACKEND=numpy`` to force the fallback. Both walk the
candidates in the same order with the same tie rule, so they agree up to
floating-point noise.

The kernel works on aggregates: with liquidity ``bias_it * level_t(e)`` the
total usage of active currency ``t`` is ``M/T' + s_t - (1/T') sum_tau s_tau``
where ``s_t = sigma_t * level_t(e_t)``. A subgame is therefore fully
described by the number of issuers already in and the running sum of ``s``.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

_requested = os.environ.get("NETCURRENCY_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ImportError(f"NETCURRENCY_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
BACKEND = "numpy" if (_requested == "numpy" or numba is None) else "numba"

OUT_CODE = -1.0
REFINE_SPLIT = 5  # each round shrinks the step five-fold (window/10 cells)


def candidates_per_level(grid_n: int, refine_rounds: int) -> int:
    return (grid_n + 1) + 1 + 2 * (REFINE_SPLIT - 1) * refine_rounds


def projected_leaves(T: int, grid_n: int, refine_rounds: int) -> float:
    return float(candidates_per_level(grid_n, refine_rounds)) ** T


# --------------------------------------------------------------------------
# numba path


def _maybe_njit(fn):
    return numba.njit(cache=True)(fn) if numba is not None else fn


@_maybe_njit
def _level(t, n_in, agg, sigma, mu, alpha, offset, c0, rho, k, M,
           grid, rounds, tie, out, cont_in, cont_out, counter):
    T = sigma.shape[0]
    if t == T:
        counter[0] += 1
        return n_in, agg

    n_o, a_o = _level(t + 1, n_in, agg, sigma, mu, alpha, offset, c0, rho, k, M,
                      grid, rounds, tie, out, cont_in, cont_out, counter)
    for s in range(t + 1, T):
        cont_out[t, s] = out[s]

    best_u = -np.inf
    best_e = -1.0
    best_n = 0
    best_a = 0.0
    n_grid = grid.shape[0]
    n_cand = n_grid + 2 * (REFINE_SPLIT - 1) * rounds
    h = grid[1] - grid[0] if n_grid > 1 else 1.0
    center = 0.0
    for c in range(n_cand):
        if c < n_grid:
            e = grid[c]
        else:
            j = (c - n_grid) % (2 * (REFINE_SPLIT - 1))
            if j == 0:
                h = h / REFINE_SPLIT
                center = best_e
            step = j - (REFINE_SPLIT - 1)
            if step >= 0:
                step += 1
            e = center + step * h
            if e < 0.0 or e > 1.0:
                continue
        s_t = sigma[t] * (mu[t] * e ** alpha[t] + offset[t])
        nf, af = _level(t + 1, n_in + 1, agg + s_t, sigma, mu, alpha, offset, c0, rho, k, M,
                        grid, rounds, tie, out, cont_in, cont_out, counter)
        u = M / nf + s_t - af / nf - k * c0[t] * np.exp(rho[t] * e)
        if u > best_u + tie or (u >= best_u - tie and e > best_e):
            best_u = u
            best_e = e
            best_n = nf
            best_a = af
            for s in range(t + 1, T):
                cont_in[t, s] = out[s]

    if best_u > 0.0:
        out[t] = best_e
        for s in range(t + 1, T):
            out[s] = cont_in[t, s]
        return best_n, best_a
    out[t] = OUT_CODE
    for s in range(t + 1, T):
        out[s] = cont_out[t, s]
    return n_o, a_o


def _solve_numba(sigma, mu, alpha, offset, c0, rho, k, M, grid, rounds, tie):
    T = sigma.shape[0]
    out = np.full(T, OUT_CODE)
    cont_in = np.zeros((T, T))
    cont_out = np.zeros((T, T))
    counter = np.zeros(1, dtype=np.int64)
    _level(0, 0, 0.0, sigma, mu, alpha, offset, c0, rho, k, M,
           grid, rounds, tie, out, cont_in, cont_out, counter)
    return out, int(counter[0])


# --------------------------------------------------------------------------
# numpy path


class _NumpyGame:
    def __init__(self, sigma, mu, alpha, offset, c0, rho, k, M, grid, rounds, tie):
        self.sigma, self.mu, self.alpha, self.offset = sigma, mu, alpha, offset
        self.c0, self.rho, self.k, self.M = c0, rho, k, M
        self.grid, self.rounds, self.tie = grid, rounds, tie
        self.T = sigma.shape[0]
        self.h0 = grid[1] - grid[0] if grid.shape[0] > 1 else 1.0
        self.steps = np.array(
            [s for s in range(-(REFINE_SPLIT - 1), REFINE_SPLIT) if s != 0], dtype=float
        )
        self.leaves = 0

    def s_of(self, t, e):
        return self.sigma[t] * (self.mu[t] * e ** self.alpha[t] + self.offset[t])

    def cost(self, t, e):
        return self.k * self.c0[t] * np.exp(self.rho[t] * e)

    def _select(self, best, cand_e, cand_u, extra):
        """Sequentially fold candidate columns into the running best (vectorized over rows)."""
        bu, be, bx = best
        for c in range(cand_e.shape[1]):
            e, u = cand_e[:, c], cand_u[:, c]
            take = (u > bu + self.tie) | ((u >= bu - self.tie) & (e > be))
            bu = np.where(take, u, bu)
            be = np.where(take, e, be)
            bx = [np.where(take, x[:, c], b) for x, b in zip(extra, bx)]
        return bu, be, bx

    def last_batch(self, n_in, aggs):
        """Best reply of the last mover for a batch of (n_in, agg) states."""
        t = self.T - 1
        B = aggs.shape[0]
        nf = n_in + 1

        def utilities(E):
            inside = (E >= 0.0) & (E <= 1.0)
            Ec = np.clip(E, 0.0, 1.0)
            s = self.s_of(t, Ec)
            self.leaves += int(inside.sum())
            U = self.M / nf + s - (aggs[:, None] + s) / nf - self.cost(t, Ec)
            return np.where(inside, U, -np.inf)

        E = np.broadcast_to(self.grid, (B, self.grid.shape[0]))
        best = (np.full(B, -np.inf), np.full(B, -1.0), [])
        best = self._select(best, E, utilities(E), [])
        h = self.h0
        for _ in range(self.rounds):
            h = h / REFINE_SPLIT
            E = best[1][:, None] + self.steps[None, :] * h
            best = self._select(best, E, utilities(E), [])
        bu, be, _ = best
        self.leaves += B  # the Out leaf
        is_in = bu > 0.0
        e_out = np.where(is_in, be, OUT_CODE)
        n_out = np.where(is_in, nf, n_in)
        a_out = np.where(is_in, aggs + self.s_of(t, np.where(is_in, be, 0.0)), aggs)
        return e_out, n_out, a_out

    def level(self, t, n_in, agg):
        """Scalar state; returns (n_final, agg_final, actions from t on)."""
        T = self.T
        if t == T - 1:
            e, n, a = self.last_batch(n_in, np.array([agg]))
            return int(n[0]), float(a[0]), [float(e[0])]
        if t == T - 2:
            return self._penultimate(t, n_in, agg)

        n_o, a_o, acts_o = self.level(t + 1, n_in, agg)
        best_u, best_e, best = -np.inf, -1.0, None

        def consider(e):
            nonlocal best_u, best_e, best
            s_t = self.s_of(t, e)
            nf, af, acts = self.level(t + 1, n_in + 1, agg + s_t)
            u = self.M / nf + s_t - af / nf - self.cost(t, e)
            if u > best_u + self.tie or (u >= best_u - self.tie and e > best_e):
                best_u, best_e, best = u, e, (nf, af, acts)

        for e in self.grid:
            consider(float(e))
        h = self.h0
        for _ in range(self.rounds):
            h = h / REFINE_SPLIT
            center = best_e
            for step in self.steps:
                e = center + step * h
                if 0.0 <= e <= 1.0:
                    consider(e)
        if best_u > 0.0:
            nf, af, acts = best
            return nf, af, [best_e] + acts
        return n_o, a_o, [OUT_CODE] + acts_o

    def _penultimate(self, t, n_in, agg):
        e_o, n_o, a_o = self.last_batch(n_in, np.array([agg]))

        def evaluate(E):
            s_t = self.s_of(t, E)
            e_next, nf, af = self.last_batch(n_in + 1, agg + s_t)
            u = self.M / nf + s_t - af / nf - self.cost(t, E)
            return u, e_next, nf, af

        best = (np.full(1, -np.inf), np.full(1, -1.0), [np.zeros(1), np.zeros(1), np.zeros(1)])
        E = self.grid.astype(float)
        u, e_next, nf, af = evaluate(E)
        best = self._select(best, E[None, :], u[None, :], [e_next[None, :], nf[None, :], af[None, :]])
        h = self.h0
        for _ in range(self.rounds):
            h = h / REFINE_SPLIT
            E = best[1][0] + self.steps * h
            keep = (E >= 0.0) & (E <= 1.0)
            E = E[keep]
            if E.size == 0:
                continue
            u, e_next, nf, af = evaluate(E)
            best = self._select(best, E[None, :], u[None, :], [e_next[None, :], nf[None, :], af[None, :]])
        bu, be, (bnext, bn, ba) = best
        if bu[0] > 0.0:
            return int(bn[0]), float(ba[0]), [float(be[0]), float(bnext[0])]
        return int(n_o[0]), float(a_o[0]), [OUT_CODE, float(e_o[0])]


def _solve_numpy(sigma, mu, alpha, offset, c0, rho, k, M, grid, rounds, tie):
    game = _NumpyGame(sigma, mu, alpha, offset, c0, rho, k, M, grid, rounds, tie)
    _, _, acts = game.level(0, 0, 0.0)
    return np.array(acts, dtype=float), game.leaves


def solve_sequential(sigma, mu, alpha, offset, c0, rho, k, M, grid_n, refine_rounds,
                     tie_tol, backend=None):
    """Run backward induction; returns (actions, leaf count).

    ``actions[t]`` is the commitment of issuer ``t`` or ``OUT_CODE``.
    """
    backend = backend or BACKEND
    args = [np.ascontiguousarray(a, dtype=np.float64) for a in (sigma, mu, alpha, offset, c0, rho)]
    grid = np.linspace(0.0, 1.0, int(grid_n) + 1)
    if backend == "numba":
        if numba is None:
            raise RuntimeError("numba backend requested but numba is not installed")
        return _solve_numba(*args, float(k), float(M), grid, int(refine_rounds), float(tie_tol))
    if backend == "numpy":
        return _solve_numpy(*args, float(k), float(M), grid, int(refine_rounds), float(tie_tol))
    raise ValueError(f"unknown backend {backend!r}")
