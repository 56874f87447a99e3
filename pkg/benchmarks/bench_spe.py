"""Time the backward-induction kernel under both backends.

    python3 benchmarks/bench_spe.py [--grid-n 20] [--refine-rounds 3] [--max-T 4]

The first numba call per process includes JIT compilation (or a cache
load); it is timed separately as ``warmup``.
"""
import argparse
import time

import numpy as np

from netcurrency.issuer_game import spe_T
from netcurrency.network import TradeNetwork
from netcurrency.scenario import CommitCostFn, Issuer, LiquidityFn, symmetric_scenario


def star_scenario(T: int):
    n = 9
    w = np.zeros((n, n))
    w[4, :] = w[:, 4] = 0.125
    w[4, 4] = 0.0
    net = TradeNetwork.from_matrix(w, [str(i + 1) for i in range(n)])
    scn = symmetric_scenario(net, 2.1, 0.3, labels=[f"c{t + 1}" for t in range(T)])
    issuers = tuple(
        Issuer(f"c{t + 1}", LiquidityFn(0.7**t, 0.4), CommitCostFn(1.0, 1.5)) for t in range(T)
    )
    return scn.replace(issuers=issuers)


def timed(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--grid-n", type=int, default=20)
    ap.add_argument("--refine-rounds", type=int, default=3)
    ap.add_argument("--max-T", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    t0 = time.perf_counter()
    spe_T(star_scenario(2), grid_n=2, refine_rounds=1, backend="numba")
    print(f"warmup (numba compile/cache load): {time.perf_counter() - t0:.2f}s")
    print(f"{'T':>2} {'leaves':>12} {'numba s':>10} {'numpy s':>10} {'ratio':>8}  same")
    for T in range(2, args.max_T + 1):
        scn = star_scenario(T)
        kw = dict(grid_n=args.grid_n, refine_rounds=args.refine_rounds)
        rep = args.repeat if T < 4 else 1
        t_nb, a = timed(lambda: spe_T(scn, backend="numba", **kw), rep)
        t_np, b = timed(lambda: spe_T(scn, backend="numpy", **kw), rep)
        same = a.profile.active == b.profile.active and np.allclose(
            [a.profile[t] for t in a.profile.active], [b.profile[t] for t in b.profile.active], atol=1e-12
        )
        print(f"{T:>2} {a.diagnostics['leaves']:>12,d} {t_nb:>10.4f} {t_np:>10.4f} {t_np / t_nb:>8.1f}  {same}")


if __name__ == "__main__":
    main()
