"""Command-line front end.

Data tables go to stdout, diagnostics to stderr. Every failure exits with
status 2 and a one-line message naming the violated precondition. Output is
buffered so a failing command prints nothing on stdout.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

import numpy as np
import yaml

from . import config as cfgmod
from .allocation import allocate, euler_residual, gini, gini_centrality_decomposition
from .analysis import SWEEP_PARAMS, find_thresholds, sweep
from .errors import BetaTooSmall, DecayTooLarge, NetCurrencyError
from .issuer_game import spe_T, spe_two
from .network import katz_bonacich
from .scenario import CommitmentProfile

EXIT_ERROR = 2


def fmt(x) -> str:
    """12 significant digits; ``out`` for missing commitments."""
    if x is None:
        return "out"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    v = float(x)
    if v == 0.0:
        v = 0.0  # drop the sign of negative zero
    return f"{v:.12g}"


def _csv(rows) -> str:
    return "".join(",".join(fmt(c) for c in row) + "\n" for row in rows)


def _profile(text: str, T: int) -> CommitmentProfile:
    try:
        prof = CommitmentProfile.parse(text)
    except ValueError as exc:
        raise ValueError(f"--commitments: {exc}") from None
    if len(prof) != T:
        raise ValueError(f"--commitments has {len(prof)} entries but the scenario has {T} issuers")
    return prof


def _solver_kwargs(args, cfg) -> dict:
    opts = cfg.solver_options
    out = {
        "grid_n": opts.get("grid_n", 20),
        "refine_rounds": opts.get("refine_rounds", 3),
        "budget": opts.get("budget", 1e9),
        "backend": opts.get("backend"),
    }
    for key in ("grid_n", "refine_rounds", "budget", "backend"):
        v = getattr(args, key, None)
        if v is not None:
            out[key] = v
    return out


# --------------------------------------------------------------------------
# subcommands; each returns (stdout text, stderr text)


def cmd_centrality(args, cfg, scn):
    kappa = katz_bonacich(scn.net, args.decay, scn.tol)
    rows = [("label", "katz")] + list(zip(scn.net.labels, kappa))
    return _csv(rows), ""


def cmd_allocate(args, cfg, scn):
    prof = _profile(args.commitments, scn.T)
    alloc = allocate(scn, prof)
    labels = [iss.label for iss in scn.issuers]
    rows = [("user", "currency", "usage")]
    for i, user in enumerate(scn.net.labels):
        for t, lab in enumerate(labels):
            rows.append((user, lab, alloc.x[i, t]))
    for t, lab in enumerate(labels):
        rows.append(("total", lab, alloc.X[t]))
    diag = f"euler_residual={fmt(euler_residual(scn, prof, alloc))}\n"
    diag += f"budget_residual={fmt(float(np.abs(alloc.x.sum(axis=1) - scn.m).max()))}\n"
    return _csv(rows), diag


def cmd_spe(args, cfg, scn):
    if args.mode == "two":
        if scn.T != 2:
            raise ValueError(f"--mode two needs exactly 2 issuers, the scenario has {scn.T}")
        out = spe_two(scn)
    else:
        out = spe_T(scn, **_solver_kwargs(args, cfg))
    labels = [iss.label for iss in scn.issuers]
    X = out.X
    lines = [
        f"regime={out.regime}",
        "e=" + ",".join(fmt(e) for e in out.profile.choices),
        "u=" + ",".join(fmt(u) for u in out.utilities),
        "X=" + ",".join(fmt(x) for x in X),
    ]
    for key, val in out.diagnostics.items():
        lines.append(f"{key}={fmt(val)}")
    lines.append("")
    lines.append(f"{'issuer':<10}{'commit':>10}{'usage':>12}{'share':>10}{'utility':>12}")
    for t, lab in enumerate(labels):
        e = out.profile[t]
        lines.append(
            f"{lab:<10}{'out' if e is None else f'{e:.4f}':>10}{X[t]:>12.4f}"
            f"{X[t] / scn.M:>10.4f}{out.utilities[t]:>12.4f}"
        )
    return "\n".join(lines) + "\n", ""


def cmd_thresholds(args, cfg, scn):
    rmap = find_thresholds(scn, n_grid=args.n_grid)
    rows = [("boundary", "k_low", "k_high", "regime_left", "regime_right")]
    for j, b in enumerate(rmap.boundaries, start=1):
        rows.append((j, b.k_low, b.k_high, str(b.regime_left), str(b.regime_right)))
    diag = "".join(f"{d}\n" for d in rmap.diagnostics)
    return _csv(rows), diag


def cmd_sweep(args, cfg, scn):
    if args.steps < 1:
        raise ValueError("--steps must be at least 1")
    values = np.linspace(args.start, args.stop, args.steps + 1)
    kw = _solver_kwargs(args, cfg) if scn.T != 2 else {}
    table = sweep(scn, args.param, values, thresholds=args.thresholds, **kw)
    T = scn.T
    header = [args.param, "regime"] + [f"e_{t + 1}" for t in range(T)] + [f"X_{t + 1}" for t in range(T)]
    if args.thresholds:
        header.append("k_lower")
    header.append("error")
    rows = [header]
    for r in table:
        if r.error is not None:
            row = [r.value, ""] + [""] * (2 * T)
        else:
            row = [r.value, str(r.regime)] + list(r.profile.choices) + list(r.X)
        if args.thresholds:
            row.append("" if r.k_lower is None else r.k_lower)
        row.append(r.error or "")
        rows.append(row)
    return _csv(rows), ""


def cmd_gini(args, cfg, scn):
    prof = _profile(args.commitments, scn.T)
    alloc = allocate(scn, prof)
    rows = [("user", "gini", "decomposition", "monotone")]
    for i, user in enumerate(scn.net.labels):
        dec, mono = gini_centrality_decomposition(alloc, i)
        rows.append((user, gini(alloc, i), dec, mono))
    return _csv(rows), ""


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netcurrency", description="Network currency competition solver")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", help="scenario YAML document")
        sp.set_defaults(fn=fn)
        return sp

    def solver_flags(sp):
        sp.add_argument("--grid-n", dest="grid_n", type=int)
        sp.add_argument("--refine-rounds", dest="refine_rounds", type=int)
        sp.add_argument("--budget", type=float)
        sp.add_argument("--backend", choices=("numba", "numpy"))

    sp = add("centrality", cmd_centrality, "Katz-Bonacich centrality per user")
    sp.add_argument("--lambda", dest="decay", type=float, default=1.0)

    sp = add("allocate", cmd_allocate, "user allocation for given commitments")
    sp.add_argument("--commitments", required=True, help="e.g. 0.27,0.31 or 0.5,out")

    sp = add("spe", cmd_spe, "subgame-perfect outcome")
    sp.add_argument("--mode", choices=("two", "t"), default="t")
    solver_flags(sp)

    sp = add("thresholds", cmd_thresholds, "regime boundaries in k")
    sp.add_argument("--n-grid", dest="n_grid", type=int, default=64)

    sp = add("sweep", cmd_sweep, "SPE over a parameter range")
    sp.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    sp.add_argument("--from", dest="start", type=float, required=True)
    sp.add_argument("--to", dest="stop", type=float, required=True)
    sp.add_argument("--steps", type=int, default=10, help="number of intervals")
    sp.add_argument("--thresholds", action="store_true", help="add the k_lower column")
    solver_flags(sp)

    sp = add("gini", cmd_gini, "per-user Gini of currency usage")
    sp.add_argument("--commitments", required=True)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load(args.config)
        scn = cfgmod.build_scenario(cfg)
        out, diag = args.fn(args, cfg, scn)
    except BetaTooSmall as exc:
        print(f"error: BetaTooSmall: beta = {fmt(exc.beta)} must be at least {fmt(exc.bound)}", file=sys.stderr)
        return EXIT_ERROR
    except DecayTooLarge as exc:
        print(f"error: DecayTooLarge: lambda = {fmt(exc.lam)} must be below 1/r(w) = {fmt(exc.limit)}", file=sys.stderr)
        return EXIT_ERROR
    except (NetCurrencyError, ValueError, OSError, yaml.YAMLError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(out)
    if diag:
        sys.stderr.write(diag)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
