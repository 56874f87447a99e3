"""Scenario documents in YAML.

Layout::

    network:
      edges: star9.csv          # edge-list CSV, relative to the document
      # or inline: rows: [[src, dst, weight], ...]
    users:                      # optional; absent users get m = 1, bias = 1
      "5": {m: 1.0, bias: {b: 1.2}}
    game: {beta: 2.1, k: 0.3}
    issuers:                    # move order
      - label: a
        liquidity: {mu: 1.0, alpha: 0.4, offset: 0.0}
        cost: {c0: 1.0, rho: 1.5}
    solver: {grid_n: 20, refine_rounds: 3, budget: 1.0e9, tolerances: {opt_tol: 1.0e-6}}

Numbers are read as Python floats, whose ``repr`` is the shortest decimal
that reads back to the same value, so a load/dump/load cycle is exact.
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import yaml

from .errors import ConfigError
from .network import TradeNetwork, UserVolumes, load_edge_list
from .numerics import Tolerances
from .scenario import CommitCostFn, Issuer, LiquidityFn, Scenario

SOLVER_KEYS = ("grid_n", "refine_rounds", "budget", "backend")
TOL_KEYS = tuple(f.name for f in dataclasses.fields(Tolerances))


@dataclass(frozen=True)
class IssuerSpec:
    label: str
    mu: float = 1.0
    alpha: float = 0.5
    offset: float = 0.0
    c0: float = 1.0
    rho: float = 1.0


@dataclass(frozen=True)
class UserSpec:
    m: float = 1.0
    bias: tuple[tuple[str, float], ...] = ()  # (issuer label, bias) pairs


@dataclass(frozen=True)
class ScenarioConfig:
    beta: float
    k: float
    issuers: tuple[IssuerSpec, ...]
    edges_path: Optional[str] = None
    edge_rows: Optional[tuple[tuple[str, str, float], ...]] = None
    users: tuple[tuple[str, UserSpec], ...] = ()
    solver: tuple[tuple[str, Any], ...] = ()
    tolerances: tuple[tuple[str, float], ...] = ()
    base_dir: str = field(default=".", compare=False)

    @property
    def solver_options(self) -> dict:
        return dict(self.solver)


def _num(value, where: str) -> float:
    # YAML 1.1 reads "1e9" (no dot) as a string
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number, got {value!r}") from None
    if not np.isfinite(out):
        raise ConfigError(f"{where}: value must be finite")
    return out


def _section(doc: dict, name: str, required: bool = True) -> Any:
    if name not in doc:
        if required:
            raise ConfigError(f"missing section '{name}'")
        return None
    return doc[name]


def _mapping(value, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected a mapping")
    return value


def _check_keys(d: dict, allowed, where: str) -> None:
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(map(str, extra))}")


def from_dict(doc: dict, base_dir: str = ".") -> ScenarioConfig:
    doc = _mapping(doc, "document")
    _check_keys(doc, ("network", "users", "game", "issuers", "solver"), "document")

    net = _mapping(_section(doc, "network"), "network")
    _check_keys(net, ("edges", "rows"), "network")
    if ("edges" in net) == ("rows" in net):
        raise ConfigError("network: give exactly one of 'edges' (CSV path) or 'rows'")
    edges_path, edge_rows = None, None
    if "edges" in net:
        edges_path = str(net["edges"])
    else:
        rows = []
        for i, row in enumerate(net["rows"] or []):
            if not isinstance(row, (list, tuple)) or len(row) != 3:
                raise ConfigError(f"network.rows[{i}]: expected [src, dst, weight]")
            rows.append((str(row[0]), str(row[1]), _num(row[2], f"network.rows[{i}]")))
        edge_rows = tuple(rows)

    game = _mapping(_section(doc, "game"), "game")
    _check_keys(game, ("beta", "k"), "game")
    for key in ("beta", "k"):
        if key not in game:
            raise ConfigError(f"game: missing '{key}'")

    raw_issuers = _section(doc, "issuers")
    if not isinstance(raw_issuers, list) or not raw_issuers:
        raise ConfigError("issuers: expected a non-empty list")
    issuers = []
    for i, item in enumerate(raw_issuers):
        where = f"issuers[{i}]"
        item = _mapping(item, where)
        _check_keys(item, ("label", "liquidity", "cost"), where)
        if "label" not in item:
            raise ConfigError(f"{where}: missing 'label'")
        liq = _mapping(item.get("liquidity"), f"{where}.liquidity")
        _check_keys(liq, ("mu", "alpha", "offset"), f"{where}.liquidity")
        cost = _mapping(item.get("cost"), f"{where}.cost")
        _check_keys(cost, ("c0", "rho"), f"{where}.cost")
        kw = {k: _num(v, f"{where}.liquidity.{k}") for k, v in liq.items()}
        kw.update({k: _num(v, f"{where}.cost.{k}") for k, v in cost.items()})
        issuers.append(IssuerSpec(str(item["label"]), **kw))

    users = []
    for label, spec in _mapping(_section(doc, "users", False), "users").items():
        where = f"users.{label}"
        spec = _mapping(spec, where)
        _check_keys(spec, ("m", "bias"), where)
        bias = tuple(
            (str(iss), _num(v, f"{where}.bias.{iss}"))
            for iss, v in _mapping(spec.get("bias"), f"{where}.bias").items()
        )
        users.append((str(label), UserSpec(_num(spec.get("m", 1.0), f"{where}.m"), bias)))

    solver = _mapping(_section(doc, "solver", False), "solver")
    _check_keys(solver, SOLVER_KEYS + ("tolerances",), "solver")
    tols = _mapping(solver.get("tolerances"), "solver.tolerances")
    _check_keys(tols, TOL_KEYS, "solver.tolerances")
    opts = []
    for key in SOLVER_KEYS:
        if key not in solver:
            continue
        v = solver[key]
        if key in ("grid_n", "refine_rounds"):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"solver.{key}: expected an integer")
        elif key == "budget":
            v = _num(v, "solver.budget")
        else:
            v = str(v)
        opts.append((key, v))
    tol_items = tuple(
        (k, int(v) if k == "max_iter" else _num(v, f"solver.tolerances.{k}")) for k, v in tols.items()
    )

    return ScenarioConfig(
        beta=_num(game["beta"], "game.beta"),
        k=_num(game["k"], "game.k"),
        issuers=tuple(issuers),
        edges_path=edges_path,
        edge_rows=edge_rows,
        users=tuple(users),
        solver=tuple(opts),
        tolerances=tol_items,
        base_dir=base_dir,
    )


def to_dict(cfg: ScenarioConfig) -> dict:
    doc: dict = {}
    if cfg.edges_path is not None:
        doc["network"] = {"edges": cfg.edges_path}
    else:
        doc["network"] = {"rows": [[s, d, w] for s, d, w in cfg.edge_rows]}
    if cfg.users:
        doc["users"] = {}
        for label, u in cfg.users:
            entry: dict = {"m": u.m}
            if u.bias:
                entry["bias"] = dict(u.bias)
            doc["users"][label] = entry
    doc["game"] = {"beta": cfg.beta, "k": cfg.k}
    doc["issuers"] = [
        {
            "label": s.label,
            "liquidity": {"mu": s.mu, "alpha": s.alpha, "offset": s.offset},
            "cost": {"c0": s.c0, "rho": s.rho},
        }
        for s in cfg.issuers
    ]
    if cfg.solver or cfg.tolerances:
        solver = dict(cfg.solver)
        if cfg.tolerances:
            solver["tolerances"] = dict(cfg.tolerances)
        doc["solver"] = solver
    return doc


def loads(text: str, base_dir: str = ".") -> ScenarioConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from None
    return from_dict(doc, base_dir)


def dumps(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(to_dict(cfg), sort_keys=False, default_flow_style=None)


def load(path: str) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), os.path.dirname(os.path.abspath(path)))


def load_network(cfg: ScenarioConfig) -> TradeNetwork:
    if cfg.edges_path is not None:
        path = cfg.edges_path
        if not os.path.isabs(path):
            path = os.path.join(cfg.base_dir, path)
        with open(path, encoding="utf-8", newline="") as fh:
            return load_edge_list(fh.read())
    text = "src,dst,weight\n" + "".join(f"{s},{d},{w!r}\n" for s, d, w in cfg.edge_rows)
    return load_edge_list(text)


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    """Turn a parsed document into a solver-ready scenario."""
    net = load_network(cfg)
    users = dict(cfg.users)
    unknown = [lab for lab in users if lab not in net.labels]
    if unknown:
        raise ConfigError(f"users not in the network: {unknown}")
    labels = [s.label for s in cfg.issuers]
    m = np.ones(net.n)
    bias = {lab: np.ones(net.n) for lab in labels}
    any_bias = {lab: False for lab in labels}
    for lab, u in users.items():
        i = net.index(lab)
        m[i] = u.m
        for iss, b in u.bias:
            if iss not in bias:
                raise ConfigError(f"users.{lab}.bias: unknown issuer {iss!r}")
            bias[iss][i] = b
            any_bias[iss] = True
    try:
        issuers = tuple(
            Issuer(
                s.label,
                LiquidityFn(s.mu, s.alpha, s.offset, bias[s.label] if any_bias[s.label] else None),
                CommitCostFn(s.c0, s.rho),
            )
            for s in cfg.issuers
        )
        tol = Tolerances(**dict(cfg.tolerances))
        return Scenario(net, UserVolumes(m), cfg.beta, cfg.k, issuers, tol)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
