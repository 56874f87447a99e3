import os

import numpy as np
import pytest

from netcurrency.config import build_scenario, load
from netcurrency.network import TradeNetwork, UserVolumes
from netcurrency.scenario import CommitCostFn, Issuer, LiquidityFn, Scenario

SCENARIOS = os.path.join(os.path.dirname(__file__), os.pardir, "scenarios")


def scenario_path(name: str) -> str:
    return os.path.abspath(os.path.join(SCENARIOS, name))


def load_scenario(name: str) -> Scenario:
    return build_scenario(load(scenario_path(name)))


def random_network(rng, n, density=0.35, wmax=0.3, undirected=False) -> TradeNetwork:
    w = rng.uniform(0.0, wmax, (n, n)) * (rng.random((n, n)) < density)
    if undirected:
        w = np.triu(w, 1)
        w = w + w.T
    np.fill_diagonal(w, 0.0)
    return TradeNetwork.from_matrix(w)


def random_scenario(rng, n=None, T=2, symmetric=False, k=None, beta_slack=None) -> Scenario:
    """Random valid instance; beta sits a random margin above its lower bound."""
    n = n or int(rng.integers(2, 11))
    net = random_network(rng, n)
    vols = UserVolumes(rng.uniform(0.5, 2.0, n))
    issuers = []
    for t in range(T):
        if symmetric:
            liq, cost = LiquidityFn(1.0, 0.5), CommitCostFn(1.0, 1.0)
        else:
            bias = rng.uniform(0.7, 1.3, n)
            liq = LiquidityFn(rng.uniform(0.5, 1.5), rng.uniform(0.3, 1.0), rng.uniform(0, 0.3), bias)
            cost = CommitCostFn(rng.uniform(0.5, 1.5), rng.uniform(0.5, 2.0))
        issuers.append(Issuer(f"c{t + 1}", liq, cost))
    probe = Scenario(net, vols, 1e6, 0.0, issuers)
    beta = probe.beta_bound() * (1.0 + (rng.uniform(0.01, 0.5) if beta_slack is None else beta_slack))
    k = rng.uniform(0.1, 0.8) * probe.k_max if k is None else k
    return Scenario(net, vols, beta, k, issuers)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
