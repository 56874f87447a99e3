import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcurrency.errors import (
    BetaTooSmall,
    DecayTooLarge,
    DuplicateEdge,
    NegativeWeight,
    NodeSetMismatch,
    ParseError,
    SelfLoop,
)
from netcurrency.network import (
    BETA_MARGIN,
    Integration,
    TradeNetwork,
    UserVolumes,
    adjusted_katz,
    beta_lower_bound_T,
    beta_lower_bound_two,
    check_beta,
    is_more_integrated,
    katz_bonacich,
    load_edge_list,
    to_edge_list,
)
from netcurrency.scenario import LiquidityFn

from conftest import random_network, scenario_path


def neumann(w, lam, rhs, tol=1e-13):
    out = np.zeros_like(rhs, dtype=float)
    term = np.asarray(rhs, dtype=float)
    for _ in range(100_000):
        out += term
        term = lam * (w @ term)
        if np.abs(term).max() <= tol:
            return out + term
    raise AssertionError("series did not converge")


class TestTradeNetwork:
    def test_rejects_diagonal(self):
        with pytest.raises(ValueError):
            TradeNetwork.from_matrix([[0.1, 0], [0, 0]])

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            TradeNetwork.from_matrix([[0, -0.1], [0, 0]])

    def test_rejects_duplicate_labels(self):
        with pytest.raises(ValueError):
            TradeNetwork(("a", "a"), np.zeros((2, 2)))

    def test_immutable(self):
        net = TradeNetwork.from_matrix(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            net.w[0, 1] = 1.0

    def test_with_weight_copies(self):
        net = TradeNetwork.from_matrix(np.zeros((2, 2)))
        net2 = net.with_weight("1", "2", 0.5)
        assert net.w[0, 1] == 0 and net2.w[0, 1] == 0.5
        assert net != net2 and net == TradeNetwork.from_matrix(np.zeros((2, 2)))


class TestUserVolumes:
    def test_total(self):
        v = UserVolumes([1.0, 2.5, 0.5])
        assert v.M == 4.0

    def test_positive(self):
        with pytest.raises(ValueError):
            UserVolumes([1.0, 0.0])

    def test_scaled(self):
        assert UserVolumes([1.0, 2.0]).scaled(1.5).M == 4.5


class TestLoadEdgeList:
    def test_two_node(self):
        net = load_edge_list("src,dst,weight\nA,B,0.25\nB,A,0.25")
        assert net.labels == ("A", "B")
        np.testing.assert_array_equal(net.w, [[0, 0.25], [0.25, 0]])

    def test_self_loop(self):
        with pytest.raises(SelfLoop) as info:
            load_edge_list("src,dst,weight\nA,A,0.1\n")
        assert info.value.line == 2

    def test_duplicate(self):
        with pytest.raises(DuplicateEdge):
            load_edge_list("src,dst,weight\nA,B,0.1\nA,B,0.2\n")

    def test_negative(self):
        with pytest.raises(NegativeWeight):
            load_edge_list("src,dst,weight\nA,B,-0.1\n")

    @pytest.mark.parametrize(
        "text",
        ["from,to,w\nA,B,1\n", "src,dst,weight\nA,B\n", "src,dst,weight\nA,B,abc\n", "src,dst,weight\nA,B,nan\n", ""],
    )
    def test_parse_errors(self, text):
        with pytest.raises(ParseError):
            load_edge_list(text)

    def test_five_node_star(self):
        rows = "".join(f"C,L{i},0.125\nL{i},C,0.125\n" for i in range(1, 5))
        net = load_edge_list("src,dst,weight\n" + rows)
        assert net.n == 5 and net.labels[0] == "C"
        assert net.out_degree()[0] == 4
        assert net.spectral_radius() == pytest.approx(0.125 * 2, abs=1e-10)

    def test_first_appearance_order_and_crlf(self):
        net = load_edge_list("src,dst,weight\r\nz,a,1\r\nm,z,2\r\n")
        assert net.labels == ("z", "a", "m")
        assert net.w[net.index("m"), net.index("z")] == 2

    def test_blank_lines_skipped(self):
        assert load_edge_list("src,dst,weight\nA,B,1\n\n").n == 2

    def test_round_trip(self, rng):
        net = random_network(rng, 7)
        back = load_edge_list(to_edge_list(net))
        # isolated nodes cannot appear in an edge list
        keep = [i for i in range(net.n) if net.w[i].any() or net.w[:, i].any()]
        order = [back.index(net.labels[i]) for i in keep]
        np.testing.assert_array_equal(back.w[np.ix_(order, order)], net.w[np.ix_(keep, keep)])

    def test_fixture_star(self):
        net = load_edge_list(open(scenario_path("star9.csv")).read())
        assert net.n == 9
        assert net.out_degree()[net.index("5")] == 8


class TestKatz:
    def test_empty_network(self):
        np.testing.assert_array_equal(katz_bonacich(TradeNetwork.from_matrix(np.zeros((3, 3))), 0.9), np.ones(3))

    def test_two_node(self):
        net = TradeNetwork.from_matrix([[0, 0.5], [0.5, 0]])
        np.testing.assert_allclose(katz_bonacich(net, 0.5), [4 / 3, 4 / 3], rtol=1e-14)

    def test_star(self):
        net = load_edge_list(open(scenario_path("star9.csv")).read())
        k = katz_bonacich(net, 1 / 2.1)
        c = net.index("5")
        leaves = np.delete(k, c)
        assert k[c] > leaves.max()
        np.testing.assert_allclose(leaves, leaves[0], rtol=1e-14)
        np.testing.assert_allclose(k, neumann(net.w, 1 / 2.1, np.ones(9)), rtol=1e-12)

    def test_decay_too_large(self):
        net = TradeNetwork.from_matrix([[0, 0.5], [0.5, 0]])
        with pytest.raises(DecayTooLarge) as info:
            katz_bonacich(net, 2.0)
        assert info.value.limit == pytest.approx(2.0)

    def test_decay_must_be_positive(self):
        with pytest.raises(ValueError):
            katz_bonacich(TradeNetwork.from_matrix(np.zeros((2, 2))), 0.0)

    def test_at_least_one(self, rng):
        for _ in range(20):
            net = random_network(rng, 8)
            r = net.spectral_radius()
            lam = 0.9 / r if r > 0 else 1.0
            assert katz_bonacich(net, lam).min() >= 1.0

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(0.1, 0.9), st.floats(0.1, 0.9))
    def test_monotone_in_decay(self, seed, a, b):
        net = random_network(np.random.default_rng(seed), 8)
        r = net.spectral_radius()
        if r == 0:
            return
        lo, hi = sorted((a / r, b / r))
        assert (katz_bonacich(net, hi) >= katz_bonacich(net, lo) - 1e-10).all()

    def test_adding_edge_raises_total(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 11))
            net = random_network(rng, n, wmax=0.15)
            i, j = rng.choice(n, 2, replace=False)
            net2 = net.with_weight(net.labels[i], net.labels[j], net.w[i, j] + 0.05)
            lam = 0.8 / max(net2.spectral_radius(), 1e-3)
            assert katz_bonacich(net2, lam).sum() > katz_bonacich(net, lam).sum()

    def test_undirected_inverse_symmetric(self, rng):
        net = random_network(rng, 8, undirected=True)
        lam = 0.8 / net.spectral_radius()
        A = np.linalg.inv(np.eye(8) - lam * net.w)
        np.testing.assert_allclose(A, A.T, atol=1e-12)
        np.testing.assert_allclose(A.sum(axis=0), katz_bonacich(net, lam), rtol=1e-12)


class TestAdjustedKatz:
    def test_zero_gamma(self, rng):
        net = random_network(rng, 6)
        assert not adjusted_katz(net, net.spectral_radius() + 1, np.zeros(6)).any()

    def test_constant_gamma(self, rng):
        net = random_network(rng, 6)
        beta = net.spectral_radius() + 0.5
        np.testing.assert_allclose(adjusted_katz(net, beta, np.full(6, -0.3)), -0.3 * katz_bonacich(net, 1 / beta), rtol=1e-12)

    def test_random_gamma_vs_series(self, rng):
        net = random_network(rng, 6)
        beta = net.spectral_radius() * 1.3 + 0.1
        gamma = rng.normal(size=6)
        np.testing.assert_allclose(adjusted_katz(net, beta, gamma), neumann(net.w, 1 / beta, gamma), atol=1e-11)

    def test_linear(self, rng):
        net = random_network(rng, 7)
        beta = net.spectral_radius() + 0.2
        g1, g2 = rng.normal(size=7), rng.normal(size=7)
        lhs = adjusted_katz(net, beta, g1 + g2)
        rhs = adjusted_katz(net, beta, g1) + adjusted_katz(net, beta, g2)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_beta_too_small(self):
        net = TradeNetwork.from_matrix([[0, 0.5], [0.5, 0]])
        with pytest.raises(BetaTooSmall):
            adjusted_katz(net, 0.5, np.ones(2))
        with pytest.raises(BetaTooSmall):
            check_beta(net, 0.5 * (1 + BETA_MARGIN / 2))
        check_beta(net, 0.51)


class TestBetaBounds:
    def test_empty_network(self):
        net = TradeNetwork.from_matrix(np.zeros((3, 3)))
        vols = UserVolumes.uniform(3)
        f = LiquidityFn(1.0, 0.5)
        assert beta_lower_bound_two(net, vols, f, f) == pytest.approx(1.0)

    def test_six_node_formula(self):
        net = load_edge_list(open(scenario_path("six_node_w.csv")).read())
        vols = UserVolumes.uniform(6)
        bound = beta_lower_bound_two(net, vols, LiquidityFn(1.0, 0.6), LiquidityFn(1.1, 0.6))
        assert bound == pytest.approx(net.w.sum(axis=1).max() + 1.1)

    def test_exceeds_radius(self, rng):
        for _ in range(10):
            net = random_network(rng, 6, wmax=1.0)
            f = LiquidityFn(1.0, 0.5)
            assert beta_lower_bound_two(net, UserVolumes.uniform(6), f, f) > net.spectral_radius()

    def test_T_reduces_to_two(self, rng):
        net = random_network(rng, 5)
        vols = UserVolumes(rng.uniform(0.5, 2, 5))
        fa, fb = LiquidityFn(1.0, 0.5, bias=rng.uniform(0.5, 1.5, 5)), LiquidityFn(1.4, 0.7)
        assert beta_lower_bound_T(net, vols, [fa, fb]) == pytest.approx(beta_lower_bound_two(net, vols, fa, fb))

    def test_star_example_beta_valid(self):
        net = load_edge_list(open(scenario_path("star9.csv")).read())
        fs = [LiquidityFn(0.7**t, 0.4) for t in range(5)]
        assert beta_lower_bound_T(net, UserVolumes.uniform(9), fs) <= 2.1

    def test_identical_f_no_network(self):
        net = TradeNetwork.from_matrix(np.zeros((3, 3)))
        f = LiquidityFn(1.0, 0.5, offset=0.2)
        assert beta_lower_bound_T(net, UserVolumes.uniform(3), [f, f, f]) == pytest.approx(1.0)

    def test_bound_guarantees_nonnegative_usage(self, rng):
        from conftest import random_scenario
        from netcurrency.allocation import allocate_two

        for _ in range(20):
            scn = random_scenario(rng, beta_slack=0.0)
            for e_a, e_b in [(1, 0), (0, 1), (0.5, 0.5), (1, 1), (0, 0)]:
                x = allocate_two(scn, e_a, e_b).x
                assert x.min() >= -1e-12
                assert (x <= scn.m[:, None] + 1e-12).all()


class TestIntegration:
    def test_equal(self, rng):
        net = random_network(rng, 5)
        assert is_more_integrated(net, net) is Integration.EQUAL

    def test_fixture_sequence(self):
        nets = [load_edge_list(open(scenario_path(f"six_node_{s}.csv")).read()) for s in ("w", "w1", "w2")]
        assert is_more_integrated(nets[1], nets[0]) is Integration.STRICTLY_MORE
        assert is_more_integrated(nets[2], nets[1]) is Integration.STRICTLY_MORE
        assert is_more_integrated(nets[0], nets[1]) is Integration.INCOMPARABLE

    def test_up_and_down(self):
        w = TradeNetwork.from_matrix([[0, 0.2, 0.2], [0, 0, 0], [0, 0, 0]])
        w2 = w.with_weight("1", "2", 0.3).with_weight("1", "3", 0.1)
        assert is_more_integrated(w2, w) is Integration.INCOMPARABLE

    def test_matches_by_label(self):
        a = TradeNetwork(("x", "y"), np.array([[0, 0.1], [0, 0]]))
        b = TradeNetwork(("y", "x"), np.array([[0, 0.0], [0.2, 0]]))
        assert is_more_integrated(b, a) is Integration.STRICTLY_MORE

    def test_node_mismatch(self):
        a = TradeNetwork(("x", "y"), np.zeros((2, 2)))
        b = TradeNetwork(("x", "z"), np.zeros((2, 2)))
        with pytest.raises(NodeSetMismatch):
            is_more_integrated(a, b)


def test_six_node_radius_below_two():
    for s in ("w", "w1", "w2"):
        net = load_edge_list(open(scenario_path(f"six_node_{s}.csv")).read())
        assert net.spectral_radius() < 2.0
        assert not math.isnan(net.spectral_radius())
