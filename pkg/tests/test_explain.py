import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphvalues.errors import NodeOutOfRange
from graphvalues.explain import ego_convert, gstarx_explain, lhop_restrict, lhop_value, top_k
from graphvalues.graph import Graph, members, path_graph, random_graph
from graphvalues.mc import McConfig, compute_hn_mc
from graphvalues.payoff import gstarx_char_fn, random_game
from graphvalues.values import compute_hn, myerson

from conftest import hand_forward, hand_induced, load_fixture


def test_top_k_small_gamma():
    assert top_k([0.1, 0.5, 0.2], 0.34) == ([1], False)


def test_top_k_floors_to_one():
    assert top_k([0.1, 0.5, 0.2], 0.2) == ([1], True)


def test_top_k_ties_lowest_index():
    assert top_k([0.3] * 6, 0.5)[0] == [0, 1, 2]


def test_top_k_float_products():
    # 0.3 * 10 is 2.9999999999999996 in binary floating point
    assert len(top_k(np.arange(10.0), 0.3)[0]) == 3


@pytest.mark.parametrize("gamma", [0.0, 1.0, -0.2, 1.5])
def test_top_k_gamma_range(gamma):
    with pytest.raises(ValueError):
        top_k([1.0, 2.0], gamma)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=30),
       st.floats(0.01, 0.99), st.floats(0.01, 100))
def test_top_k_scale_invariant(phi, gamma, c):
    sel, _ = top_k(phi, gamma)
    assert sel == top_k([c * x for x in phi], gamma)[0]
    assert len(sel) == max(1, int(np.floor(gamma * len(phi) + 1e-9)))
    assert len(set(sel)) == len(sel) and all(0 <= i < len(phi) for i in sel)


def test_explain_path3_single_node(toy_model, path3):
    rep = gstarx_explain(path3, toy_model, gamma=0.34)
    assert len(rep.selected) == 1
    assert rep.selected[0] == int(np.argmax(rep.phi.phi))
    assert rep.phi.method == "hn"


def test_explain_path3_matches_golden_game(toy_model, path3):
    golden = load_fixture("path3_golden.json")
    v, c = gstarx_char_fn(toy_model, path3)
    assert c == golden["c_star"]
    rep = gstarx_explain(path3, toy_model, gamma=0.5)
    from graphvalues.oracle import hn_bruteforce
    from graphvalues.payoff import from_table
    table = np.zeros(8)
    for k, x in golden["v_table"].items():
        table[int(k)] = x
    np.testing.assert_allclose(rep.phi.phi, hn_bruteforce(path3, from_table(table)), atol=1e-8)


def test_explain_graph8_golden_selection(toy_model, graph8):
    golden = load_fixture("golden_explain_graph8.json")
    from graphvalues.payoff import baseline_expectation
    data = [Graph.from_dict(d) for d in load_fixture("dataset.json")["graphs"]]
    rep = gstarx_explain(graph8, toy_model, baseline_expectation(toy_model, data), gamma=0.5,
                         with_metrics=True)
    assert rep.selected == golden["selected"]
    assert rep.c_star == golden["c_star"]


def test_explain_uses_mc_above_m(toy_model):
    g = Graph.from_dict(load_fixture("graph12.json"))
    rep = gstarx_explain(g, toy_model, m=5, samples=12, gamma=0.25, seed=1)
    assert rep.phi.method == "hn-mc"
    assert rep.phi.samples == 12
    assert len(rep.selected) == 3


def test_exact_and_mc_selection_agree():
    # near-additive game: subgame values barely depend on the sample, so the
    # MC error is small next to the gaps between scores
    rng = np.random.default_rng(0)
    g = Graph.from_dict(load_fixture("bench6.json"))
    base = np.array([0.9, 0.1, 0.5, 0.7, 0.3, 0.0])
    noise = np.concatenate([[0.0], 0.01 * rng.normal(size=63)])
    from graphvalues.payoff import from_table
    v = from_table(np.array([base[members(m)].sum() for m in range(64)]) + noise)
    exact = compute_hn(g, v, 0.01)
    mc = compute_hn_mc(g, v, McConfig(m=6, samples=2000, seed=0, tau=0.01))
    err = float(np.max(np.abs(mc.phi - exact.phi)))
    ranked = np.sort(exact.phi)[::-1]
    checked = 0
    for gamma in (0.17, 0.34, 0.5, 0.67, 0.84):
        k = len(top_k(exact, gamma)[0])
        if ranked[k - 1] - ranked[k] > 2 * err:
            assert set(top_k(exact, gamma)[0]) == set(top_k(mc, gamma)[0])
            checked += 1
    assert checked >= 3


def test_report_json_layout(toy_model, path3):
    rep = gstarx_explain(path3, toy_model, gamma=0.5, with_metrics=True)
    d = json.loads(rep.to_json())
    assert {"selected", "gamma", "phi", "c_star", "metrics", "coverage"} <= set(d)
    assert d["controls"]["fidelity_empty_selection"] == 0.0


def test_report_flags_floor(toy_model, path3):
    rep = gstarx_explain(path3, toy_model, gamma=0.1)
    assert rep.flags == ["k_floored_to_1"]


def test_ego_star_center():
    star = Graph.from_edges(5, [(0, k) for k in range(1, 5)])
    sub, pos = ego_convert(star, 0, 1)
    assert sub.n == 5 and pos == 0


def test_ego_path_depth_two():
    g = path_graph(5)
    sub, pos = ego_convert(g, 0, 2)
    assert sub.n == 3 and sub.edges() == [(0, 1), (1, 2)] and pos == 0


def test_ego_isolated_node():
    g = Graph.from_edges(3, [(0, 1)])
    sub, pos = ego_convert(g, 2, 4)
    assert sub.n == 1 and pos == 0


def test_ego_errors():
    with pytest.raises(NodeOutOfRange):
        ego_convert(path_graph(3), 5, 1)
    with pytest.raises(ValueError):
        ego_convert(path_graph(3), 0, 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 9), st.integers(0, 10_000), st.integers(1, 4))
def test_ego_contains_center(n, seed, hops):
    g = random_graph(n, 0.3, np.random.default_rng(seed))
    u = seed % n
    sub, pos = ego_convert(g, u, hops)
    assert sub.n <= n
    assert 0 <= pos < sub.n


def test_ego_node_readout_matches_hand_forward(toy_model):
    gd = load_fixture("graph8.json")
    g = Graph.from_dict(gd)
    sub, pos = ego_convert(g, 4, 1)
    nodes = members(lhop_restrict(g, 4, 1))
    expected = hand_forward(load_fixture("toy_model.json"), *hand_induced(gd, nodes), node=pos)
    np.testing.assert_allclose(toy_model.forward(sub, node=pos), expected, atol=1e-12)


def test_lhop_restrict_examples():
    g = path_graph(3)
    assert lhop_restrict(g, 1, 1) == 0b111
    assert lhop_restrict(g, 1, 0) == 0b010
    g = path_graph(6)
    assert lhop_restrict(g, 0, 5) == g.full
    with pytest.raises(NodeOutOfRange):
        lhop_restrict(g, 6, 1)


def test_lhop_value_large_radius_is_plain_value():
    rng = np.random.default_rng(3)
    g = random_graph(6, 0.5, rng)
    v = random_game(6, rng)
    full = myerson(g, v).phi
    for i in range(6):
        assert lhop_value(g, v, i, 6, myerson) == pytest.approx(full[i], abs=1e-12)


def test_lhop_value_shrinks_game():
    g = path_graph(5)
    v = random_game(5, np.random.default_rng(0))
    sub_val = lhop_value(g, v, 0, 1, lambda gg, vv: compute_hn(gg, vv, 0.01))
    from graphvalues.graph import induced_subgraph
    sub, index = induced_subgraph(g, 0b00011)
    assert sub_val == pytest.approx(compute_hn(sub, v.restrict(index), 0.01).phi[0], abs=1e-12)
