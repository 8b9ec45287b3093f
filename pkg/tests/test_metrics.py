import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphvalues.errors import AllZeroScores, EmptyCoalition
from graphvalues.graph import Graph, path_graph
from graphvalues.metrics import (
    compute_metrics,
    entropy_sparsity,
    fidelity,
    h_fidelity,
    harmonic,
    inv_fidelity,
    n_fidelity,
    n_inv_fidelity,
    sparsity,
)

from conftest import hand_forward, hand_induced, load_fixture


class ConstantScorer:
    class_count = 2

    def forward(self, g, node=None):
        return np.array([0.3, 0.7])


def test_fidelity_empty_selection(toy_model, path3):
    assert fidelity(toy_model, path3, 0, 0) == 0.0


def test_fidelity_full_selection_uses_baseline(toy_model, path3):
    full = toy_model.forward(path3)[0]
    assert fidelity(toy_model, path3, 0b111, 0) == full
    assert fidelity(toy_model, path3, 0b111, 0, f0=np.array([0.25, 0.75])) == full - 0.25


def test_inv_fidelity_full_selection(toy_model, path3):
    assert inv_fidelity(toy_model, path3, 0b111, 0) == 0.0
    with pytest.raises(EmptyCoalition):
        inv_fidelity(toy_model, path3, 0, 0)


def test_constant_scorer_zero():
    g = path_graph(4)
    for sel in range(1, 15):
        assert fidelity(ConstantScorer(), g, sel, 1) == 0.0
        assert inv_fidelity(ConstantScorer(), g, sel, 1) == 0.0


def test_fidelity_against_hand_forward(toy_model):
    gd = load_fixture("graph8.json")
    g = Graph.from_dict(gd)
    md = load_fixture("toy_model.json")
    full = hand_forward(md, 8, gd["edges"], gd["features"])
    c = int(np.argmax(full))
    sel = [1, 2, 6]
    rest = [i for i in range(8) if i not in sel]
    mask = sum(1 << i for i in sel)
    fid = full[c] - hand_forward(md, *hand_induced(gd, rest))[c]
    inv = full[c] - hand_forward(md, *hand_induced(gd, sel))[c]
    assert fidelity(toy_model, g, mask, c) == pytest.approx(fid, abs=1e-12)
    assert inv_fidelity(toy_model, g, mask, c) == pytest.approx(inv, abs=1e-12)


def test_node_mode_fidelity(toy_model, graph8):
    # removing the target node leaves the readout with a zero embedding
    zero = toy_model.forward(graph8, node=-1)
    full = toy_model.forward(graph8, node=3)
    assert fidelity(toy_model, graph8, 1 << 3, 0, target=3) == pytest.approx(full[0] - zero[0], abs=1e-15)


def test_sparsity_examples():
    g = path_graph(4)
    assert sparsity(g, 0) == 1.0
    assert sparsity(g, g.full) == 0.0
    assert sparsity(g, 0b0100) == 0.75


def test_harmonic_examples():
    assert harmonic(0.0, 0.0) == 0.5
    assert harmonic(1.0, -1.0) == 1.0
    assert harmonic(-1.0, 1.0) == 0.0


def test_h_fidelity_composition():
    g = path_graph(4)
    m1 = n_fidelity(0.4, g, 0b0001)
    m2 = n_inv_fidelity(0.2, g, 0b0001)
    assert m1 == pytest.approx(0.3) and m2 == pytest.approx(0.05)
    assert h_fidelity(0.4, 0.2, g, 0b0001) == pytest.approx(1.3 * 0.95 / 2.25, abs=1e-15)


unit = st.floats(-1, 1, allow_nan=False)


@settings(max_examples=300)
@given(unit, unit)
def test_h_fidelity_bounds(m1, m2):
    assert 0.0 <= harmonic(m1, m2) <= 1.0


def test_h_fidelity_monotone_grid():
    eps = 1e-6
    grid = np.linspace(-0.95, 0.95, 39)
    for m1 in grid:
        for m2 in grid:
            assert harmonic(m1 + eps, m2) > harmonic(m1, m2)
            assert harmonic(m1, m2 + eps) < harmonic(m1, m2)


def test_entropy_examples():
    assert entropy_sparsity(np.ones(25)) == pytest.approx(3.2189, abs=5e-5)
    assert entropy_sparsity([0, 0, 3.0, 0]) == 0.0
    six = np.zeros(24)
    six[:6] = 0.2
    assert entropy_sparsity(six) == pytest.approx(math.log(6), abs=1e-12)
    with pytest.raises(AllZeroScores):
        entropy_sparsity(np.zeros(4))


def test_entropy_signed_scores_use_magnitudes():
    assert entropy_sparsity([1.0, -1.0]) == pytest.approx(math.log(2), abs=1e-15)


scores = st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=40).filter(
    lambda xs: any(abs(x) > 1e-6 for x in xs))


@settings(max_examples=200)
@given(scores, st.randoms())
def test_entropy_range_and_permutation(xs, rnd):
    h = entropy_sparsity(xs)
    assert -1e-12 <= h <= math.log(len(xs)) + 1e-12
    ys = list(xs)
    rnd.shuffle(ys)
    assert entropy_sparsity(ys) == pytest.approx(h, abs=1e-12)


@settings(max_examples=100)
@given(st.integers(1, 50), st.floats(0.01, 100))
def test_entropy_uniform_is_max(n, c):
    assert entropy_sparsity([c] * n) == pytest.approx(math.log(n), abs=1e-12)


def test_compute_metrics_flags(toy_model, path3):
    full = compute_metrics(toy_model, path3, 0b111, 0, phi=[0.1, -0.2, 0.3])
    assert "degenerate_removal" in full.flags and "entropy_uses_abs" in full.flags
    assert full.inv_fidelity == 0.0 and full.sparsity == 0.0
    zero = compute_metrics(toy_model, path3, 0b001, 0, phi=[0.0, 0.0, 0.0])
    assert zero.entropy_sparsity is None and "all_zero_scores" in zero.flags
    d = compute_metrics(toy_model, path3, 0b001, 0).to_dict(4)
    assert d["sparsity"] == round(2 / 3, 4)
