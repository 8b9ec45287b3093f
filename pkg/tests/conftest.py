import json
import math
from pathlib import Path

import numpy as np
import pytest

from graphvalues.graph import Graph
from graphvalues.payoff import ToyMPModel

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture(name):
    return json.loads((FIXTURES / name).read_text())


@pytest.fixture
def toy_model():
    return ToyMPModel.from_dict(load_fixture("toy_model.json"))


@pytest.fixture
def path3():
    return Graph.from_dict(load_fixture("path3.json"))


@pytest.fixture
def graph8():
    return Graph.from_dict(load_fixture("graph8.json"))


def hand_forward(model_dict, n, edges, features, node=None):
    """Loop-only forward pass of the toy model; shares no code with the package."""
    nbrs = [[] for _ in range(n)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    h = [list(map(float, row)) for row in features]
    for w in model_dict["layers"]:
        new = []
        for u in range(n):
            agg = list(h[u])
            for j in nbrs[u]:
                agg = [a + b for a, b in zip(agg, h[j])]
            new.append([max(0.0, sum(wr[k] * agg[k] for k in range(len(agg)))) for wr in w])
        h = new
    width = len(h[0]) if n else 0
    if node is None:
        if model_dict.get("pooling", "mean") == "mean":
            pooled = [sum(h[u][k] for u in range(n)) / n for k in range(width)]
        else:
            pooled = [max(h[u][k] for u in range(n)) for k in range(width)]
    elif node < 0:
        pooled = [0.0] * width
    else:
        pooled = h[node]
    ro = model_dict["readout"]
    z = [sum(wr[k] * pooled[k] for k in range(width)) + b for wr, b in zip(ro["weight"], ro["bias"])]
    top = max(z)
    e = [math.exp(x - top) for x in z]
    s = sum(e)
    return [x / s for x in e]


def hand_induced(graph_dict, members):
    pos = {old: k for k, old in enumerate(members)}
    edges = [(pos[u], pos[v]) for u, v in graph_dict["edges"] if u in pos and v in pos]
    feats = [graph_dict["features"][i] for i in members]
    return len(members), edges, feats


def random_games_rng(seed):
    return np.random.default_rng(seed)
