"""Characteristic functions and graph scorers.

A characteristic function maps a coalition bitmask to a real payoff with
``v(0) == 0``.  :class:`CharacteristicFunction` wraps any such callable with
a memo table so that expensive scorers are evaluated once per coalition.
"""

from __future__ import annotations

import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Protocol, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyCoalition,
    EmptyDataset,
    IncompleteTable,
    InvalidTable,
)
from .graph import Graph, induced_subgraph, lift_mask, members

log = logging.getLogger(__name__)


class CharacteristicFunction:
    """Memoized payoff map over coalitions of ``n`` players."""

    def __init__(self, n: int, fn: Callable[[int], float], name: str = "game"):
        self.n = n
        self.name = name
        self._fn = fn
        self._cache: dict[int, float] = {0: 0.0}
        self._lock = threading.Lock()

    def __call__(self, mask: int) -> float:
        try:
            return self._cache[mask]
        except KeyError:
            pass
        if mask < 0 or mask >> self.n:
            raise ValueError(f"coalition {mask:#x} is outside {self.n} players")
        val = float(self._fn(mask))
        with self._lock:
            # first writer wins so concurrent fills agree
            return self._cache.setdefault(mask, val)

    def __repr__(self):
        return f"CharacteristicFunction(n={self.n}, name={self.name!r}, cached={len(self._cache)})"

    @property
    def evaluations(self) -> int:
        return len(self._cache) - 1

    def table(self, threads: int = 1) -> np.ndarray:
        """Dense payoff vector of length ``2**n`` indexed by mask."""
        size = 1 << self.n
        out = np.empty(size)
        if threads <= 1:
            for m in range(size):
                out[m] = self(m)
            return out
        chunks = np.array_split(np.arange(size), threads * 4)

        def fill(idx):
            for m in idx:
                out[m] = self(int(m))

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, chunks))
        return out

    def restrict(self, index: Sequence[int]) -> "CharacteristicFunction":
        """Game on the players ``index`` reindexed to ``0..len(index)-1``.

        Evaluations go through this object's memo, keyed by original masks.
        """
        index = list(index)
        return CharacteristicFunction(len(index), lambda m: self(lift_mask(m, index)),
                                      name=f"{self.name}|restricted")

    def __add__(self, other: "CharacteristicFunction") -> "CharacteristicFunction":
        if other.n != self.n:
            raise ValueError("games have different player counts")
        return CharacteristicFunction(self.n, lambda m: self(m) + other(m), name="sum")

    def scaled(self, c: float) -> "CharacteristicFunction":
        return CharacteristicFunction(self.n, lambda m: c * self(m), name=f"{c}*{self.name}")


def from_table(values: np.ndarray, name: str = "table") -> CharacteristicFunction:
    """Game backed by a dense vector of length ``2**n`` (entry 0 ignored)."""
    values = np.asarray(values, dtype=float)
    n = int(values.size).bit_length() - 1
    if values.size != 1 << n:
        raise InvalidTable(f"table length {values.size} is not a power of two")
    return CharacteristicFunction(n, lambda m: values[m], name=name)


def unanimity_game(n: int, t: int) -> CharacteristicFunction:
    """``v(S) = 1`` when ``t`` is a subset of ``S``, else 0."""
    if not t:
        raise EmptyCoalition("unanimity game needs a nonempty carrier")
    if t >> n:
        raise ValueError("carrier has players outside 0..n-1")
    return CharacteristicFunction(n, lambda s: 1.0 if s & t == t else 0.0, name=f"unanimity[{t:#x}]")


def tabular_game(n: int, entries: Mapping[int, float], default: float | None = None
                 ) -> CharacteristicFunction:
    """Lookup-backed game.

    ``entries`` must cover every nonempty coalition unless ``default`` is given.
    An entry for the empty coalition is accepted only if it is 0.
    """
    table = {}
    for k, val in entries.items():
        m = int(k)
        if m < 0 or m >> n:
            raise InvalidTable(f"coalition {m} outside {n} players")
        val = float(val)
        if m == 0 and val != 0.0:
            raise InvalidTable(f"v(empty) must be 0, table has {val}")
        table[m] = val
    if default is None:
        missing = (1 << n) - 1 - sum(1 for m in table if m)
        if missing:
            raise IncompleteTable(f"{missing} nonempty coalitions missing and no default given")
        return CharacteristicFunction(n, table.__getitem__, name="tabular")
    d = float(default)
    return CharacteristicFunction(n, lambda m: table.get(m, d), name="tabular")


def load_payoff_table(data: dict) -> CharacteristicFunction:
    """Parse payoff-table JSON ``{"n", "entries": {"<mask>": float}, "default"?}``."""
    try:
        n = int(data["n"])
        entries = {int(k): v for k, v in data["entries"].items()}
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InvalidTable(f"malformed payoff table: {exc}") from None
    return tabular_game(n, entries, data.get("default"))


def dump_payoff_table(v: CharacteristicFunction) -> dict:
    return {"n": v.n, "entries": {str(m): v(m) for m in range(1, 1 << v.n)}}


class GraphScorer(Protocol):
    """Anything mapping a graph to a class-probability vector."""

    class_count: int

    def forward(self, g: Graph, node: int | None = None) -> np.ndarray: ...


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - np.max(z)
    e = np.exp(z)
    return e / e.sum()


@dataclass
class ToyMPModel:
    """Small sum-aggregation message-passing classifier.

    Each layer maps ``h_u <- relu(W (h_u + sum of neighbour h_i))``; the
    readout pools node embeddings (mean or max), applies an affine map and a
    softmax.  ``layers[l]`` has shape ``(d_out, d_in)``.
    """

    layers: list[np.ndarray]
    readout_weight: np.ndarray
    readout_bias: np.ndarray
    pooling: str = "mean"
    name: str = field(default="toy")

    def __post_init__(self):
        self.layers = [np.asarray(w, dtype=float) for w in self.layers]
        self.readout_weight = np.asarray(self.readout_weight, dtype=float)
        self.readout_bias = np.asarray(self.readout_bias, dtype=float)
        if self.pooling not in ("mean", "max"):
            raise ValueError(f"pooling must be 'mean' or 'max', not {self.pooling!r}")
        width = self.input_dim
        for k, w in enumerate(self.layers):
            if w.ndim != 2 or w.shape[1] != width:
                raise DimensionMismatch(f"layer {k} expects input width {width}, has shape {w.shape}")
            width = w.shape[0]
        if self.readout_weight.shape != (self.readout_bias.size, width):
            raise DimensionMismatch(
                f"readout weight shape {self.readout_weight.shape} does not match "
                f"({self.readout_bias.size}, {width})")

    @property
    def input_dim(self) -> int:
        return self.layers[0].shape[1] if self.layers else self.readout_weight.shape[1]

    @property
    def class_count(self) -> int:
        return self.readout_bias.size

    def embed(self, g: Graph) -> np.ndarray:
        if g.features is None:
            raise DimensionMismatch("toy model needs node features")
        h = g.features
        if h.shape[1] != self.input_dim:
            raise DimensionMismatch(f"features have width {h.shape[1]}, model expects {self.input_dim}")
        prop = g.adjacency().astype(float) + np.eye(g.n)
        for w in self.layers:
            h = np.maximum(prop @ h @ w.T, 0.0)
        return h

    def forward(self, g: Graph, node: int | None = None) -> np.ndarray:
        """Class probabilities for ``g``.

        ``node`` switches the readout from pooling to indexing that node's
        embedding; a negative ``node`` means the target is absent and the
        readout sees a zero vector.
        """
        h = self.embed(g)
        if node is None:
            pooled = h.mean(axis=0) if self.pooling == "mean" else h.max(axis=0)
        elif node < 0:
            pooled = np.zeros(h.shape[1])
        else:
            pooled = h[node]
        return softmax(self.readout_weight @ pooled + self.readout_bias)

    __call__ = forward

    @classmethod
    def from_dict(cls, d: dict) -> "ToyMPModel":
        try:
            return cls(layers=d["layers"], readout_weight=d["readout"]["weight"],
                       readout_bias=d["readout"]["bias"], pooling=d.get("pooling", "mean"),
                       name=d.get("name", "toy"))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed model JSON: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "ToyMPModel":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {"name": self.name, "pooling": self.pooling,
                "layers": [w.tolist() for w in self.layers],
                "readout": {"weight": self.readout_weight.tolist(),
                            "bias": self.readout_bias.tolist()}}


def toy_forward(model: ToyMPModel, g: Graph) -> np.ndarray:
    return model.forward(g)


def baseline_expectation(f: GraphScorer, dataset: Sequence[Graph]) -> np.ndarray:
    """Mean predicted distribution over ``dataset``."""
    if not dataset:
        raise EmptyDataset("baseline expectation needs at least one graph")
    return np.mean([f.forward(g) for g in dataset], axis=0)


def predicted_class(probs: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the smallest tied index
    return int(np.argmax(probs))


def gstarx_char_fn(f: GraphScorer, g: Graph, f0: np.ndarray | None = None,
                   target: int | None = None) -> tuple[CharacteristicFunction, int]:
    """Normalized predicted-class probability as a game over the nodes of ``g``.

    ``v(S) = f(g[S])[c] - f0[c]`` where ``c`` is the class predicted on the
    whole graph.  ``g[S]`` may be disconnected; the scorer sees it as one
    graph.  With ``target`` the scorer reads out that node instead of pooling
    (node-classification mode).  Returns ``(v, c)``.
    """
    if f0 is None:
        f0 = np.zeros(f.class_count)
    f0 = np.asarray(f0, dtype=float)
    if f0.shape != (f.class_count,):
        raise DimensionMismatch(f"baseline has shape {f0.shape}, scorer has {f.class_count} classes")
    full = f.forward(g, node=target)
    c = predicted_class(full)
    offset = f0[c]

    def v(mask):
        return subgraph_probs(f, g, mask, target)[c] - offset

    game = CharacteristicFunction(g.n, v, name="gstarx")
    game._cache[g.full] = float(full[c] - offset)
    return game, c


def subgraph_probs(f: GraphScorer, g: Graph, mask: int, target: int | None = None) -> np.ndarray:
    """Scorer output on ``g[mask]``; in node mode the target is looked up by its new index."""
    sub, index = induced_subgraph(g, mask)
    if target is None:
        return f.forward(sub)
    return f.forward(sub, node=index.index(target) if mask >> target & 1 else -1)


def random_game(n: int, rng: np.random.Generator, scale: float = 1.0) -> CharacteristicFunction:
    """Game with i.i.d. normal payoffs on every nonempty coalition."""
    vals = np.concatenate([[0.0], rng.normal(scale=scale, size=(1 << n) - 1)])
    return from_table(vals, name="random")


def additive_game(weights: Sequence[float]) -> CharacteristicFunction:
    w = list(map(float, weights))
    return CharacteristicFunction(len(w), lambda m: sum(w[i] for i in members(m)), name="additive")
