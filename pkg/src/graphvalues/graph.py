"""Graph and coalition primitives.

Coalitions are plain ``int`` bitmasks over node indices: bit ``i`` set means
node ``i`` is a member.  The empty coalition is ``0``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyCoalition, InvalidGraph, NodeOutOfRange

#: Default upper bound on ``n`` for algorithms that materialize 2^n tables.
EXACT_CAP = 22


def mask_of(nodes: Iterable[int]) -> int:
    m = 0
    for i in nodes:
        m |= 1 << int(i)
    return m


def members(mask: int) -> list[int]:
    """Node indices in ``mask``, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph with optional node features.

    ``nbr[i]`` is the bitmask of neighbours of node ``i``.  Build instances
    with :meth:`from_edges` or :meth:`from_json` rather than directly.
    """

    n: int
    nbr: tuple[int, ...]
    features: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidGraph("graph needs at least one node")
        if len(self.nbr) != self.n:
            raise InvalidGraph("neighbour table length differs from n")
        full = (1 << self.n) - 1
        for i, m in enumerate(self.nbr):
            if m & ~full:
                raise InvalidGraph(f"node {i} has a neighbour outside 0..{self.n - 1}")
            if m >> i & 1:
                raise InvalidGraph(f"self-loop on node {i}")
            for j in members(m):
                if not self.nbr[j] >> i & 1:
                    raise InvalidGraph(f"adjacency not symmetric for ({i}, {j})")
        if self.features is not None:
            x = np.asarray(self.features, dtype=float)
            if x.ndim != 2 or x.shape[0] != self.n:
                raise InvalidGraph(f"features must have shape (n, d); got {x.shape}")
            x.setflags(write=False)
            object.__setattr__(self, "features", x)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], features=None) -> "Graph":
        """Build a graph from an edge list.

        A repeated edge is an error.  An edge listed in both orientations is
        read as directed input and symmetrized with a warning.
        """
        nbr = [0] * n
        seen = set()
        for e in edges:
            if len(e) != 2:
                raise InvalidGraph(f"edge {e!r} is not a pair")
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidGraph(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise InvalidGraph(f"self-loop on node {u}")
            if (u, v) in seen:
                raise InvalidGraph(f"duplicate edge ({u}, {v})")
            if (v, u) in seen:
                warnings.warn(f"edge ({u}, {v}) given in both directions; treating as one",
                              stacklevel=2)
            seen.add((u, v))
            nbr[u] |= 1 << v
            nbr[v] |= 1 << u
        return cls(n, tuple(nbr), features)

    @classmethod
    def from_dict(cls, d: dict) -> "Graph":
        try:
            n = int(d["n"])
            edges = d.get("edges", [])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidGraph(f"graph JSON needs an integer 'n': {exc}") from None
        return cls.from_edges(n, edges, d.get("features"))

    @classmethod
    def from_json(cls, text: str) -> "Graph":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        d = {"n": self.n, "edges": [list(e) for e in self.edges()]}
        if self.features is not None:
            d["features"] = self.features.tolist()
        return d

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in members(self.nbr[i]) if i < j]

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        for i, j in self.edges():
            a[i, j] = a[j, i] = True
        return a

    def check_node(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise NodeOutOfRange(f"node {i} not in graph with n={self.n}")


def neighbor_closure(g: Graph, s: int) -> int:
    """``s`` together with every node adjacent to a member of ``s``."""
    out = s
    for i in members(s):
        out |= g.nbr[i]
    return out


def component_of(g: Graph, s: int, seed: int) -> int:
    """Connected component of ``g[s]`` containing node ``seed``."""
    comp = 1 << seed
    frontier = comp
    while frontier:
        grown = 0
        for i in members(frontier):
            grown |= g.nbr[i]
        frontier = grown & s & ~comp
        comp |= frontier
    return comp


def partition(g: Graph, s: int) -> list[int]:
    """Connected components of ``g[s]``, ordered by smallest member."""
    parts = []
    rest = s
    while rest:
        c = component_of(g, s, lowest_bit(rest))
        parts.append(c)
        rest &= ~c
    return parts


def is_connected(g: Graph, s: int) -> bool:
    if not s:
        raise EmptyCoalition("connectivity of the empty coalition is undefined")
    return component_of(g, s, lowest_bit(s)) == s


def induced_subgraph(g: Graph, s: int) -> tuple[Graph, list[int]]:
    """Subgraph induced on ``s``, reindexed in original order.

    Returns the subgraph and the index map ``new -> old``.
    """
    if not s:
        raise EmptyCoalition("cannot induce a subgraph on the empty coalition")
    index = members(s)
    pos = {old: new for new, old in enumerate(index)}
    nbr = []
    for old in index:
        m = 0
        for j in members(g.nbr[old] & s):
            m |= 1 << pos[j]
        nbr.append(m)
    feats = None if g.features is None else g.features[index]
    return Graph(len(index), tuple(nbr), feats), index


def lift_mask(local: int, index: Sequence[int]) -> int:
    """Map a coalition on a reindexed subgraph back to original indices."""
    out = 0
    for k in members(local):
        out |= 1 << index[k]
    return out


def hop_ball(g: Graph, i: int, hops: int) -> int:
    """Nodes within ``hops`` edges of ``i`` (BFS)."""
    g.check_node(i)
    ball = frontier = 1 << i
    for _ in range(hops):
        grown = 0
        for j in members(frontier):
            grown |= g.nbr[j]
        frontier = grown & ~ball
        if not frontier:
            break
        ball |= frontier
    return ball


def path_graph(n: int, features=None) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], features)


def complete_graph(n: int, features=None) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)], features)


def empty_graph(n: int, features=None) -> Graph:
    return Graph.from_edges(n, [], features)


def random_graph(n: int, p: float, rng: np.random.Generator, features=None) -> Graph:
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return Graph.from_edges(n, edges, features)
