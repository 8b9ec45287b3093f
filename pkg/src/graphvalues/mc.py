"""Monte-Carlo HN approximation for graphs too large for the exact solver.

Connected node subsets are sampled, the exact HN value is computed on each
induced subgraph, and every node's estimate is the mean of the values it
received.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NoConvergence
from .graph import EXACT_CAP, Graph, induced_subgraph, members, neighbor_closure
from .payoff import CharacteristicFunction
from .values import DEFAULT_MAX_SQUARINGS, DEFAULT_TOL, ValueVector, compute_hn

Sampler = Callable[[Graph, int, np.random.Generator], int]


@dataclass(frozen=True)
class McConfig:
    m: int = 10
    samples: int = 1
    seed: int = 0
    tau: float | None = None
    tol: float = DEFAULT_TOL
    max_squarings: int = DEFAULT_MAX_SQUARINGS

    def __post_init__(self):
        if not 1 <= self.m <= EXACT_CAP:
            raise ValueError(f"m must be in [1, {EXACT_CAP}], got {self.m}")
        if self.samples < 1:
            raise ValueError("need at least one sample")


def sample_subgraph(g: Graph, m: int, rng: np.random.Generator, size: int | None = None) -> int:
    """Random connected coalition of at most ``m`` nodes.

    A seed node is drawn uniformly, a target size uniformly from
    ``1..min(m, n)`` (unless ``size`` is given), and the set grows by adding
    a uniformly chosen frontier node until it reaches the target or the
    seed's component is exhausted.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    target = int(rng.integers(1, min(m, g.n) + 1)) if size is None else size
    s = 1 << int(rng.integers(g.n))
    for _ in range(target - 1):
        frontier = members(neighbor_closure(g, s) & ~s)
        if not frontier:
            break
        s |= 1 << frontier[int(rng.integers(len(frontier)))]
    return s


def sample_rng(seed: int, j: int) -> np.random.Generator:
    """Independent stream for sample ``j``; parallel and serial runs agree."""
    return np.random.default_rng([seed, j])


def compute_hn_mc(g: Graph, v: CharacteristicFunction, cfg: McConfig,
                  sampler: Sampler | None = None) -> ValueVector:
    """Average of exact HN values over sampled connected subgraphs.

    Nodes that are never sampled get 0 and are listed under ``coverage``.
    Samples whose solver fails to converge are dropped and counted.
    """
    sampler = sampler or sample_subgraph
    lists: list[list[float]] = [[] for _ in range(g.n)]
    dropped = 0
    for j in range(cfg.samples):
        s = sampler(g, cfg.m, sample_rng(cfg.seed, j))
        sub, index = induced_subgraph(g, s)
        try:
            vec = compute_hn(sub, v.restrict(index), cfg.tau, cfg.tol, cfg.max_squarings)
        except NoConvergence:
            dropped += 1
            continue
        for k, node in enumerate(index):
            lists[node].append(float(vec.phi[k]))
    phi = np.array([math.fsum(x) / len(x) if x else 0.0 for x in lists])
    stderr = [float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else None for x in lists]
    return ValueVector(phi, "hn-mc", tau=cfg.tau, seed=cfg.seed, samples=cfg.samples, extra={
        "m": cfg.m,
        "coverage": [i for i, x in enumerate(lists) if not x],
        "counts": [len(x) for x in lists],
        "stderr": stderr,
        "dropped": dropped,
    })
