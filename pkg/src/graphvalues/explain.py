"""Node-level explanation pipeline: score nodes with the HN value, keep the top ones."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import Graph, hop_ball, induced_subgraph, mask_of
from .mc import McConfig, compute_hn_mc
from .metrics import MetricsBlock, compute_metrics, fidelity
from .payoff import CharacteristicFunction, GraphScorer, gstarx_char_fn
from .values import ValueVector, compute_hn

log = logging.getLogger(__name__)

#: Digits kept for floats in serialized reports, so output is stable across BLAS builds.
REPORT_DIGITS = 10


@dataclass
class ExplanationReport:
    selected: list[int]
    gamma: float
    phi: ValueVector
    c_star: int
    metrics: MetricsBlock | None = None
    controls: dict = field(default_factory=dict)
    coverage: list[int] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    @property
    def mask(self) -> int:
        return mask_of(self.selected)

    def to_dict(self, digits: int | None = REPORT_DIGITS) -> dict:
        r = (lambda x: x) if digits is None else (lambda x: round(x, digits))
        d = {
            "selected": self.selected,
            "gamma": self.gamma,
            "phi": self.phi.to_dict(digits),
            "c_star": self.c_star,
            "metrics": None if self.metrics is None else self.metrics.to_dict(digits),
            "coverage": self.coverage,
        }
        if self.controls:
            d["controls"] = {k: r(x) for k, x in self.controls.items()}
        if self.flags:
            d["flags"] = self.flags
        return d

    def to_json(self, digits: int | None = REPORT_DIGITS) -> str:
        return json.dumps(self.to_dict(digits), indent=2, sort_keys=True)


def top_k(phi, gamma: float) -> tuple[list[int], bool]:
    """Indices of the ``max(1, floor(gamma * n))`` largest scores.

    Ties go to the lower index.  The flag is set when the floor was 0.
    """
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    phi = np.asarray(getattr(phi, "phi", phi), dtype=float)
    n = phi.size
    # guard against products like 0.3 * 10 = 2.9999999999999996
    k = math.floor(gamma * n + 1e-9)
    order = sorted(range(n), key=lambda i: (-phi[i], i))
    return order[:max(1, k)], k == 0


def gstarx_explain(g: Graph, f: GraphScorer, f0: np.ndarray | None = None, tau: float | None = None,
                   m: int = 10, samples: int | None = None, gamma: float = 0.5, seed: int = 0,
                   target: int | None = None, with_metrics: bool = False,
                   threads: int = 1) -> ExplanationReport:
    """Score every node with the HN value of the normalized-probability game and
    return the top ``gamma`` share of them.

    The exact solver runs when ``g.n <= m``; otherwise the Monte-Carlo
    approximation with ``samples`` draws (default ``n``).
    """
    v, c_star = gstarx_char_fn(f, g, f0, target)
    flags = []
    coverage: list[int] = []
    if g.n <= m:
        phi = compute_hn(g, v, tau, threads=threads)
    else:
        cfg = McConfig(m=m, samples=g.n if samples is None else samples, seed=seed, tau=tau)
        phi = compute_hn_mc(g, v, cfg)
        coverage = phi.extra["coverage"]
        if coverage:
            log.warning("%d nodes were never sampled and score 0", len(coverage))
    selected, floored = top_k(phi, gamma)
    if floored:
        flags.append("k_floored_to_1")
    report = ExplanationReport(selected, gamma, phi, c_star, coverage=coverage, flags=flags)
    if with_metrics:
        report.metrics = compute_metrics(f, g, report.mask, c_star, phi, f0, target)
        report.controls["fidelity_empty_selection"] = fidelity(f, g, 0, c_star, f0, target)
    return report


def lhop_restrict(g: Graph, i: int, hops: int) -> int:
    """Coalition of nodes within ``hops`` edges of ``i``."""
    return hop_ball(g, i, hops)


def ego_convert(g: Graph, u: int, hops: int) -> tuple[Graph, int]:
    """``hops``-hop ego graph around ``u`` and the new index of ``u`` inside it.

    Pair the result with a scorer that reads out node ``u`` (``target=``)
    to explain a node prediction as a graph prediction.
    """
    if hops < 1:
        raise ValueError("ego graph needs at least one hop")
    ball = hop_ball(g, u, hops)
    sub, index = induced_subgraph(g, ball)
    return sub, index.index(u)


def lhop_value(g: Graph, v: CharacteristicFunction, i: int, hops: int,
               solver: Callable[[Graph, CharacteristicFunction], ValueVector]) -> float:
    """Value of ``i`` computed on the game restricted to its ``hops``-hop ball."""
    ball = lhop_restrict(g, i, hops)
    sub, index = induced_subgraph(g, ball)
    return float(solver(sub, v.restrict(index)).phi[index.index(i)])

