"""Fidelity-family metrics and entropy-based sparsity of attribution scores."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import AllZeroScores, EmptyCoalition
from .graph import Graph, popcount
from .payoff import GraphScorer, subgraph_probs


@dataclass
class MetricsBlock:
    fidelity: float
    inv_fidelity: float
    sparsity: float
    n_fidelity: float
    n_inv_fidelity: float
    h_fidelity: float
    entropy_sparsity: float | None
    flags: list[str] = field(default_factory=list)

    def to_dict(self, digits: int | None = None) -> dict:
        d = asdict(self)
        if digits is not None:
            d = {k: round(x, digits) if isinstance(x, float) else x for k, x in d.items()}
        return d


def _full_prob(f: GraphScorer, g: Graph, c_star: int, target: int | None) -> float:
    return float(f.forward(g, node=target)[c_star])


def fidelity(f: GraphScorer, g: Graph, sel: int, c_star: int, f0: np.ndarray | None = None,
             target: int | None = None) -> float:
    """Drop in predicted-class probability after removing ``sel``.

    Removing every node leaves nothing to score; the baseline ``f0`` stands
    in for the empty graph (zero when not given).
    """
    if not sel:
        return 0.0
    full = _full_prob(f, g, c_star, target)
    rest = g.full & ~sel
    if not rest:
        return full - (0.0 if f0 is None else float(f0[c_star]))
    return full - float(subgraph_probs(f, g, rest, target)[c_star])


def inv_fidelity(f: GraphScorer, g: Graph, sel: int, c_star: int,
                 target: int | None = None) -> float:
    """Drop in predicted-class probability when only ``sel`` is kept.  May be negative."""
    if not sel:
        raise EmptyCoalition("inverse fidelity needs a nonempty selection")
    if sel == g.full:
        return 0.0
    return _full_prob(f, g, c_star, target) - float(subgraph_probs(f, g, sel, target)[c_star])


def sparsity(g: Graph, sel: int) -> float:
    return 1.0 - popcount(sel) / g.n


def n_fidelity(fid: float, g: Graph, sel: int) -> float:
    return fid * (1.0 - popcount(sel) / g.n)


def n_inv_fidelity(inv_fid: float, g: Graph, sel: int) -> float:
    return inv_fid * (popcount(sel) / g.n)


def harmonic(m1: float, m2: float) -> float:
    """Harmonic mean of ``(1 + m1) / 2`` and ``(1 - m2) / 2``; 0 when both are 0."""
    den = 2.0 + m1 - m2
    if den == 0.0:
        return 0.0
    return (1.0 + m1) * (1.0 - m2) / den


def h_fidelity(fid: float, inv_fid: float, g: Graph, sel: int) -> float:
    return harmonic(n_fidelity(fid, g, sel), n_inv_fidelity(inv_fid, g, sel))


def entropy_sparsity(phi) -> float:
    """Shannon entropy (nats) of ``|phi|`` normalized to a distribution."""
    a = np.abs(np.asarray(getattr(phi, "phi", phi), dtype=float))
    total = math.fsum(a)
    if total == 0.0:
        raise AllZeroScores("entropy sparsity is undefined for all-zero scores")
    p = a / total
    # filter after dividing: subnormal magnitudes can underflow to 0 here
    p = p[p > 0]
    return float(-math.fsum(p * np.log(p)))


def compute_metrics(f: GraphScorer, g: Graph, sel: int, c_star: int, phi=None,
                    f0: np.ndarray | None = None, target: int | None = None) -> MetricsBlock:
    flags = []
    fid = fidelity(f, g, sel, c_star, f0, target)
    if sel == g.full:
        flags.append("degenerate_removal")
    inv = inv_fidelity(f, g, sel, c_star, target)
    m1 = n_fidelity(fid, g, sel)
    m2 = n_inv_fidelity(inv, g, sel)
    if 2.0 + m1 - m2 == 0.0:
        flags.append("degenerate_h_fidelity")
    ent = None
    if phi is not None:
        try:
            ent = entropy_sparsity(phi)
        except AllZeroScores:
            flags.append("all_zero_scores")
        else:
            if np.any(np.asarray(getattr(phi, "phi", phi)) < 0):
                flags.append("entropy_uses_abs")
    return MetricsBlock(fid, inv, sparsity(g, sel), m1, m2, harmonic(m1, m2), ent, flags)
