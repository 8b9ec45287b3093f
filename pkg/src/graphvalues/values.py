"""Exact solution functions for games with a communication graph.

Shapley, the Hamiache-Navarro (HN) value through its associated-game matrix,
Myerson, and the corrected connected-coalition (C-) Shapley formula.

Payoff vectors are dense arrays indexed by coalition mask.  The associated
matrix drops the empty coalition, so coalition ``m`` lives in row ``m - 1``.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Iterator

import numpy as np
import scipy.sparse as sp

from .errors import EmptyCoalition, ExactCapExceeded, MemberOverlap, NoConvergence
from .graph import (
    EXACT_CAP,
    Graph,
    component_of,
    lowest_bit,
    members,
    neighbor_closure,
    partition,
)
from .payoff import CharacteristicFunction, from_table

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_SQUARINGS = 60
# beyond this many players the dense (2^n-1)^2 matrix is not formed
DENSE_CAP = 13


@dataclass
class ValueVector:
    """Attribution vector with the settings that produced it."""

    phi: np.ndarray
    method: str
    tau: float | None = None
    iterations: int | None = None
    seed: int | None = None
    samples: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        if not np.all(np.isfinite(self.phi)):
            raise ValueError(f"{self.method} produced non-finite values")

    def __len__(self):
        return self.phi.size

    def __getitem__(self, i):
        return self.phi[i]

    def to_dict(self, digits: int | None = None) -> dict:
        d = {"method": self.method, "phi": self.phi.tolist(), "tau": self.tau,
             "iterations": self.iterations, "seed": self.seed, "samples": self.samples}
        d.update(self.extra)
        return d if digits is None else round_floats(d, digits)

    def to_json(self, digits: int | None = None) -> str:
        return json.dumps(self.to_dict(digits))


def round_floats(obj, digits: int):
    """Round every float inside nested dicts/lists."""
    if isinstance(obj, float):
        return round(obj, digits)
    if isinstance(obj, dict):
        return {k: round_floats(x, digits) for k, x in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(x, digits) for x in obj]
    return obj


def check_cap(n: int, cap: int | None) -> None:
    cap = EXACT_CAP if cap is None else cap
    if n > cap:
        raise ExactCapExceeded(f"n={n} exceeds the exact-mode cap of {cap}; use the Monte-Carlo path")


def popcounts(n: int) -> np.ndarray:
    """``popcounts(n)[m]`` is the number of set bits in ``m`` for ``m < 2**n``."""
    pc = np.zeros(1 << n, dtype=np.int64)
    for b in range(n):
        pc[1 << b: 2 << b] = pc[: 1 << b] + 1
    return pc


def shapley_weights(n: int) -> np.ndarray:
    """``w[k] = k! (n-k-1)! / n!`` for coalitions of size ``k`` not containing ``i``."""
    return np.array([1.0 / (n * math.comb(n - 1, k)) for k in range(n)])


def shapley_from_table(t: np.ndarray) -> np.ndarray:
    n = int(t.size).bit_length() - 1
    pc = popcounts(n)
    w = shapley_weights(n)
    masks = np.arange(1 << n)
    phi = np.empty(n)
    for i in range(n):
        s = masks[(masks >> i) & 1 == 0]
        phi[i] = math.fsum(w[pc[s]] * (t[s | (1 << i)] - t[s]))
    return phi


def shapley_exact(v: CharacteristicFunction, n: int | None = None, cap: int | None = None,
                  threads: int = 1) -> ValueVector:
    n = v.n if n is None else n
    if n != v.n:
        raise ValueError(f"game has {v.n} players, asked for {n}")
    check_cap(n, cap)
    return ValueVector(shapley_from_table(v.table(threads)), "shapley")


def surplus(v: CharacteristicFunction, j: int, s: int) -> float:
    """Extra payoff from ``s`` cooperating with ``j`` beyond both standalone payoffs."""
    bit = 1 << j
    if s & bit:
        raise MemberOverlap(f"node {j} already belongs to the coalition")
    return v(s | bit) - v(s) - v(bit)


def associated_payoff(v: CharacteristicFunction, g: Graph, s: int, tau: float) -> float:
    """One surplus-allocation step evaluated at coalition ``s``."""
    if not s:
        raise EmptyCoalition("associated payoff of the empty coalition")
    parts = partition(g, s)
    if len(parts) > 1:
        return math.fsum(associated_payoff(v, g, c, tau) for c in parts)
    outside = neighbor_closure(g, s) & ~s
    return v(s) + tau * math.fsum(surplus(v, j, s) for j in members(outside))


def _connected_row(g: Graph, s: int, tau: float) -> list[tuple[int, float]]:
    outside = members(neighbor_closure(g, s) & ~s)
    row = [(s, 1.0 - tau * len(outside))]
    for j in outside:
        row.append((s | 1 << j, tau))
        row.append((1 << j, -tau))
    return row


def associated_rows(g: Graph, tau: float) -> Iterator[tuple[int, list[tuple[int, float]]]]:
    """Yield ``(mask, [(column_mask, coeff), ...])`` for every nonempty coalition.

    Duplicate columns in a row are possible for disconnected coalitions and
    are meant to be accumulated.
    """
    connected_rows: dict[int, list] = {}
    for s in range(1, 1 << g.n):
        parts = partition(g, s)
        if len(parts) == 1:
            row = _connected_row(g, s, tau)
            connected_rows[s] = row
        else:
            row = [entry for c in parts for entry in connected_rows[c]]
        yield s, row


@dataclass
class AssociatedMatrix:
    """Dense associated-game operator ``H`` with ``H @ v[1:] == v*[1:]``."""

    H: np.ndarray
    tau: float
    graph: Graph

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    def apply(self, table: np.ndarray) -> np.ndarray:
        """Associated game of a full payoff table (length ``2**n``)."""
        out = np.zeros_like(table, dtype=float)
        out[1:] = self.H @ table[1:]
        return out


def build_associated_matrix(g: Graph, tau: float, cap: int | None = None) -> AssociatedMatrix:
    check_cap(g.n, DENSE_CAP if cap is None else min(cap, DENSE_CAP))
    if tau <= 0:
        raise ValueError("tau must be positive")
    dim = (1 << g.n) - 1
    H = np.zeros((dim, dim))
    for s, row in associated_rows(g, tau):
        for col, c in row:
            H[s - 1, col - 1] += c
    return AssociatedMatrix(H, tau, g)


def build_associated_sparse(g: Graph, tau: float) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for s, row in associated_rows(g, tau):
        for col, c in row:
            rows.append(s - 1)
            cols.append(col - 1)
            vals.append(c)
    dim = (1 << g.n) - 1
    # duplicates are summed on conversion
    return sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()


def default_tau(n: int) -> float:
    return min(0.01, 1.0 / n)


def check_tau(tau: float, n: int) -> None:
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if n > 1 and tau >= 2.0 / n:
        warnings.warn(f"tau={tau} is not below 2/n={2.0 / n:.4g}; the limit game may not converge",
                      RuntimeWarning, stacklevel=3)


def limit_matrix(g: Graph, tau: float, tol: float = DEFAULT_TOL,
                 max_squarings: int = DEFAULT_MAX_SQUARINGS) -> tuple[np.ndarray, int]:
    """Square ``H`` until successive powers agree to ``tol`` (max-abs entry).

    Returns ``(H_inf, squarings)``.
    """
    H = build_associated_matrix(g, tau).H
    delta = math.inf
    for k in range(1, max_squarings + 1):
        # divergence shows up as a non-finite delta below
        with np.errstate(over="ignore", invalid="ignore"):
            H2 = H @ H
        delta = float(np.max(np.abs(H2 - H)))
        H = H2
        if not np.isfinite(delta):
            break
        if delta < tol:
            return H, k
    raise NoConvergence(f"associated-game powers did not settle after {max_squarings} squarings "
                        f"(last change {delta:.3g}, tau={tau})", last_delta=delta, steps=max_squarings)


@lru_cache(maxsize=256)
def _singleton_rows(n, nbr, tau, tol, max_squarings):
    # keyed on structure only, so repeated Monte-Carlo subgraphs reuse H_inf
    H, steps = limit_matrix(Graph(n, nbr), tau, tol, max_squarings)
    rows = H[[(1 << i) - 1 for i in range(n)]].copy()
    rows.setflags(write=False)
    return rows, steps


def _limit_game_sparse(g: Graph, t: np.ndarray, tau: float, tol: float,
                       max_steps: int) -> tuple[np.ndarray, int]:
    # Plain iteration x <- H x; stops once the geometric tail bound drops below tol.
    H = build_associated_sparse(g, tau)
    x = t[1:].copy()
    prev = math.inf
    for k in range(1, max_steps + 1):
        y = H @ x
        delta = float(np.max(np.abs(y - x)))
        x = y
        if delta == 0.0:
            return x, k
        rate = delta / prev if prev > 0 else 1.0
        prev = delta
        if rate < 1.0 and delta * rate / (1.0 - rate) < tol and delta < tol:
            return x, k
        if not np.isfinite(delta):
            break
    raise NoConvergence(f"associated-game iteration did not settle after {max_steps} steps",
                        last_delta=prev, steps=max_steps)


def compute_hn(g: Graph, v: CharacteristicFunction, tau: float | None = None,
               tol: float = DEFAULT_TOL, max_squarings: int = DEFAULT_MAX_SQUARINGS,
               cap: int | None = None, threads: int = 1) -> ValueVector:
    """HN value: singleton entries of the limit of repeated associated games.

    Up to ``DENSE_CAP`` players the associated matrix is squared until it
    settles; larger graphs iterate the payoff vector through a sparse ``H``.
    """
    n = g.n
    if v.n != n:
        raise ValueError(f"game has {v.n} players, graph has {n} nodes")
    check_cap(n, cap)
    tau = default_tau(n) if tau is None else float(tau)
    check_tau(tau, n)
    t = v.table(threads)
    singles = [(1 << i) - 1 for i in range(n)]
    if n <= DENSE_CAP:
        rows, steps = _singleton_rows(n, g.nbr, tau, tol, max_squarings)
        return ValueVector(rows @ t[1:], "hn", tau=tau, iterations=steps)
    limit, steps = _limit_game_sparse(g, t, tau, tol, max_steps=1 << min(max_squarings, 24))
    return ValueVector(limit[singles], "hn", tau=tau, iterations=steps, extra={"solver": "sparse"})


def transformed_table(g: Graph, t: np.ndarray) -> np.ndarray:
    """Payoffs of the component-decomposed game: sum of ``t`` over components."""
    out = np.zeros_like(t, dtype=float)
    for s in range(1, t.size):
        c = component_of(g, s, lowest_bit(s))
        out[s] = t[c] + out[s & ~c]
    return out


def transformed_game(g: Graph, v: CharacteristicFunction, threads: int = 1) -> CharacteristicFunction:
    return from_table(transformed_table(g, v.table(threads)), name=f"{v.name}/G")


def myerson(g: Graph, v: CharacteristicFunction, cap: int | None = None,
            threads: int = 1) -> ValueVector:
    """Shapley value of the component-decomposed game."""
    check_cap(g.n, cap)
    tt = transformed_table(g, v.table(threads))
    return ValueVector(shapley_from_table(tt), "myerson")


def connected_sets_containing(g: Graph, i: int) -> Iterator[int]:
    """Every connected coalition containing ``i``, each exactly once.

    Grows from ``{i}``; a candidate skipped at one branch is banned from all
    later extensions of that branch, which makes the enumeration canonical.
    """
    g.check_node(i)

    def grow(u, banned):
        yield u
        cand = neighbor_closure(g, u) & ~u & ~banned
        for w in members(cand):
            yield from grow(u | 1 << w, banned)
            banned |= 1 << w

    yield from grow(1 << i, 0)


def boundary_edges(g: Graph, u: int) -> int:
    return sum(bin(g.nbr[k] & ~u).count("1") for k in members(u))


def cshapley_coefficient(size: int, l: int, n: int) -> Fraction:
    if l == 0:
        return Fraction(1, n)
    return Fraction(l, math.prod(range(size, size + l + 1)))


def cshapley_coefficients(g: Graph, i: int) -> dict[int, Fraction]:
    """Corrected C-Shapley weight on ``m(U, i)`` for each connected ``U`` containing ``i``."""
    return {u: cshapley_coefficient(bin(u).count("1"), boundary_edges(g, u), g.n)
            for u in connected_sets_containing(g, i)}


def cshapley_corrected(g: Graph, v: CharacteristicFunction, i: int, cap: int | None = None,
                       table: np.ndarray | None = None) -> float:
    """Corrected C-Shapley value of node ``i``.

    Marginal contributions are taken in the component-decomposed game, so a
    disconnected ``U - {i}`` is scored component by component.
    """
    check_cap(g.n, cap)
    tt = transformed_table(g, v.table()) if table is None else table
    bit = 1 << i
    return math.fsum(float(c) * (tt[u] - tt[u & ~bit]) for u, c in cshapley_coefficients(g, i).items())


def cshapley_vector(g: Graph, v: CharacteristicFunction, cap: int | None = None,
                    threads: int = 1) -> ValueVector:
    check_cap(g.n, cap)
    tt = transformed_table(g, v.table(threads))
    return ValueVector([cshapley_corrected(g, v, i, table=tt) for i in range(g.n)], "cshapley")
