"""Brute-force reference implementations.

These exist to pin expected values for the production solvers, so they avoid
the production code paths on purpose: coalitions are frozensets, the
associated game is iterated directly from the surplus definition, and
Shapley values come from enumerating orderings.  Keep them slow and obvious.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import ExactCapExceeded, NoConvergence
from .graph import Graph
from .payoff import CharacteristicFunction, from_table
from .values import ValueVector

Solver = Callable[[Graph, CharacteristicFunction], ValueVector]


def _mask(s) -> int:
    return sum(1 << i for i in s)


def _neighbours(g: Graph) -> list[set[int]]:
    return [{j for j in range(g.n) if g.nbr[i] >> j & 1} for i in range(g.n)]


def _components(adj: list[set[int]], s: frozenset) -> list[frozenset]:
    left = set(s)
    comps = []
    while left:
        stack = [min(left)]
        comp = set()
        while stack:
            k = stack.pop()
            if k in comp:
                continue
            comp.add(k)
            stack.extend(adj[k] & s - comp)
        left -= comp
        comps.append(frozenset(comp))
    return comps


def _plan(g: Graph, subsets) -> dict:
    # per coalition: its components, each with the neighbours outside it
    adj = _neighbours(g)
    plan = {}
    for s in subsets:
        if s:
            plan[s] = [(c, sorted(set().union(*(adj[k] for k in c)) - c))
                       for c in _components(adj, s)]
    return plan


def associated_game(g: Graph, table: dict, tau: float, plan: dict | None = None) -> dict:
    """One application of the associated-game map to a frozenset-keyed table."""
    plan = _plan(g, table) if plan is None else plan
    out = {frozenset(): 0.0}
    for s, comps in plan.items():
        total = 0.0
        for c, outside in comps:
            gain = sum(table[c | {j}] - table[c] - table[frozenset([j])] for j in outside)
            total += table[c] + tau * gain
        out[s] = total
    return out


def limit_game_bruteforce(g: Graph, v: CharacteristicFunction, tau: float,
                          tol: float = 1e-10, max_iter: int = 200_000) -> dict:
    """Iterate the associated game until successive tables differ by < ``tol``.

    Returns a frozenset-keyed table of the (approximate) limit game.
    """
    if g.n > 10:
        raise ExactCapExceeded("brute-force limit game is limited to n <= 10")
    nodes = range(g.n)
    subsets = [frozenset(c) for k in range(g.n + 1) for c in itertools.combinations(nodes, k)]
    plan = _plan(g, subsets)
    table = {s: v(_mask(s)) for s in subsets}
    for _ in range(max_iter):
        new = associated_game(g, table, tau, plan)
        delta = max(abs(new[s] - table[s]) for s in subsets)
        table = new
        if delta < tol:
            return table
    raise NoConvergence(f"limit game not reached in {max_iter} iterations", last_delta=delta)


def hn_bruteforce(g: Graph, v: CharacteristicFunction, tau: float = 0.01, tol: float = 1e-10
                  ) -> np.ndarray:
    table = limit_game_bruteforce(g, v, tau, tol)
    return np.array([table[frozenset([i])] for i in range(g.n)])


def shapley_permutation_bruteforce(v: CharacteristicFunction, n: int | None = None) -> ValueVector:
    """Average marginal contribution over all ``n!`` orderings."""
    n = v.n if n is None else n
    if n > 8:
        raise ExactCapExceeded("permutation enumeration is limited to n <= 8")
    totals = [0.0] * n
    for order in itertools.permutations(range(n)):
        mask = 0
        before = 0.0
        for i in order:
            mask |= 1 << i
            after = v(mask)
            totals[i] += after - before
            before = after
    count = math.factorial(n)
    return ValueVector([t / count for t in totals], "shapley-permutation")


def indicator_game(n: int, t: int) -> CharacteristicFunction:
    vals = np.zeros(1 << n)
    vals[t] = 1.0
    return from_table(vals, name=f"indicator[{t}]")


def linear_weights(g: Graph, i: int, solver: Solver) -> dict[frozenset, float]:
    """Weights of ``phi_i`` on marginal contributions ``m(i, S)``.

    ``solver`` is evaluated on every indicator game ``1[S == T]``; the weight
    reported for ``S`` (``i`` not in ``S``) is the coefficient of
    ``v(S + {i})``.
    """
    if g.n > 8:
        raise ExactCapExceeded("linear weights are limited to n <= 8")
    g.check_node(i)
    others = [k for k in range(g.n) if k != i]
    weights = {}
    for k in range(len(others) + 1):
        for s in itertools.combinations(others, k):
            t = _mask(s) | 1 << i
            weights[frozenset(s)] = float(solver(g, indicator_game(g.n, t)).phi[i])
    return weights


def coalition_weights(g: Graph, i: int, solver: Solver) -> dict[frozenset, float]:
    """Coefficient of ``v(T)`` in ``phi_i`` for every nonempty ``T``."""
    if g.n > 8:
        raise ExactCapExceeded("linear weights are limited to n <= 8")
    out = {}
    for t in range(1, 1 << g.n):
        s = frozenset(k for k in range(g.n) if t >> k & 1)
        out[s] = float(solver(g, indicator_game(g.n, t)).phi[i])
    return out


def legacy_cshapley_coefficients(g: Graph, i: int) -> dict[frozenset, Fraction]:
    """Original C-Shapley weights ``2 / ((|U|+2)(|U|+1)|U|)`` on connected ``U`` containing ``i``.

    Only valid as a negative fixture: these do not sum to one.
    """
    adj = _neighbours(g)
    out = {}
    others = [k for k in range(g.n) if k != i]
    for k in range(len(others) + 1):
        for s in itertools.combinations(others, k):
            u = frozenset(s) | {i}
            if len(_components(adj, u)) == 1:
                size = len(u)
                out[u] = Fraction(2, (size + 2) * (size + 1) * size)
    return out


def myerson_bruteforce(g: Graph, v: CharacteristicFunction) -> ValueVector:
    """Permutation Shapley of the component-sum game, via frozensets."""
    adj = _neighbours(g)

    def w(mask):
        s = frozenset(k for k in range(g.n) if mask >> k & 1)
        return sum(v(_mask(c)) for c in _components(adj, s))

    res = shapley_permutation_bruteforce(CharacteristicFunction(g.n, w), g.n)
    res.method = "myerson-permutation"
    return res
