"""Exact expectations on tiny instances by exhaustive enumeration.

Everything here is written against the pure-Python adjacency in
``graph_core`` and never touches the simulation kernels, so it serves as
an independent reference for them.  Arithmetic is in ``Fraction``;
floats appear only in ``OracleResult.interval_float``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from . import graph_core as gc

PATH_BUDGET = 10 ** 7
EDGE_BUDGET = 26
_CHUNK = 1 << 20

Rational = Union[int, Fraction, str]


class OracleBudgetError(ValueError):
    """An enumeration would exceed its budget; ``constraint`` names which."""

    def __init__(self, constraint: str, needed, limit):
        super().__init__(f"{constraint} budget exceeded: need {needed}, limit {limit}")
        self.constraint = constraint


@dataclass(frozen=True)
class OracleResult:
    """Exact value with a rigorous leakage bound.

    The true expectation lies in ``[value - epsilon, value + epsilon]``;
    for the union volume it in fact lies in ``[value, value + epsilon]``
    because truncating clusters to the box can only shrink them.
    """
    value: Fraction
    epsilon: Fraction
    box: dict

    @property
    def interval(self) -> tuple:
        return (self.value - self.epsilon, self.value + self.epsilon)

    @property
    def interval_float(self) -> tuple:
        lo, hi = self.interval
        return (float(lo), float(hi))


def _rational(p: Rational) -> Fraction:
    if isinstance(p, float):
        raise TypeError("p must be rational (int, Fraction or decimal string), not float")
    return Fraction(p)


def _paths(g, x0, n: int):
    """Yield ``(positions, probability)`` for every n-step walk from x0."""
    stack = [((x0,), Fraction(1))]
    while stack:
        path, w = stack.pop()
        if len(path) == n + 1:
            yield path, w
            continue
        nb = gc.neighbors(g, path[-1])
        q = w / len(nb)
        for y in nb:
            stack.append((path + (y,), q))


def _check_paths(g, n: int):
    delta = gc.max_degree(g)
    if delta == gc.UNBOUNDED:
        return
    if delta ** n > PATH_BUDGET:
        raise OracleBudgetError("path count", delta ** n, PATH_BUDGET)


def _visited_law(g, x0, n: int) -> dict:
    """Distribution of the visited set: ``{frozenset: probability}``."""
    _check_paths(g, n)
    law: dict = {}
    count = 0
    for path, w in _paths(g, x0, n):
        count += 1
        if count > PATH_BUDGET:
            raise OracleBudgetError("path count", count, PATH_BUDGET)
        s = frozenset(path)
        law[s] = law.get(s, 0) + w
    return law


def exact_mean_range(g, x0, n: int) -> Fraction:
    """E[R_n] by summing R_n over all n-step paths."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    x0 = gc.validate_vertex(g, x0)
    return sum((len(s) * w for s, w in _visited_law(g, x0, n).items()), Fraction(0))


def _box_edges(g, verts: list) -> list:
    idx = {v: i for i, v in enumerate(verts)}
    edges = set()
    for v in verts:
        for w in gc.neighbors(g, v):
            if w in idx:
                a, b = idx[v], idx[w]
                edges.add((min(a, b), max(a, b)))
    return sorted(edges)


def _labels(nv: int, edges: list, configs: np.ndarray) -> np.ndarray:
    """Connected-component labels (minimum vertex index) for each config."""
    lab = np.tile(np.arange(nv, dtype=np.int8), (configs.size, 1))
    opened = [((configs >> e) & 1).astype(bool) for e in range(len(edges))]
    changed = True
    while changed:
        changed = False
        for (a, b), o in zip(edges, opened):
            m = np.minimum(lab[:, a], lab[:, b])
            upd = o & ((lab[:, a] != m) | (lab[:, b] != m))
            if upd.any():
                changed = True
                lab[upd, a] = m[upd]
                lab[upd, b] = m[upd]
    return lab


def _escape_bound(g, x, inside: set, p: Fraction, chi: Fraction) -> Fraction:
    """Upper bound on ``E[|C_x| ; C_x leaves the box]``.

    Sums ``p^{|pi|} (|pi|+1) chi`` over self-avoiding paths ``pi`` from
    ``x`` that stay in the box and whose last edge leaves it.  Given
    ``pi`` open, ``C_x`` is covered by the clusters of the vertices of
    ``pi`` in the graph without the edges of ``pi``, each of mean at most
    ``chi``.
    """
    total = Fraction(0)
    stack = [(x, (x,))]
    while stack:
        v, path = stack.pop()
        for w in gc.neighbors(g, v):
            if w in path:
                continue
            k = len(path)
            if w not in inside:
                total += p ** k * (k + 1) * chi
            else:
                stack.append((w, path + (w,)))
    return total


def exact_mean_union(g, p: Rational, x0, n: int, box_radius: int) -> OracleResult:
    """E[U_n] with percolation restricted to the graph ball B(x0, box_radius).

    Every assignment of the edges with both endpoints in the ball is
    enumerated, grouped by its number of open edges so that the final
    weighting ``p^k (1-p)^(E-k)`` is done once per k in exact arithmetic.
    """
    p = _rational(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if n > box_radius:
        raise ValueError("the walk must stay inside the box: need n <= box_radius")
    x0 = gc.validate_vertex(g, x0)
    law = _visited_law(g, x0, n)
    verts = sorted(gc.ball(g, x0, box_radius), key=repr)
    edges = _box_edges(g, verts)
    if len(edges) > EDGE_BUDGET:
        raise OracleBudgetError("edge count", len(edges), EDGE_BUDGET)
    idx = {v: i for i, v in enumerate(verts)}
    sets = list(law)
    members = [np.array(sorted(idx[v] for v in s)) for s in sets]
    E = len(edges)
    totals = np.zeros((len(sets), E + 1), dtype=np.int64)
    for start in range(0, 1 << E, _CHUNK):
        configs = np.arange(start, min(start + _CHUNK, 1 << E), dtype=np.int64)
        k = np.zeros(configs.size, dtype=np.int64)
        for e in range(E):
            k += (configs >> e) & 1
        lab = _labels(len(verts), edges, configs)
        for j, m in enumerate(members):
            hit = np.zeros_like(lab, dtype=bool)
            for i in m:
                hit |= lab == lab[:, i:i + 1]
            u = hit.sum(axis=1)
            totals[j] += np.bincount(k, weights=u, minlength=E + 1).round().astype(np.int64)
    q = 1 - p
    weights = [p ** k * q ** (E - k) for k in range(E + 1)]
    value = Fraction(0)
    for j, s in enumerate(sets):
        value += law[s] * sum((int(t) * w for t, w in zip(totals[j], weights)), Fraction(0))
    eps = Fraction(0)
    if p > 0:
        delta = gc.max_degree(g)
        if delta == gc.UNBOUNDED or (delta - 1) * p >= 1:
            raise ValueError("leakage bound needs (Delta-1) p < 1")
        chi = 1 + delta * p / (1 - (delta - 1) * p)
        inside = set(verts)
        per_vertex: dict = {}
        for s, w in law.items():
            for x in s:
                if x not in per_vertex:
                    per_vertex[x] = _escape_bound(g, x, inside, p, chi)
                eps += w * per_vertex[x]
    box = {"center": x0, "radius": box_radius, "vertices": len(verts), "edges": E}
    return OracleResult(value, eps, box)


def exact_line_cluster_law(p: Rational, k: int) -> Fraction:
    """P(|C_0| > k) on Z^1, where ``P(|C_0| = s) = s p^(s-1) (1-p)^2``."""
    p = _rational(p)
    if not 0 <= p < 1:
        raise ValueError("need 0 <= p < 1")
    if k < 0:
        return Fraction(1)
    q2 = (1 - p) ** 2
    return 1 - sum((s * p ** (s - 1) * q2 for s in range(1, k + 1)), Fraction(0))


def exact_line_cluster_mean(p: Rational) -> Fraction:
    """E|C_0| = (1 + p) / (1 - p) on Z^1."""
    p = _rational(p)
    if not 0 <= p < 1:
        raise ValueError("need 0 <= p < 1")
    return (1 + p) / (1 - p)
