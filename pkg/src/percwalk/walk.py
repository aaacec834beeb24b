"""Simple random walk traces, range, inner boundary and hitting times."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

import numpy as np

from . import _kernels as K
from . import graph_core as gc
from .rng import as_seed, walk_base, walk_choice

HIT = "hit"
BUDGET_EXCEEDED = "budget_exceeded"
ESCAPED = "escaped"


@dataclass(frozen=True)
class WalkStream:
    """Identifies one walk: ``(seed, stream, replica)``.

    Walk randomness lives in its own domain, independent of every
    percolation edge state derived from the same seed.
    """
    seed: int = 0
    stream: int = 0
    replica: int = 0

    @property
    def seed64(self) -> np.uint64:
        return as_seed(self.seed)


@dataclass(frozen=True)
class Trace:
    """Positions S_0..S_n of one walk, kept as kernel keys."""
    g: object
    start: gc.VertexId
    keys: np.ndarray

    @property
    def n(self) -> int:
        return self.keys.shape[0] - 1

    @property
    def positions(self) -> list:
        return [gc.key_vertex(self.g, k) for k in self.keys]

    @property
    def visited(self) -> frozenset:
        return frozenset(gc.key_vertex(self.g, k) for k in np.unique(self.keys))


def simulate_trace(g, x0, n: int, rng_stream: WalkStream = WalkStream()) -> Trace:
    """Walk of ``n`` steps from ``x0``, each step uniform over the neighbors."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    x0 = gc.validate_vertex(g, x0)
    keys = K.walk_path(gc.kernel_spec(g), np.int64(gc.vertex_key(x0)), np.int64(n),
                       rng_stream.seed64, np.int64(rng_stream.stream),
                       np.int64(rng_stream.replica))
    return Trace(g, x0, keys)


def range_size(trace: Trace) -> int:
    """R_n, the number of distinct visited vertices."""
    return int(np.unique(trace.keys).shape[0])


def range_sequence(trace: Trace) -> np.ndarray:
    """R_0..R_n."""
    seen = set()
    out = np.empty(trace.keys.shape[0], dtype=np.int64)
    for i, k in enumerate(trace.keys.tolist()):
        seen.add(k)
        out[i] = len(seen)
    return out


def inner_boundary(g, trace: Trace) -> frozenset:
    """Visited vertices with at least one unvisited neighbor (from scratch)."""
    visited = trace.visited
    return frozenset(v for v in visited if any(w not in visited for w in gc.neighbors(g, v)))


def boundary_sequence(g, trace: Trace) -> np.ndarray:
    """L_0..L_n maintained incrementally (neighbor counts per visited vertex)."""
    ck = np.arange(trace.keys.shape[0], dtype=np.int64)
    buf = np.empty(gc.buffer_size(g), dtype=np.int64)
    _, L, _, _, _, _ = K.union_run(gc.kernel_spec(g), trace.keys, 0.0, np.uint64(0),
                                   np.int64(0), np.int64(1), ck, True, buf)
    return L


@dataclass(frozen=True)
class HitResult:
    outcome: str
    time: Optional[int] = None
    radius: Optional[int] = None


def _stop_rules(budget, escape_radius):
    if budget is None and escape_radius is None:
        raise ValueError("at least one stop rule (budget or escape_radius) is required")
    return (-1 if budget is None else int(budget),
            -1 if escape_radius is None else int(escape_radius))


def hitting_time(g, x0, A: Union[Iterable, Callable], semantics: str = "T",
                 budget: Optional[int] = None, escape_radius: Optional[int] = None,
                 rng_stream: WalkStream = WalkStream()) -> HitResult:
    """First time the walk from ``x0`` is in ``A``.

    ``semantics="T"`` looks at times ``n >= 1``, ``"H"`` also at time 0.
    The walk stops after ``budget`` steps or when its reference-norm
    distance from ``x0`` exceeds ``escape_radius``; those endings are
    reported as outcomes, never as errors.
    """
    if semantics not in ("T", "H"):
        raise ValueError("semantics must be 'T' or 'H'")
    b, r = _stop_rules(budget, escape_radius)
    x0 = gc.validate_vertex(g, x0)
    fam = gc.kernel_spec(g)
    x0k = np.int64(gc.vertex_key(x0))
    if callable(A):
        return _hitting_time_predicate(g, fam, x0, x0k, A, semantics, b, r, rng_stream)
    targets = np.unique(np.asarray([gc.vertex_key(gc.validate_vertex(g, a)) for a in A],
                                   dtype=np.int64))
    o, t = K.hit_walk(fam, x0k, targets, semantics == "T", np.int64(b), x0k, np.int64(r),
                      rng_stream.seed64, np.int64(rng_stream.stream),
                      np.int64(rng_stream.replica))
    return _result(int(o), int(t), escape_radius)


def _result(o, t, radius):
    if o == K.HIT:
        return HitResult(HIT, t)
    if o == K.BUDGET:
        return HitResult(BUDGET_EXCEEDED, t)
    return HitResult(ESCAPED, t, radius)


def _hitting_time_predicate(g, fam, x0, x0k, pred, semantics, budget, radius, stream):
    if semantics == "H" and pred(x0):
        return HitResult(HIT, 0)
    base = np.uint64(walk_base(stream.seed64, np.int64(stream.stream), np.int64(stream.replica)))
    x = x0k
    k = 0
    while True:
        if budget >= 0 and k >= budget:
            return HitResult(BUDGET_EXCEEDED, k)
        k += 1
        x = K.neighbor_at(fam, x, walk_choice(base, np.int64(k), K.degree(fam, x)))
        if pred(gc.key_vertex(g, x)):
            return HitResult(HIT, k)
        if radius >= 0 and K.norm_distance(fam, x, x0k) > radius:
            return HitResult(ESCAPED, k, radius)


def hitting_outcomes(g, x0, A: Iterable, replicas: int, semantics: str = "T",
                     budget: Optional[int] = None, escape_radius: Optional[int] = None,
                     seed: int = 0, stream: int = 0, first_replica: int = 0):
    """Outcome codes and times of many independent hitting runs (kernel codes)."""
    b, r = _stop_rules(budget, escape_radius)
    x0 = gc.validate_vertex(g, x0)
    x0k = np.int64(gc.vertex_key(x0))
    targets = np.unique(np.asarray([gc.vertex_key(gc.validate_vertex(g, a)) for a in A],
                                   dtype=np.int64))
    return K.batch_hit(gc.kernel_spec(g), x0k, targets, semantics == "T", np.int64(b), x0k,
                       np.int64(r), as_seed(seed), np.int64(stream), np.int64(first_replica),
                       np.int64(replicas))


def return_survival(g, n: int, replicas: int, seed: int = 0, stream: int = 7,
                    x=None) -> tuple:
    """Empirical ``P^x(T_x > i)`` for ``i = 0..n`` and its standard errors."""
    x = gc.origin(g) if x is None else x
    outcome, times = hitting_outcomes(g, x, [x], replicas, "T", budget=n, seed=seed,
                                      stream=stream)
    t = np.where(outcome == K.HIT, times, n + 1)
    counts = np.bincount(np.minimum(t, n + 1), minlength=n + 2)
    # survivors beyond i: T > i
    surv = 1.0 - np.cumsum(counts)[: n + 1] / replicas
    se = np.sqrt(surv * (1 - surv) / replicas)
    return surv, se, t
