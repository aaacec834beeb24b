"""Union of the open clusters met by a random walk.

``U_n`` is the number of vertices in the union of the open clusters of
``S_0, ..., S_n``.  It is maintained incrementally: a cluster is explored
only when the walk steps on a vertex outside the current union, which is
exact because the union is always a disjoint union of complete clusters.

Walk ``r`` of a batch uses the walk stream ``(seed, 0, r)`` and the
percolation replica ``r`` of the same seed, so ``union_volume`` with
``PercolationConfig(p, seed, r)`` reproduces row ``r`` of
``simulate_batch``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import _kernels as K
from . import graph_core as gc
from .percolation import DEFAULT_CAP, PercolationConfig, explore_cluster
from .rng import as_seed, percolation_key
from .walk import Trace, WalkStream, inner_boundary, simulate_trace


@dataclass(frozen=True)
class UnionResult:
    u_sequence: np.ndarray
    r_sequence: np.ndarray
    l_sequence: np.ndarray
    truncated: bool


@dataclass(frozen=True)
class UnionState:
    """Full state after ``n`` steps.

    ``membership`` maps every union vertex to the root whose exploration
    absorbed it; ``cluster_roots`` lists those roots in absorption order.
    """
    union_vertices: frozenset
    cluster_roots: tuple
    membership: dict
    any_truncated: bool
    u_sequence: np.ndarray
    r_sequence: np.ndarray
    l_sequence: np.ndarray


def default_stream(cfg: PercolationConfig, stream: int = 0) -> WalkStream:
    return WalkStream(cfg.master_seed, stream, cfg.replica_index)


def _run(g, cfg: PercolationConfig, keys: np.ndarray, ck: np.ndarray, boundary: bool = True):
    buf = np.empty(gc.buffer_size(g), dtype=np.int64)
    return K.union_run(gc.kernel_spec(g), keys, float(cfg.p), percolation_key(cfg.seed64),
                       np.int64(cfg.replica_index), np.int64(cfg.cluster_cap), ck, boundary, buf)


def union_along(g, cfg: PercolationConfig, trace: Trace) -> UnionResult:
    """R_k, L_k, U_k for every k along a given trace."""
    ck = np.arange(trace.keys.shape[0], dtype=np.int64)
    R, L, U, trunc, _, _ = _run(g, cfg, trace.keys, ck)
    return UnionResult(U, R, L, bool(trunc))


def union_volume(g, cfg: PercolationConfig, x0, n: int,
                 rng_stream: Optional[WalkStream] = None) -> UnionResult:
    """U_0..U_n (with R_k and L_k) for one walk and one configuration."""
    trace = simulate_trace(g, x0, n, rng_stream or default_stream(cfg))
    return union_along(g, cfg, trace)


def union_state(g, cfg: PercolationConfig, x0, n: int,
                rng_stream: Optional[WalkStream] = None) -> UnionState:
    trace = simulate_trace(g, x0, n, rng_stream or default_stream(cfg))
    ck = np.arange(n + 1, dtype=np.int64)
    R, L, U, trunc, table, roots = _run(g, cfg, trace.keys, ck)
    roots = [gc.key_vertex(g, k) for k in roots]
    membership = {gc.key_vertex(g, k): roots[v] for k, v in table.items()}
    return UnionState(frozenset(membership), tuple(roots), membership, bool(trunc), U, R, L)


def window_union(g, cfg: PercolationConfig, x0, m: int, n: int,
                 rng_stream: Optional[WalkStream] = None) -> int:
    """U_{m,n}: volume of the union of the clusters of S_m..S_n."""
    if not 0 <= m <= n:
        raise ValueError("need 0 <= m <= n")
    trace = simulate_trace(g, x0, n, rng_stream or default_stream(cfg))
    return window_union_along(g, cfg, trace, m, n)


def window_union_along(g, cfg: PercolationConfig, trace: Trace, m: int, n: int) -> int:
    keys = np.ascontiguousarray(trace.keys[m: n + 1])
    ck = np.array([keys.shape[0] - 1], dtype=np.int64)
    _, _, U, _, _, _ = _run(g, cfg, keys, ck, boundary=False)
    return int(U[0])


def last_exit_volume(g, cfg: PercolationConfig, trace: Trace) -> int:
    """U_n as the sum of |C_{S_i}| over times i after which the walk never
    re-enters C_{S_i} (an independent route to the same number)."""
    pos = trace.positions
    total = 0
    cache: dict = {}
    for i, x in enumerate(pos):
        if x not in cache:
            c = explore_cluster(cfg, g, x).vertices
            for y in c:
                cache[y] = c
        c = cache[x]
        if all(pos[j] not in c for j in range(i + 1, len(pos))):
            total += len(c)
    return total


def boundary_cluster_bound(g, cfg: PercolationConfig, trace: Trace) -> int:
    """R_n plus the summed cluster sizes over the inner boundary of the range."""
    return len(trace.visited) + sum(explore_cluster(cfg, g, x).size
                                    for x in inner_boundary(g, trace))


# ---------------------------------------------------------------- sausages

def _shape_offsets(g, A: Iterable) -> np.ndarray:
    if not isinstance(g, (gc.ZdNearest, gc.ZdLinf)):
        raise NotImplementedError("sausage volumes need a translation-invariant lattice")
    pts = {gc.validate_vertex(g, a) for a in A}
    o = gc.origin(g)
    if o not in pts:
        raise ValueError("the shape must contain the origin")
    ok = gc.vertex_key(o)
    return np.asarray(sorted(gc.vertex_key(a) - ok for a in pts), dtype=np.int64)


def sausage_volume(g, A: Iterable, x0, n: int, rng_stream: WalkStream = WalkStream()) -> int:
    """|union over i <= n of (S_i + A)|; ``A = {0}`` gives the range."""
    V = sausage_batch(g, A, [n], 1, rng_stream.seed, x0=x0, stream=rng_stream.stream,
                      first_replica=rng_stream.replica)
    return int(V[0, 0])


def sausage_batch(g, A: Iterable, n_values, replicas: int, seed: int = 0, x0=None,
                  stream: int = 0, first_replica: int = 0) -> np.ndarray:
    """Sausage volumes, shape ``(replicas, len(n_values))``."""
    offs = _shape_offsets(g, A)
    ck = np.asarray(sorted(n_values), dtype=np.int64)
    x0 = gc.origin(g) if x0 is None else gc.validate_vertex(g, x0)
    return K.batch_sausage(gc.kernel_spec(g), np.int64(gc.vertex_key(x0)), np.int64(ck[-1]),
                           ck, offs, as_seed(seed), np.int64(stream),
                           np.int64(first_replica), np.int64(replicas))


def linf_ball_shape(d: int, r: int = 1) -> list:
    import itertools
    return [t for t in itertools.product(range(-r, r + 1), repeat=d)]


# ---------------------------------------------------------------- batches

@dataclass(frozen=True)
class BatchResult:
    """Per-replica R, L, U at each requested n (rows are replicas)."""
    n_values: np.ndarray
    R: np.ndarray
    L: np.ndarray
    U: np.ndarray
    truncated: np.ndarray
    first_replica: int = 0

    @property
    def truncation_rate(self) -> float:
        return float(self.truncated.mean()) if self.truncated.size else 0.0


def simulate_batch(g, p: float, n_values, replicas: int, seed: int = 0,
                   cap: int = DEFAULT_CAP, first_replica: int = 0, boundary: bool = True,
                   x0=None) -> BatchResult:
    """Run ``replicas`` independent (walk, configuration) pairs."""
    n_values = np.asarray(sorted(set(int(n) for n in n_values)), dtype=np.int64)
    if n_values.size == 0 or n_values[0] < 0:
        raise ValueError("n_values must be nonempty and nonnegative")
    x0 = gc.origin(g) if x0 is None else gc.validate_vertex(g, x0)
    n = np.int64(n_values[-1])
    if isinstance(g, gc.ZdNearest) and g.d == 1:
        R, L, U, tr = K.batch_line_union(np.int64(x0[0]), n, n_values, float(p), as_seed(seed),
                                         as_seed(seed), np.int64(0), np.int64(first_replica),
                                         np.int64(replicas), np.int64(cap))
    else:
        R, L, U, tr = K.batch_union(gc.kernel_spec(g), np.int64(gc.vertex_key(x0)), n, n_values,
                                    float(p), as_seed(seed), as_seed(seed), np.int64(0),
                                    np.int64(first_replica), np.int64(replicas), np.int64(cap),
                                    boundary, gc.buffer_size(g))
    return BatchResult(n_values, R, L, U, tr, first_replica)


@dataclass(frozen=True)
class IntermediateEstimate:
    mean: float
    se: float
    r_n: int
    values: np.ndarray
    truncation_rate: float


def intermediate_volume(g, p: float, x0, n: int, inner_replicas: int, seed: int = 0,
                        walk_replica: int = 0, cap: int = DEFAULT_CAP,
                        first_inner: int = 0) -> IntermediateEstimate:
    """Percolation average of U_n along one fixed walk.

    The walk ``(seed, 0, walk_replica)`` is held fixed while
    ``inner_replicas`` percolation replicas are averaged.
    """
    if inner_replicas < 2:
        raise ValueError("inner_replicas must be at least 2")
    trace = simulate_trace(g, x0, n, WalkStream(seed, 0, walk_replica))
    preps = np.arange(first_inner, first_inner + inner_replicas, dtype=np.int64)
    U, tr = K.batch_union_fixed_path(gc.kernel_spec(g), trace.keys, float(p), as_seed(seed),
                                     preps, np.int64(cap), gc.buffer_size(g))
    se = float(U.std(ddof=1) / np.sqrt(inner_replicas))
    return IntermediateEstimate(float(U.mean()), se, int(np.unique(trace.keys).shape[0]), U,
                                float(tr.mean()))


@dataclass(frozen=True)
class IntersectionResult:
    i_n: int
    u1: int
    u2: int
    truncated: bool


def intersection_batch(g, p: float, n: int, replicas: int, seed: int = 0,
                       cap: int = DEFAULT_CAP, first_replica: int = 0):
    """(U¹_n, U²_n, I_n, truncated) arrays for two walks sharing percolation."""
    x0 = np.int64(gc.vertex_key(gc.origin(g)))
    return K.batch_intersection(gc.kernel_spec(g), x0, np.int64(n), float(p), as_seed(seed),
                                as_seed(seed), np.int64(first_replica), np.int64(replicas),
                                np.int64(cap), gc.buffer_size(g))


def intersection_volume(g, cfg: PercolationConfig, n: int) -> IntersectionResult:
    """I_n for walks ``(seed, 0, r)`` and ``(seed, 1, r)`` from the origin,
    both in percolation replica ``r`` of ``cfg``."""
    U1, U2, I, tr = intersection_batch(g, cfg.p, n, 1, cfg.master_seed, cfg.cluster_cap,
                                       cfg.replica_index)
    return IntersectionResult(int(I[0]), int(U1[0]), int(U2[0]), bool(tr[0]))
