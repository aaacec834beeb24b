"""Lazy, deterministic Bernoulli bond percolation.

Each edge carries a uniform ``u(e)`` computed from the master seed, the
replica index and the edge's endpoint keys; the edge is open iff
``u(e) < p``.  Because the uniform does not depend on ``p``, clusters at
``p1 < p2`` under the same seed are nested (monotone coupling).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from . import _kernels as K
from . import graph_core as gc
from .rng import as_seed, edge_uniform as _edge_uniform, percolation_key

DEFAULT_CAP = 10 ** 6


@dataclass(frozen=True)
class PercolationConfig:
    """Bond percolation at parameter ``p`` for one replica.

    The pair ``(master_seed, replica_index)`` determines every edge state.
    """
    p: float
    master_seed: int = 0
    replica_index: int = 0
    cluster_cap: int = DEFAULT_CAP

    def __post_init__(self):
        if not 0.0 <= float(self.p) <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.cluster_cap < 1:
            raise ValueError("cluster_cap must be positive")
        if self.replica_index < 0:
            raise ValueError("replica_index must be nonnegative")

    def with_replica(self, replica_index: int) -> "PercolationConfig":
        return replace(self, replica_index=replica_index)

    @property
    def seed64(self) -> np.uint64:
        return as_seed(self.master_seed)


@dataclass(frozen=True)
class Cluster:
    root: gc.VertexId
    vertices: frozenset
    truncated: bool

    @property
    def size(self) -> int:
        return len(self.vertices)


@njit(cache=True)
def _edge_uniforms(pkey, replica, a, b):
    out = np.empty(a.shape[0], np.float64)
    for i in range(a.shape[0]):
        out[i] = _edge_uniform(pkey, replica, a[i], b[i])
    return out


def edge_uniform(cfg: PercolationConfig, e) -> float:
    """The uniform ``u(e)`` attached to edge ``e`` in this replica."""
    u, v = e
    a = np.array([gc.vertex_key(gc._normalize(u))], dtype=np.int64)
    b = np.array([gc.vertex_key(gc._normalize(v))], dtype=np.int64)
    pkey = percolation_key(cfg.seed64)
    return float(_edge_uniforms(pkey, np.int64(cfg.replica_index), a, b)[0])


def edge_open(cfg: PercolationConfig, e) -> bool:
    """Whether edge ``e`` is open; pure in ``(cfg, e)``, no memoization."""
    return edge_uniform(cfg, e) < cfg.p


def edge_uniforms(cfg: PercolationConfig, a_keys, b_keys) -> np.ndarray:
    """Vectorized uniforms for edges given as endpoint key arrays."""
    return _edge_uniforms(percolation_key(cfg.seed64), np.int64(cfg.replica_index),
                          np.asarray(a_keys, dtype=np.int64),
                          np.asarray(b_keys, dtype=np.int64))


def explore_cluster(cfg: PercolationConfig, g, x) -> Cluster:
    """Open cluster of ``x`` by breadth-first search over open edges.

    At most ``cluster_cap`` vertices are collected; if more exist the
    result is flagged ``truncated``.
    """
    x = gc.validate_vertex(g, x)
    keys, trunc = K.explore_cluster(gc.kernel_spec(g), np.int64(gc.vertex_key(x)),
                                    float(cfg.p), cfg.seed64, np.int64(cfg.replica_index),
                                    np.int64(cfg.cluster_cap), gc.buffer_size(g))
    return Cluster(root=x, vertices=frozenset(gc.key_vertex(g, k) for k in keys),
                   truncated=bool(trunc))


def cluster_sizes(g, p: float, replicas: int, seed: int = 0, cap: int = DEFAULT_CAP,
                  root=None, first_replica: int = 0):
    """Sizes of the cluster of ``root`` over consecutive replicas.

    Returns
    -------
    sizes : ndarray of int64
    truncated : ndarray of bool
    """
    root = gc.origin(g) if root is None else gc.validate_vertex(g, root)
    return K.batch_cluster_sizes(gc.kernel_spec(g), np.int64(gc.vertex_key(root)), float(p),
                                 as_seed(seed), np.int64(first_replica), np.int64(replicas),
                                 np.int64(cap), gc.buffer_size(g))


class TemperleyBound(float):
    """``1 / (Delta - 1)`` as a float, with an explanatory ``note``."""

    def __new__(cls, value: float, note: str = ""):
        obj = super().__new__(cls, value)
        obj.note = note
        return obj


def temperley_lower_bound(g) -> TemperleyBound:
    """Lower bound ``1/(Delta - 1)`` on the Temperley critical probability.

    Unbounded-degree families get 0 with a note: the bound is vacuous
    there, and the hairy half-line in fact has critical probability 1.
    """
    delta = gc.max_degree(g)
    if delta == gc.UNBOUNDED:
        return TemperleyBound(0.0, "unbounded degrees: the 1/(Delta-1) bound is vacuous; "
                                   "the hairy half-line has critical probability 1")
    if delta <= 1:
        return TemperleyBound(1.0, "degree at most one")
    return TemperleyBound(1.0 / (delta - 1))


def subcritical_bound(g) -> float:
    """A p below which subcriticality is guaranteed (1 for the hairy line)."""
    if gc.max_degree(g) == gc.UNBOUNDED:
        return 1.0
    return float(temperley_lower_bound(g))


@dataclass(frozen=True)
class TailEstimate:
    k_values: np.ndarray
    tail: np.ndarray
    se: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    replicas: int
    truncation_rate: float
    warning: bool


def cluster_size_tail(cfg_template: PercolationConfig, g, k_values, replicas: int,
                      z: float = 2.5758293035489004,
                      assume_subcritical: bool = False) -> TailEstimate:
    """Empirical ``P(|C_o| > k)`` with binomial standard errors.

    Requires ``p`` below ``subcritical_bound(g)`` unless the caller
    asserts subcriticality.  Truncated samples count as exceeding every
    ``k < cluster_cap``; a truncation rate above 1% sets ``warning``.
    """
    if not assume_subcritical and cfg_template.p >= subcritical_bound(g):
        raise ValueError(f"p={cfg_template.p} is not below the guaranteed subcritical "
                         f"bound {subcritical_bound(g):.4g}; pass assume_subcritical=True")
    k_values = np.asarray(k_values, dtype=np.int64)
    sizes, trunc = cluster_sizes(g, cfg_template.p, replicas, cfg_template.master_seed,
                                 cfg_template.cluster_cap,
                                 first_replica=cfg_template.replica_index)
    tail = (sizes[None, :] > k_values[:, None]).mean(axis=1)
    se = np.sqrt(tail * (1 - tail) / replicas)
    rate = float(trunc.mean())
    return TailEstimate(k_values, tail, se, np.clip(tail - z * se, 0, 1),
                        np.clip(tail + z * se, 0, 1), replicas, rate, rate > 0.01)


def tail_slope(est: TailEstimate) -> tuple:
    """Weighted least-squares slope of ``log P(|C| > k)`` against ``k``.

    Only points with a positive tail enter.  Returns ``(slope, se)``.
    """
    mask = est.tail > 0
    k = est.k_values[mask].astype(float)
    y = np.log(est.tail[mask])
    var = (1 - est.tail[mask]) / (est.replicas * est.tail[mask])
    w = 1.0 / np.maximum(var, 1e-300)
    if k.size < 2:
        raise ValueError("need at least two positive tail points")
    kbar = np.sum(w * k) / np.sum(w)
    ybar = np.sum(w * y) / np.sum(w)
    sxx = np.sum(w * (k - kbar) ** 2)
    slope = np.sum(w * (k - kbar) * (y - ybar)) / sxx
    return float(slope), float(np.sqrt(1.0 / sxx))
