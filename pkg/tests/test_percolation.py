import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from percwalk import graph_core as gc
from percwalk import oracle
from percwalk.percolation import (PercolationConfig, cluster_size_tail, cluster_sizes,
                                  edge_open, edge_uniform, edge_uniforms, explore_cluster,
                                  tail_slope, temperley_lower_bound)
from percwalk.rng import as_seed, edge_uniform as raw_edge_uniform, perc_key

Z1, Z2, Z3 = gc.ZdNearest(1), gc.ZdNearest(2), gc.ZdNearest(3)


def test_config_validation():
    with pytest.raises(ValueError):
        PercolationConfig(1.5)
    with pytest.raises(ValueError):
        PercolationConfig(0.5, cluster_cap=0)
    with pytest.raises(ValueError):
        PercolationConfig(0.5, replica_index=-1)


@pytest.mark.parametrize("p,state", [(0.0, False), (1.0, True)])
def test_extreme_p(p, state):
    cfg = PercolationConfig(p, 5)
    for x in [(0, 0), (3, -2), (100, 7)]:
        for y in gc.neighbors(Z2, x):
            assert edge_open(cfg, (x, y)) is state


def test_edge_state_is_symmetric_and_repeatable():
    cfg = PercolationConfig(0.4, 9, 3)
    e = ((1, 2), (1, 3))
    assert edge_uniform(cfg, e) == edge_uniform(cfg, e[::-1]) == edge_uniform(cfg, e)
    assert edge_uniform(cfg, e) != edge_uniform(cfg.with_replica(4), e)


def test_open_fraction_and_serial_correlation():
    # 10^6 distinct horizontal edges of Z^2 in row-major enumeration order
    side = 1000
    xs, ys = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    a = gc.coords_to_keys(np.stack([xs.ravel(), ys.ravel()], axis=1))
    b = gc.coords_to_keys(np.stack([xs.ravel() + 1, ys.ravel()], axis=1))
    u = edge_uniforms(PercolationConfig(0.3, 2024), a, b)
    assert u.size == 10 ** 6
    assert abs((u < 0.3).mean() - 0.3) < 0.002
    # lag-1 autocorrelation of the uniforms: |r| < 4 / sqrt(N)
    c = u - u.mean()
    r = np.dot(c[:-1], c[1:]) / np.dot(c, c)
    assert abs(r) < 4 / math.sqrt(u.size)


def test_uniforms_lie_in_unit_interval():
    k = perc_key(as_seed(1))
    vals = [raw_edge_uniform(k, np.int64(0), np.int64(i), np.int64(i + 1)) for i in range(1000)]
    assert all(0.0 <= v < 1.0 for v in vals)


def test_p_zero_cluster_is_singleton():
    c = explore_cluster(PercolationConfig(0.0), Z2, (4, 4))
    assert c.vertices == {(4, 4)} and not c.truncated


def test_p_one_cluster_truncates_at_cap():
    c = explore_cluster(PercolationConfig(1.0, cluster_cap=100), Z2, (0, 0))
    assert c.truncated and c.size == 100


def test_cluster_mean_against_box_oracle():
    # E|C_0| on Z^2 at p = 1/4: the box-truncated exact value (graph ball of
    # radius 2, 16 edges) sits below the truth by at most epsilon
    res = oracle.exact_mean_union(Z2, Fraction(1, 4), (0, 0), 0, 2)
    sizes, trunc = cluster_sizes(Z2, 0.25, 10 ** 5, seed=17)
    assert not trunc.any()
    m, se = sizes.mean(), sizes.std(ddof=1) / math.sqrt(sizes.size)
    lo, hi = res.interval_float
    assert lo - 3 * se <= m <= hi + 3 * se
    assert m >= float(res.value) - 3 * se


def test_line_tail_matches_exact_law():
    est = cluster_size_tail(PercolationConfig(0.4, 8), Z1, [3], 10 ** 5)
    exact = float(oracle.exact_line_cluster_law(Fraction(2, 5), 3))
    assert abs(est.tail[0] - exact) <= 3 * est.se[0]


def test_tail_zero_at_p_zero():
    est = cluster_size_tail(PercolationConfig(0.0), Z2, [1, 2, 5], 1000)
    assert np.all(est.tail == 0)


def test_tail_slope_negative_in_z2():
    est = cluster_size_tail(PercolationConfig(0.2, 4), Z2, list(range(1, 16)), 10 ** 5)
    assert np.all(np.diff(est.tail) <= 0)
    slope, se = tail_slope(est)
    assert slope + 2.5758 * se < 0


def test_tail_requires_subcritical_p():
    with pytest.raises(ValueError):
        cluster_size_tail(PercolationConfig(0.4), Z2, [1], 10)
    est = cluster_size_tail(PercolationConfig(0.4, cluster_cap=50), Z2, [1], 200,
                            assume_subcritical=True)
    assert est.replicas == 200


def test_temperley_bounds():
    assert temperley_lower_bound(Z2) == pytest.approx(1 / 3)
    assert temperley_lower_bound(gc.ZdLinf(3)) == pytest.approx(1 / 25)
    hb = temperley_lower_bound(gc.HairyHalfLine((2,), (3,)))
    assert hb == 0.0 and "critical probability 1" in hb.note


# ---------------------------------------------------------------- properties

@given(st.integers(0, 2 ** 32), st.integers(0, 50), st.floats(0.05, 0.45),
       st.tuples(st.integers(-20, 20), st.integers(-20, 20)))
@settings(max_examples=100)
def test_cluster_properties(seed, rep, p, x):
    cfg = PercolationConfig(p, seed, rep)
    c = explore_cluster(cfg, Z2, x)
    assert x in c.vertices
    assert explore_cluster(cfg, Z2, x) == c
    if c.truncated:
        return
    # maximality: every open edge out of a vertex stays inside
    for v in c.vertices:
        for w in gc.neighbors(Z2, v):
            if edge_open(cfg, (v, w)):
                assert w in c.vertices
    # equivalence class: any member explores to the same set
    y = sorted(c.vertices)[len(c.vertices) // 2]
    assert explore_cluster(cfg, Z2, y).vertices == c.vertices


@given(st.integers(0, 2 ** 32), st.floats(0.0, 0.3), st.floats(0.0, 0.3),
       st.tuples(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20)))
@settings(max_examples=100)
def test_monotone_coupling(seed, p1, p2, x):
    p1, p2 = sorted((p1, p2))
    a = explore_cluster(PercolationConfig(p1, seed), Z3, x)
    b = explore_cluster(PercolationConfig(p2, seed), Z3, x)
    assert a.vertices <= b.vertices
