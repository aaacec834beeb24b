import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from percwalk import _kernels as K
from percwalk import graph_core as gc
from percwalk import oracle
from percwalk.percolation import PercolationConfig, explore_cluster
from percwalk.union_process import (boundary_cluster_bound, intermediate_volume,
                                    intersection_batch, intersection_volume, last_exit_volume,
                                    linf_ball_shape, sausage_batch, sausage_volume,
                                    simulate_batch, union_along, union_state, union_volume,
                                    window_union, window_union_along)
from percwalk.walk import WalkStream, range_sequence, simulate_trace

Z1, Z2, Z3 = gc.ZdNearest(1), gc.ZdNearest(2), gc.ZdNearest(3)
seeds = st.integers(0, 2 ** 40)


def cluster_union(g, cfg, positions):
    out = set()
    for x in positions:
        if x not in out:
            out |= explore_cluster(cfg, g, x).vertices
    return out


# ---------------------------------------------------------------- examples

@pytest.mark.parametrize("g", [Z1, Z2, Z3, gc.ZdLinf(3), gc.AlternatingZ3((3,))], ids=repr)
def test_p_zero_union_is_range(g):
    res = union_volume(g, PercolationConfig(0.0, 3), gc.origin(g), 300)
    assert np.array_equal(res.u_sequence, res.r_sequence)
    b = simulate_batch(g, 0.0, [10, 300], 50, seed=3)
    assert np.array_equal(b.U, b.R)


def test_u0_is_origin_cluster():
    cfg = PercolationConfig(0.4, 12, 5)
    res = union_volume(Z2, cfg, (0, 0), 0)
    assert res.u_sequence.tolist() == [explore_cluster(cfg, Z2, (0, 0)).size]


@pytest.mark.parametrize("g,p", [(Z1, 0.3), (Z2, 0.2), (Z3, 0.1), (gc.ZdLinf(2), 0.05),
                                 (gc.AlternatingZ3((2, 6)), 0.1),
                                 (gc.HairyHalfLine((2, 4), (3, 5)), 0.5)], ids=repr)
def test_single_run_reproduces_batch_row(g, p):
    b = simulate_batch(g, p, [40], 30, seed=77, first_replica=5)
    for i in range(30):
        r = 5 + i
        res = union_volume(g, PercolationConfig(p, 77, r), gc.origin(g), 40)
        assert (res.u_sequence[-1], res.r_sequence[-1], res.l_sequence[-1]) == \
            (b.U[i, 0], b.R[i, 0], b.L[i, 0])


def test_line_kernel_matches_generic_kernel():
    n_values = np.array([0, 10, 500], dtype=np.int64)
    line = simulate_batch(Z1, 0.35, n_values, 200, seed=9)
    R, L, U, tr = K.batch_union(gc.kernel_spec(Z1), np.int64(gc.vertex_key((0,))), np.int64(500),
                                n_values, 0.35, np.uint64(9), np.uint64(9), np.int64(0),
                                np.int64(0), np.int64(200), np.int64(10 ** 6), True,
                                gc.buffer_size(Z1))
    assert np.array_equal(line.U, U) and np.array_equal(line.R, R)
    assert np.array_equal(line.L, L)


def test_union_matches_python_cluster_union():
    cfg = PercolationConfig(0.3, 4, 2)
    tr = simulate_trace(Z2, (0, 0), 200, WalkStream(4, 0, 2))
    res = union_along(Z2, cfg, tr)
    pos = tr.positions
    for k in (0, 1, 17, 200):
        assert res.u_sequence[k] == len(cluster_union(Z2, cfg, pos[:k + 1]))


def test_mean_u2_against_box_oracle():
    res = oracle.exact_mean_union(Z2, Fraction(1, 10), (0, 0), 2, 2)
    lo, hi = res.interval_float
    U = simulate_batch(Z2, 0.1, [2], 10 ** 6, seed=21).U[:, 0]
    m, se = U.mean(), U.std(ddof=1) / math.sqrt(U.size)
    assert lo - 4 * se <= m <= hi + 4 * se
    assert m >= float(res.value) - 4 * se


def test_window_from_zero_is_union():
    cfg = PercolationConfig(0.25, 5, 1)
    res = union_volume(Z2, cfg, (0, 0), 120)
    assert window_union(Z2, cfg, (0, 0), 0, 120) == res.u_sequence[-1]
    with pytest.raises(ValueError):
        window_union(Z2, cfg, (0, 0), 5, 4)


def test_window_stationarity():
    # U_{m,m+l} and U_{0,l} on independent replicas: same law
    p, m, l, reps = 0.2, 30, 10, 10 ** 4
    a = [window_union(Z2, PercolationConfig(p, 8, r), (0, 0), 0, l) for r in range(reps)]
    b = [window_union(Z2, PercolationConfig(p, 8, r), (0, 0), m, m + l)
         for r in range(reps, 2 * reps)]
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_sausage_of_origin_is_range():
    for r in range(20):
        s = WalkStream(6, 0, r)
        tr = simulate_trace(Z3, (0, 0, 0), 150, s)
        assert sausage_volume(Z3, [(0, 0, 0)], (0, 0, 0), 150, s) == range_sequence(tr)[-1]


def test_sausage_at_time_zero_is_shape_size():
    A = linf_ball_shape(3, 1)
    assert sausage_volume(gc.ZdNearest(3), A, (0, 0, 0), 0) == 27
    V = sausage_batch(Z2, [(0, 0), (1, 0), (0, 2)], [0, 5], 10)
    assert np.all(V[:, 0] == 3)


def test_sausage_matches_python_union():
    A = [(0, 0), (1, 0), (0, 1), (-1, -1)]
    for r in range(10):
        s = WalkStream(2, 0, r)
        pos = simulate_trace(Z2, (0, 0), 80, s).positions
        expect = {(x + a, y + b) for (x, y) in pos for (a, b) in A}
        assert sausage_volume(Z2, A, (0, 0), 80, s) == len(expect)


def test_sausage_rejects_nonlattice():
    with pytest.raises(NotImplementedError):
        sausage_volume(gc.AlternatingZ3((2,)), [(0, 0, 0)], (0, 0, 0), 3)


def test_intermediate_volume_at_p_zero():
    est = intermediate_volume(Z3, 0.0, (0, 0, 0), 200, 10, seed=1)
    assert est.mean == est.r_n and est.se == 0.0


def test_intermediate_volume_exceeds_range():
    est = intermediate_volume(Z2, 0.2, (0, 0), 200, 50, seed=2)
    assert np.all(est.values >= est.r_n)


def test_intermediate_outer_mean_against_oracle():
    # averaging the percolation mean over walks recovers E[U_2]
    res = oracle.exact_mean_union(Z2, Fraction(1, 10), (0, 0), 2, 2)
    lo, hi = res.interval_float
    outer = np.array([intermediate_volume(Z2, 0.1, (0, 0), 2, 20, seed=3, walk_replica=w).mean
                      for w in range(20000)])
    m, se = outer.mean(), outer.std(ddof=1) / math.sqrt(outer.size)
    assert lo - 4 * se <= m <= hi + 4 * se


def test_intersection_at_time_zero_is_origin_cluster():
    cfg = PercolationConfig(0.3, 5, 4)
    res = intersection_volume(Z2, cfg, 0)
    c = explore_cluster(cfg, Z2, (0, 0)).size
    assert res.i_n == res.u1 == res.u2 == c


def test_intersection_is_bounded_by_unions():
    U1, U2, I, tr = intersection_batch(Z3, 0.15, 300, 200, seed=4)
    assert np.all(I <= np.minimum(U1, U2)) and np.all(I >= 1)


def test_intersection_matches_python_sets():
    cfg = PercolationConfig(0.25, 9, 3)
    res = intersection_volume(Z2, cfg, 60)
    a = simulate_trace(Z2, (0, 0), 60, WalkStream(9, 0, 3)).positions
    b = simulate_trace(Z2, (0, 0), 60, WalkStream(9, 1, 3)).positions
    ua, ub = cluster_union(Z2, cfg, a), cluster_union(Z2, cfg, b)
    assert (res.u1, res.u2, res.i_n) == (len(ua), len(ub), len(ua & ub))


def test_intersection_two_scale_gap():
    # the walks do not depend on p, so the p = 0.1 and p = 0 intersections
    # are paired replica by replica
    gaps = []
    for n in (10 ** 4, 10 ** 5):
        _, _, I0, _ = intersection_batch(Z2, 0.0, n, 300, seed=5)
        _, _, I1, tr = intersection_batch(Z2, 0.1, n, 300, seed=5)
        assert not tr.any() and np.all(I1 >= I0)
        gaps.append(math.log(n) ** 2 / n * (I1 - I0).mean())
    assert gaps[1] < gaps[0]


def test_truncation_is_flagged():
    b = simulate_batch(Z2, 0.9, [5], 5, seed=1, cap=50)
    assert b.truncated.all() and b.truncation_rate == 1.0


# ---------------------------------------------------------------- properties

cases = st.tuples(seeds, st.integers(0, 10 ** 4), st.floats(0.0, 0.3), st.integers(0, 50))
# subcritical on Z^3 (critical point near 0.249)
cases3 = st.tuples(seeds, st.integers(0, 10 ** 4), st.floats(0.0, 0.2), st.integers(0, 50))


@given(cases)
@settings(max_examples=100)
def test_complete_cluster_invariant(case):
    seed, rep, p, n = case
    cfg = PercolationConfig(p, seed, rep)
    state = union_state(Z2, cfg, (0, 0), n)
    assert not state.any_truncated
    for root in state.cluster_roots:
        assert explore_cluster(cfg, Z2, root).vertices <= state.union_vertices
    assert len(state.union_vertices) == state.u_sequence[-1]
    assert np.all(np.diff(state.u_sequence) >= 0)


@given(cases)
@settings(max_examples=100)
def test_boundary_sandwich(case):
    seed, rep, p, n = case
    cfg = PercolationConfig(p, seed, rep)
    tr = simulate_trace(Z2, (0, 0), n, WalkStream(seed, 0, rep))
    res = union_along(Z2, cfg, tr)
    assert res.r_sequence[-1] <= res.u_sequence[-1] <= boundary_cluster_bound(Z2, cfg, tr)


@given(cases)
@settings(max_examples=100)
def test_last_exit_identity_z2(case):
    seed, rep, p, n = case
    cfg = PercolationConfig(p, seed, rep)
    tr = simulate_trace(Z2, (0, 0), n, WalkStream(seed, 0, rep))
    assert last_exit_volume(Z2, cfg, tr) == union_along(Z2, cfg, tr).u_sequence[-1]


@given(cases3)
@settings(max_examples=100)
def test_last_exit_identity(case):
    seed, rep, p, n = case
    cfg = PercolationConfig(p, seed, rep)
    tr = simulate_trace(Z3, (0, 0, 0), n, WalkStream(seed, 0, rep))
    assert last_exit_volume(Z3, cfg, tr) == union_along(Z3, cfg, tr).u_sequence[-1]


@given(cases, st.integers(0, 50))
@settings(max_examples=100)
def test_window_subadditivity(case, m):
    seed, rep, p, n = case
    m = min(m, n)
    cfg = PercolationConfig(p, seed, rep)
    tr = simulate_trace(Z2, (0, 0), n, WalkStream(seed, 0, rep))
    total = window_union_along(Z2, cfg, tr, 0, n)
    assert total <= window_union_along(Z2, cfg, tr, 0, m) + window_union_along(Z2, cfg, tr, m, n)


@given(cases3, st.floats(0.0, 0.2))
@settings(max_examples=100)
def test_union_monotone_in_p(case, q):
    seed, rep, p, n = case
    lo, hi = sorted((p, q))
    s = WalkStream(seed, 0, rep)
    a = union_volume(Z3, PercolationConfig(lo, seed, rep), (0, 0, 0), n, s).u_sequence
    b = union_volume(Z3, PercolationConfig(hi, seed, rep), (0, 0, 0), n, s).u_sequence
    assert np.all(a <= b)
