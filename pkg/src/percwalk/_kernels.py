"""Compiled hot loops.

A family is passed around as the tuple produced by
``graph_core.kernel_spec``::

    (kind, d, bits, deltas, dcoords, shells, hair_a, hair_b,
     mod_vertices, mod_added, mod_removed)

and vertices as int64 keys (see ``graph_core.vertex_key``).  All
randomness comes from ``rng``: a walk is a function of
``(walk seed, stream, replica)`` and an edge state of
``(percolation key, replica, edge)``.
"""
from __future__ import annotations

import numpy as np
from numba import njit, prange, types
from numba.typed import Dict, List

from .rng import edge_uniform, perc_key, walk_base, walk_choice, walk_word

KIND_NN = 0
KIND_LINF = 1
KIND_ALT = 2
KIND_HAIRY = 3

HIT = 0
BUDGET = 1
ESCAPED = 2

_HAIR_SHIFT = 32
_HAIR_MASK = (1 << 32) - 1


# ---------------------------------------------------------------- lattice keys

@njit(inline="always", cache=True)
def _coord(fam, key, i):
    bits = fam[2]
    off = np.int64(1) << (bits - 1)
    mask = (np.int64(1) << bits) - 1
    return ((key >> (bits * i)) & mask) - off


@njit(cache=True)
def _check_coords(fam, key):
    bits = fam[2]
    lim = (np.int64(1) << (bits - 1)) - 2
    for i in range(fam[1]):
        c = _coord(fam, key, i)
        if c > lim or c < -lim:
            raise OverflowError("lattice coordinate left the representable range")


@njit(cache=True)
def _linf(fam, key):
    m = 0
    for i in range(fam[1]):
        c = abs(_coord(fam, key, i))
        if c > m:
            m = c
    return m


@njit(cache=True)
def _region(fam, key):
    r = _linf(fam, key)
    shells = fam[5]
    c = 0
    for i in range(shells.shape[0]):
        if shells[i] <= r:
            c += 1
    return c


@njit(cache=True)
def _alt_allowed(fam, key, t, rx):
    dc = fam[4]
    if abs(dc[t, 0]) + abs(dc[t, 1]) + abs(dc[t, 2]) == 1:
        return True
    ry = _region(fam, key + fam[3][t])
    m = rx if rx < ry else ry
    return m % 2 == 1


# ---------------------------------------------------------------- hairy keys

@njit(cache=True)
def _anchor_index(fam, key):
    a = fam[6]
    i = np.searchsorted(a, key)
    if i < a.shape[0] and a[i] == key:
        return i
    return -1


@njit(inline="always", cache=True)
def _hair_key(k, j):
    return -((np.int64(k) << _HAIR_SHIFT) | np.int64(j))


@njit(cache=True)
def spine_position(fam, key):
    """Spine coordinate of a hairy vertex (a hair counts as its anchor + 1)."""
    if key >= 0:
        return key
    k = (-key) >> _HAIR_SHIFT
    return fam[6][k - 1] + 1


# ---------------------------------------------------------------- adjacency

@njit(cache=True)
def _base_deg(fam, key):
    kind = fam[0]
    if kind == KIND_NN or kind == KIND_LINF:
        return fam[3].shape[0]
    if kind == KIND_ALT:
        rx = _region(fam, key)
        c = 0
        for t in range(fam[3].shape[0]):
            if _alt_allowed(fam, key, t, rx):
                c += 1
        return c
    if key < 0:
        return 1
    deg = 2 if key > 0 else 1
    i = _anchor_index(fam, key)
    if i >= 0:
        deg += fam[7][i]
    return deg


@njit(cache=True)
def _base_nbr_at(fam, key, j):
    kind = fam[0]
    if kind == KIND_NN or kind == KIND_LINF:
        return key + fam[3][j]
    if kind == KIND_ALT:
        rx = _region(fam, key)
        c = 0
        for t in range(fam[3].shape[0]):
            if _alt_allowed(fam, key, t, rx):
                if c == j:
                    return key + fam[3][t]
                c += 1
        raise IndexError("neighbor index out of range")
    if key < 0:
        k = (-key) >> _HAIR_SHIFT
        return fam[6][k - 1]
    if key > 0:
        if j == 0:
            return key - 1
        j -= 1
    if j == 0:
        return key + 1
    j -= 1
    i = _anchor_index(fam, key)
    return _hair_key(i + 1, j + 1)


@njit(cache=True)
def _base_fill(fam, key, buf):
    kind = fam[0]
    if kind == KIND_NN or kind == KIND_LINF:
        deltas = fam[3]
        for t in range(deltas.shape[0]):
            buf[t] = key + deltas[t]
        return deltas.shape[0]
    if kind == KIND_ALT:
        rx = _region(fam, key)
        c = 0
        deltas = fam[3]
        for t in range(deltas.shape[0]):
            if _alt_allowed(fam, key, t, rx):
                buf[c] = key + deltas[t]
                c += 1
        return c
    if key < 0:
        k = (-key) >> _HAIR_SHIFT
        buf[0] = fam[6][k - 1]
        return 1
    c = 0
    if key > 0:
        buf[0] = key - 1
        c = 1
    buf[c] = key + 1
    c += 1
    i = _anchor_index(fam, key)
    if i >= 0:
        for j in range(fam[7][i]):
            buf[c] = _hair_key(i + 1, j + 1)
            c += 1
    return c


@njit(cache=True)
def _is_modified(fam, key):
    mv = fam[8]
    if mv.shape[0] == 0:
        return False
    i = np.searchsorted(mv, key)
    return i < mv.shape[0] and mv[i] == key


@njit(cache=True)
def _mod_fill(fam, key, buf):
    c = _base_fill(fam, key, buf)
    rem = fam[10]
    out = 0
    for t in range(c):
        w = buf[t]
        drop = False
        for e in range(rem.shape[0]):
            if (rem[e, 0] == key and rem[e, 1] == w) or (rem[e, 1] == key and rem[e, 0] == w):
                drop = True
                break
        if not drop:
            buf[out] = w
            out += 1
    add = fam[9]
    for e in range(add.shape[0]):
        if add[e, 0] == key:
            buf[out] = add[e, 1]
            out += 1
        elif add[e, 1] == key:
            buf[out] = add[e, 0]
            out += 1
    return out


@njit(cache=True)
def degree(fam, key):
    if _is_modified(fam, key):
        c = _base_deg(fam, key)
        rem = fam[10]
        add = fam[9]
        for e in range(rem.shape[0]):
            if rem[e, 0] == key or rem[e, 1] == key:
                c -= 1
        for e in range(add.shape[0]):
            if add[e, 0] == key or add[e, 1] == key:
                c += 1
        return c
    return _base_deg(fam, key)


@njit(cache=True)
def neighbor_at(fam, key, j):
    if _is_modified(fam, key):
        buf = np.empty(64 + 2 * fam[9].shape[0], np.int64)
        c = _mod_fill(fam, key, buf)
        if j >= c:
            raise IndexError("neighbor index out of range")
        return buf[j]
    return _base_nbr_at(fam, key, j)


@njit(cache=True)
def fill_neighbors(fam, key, buf):
    """Write the neighbors of ``key`` into ``buf`` and return their count."""
    if _is_modified(fam, key):
        return _mod_fill(fam, key, buf)
    return _base_fill(fam, key, buf)


@njit(cache=True)
def norm_distance(fam, key, center):
    """Escape-radius distance: l1 (NN), l-inf (LINF, ALT) or spine distance."""
    kind = fam[0]
    if kind == KIND_HAIRY:
        return abs(spine_position(fam, key) - spine_position(fam, center))
    m = 0
    for i in range(fam[1]):
        c = abs(_coord(fam, key, i) - _coord(fam, center, i))
        if kind == KIND_NN:
            m += c
        elif c > m:
            m = c
    return m


# ---------------------------------------------------------------- walks

@njit(cache=True)
def walk_path(fam, x0, n, wseed, stream, replica):
    """Keys S_0..S_n of the simple random walk started at ``x0``."""
    base = walk_base(wseed, stream, replica)
    path = np.empty(n + 1, np.int64)
    path[0] = x0
    x = x0
    lattice = fam[0] != KIND_HAIRY
    fast = (fam[0] == KIND_NN or fam[0] == KIND_LINF) and fam[8].shape[0] == 0
    if fast:
        deltas = fam[3]
        deg = deltas.shape[0]
        for k in range(1, n + 1):
            x = x + deltas[walk_choice(base, k, deg)]
            _check_coords(fam, x)
            path[k] = x
        return path
    for k in range(1, n + 1):
        x = neighbor_at(fam, x, walk_choice(base, k, degree(fam, x)))
        if lattice:
            _check_coords(fam, x)
        path[k] = x
    return path


# ---------------------------------------------------------------- clusters

@njit(cache=True)
def explore_into(fam, root, p, pkey, prep, cap, table, tag, queue, buf):
    """Breadth-first exploration of the open cluster of ``root``.

    Vertices are inserted into ``table`` with value ``tag``; vertices
    already present are treated as explored.  Returns
    ``(added, truncated, queue)``; ``queue`` may have been reallocated.
    """
    table[root] = tag
    count = 1
    if p <= 0.0:
        return count, False, queue
    lattice = fam[0] != KIND_HAIRY
    queue[0] = root
    qh = 0
    qt = 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        c = fill_neighbors(fam, v, buf)
        for t in range(c):
            w = buf[t]
            if w in table:
                continue
            if edge_uniform(pkey, prep, v, w) < p:
                if count >= cap:
                    return count, True, queue
                if lattice:
                    _check_coords(fam, w)
                table[w] = tag
                count += 1
                if qt == queue.shape[0]:
                    q2 = np.empty(2 * qt, np.int64)
                    q2[:qt] = queue
                    queue = q2
                queue[qt] = w
                qt += 1
    return count, False, queue


@njit(cache=True)
def explore_cluster(fam, root, p, pseed, prep, cap, bufsize):
    """Cluster of ``root`` as a key array (BFS order) plus truncation flag."""
    table = Dict.empty(types.int64, types.int64)
    queue = np.empty(64, np.int64)
    buf = np.empty(bufsize, np.int64)
    pkey = perc_key(pseed)
    count, trunc, queue = explore_into(fam, root, p, pkey, prep, cap, table, 0, queue, buf)
    out = np.empty(len(table), np.int64)
    i = 0
    for k in table.keys():
        out[i] = k
        i += 1
    return out, trunc


@njit(cache=True)
def count_open_edges(fam, key, p, pseed, prep, bufsize):
    """Number of open edges incident to ``key``."""
    buf = np.empty(bufsize, np.int64)
    pkey = perc_key(pseed)
    c = fill_neighbors(fam, key, buf)
    m = 0
    for t in range(c):
        if edge_uniform(pkey, prep, key, buf[t]) < p:
            m += 1
    return m


@njit(parallel=True, cache=True)
def batch_cluster_sizes(fam, root, p, pseed, rep0, nrep, cap, bufsize):
    sizes = np.empty(nrep, np.int64)
    trunc = np.zeros(nrep, np.bool_)
    pkey = perc_key(pseed)
    for i in prange(nrep):
        table = Dict.empty(types.int64, types.int64)
        queue = np.empty(64, np.int64)
        buf = np.empty(bufsize, np.int64)
        c, tr, queue = explore_into(fam, root, p, pkey, rep0 + i, cap, table, 0, queue, buf)
        sizes[i] = c
        trunc[i] = tr
    return sizes, trunc


# ---------------------------------------------------------------- union process

@njit(cache=True)
def union_run(fam, path, p, pkey, prep, cap, ck, track_boundary, buf):
    """Incremental R_k, L_k, U_k along ``path``, recorded at checkpoints ``ck``.

    Returns ``(R, L, U, truncated, union_table, roots)`` where
    ``union_table`` maps each union vertex to the index of its cluster
    root in ``roots``.
    """
    visited = Dict.empty(types.int64, types.int64)
    table = Dict.empty(types.int64, types.int64)
    roots = List.empty_list(types.int64)
    queue = np.empty(256, np.int64)
    nck = ck.shape[0]
    outR = np.empty(nck, np.int64)
    outL = np.empty(nck, np.int64)
    outU = np.empty(nck, np.int64)
    R = 0
    L = 0
    U = 0
    trunc = False
    ci = 0
    for k in range(path.shape[0]):
        x = path[k]
        if x not in visited:
            R += 1
            if track_boundary:
                c = fill_neighbors(fam, x, buf)
                cnt = 0
                for t in range(c):
                    w = buf[t]
                    if w in visited:
                        v = visited[w] + 1
                        visited[w] = v
                        cnt += 1
                        if v == degree(fam, w):
                            L -= 1
                visited[x] = cnt
                if cnt < c:
                    L += 1
            else:
                visited[x] = 0
            if x not in table:
                added, tr, queue = explore_into(fam, x, p, pkey, prep, cap, table,
                                                len(roots), queue, buf)
                roots.append(x)
                U += added
                if tr:
                    trunc = True
        while ci < nck and ck[ci] == k:
            outR[ci] = R
            outL[ci] = L
            outU[ci] = U
            ci += 1
    return outR, outL, outU, trunc, table, roots


@njit(parallel=True, cache=True)
def batch_union(fam, x0, n, ck, p, pseed, wseed, stream, rep0, nrep, cap,
                track_boundary, bufsize):
    """R, L, U at checkpoints for replicas ``rep0 .. rep0 + nrep - 1``."""
    nck = ck.shape[0]
    R = np.empty((nrep, nck), np.int64)
    L = np.empty((nrep, nck), np.int64)
    U = np.empty((nrep, nck), np.int64)
    trunc = np.zeros(nrep, np.bool_)
    pkey = perc_key(pseed)
    for i in prange(nrep):
        r = rep0 + i
        path = walk_path(fam, x0, n, wseed, stream, r)
        buf = np.empty(bufsize, np.int64)
        a, b, c, tr, _t, _r = union_run(fam, path, p, pkey, r, cap, ck, track_boundary, buf)
        R[i, :] = a
        L[i, :] = b
        U[i, :] = c
        trunc[i] = tr
    return R, L, U, trunc


@njit(parallel=True, cache=True)
def batch_union_fixed_path(fam, path, p, pseed, preps, cap, bufsize):
    """Final U_n along one fixed path for several percolation replicas."""
    m = preps.shape[0]
    U = np.empty(m, np.int64)
    trunc = np.zeros(m, np.bool_)
    pkey = perc_key(pseed)
    ck = np.array([path.shape[0] - 1], np.int64)
    for i in prange(m):
        buf = np.empty(bufsize, np.int64)
        a, b, c, tr, _t, _r = union_run(fam, path, p, pkey, preps[i], cap, ck, False, buf)
        U[i] = c[0]
        trunc[i] = tr
    return U, trunc


@njit(parallel=True, cache=True)
def batch_intersection(fam, x0, n, p, pseed, wseed, rep0, nrep, cap, bufsize):
    """U¹_n, U²_n and I_n for two walks (streams 0 and 1) sharing percolation."""
    U1 = np.empty(nrep, np.int64)
    U2 = np.empty(nrep, np.int64)
    I = np.empty(nrep, np.int64)
    trunc = np.zeros(nrep, np.bool_)
    pkey = perc_key(pseed)
    ck = np.array([n], np.int64)
    for i in prange(nrep):
        r = rep0 + i
        buf = np.empty(bufsize, np.int64)
        p1 = walk_path(fam, x0, n, wseed, 0, r)
        p2 = walk_path(fam, x0, n, wseed, 1, r)
        a1, b1, c1, tr1, t1, r1 = union_run(fam, p1, p, pkey, r, cap, ck, False, buf)
        a2, b2, c2, tr2, t2, r2 = union_run(fam, p2, p, pkey, r, cap, ck, False, buf)
        cnt = 0
        if len(t1) <= len(t2):
            for k in t1.keys():
                if k in t2:
                    cnt += 1
        else:
            for k in t2.keys():
                if k in t1:
                    cnt += 1
        U1[i] = c1[0]
        U2[i] = c2[0]
        I[i] = cnt
        trunc[i] = tr1 or tr2
    return U1, U2, I, trunc


@njit(parallel=True, cache=True)
def batch_line_union(x0, n, ck, p, pseed, wseed, stream, rep0, nrep, cap):
    """Union process on the nearest-neighbor line Z^1 in O(1) per step.

    Visited sites and the union are intervals, so the state is four
    integers.  Walk and edge randomness match ``batch_union`` on
    ``ZdNearest(1)`` exactly (coordinates ``x`` map to keys ``x + 2**61``).
    """
    off = np.int64(1) << 61
    nck = ck.shape[0]
    R = np.empty((nrep, nck), np.int64)
    L = np.empty((nrep, nck), np.int64)
    U = np.empty((nrep, nck), np.int64)
    trunc = np.zeros(nrep, np.bool_)
    pkey = perc_key(pseed)
    for i in prange(nrep):
        r = rep0 + i
        base = walk_base(wseed, stream, r)
        x = x0
        lo = x
        hi = x
        # cluster of the start point
        size = 1
        tr = False
        ulo = x
        uhi = x
        if p > 0.0:
            while edge_uniform(pkey, r, uhi + off, uhi + 1 + off) < p:
                if size >= cap:
                    tr = True
                    break
                uhi += 1
                size += 1
            if not tr:
                while edge_uniform(pkey, r, ulo - 1 + off, ulo + off) < p:
                    if size >= cap:
                        tr = True
                        break
                    ulo -= 1
                    size += 1
        ci = 0
        while ci < nck and ck[ci] == 0:
            R[i, ci] = 1
            L[i, ci] = 1
            U[i, ci] = uhi - ulo + 1
            ci += 1
        k = 1
        while k <= n:
            word = walk_word(base, (k - 1) >> 1)
            for half in range(2):
                if k > n:
                    break
                if half == 0:
                    bit = (word >> np.uint64(63)) & np.uint64(1)
                else:
                    bit = (word >> np.uint64(31)) & np.uint64(1)
                if bit == 0:
                    x += 1
                    if x > hi:
                        hi = x
                        if x > uhi:
                            uhi = x
                            size = 1
                            while p > 0.0 and edge_uniform(pkey, r, uhi + off, uhi + 1 + off) < p:
                                if size >= cap:
                                    tr = True
                                    break
                                uhi += 1
                                size += 1
                else:
                    x -= 1
                    if x < lo:
                        lo = x
                        if x < ulo:
                            ulo = x
                            size = 1
                            while p > 0.0 and edge_uniform(pkey, r, ulo - 1 + off, ulo + off) < p:
                                if size >= cap:
                                    tr = True
                                    break
                                ulo -= 1
                                size += 1
                while ci < nck and ck[ci] == k:
                    R[i, ci] = hi - lo + 1
                    L[i, ci] = 2 if hi > lo else 1
                    U[i, ci] = uhi - ulo + 1
                    ci += 1
                k += 1
        trunc[i] = tr
    return R, L, U, trunc


@njit(parallel=True, cache=True)
def batch_sausage(fam, x0, n, ck, shape, wseed, stream, rep0, nrep):
    """|union of (S_i + A)| at checkpoints; ``shape`` holds key offsets of A."""
    nck = ck.shape[0]
    V = np.empty((nrep, nck), np.int64)
    for i in prange(nrep):
        path = walk_path(fam, x0, n, wseed, stream, rep0 + i)
        visited = Dict.empty(types.int64, types.int64)
        cover = Dict.empty(types.int64, types.int64)
        vol = 0
        ci = 0
        for k in range(n + 1):
            x = path[k]
            if x not in visited:
                visited[x] = 0
                for a in range(shape.shape[0]):
                    y = x + shape[a]
                    if y not in cover:
                        cover[y] = 0
                        vol += 1
            while ci < nck and ck[ci] == k:
                V[i, ci] = vol
                ci += 1
    return V


@njit(parallel=True, cache=True)
def batch_region_occupancy(fam, x0, n, ck, wseed, stream, rep0, nrep):
    """Fraction of times 0..k spent in odd (l-inf) regions, at checkpoints."""
    nck = ck.shape[0]
    out = np.empty((nrep, nck), np.float64)
    for i in prange(nrep):
        path = walk_path(fam, x0, n, wseed, stream, rep0 + i)
        odd = 0
        ci = 0
        for k in range(n + 1):
            if _region(fam, path[k]) % 2 == 1:
                odd += 1
            while ci < nck and ck[ci] == k:
                out[i, ci] = odd / (k + 1)
                ci += 1
    return out


# ---------------------------------------------------------------- hitting and escape

@njit(cache=True)
def _in_sorted(arr, key):
    i = np.searchsorted(arr, key)
    return i < arr.shape[0] and arr[i] == key


@njit(cache=True)
def hit_walk(fam, x0, targets, t_semantics, budget, center, radius, wseed, stream, replica):
    """Run one walk until it hits ``targets`` (sorted keys), exhausts the
    step ``budget`` or leaves the ball of ``radius`` around ``center``.

    ``budget < 0`` or ``radius < 0`` disables that stop rule.  Returns
    ``(outcome, time)`` with outcome HIT, BUDGET or ESCAPED.
    """
    if not t_semantics and _in_sorted(targets, x0):
        return HIT, 0
    base = walk_base(wseed, stream, replica)
    x = x0
    lattice = fam[0] != KIND_HAIRY
    fast = (fam[0] == KIND_NN or fam[0] == KIND_LINF) and fam[8].shape[0] == 0
    deltas = fam[3]
    k = 0
    while True:
        if budget >= 0 and k >= budget:
            return BUDGET, k
        k += 1
        if fast:
            x = x + deltas[walk_choice(base, k, deltas.shape[0])]
        else:
            x = neighbor_at(fam, x, walk_choice(base, k, degree(fam, x)))
        if lattice:
            _check_coords(fam, x)
        if _in_sorted(targets, x):
            return HIT, k
        if radius >= 0 and norm_distance(fam, x, center) > radius:
            return ESCAPED, k


@njit(parallel=True, cache=True)
def batch_hit(fam, x0, targets, t_semantics, budget, center, radius, wseed, stream, rep0, nrep):
    outcome = np.empty(nrep, np.int64)
    times = np.empty(nrep, np.int64)
    for i in prange(nrep):
        o, t = hit_walk(fam, x0, targets, t_semantics, budget, center, radius,
                        wseed, stream, rep0 + i)
        outcome[i] = o
        times[i] = t
    return outcome, times


@njit(parallel=True, cache=True)
def batch_set_escape(fam, starts, targets, center, radius, wseed, stream, walks):
    """Escape counts of ``walks`` walks from each start before returning to
    ``targets`` (T-semantics), with escape at ``radius``."""
    m = starts.shape[0]
    esc = np.zeros(m, np.int64)
    for s in range(m):
        cnt = 0
        for w in prange(walks):
            o, t = hit_walk(fam, starts[s], targets, True, -1, center, radius,
                            wseed, stream, s * walks + w)
            if o == ESCAPED:
                cnt += 1
        esc[s] = cnt
    return esc


@njit(parallel=True, cache=True)
def batch_cluster_escape(fam, root, p, pseed, rep0, nrep, cap, radius, wseed, walks, bufsize):
    """Per replica: sample C_root, then estimate from escape walks

    * ``cap_est``  = sum over x in C of the escape frequency from x,
    * ``esc_est``  = |C| times the escape frequency from the root,

    both relative to returns to C.  Truncated clusters are flagged and
    get NaN estimates.
    """
    cap_est = np.empty(nrep, np.float64)
    esc_est = np.empty(nrep, np.float64)
    sizes = np.empty(nrep, np.int64)
    trunc = np.zeros(nrep, np.bool_)
    pkey = perc_key(pseed)
    for i in prange(nrep):
        r = rep0 + i
        table = Dict.empty(types.int64, types.int64)
        queue = np.empty(64, np.int64)
        buf = np.empty(bufsize, np.int64)
        c, tr, queue = explore_into(fam, root, p, pkey, r, cap, table, 0, queue, buf)
        sizes[i] = c
        if tr:
            trunc[i] = True
            cap_est[i] = np.nan
            esc_est[i] = np.nan
            continue
        members = np.empty(c, np.int64)
        j = 0
        for k in table.keys():
            members[j] = k
            j += 1
        members.sort()
        total = 0.0
        root_freq = 0.0
        for s in range(c):
            cnt = 0
            for w in range(walks):
                o, t = hit_walk(fam, members[s], members, True, -1, root, radius,
                                wseed, 1 + s, r * walks + w)
                if o == ESCAPED:
                    cnt += 1
            f = cnt / walks
            total += f
            if members[s] == root:
                root_freq = f
        cap_est[i] = total
        esc_est[i] = c * root_freq
    return cap_est, esc_est, sizes, trunc


@njit(parallel=True, cache=True)
def batch_hairy(fam, p, pseed, wseed, rep0, nrep, cap, max_steps, bufsize):
    """Walk from spine vertex 0 until the last anchor is first reached.

    For every anchor k returns the hitting time T_{a_k}, U and R at that
    time (-1 when the step budget ran out first) and V_k, the number of
    open hair edges at a_k in the replica's configuration.
    """
    a = fam[6]
    b = fam[7]
    K = a.shape[0]
    T = np.full((nrep, K), -1, np.int64)
    Uk = np.full((nrep, K), -1, np.int64)
    Rk = np.full((nrep, K), -1, np.int64)
    V = np.zeros((nrep, K), np.int64)
    trunc = np.zeros(nrep, np.bool_)
    pkey = perc_key(pseed)
    for i in prange(nrep):
        r = rep0 + i
        for kk in range(K):
            m = 0
            for j in range(b[kk]):
                if edge_uniform(pkey, r, a[kk], _hair_key(kk + 1, j + 1)) < p:
                    m += 1
            V[i, kk] = m
        base = walk_base(wseed, 0, r)
        visited = Dict.empty(types.int64, types.int64)
        table = Dict.empty(types.int64, types.int64)
        queue = np.empty(256, np.int64)
        buf = np.empty(bufsize, np.int64)
        x = np.int64(0)
        R = 0
        U = 0
        nxt = 0
        step = 0
        while True:
            if x not in visited:
                visited[x] = 0
                R += 1
                if x not in table:
                    added, tr, queue = explore_into(fam, x, p, pkey, r, cap, table, 0, queue, buf)
                    U += added
                    if tr:
                        trunc[i] = True
            if nxt < K and x == a[nxt]:
                T[i, nxt] = step
                Uk[i, nxt] = U
                Rk[i, nxt] = R
                nxt += 1
                if nxt == K:
                    break
            if step >= max_steps:
                break
            step += 1
            x = neighbor_at(fam, x, walk_choice(base, step, degree(fam, x)))
    return T, Uk, Rk, V, trunc


@njit(parallel=True, cache=True)
def batch_hairy_fixed_walk(fam, p, pseed, wseed, walk_rep, preps, cap, max_steps, bufsize):
    """U at each first anchor hitting time along one fixed walk, for
    several percolation replicas (percolation-only variability)."""
    a = fam[6]
    K = a.shape[0]
    base = walk_base(wseed, 0, walk_rep)
    path = List.empty_list(types.int64)
    x = np.int64(0)
    hits = np.full(K, -1, np.int64)
    nxt = 0
    step = 0
    while True:
        path.append(x)
        if nxt < K and x == a[nxt]:
            hits[nxt] = step
            nxt += 1
            if nxt == K:
                break
        if step >= max_steps:
            break
        step += 1
        x = neighbor_at(fam, x, walk_choice(base, step, degree(fam, x)))
    arr = np.empty(len(path), np.int64)
    for t in range(len(path)):
        arr[t] = path[t]
    m = preps.shape[0]
    out = np.full((m, K), -1, np.int64)
    pkey = perc_key(pseed)
    ck = hits[hits >= 0].copy()
    for i in prange(m):
        buf = np.empty(bufsize, np.int64)
        A, B, C, tr, _t, _r = union_run(fam, arr, p, pkey, preps[i], cap, ck, False, buf)
        for kk in range(ck.shape[0]):
            out[i, kk] = C[kk]
    return out, hits
