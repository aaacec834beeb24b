"""Infinite graphs as lazy adjacency oracles.

Five families are supported:

* ``ZdNearest(d)``: the nearest-neighbor lattice Z^d.
* ``ZdLinf(d)``: Z^d with an edge between x and y whenever
  ``|x - y|_inf == 1``.
* ``AlternatingZ3(shells)``: Z^3 where the region
  ``M_i <= |x|_inf < M_{i+1}`` (with ``M_0 = 0``) carries l-inf edges when
  ``i`` is odd and nearest-neighbor edges when ``i`` is even.
* ``HairyHalfLine(a, b)``: the half-line 0, 1, 2, ... with ``b_k``
  pendant vertices hanging off spine vertex ``a_k``.
* ``FiniteModification(base, radius, added, removed)``: a base family
  with finitely many edges added or removed inside a ball.

Nothing is ever materialized globally.  Vertices are plain Python values
(tuples for lattice points, ints for spine vertices, ``Hair`` for pendant
vertices).  For the compiled kernels every vertex also has an int64 key,
and ``kernel_spec`` packs a family into the tuple of arrays the kernels
consume.
"""
from __future__ import annotations

import itertools
import math
import struct
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Union

import numpy as np

KIND_NN = 0
KIND_LINF = 1
KIND_ALT = 2
KIND_HAIRY = 3

UNBOUNDED = "unbounded"
BUDGET_EXCEEDED = "budget-exceeded"

_TAG_LATTICE = 0
_TAG_SPINE = 1
_TAG_HAIR = 2
_HAIR_SHIFT = 32


class DomainError(ValueError):
    """A vertex, edge or set is not valid for the family at hand."""


class ScheduleOverflowError(OverflowError):
    """A hairy schedule term does not fit in 63-bit integers."""

    def __init__(self, index: int, message: str):
        super().__init__(message)
        self.index = index


class Hair(NamedTuple):
    """Pendant vertex ``index`` (1-based) attached at anchor ``anchor`` (1-based)."""
    anchor: int
    index: int


VertexId = Union[tuple, int, Hair]


@dataclass(frozen=True)
class ZdNearest:
    d: int

    def __post_init__(self):
        if not 1 <= self.d <= 6:
            raise DomainError(f"dimension must be in 1..6, got {self.d}")


@dataclass(frozen=True)
class ZdLinf:
    d: int

    def __post_init__(self):
        if not 1 <= self.d <= 6:
            raise DomainError(f"dimension must be in 1..6, got {self.d}")


@dataclass(frozen=True)
class AlternatingZ3:
    shells: tuple = ()

    def __post_init__(self):
        s = tuple(int(m) for m in self.shells)
        object.__setattr__(self, "shells", s)
        if any(m <= 0 for m in s) or any(b <= a for a, b in zip(s, s[1:])):
            raise DomainError(f"shells must be positive and strictly increasing: {s}")

    @property
    def d(self) -> int:
        return 3


@dataclass(frozen=True)
class HairyHalfLine:
    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(int(x) for x in self.a)
        b = tuple(int(x) for x in self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if len(a) != len(b):
            raise DomainError("a and b must have the same length")
        if any(x <= 0 for x in a) or any(y <= x for x, y in zip(a, a[1:])):
            raise DomainError(f"anchors must be positive and strictly increasing: {a}")
        if any(y < 0 for y in b):
            raise DomainError(f"hair counts must be nonnegative: {b}")
        if any(y >= 1 << _HAIR_SHIFT for y in b):
            raise DomainError("hair count too large for the vertex encoding")

    @property
    def d(self) -> int:
        return 1


@dataclass(frozen=True)
class FiniteModification:
    base: object
    radius: int
    added: tuple = ()
    removed: tuple = ()
    _nbr: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if isinstance(self.base, (FiniteModification, HairyHalfLine)):
            raise DomainError("base must be a lattice family")
        added = tuple(_edge_pair(u, v) for u, v in self.added)
        removed = tuple(_edge_pair(u, v) for u, v in self.removed)
        object.__setattr__(self, "added", added)
        object.__setattr__(self, "removed", removed)
        o = origin(self.base)
        inner = set(ball(self.base, o, self.radius))
        for u, v in added + removed:
            for w in (u, v):
                validate_vertex(self.base, w)
                if w not in inner:
                    raise DomainError(f"modified edge endpoint {w} outside B(o, {self.radius})")
            if u == v:
                raise DomainError("self-loops are not allowed")
        for u, v in added:
            if v in neighbors(self.base, u):
                raise DomainError(f"added edge {u}-{v} already present")
        for u, v in removed:
            if v not in neighbors(self.base, u):
                raise DomainError(f"removed edge {u}-{v} not present")
        if len(set(added)) != len(added) or len(set(removed)) != len(removed):
            raise DomainError("duplicate modified edges")
        nbr: dict = {}
        for w in {w for e in added + removed for w in e}:
            nbr[w] = list(neighbors(self.base, w))
        for u, v in removed:
            nbr[u].remove(v)
            nbr[v].remove(u)
        for u, v in added:
            nbr[u].append(v)
            nbr[v].append(u)
        object.__setattr__(self, "_nbr", nbr)
        # connectivity of the modified graph on the ball one step larger
        outer = ball(self.base, o, self.radius + 1)
        outer_set = set(outer)
        seen = {o}
        queue = deque([o])
        while queue:
            v = queue.popleft()
            for w in neighbors(self, v):
                if w in outer_set and w not in seen:
                    seen.add(w)
                    queue.append(w)
        if len(seen) != len(outer_set):
            raise DomainError("modification disconnects the graph")

    @property
    def d(self) -> int:
        return self.base.d


GraphFamily = Union[ZdNearest, ZdLinf, AlternatingZ3, HairyHalfLine, FiniteModification]


# ---------------------------------------------------------------- basics

def _edge_pair(u, v):
    u = _normalize(u)
    v = _normalize(v)
    return (u, v) if encode_vertex(u) <= encode_vertex(v) else (v, u)


def _normalize(v):
    if isinstance(v, Hair):
        return Hair(int(v.anchor), int(v.index))
    if isinstance(v, (tuple, list, np.ndarray)):
        return tuple(int(c) for c in v)
    return int(v)


def is_lattice(g) -> bool:
    return isinstance(g, (ZdNearest, ZdLinf, AlternatingZ3)) or (
        isinstance(g, FiniteModification))


def origin(g) -> VertexId:
    """The distinguished vertex o (lattice origin, or spine vertex 0)."""
    if isinstance(g, HairyHalfLine):
        return 0
    return (0,) * g.d


def key_bits(d: int) -> int:
    return 62 // d


def coord_limit(d: int) -> int:
    """Largest coordinate magnitude representable by lattice keys."""
    return (1 << (key_bits(d) - 1)) - 2


def validate_vertex(g, v) -> VertexId:
    """Return the normalized vertex or raise ``DomainError``."""
    if isinstance(g, HairyHalfLine):
        if isinstance(v, Hair):
            k, j = int(v.anchor), int(v.index)
            if not 1 <= k <= len(g.a):
                raise DomainError(f"hair anchor index {k} out of range")
            if not 1 <= j <= g.b[k - 1]:
                raise DomainError(f"hair index {j} outside [1, {g.b[k - 1]}]")
            return Hair(k, j)
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool) and v >= 0:
            return int(v)
        raise DomainError(f"invalid vertex for hairy half-line: {v!r}")
    if isinstance(v, (tuple, list, np.ndarray)) and len(v) == g.d:
        t = tuple(int(c) for c in v)
        lim = coord_limit(g.d)
        if any(abs(c) > lim for c in t):
            raise DomainError(f"coordinates of {t} exceed the supported range +-{lim}")
        return t
    raise DomainError(f"invalid vertex for {type(g).__name__}: {v!r}")


# ---------------------------------------------------------------- encodings

def encode_vertex(v: VertexId) -> bytes:
    """Canonical byte encoding: tag byte plus little-endian signed fields."""
    if isinstance(v, Hair):
        return struct.pack("<Bqq", _TAG_HAIR, v.anchor, v.index)
    if isinstance(v, tuple):
        return struct.pack(f"<BB{len(v)}q", _TAG_LATTICE, len(v), *v)
    return struct.pack("<Bq", _TAG_SPINE, v)


def decode_vertex(data: bytes) -> VertexId:
    tag = data[0]
    if tag == _TAG_HAIR:
        _, k, j = struct.unpack("<Bqq", data)
        return Hair(k, j)
    if tag == _TAG_LATTICE:
        d = data[1]
        return tuple(struct.unpack(f"<{d}q", data[2:]))
    if tag == _TAG_SPINE:
        return struct.unpack("<Bq", data)[1]
    raise DomainError(f"unknown vertex tag {tag}")


def vertex_key(v: VertexId) -> int:
    """Injective int64 key used by the compiled kernels.

    Lattice points pack offset coordinates into ``62 // d`` bit fields,
    spine vertices map to themselves and hairs to negative integers.
    """
    if isinstance(v, Hair):
        return -((v.anchor << _HAIR_SHIFT) | v.index)
    if isinstance(v, tuple):
        d = len(v)
        bits = key_bits(d)
        off = 1 << (bits - 1)
        key = 0
        for i, c in enumerate(v):
            key |= (c + off) << (bits * i)
        return key
    return int(v)


def key_vertex(g, key: int) -> VertexId:
    """Inverse of ``vertex_key`` for the family ``g``."""
    key = int(key)
    if isinstance(g, HairyHalfLine):
        if key >= 0:
            return key
        m = -key
        return Hair(m >> _HAIR_SHIFT, m & ((1 << _HAIR_SHIFT) - 1))
    d = g.d
    bits = key_bits(d)
    off = 1 << (bits - 1)
    mask = (1 << bits) - 1
    return tuple(((key >> (bits * i)) & mask) - off for i in range(d))


def keys_to_coords(keys: np.ndarray, d: int) -> np.ndarray:
    """Vectorized decoding of lattice keys into an (m, d) coordinate array."""
    keys = np.asarray(keys, dtype=np.int64)
    bits = key_bits(d)
    off = 1 << (bits - 1)
    mask = (1 << bits) - 1
    out = np.empty((keys.shape[0], d), dtype=np.int64)
    for i in range(d):
        out[:, i] = ((keys >> (bits * i)) & mask) - off
    return out


def coords_to_keys(coords: np.ndarray) -> np.ndarray:
    coords = np.asarray(coords, dtype=np.int64)
    d = coords.shape[1]
    bits = key_bits(d)
    off = 1 << (bits - 1)
    keys = np.zeros(coords.shape[0], dtype=np.int64)
    for i in range(d):
        keys |= (coords[:, i] + off) << (bits * i)
    return keys


class Edge(NamedTuple):
    """Unordered edge stored with endpoints in byte-encoding order."""
    u: VertexId
    v: VertexId


def make_edge(g, u, v) -> Edge:
    u = validate_vertex(g, u)
    v = validate_vertex(g, v)
    if u == v:
        raise DomainError("an edge needs two distinct endpoints")
    if v not in neighbors(g, u):
        raise DomainError(f"{u} and {v} are not adjacent")
    return Edge(*_edge_pair(u, v))


# ---------------------------------------------------------------- adjacency

def nn_offsets(d: int) -> list:
    out = []
    for i in range(d):
        for s in (1, -1):
            e = [0] * d
            e[i] = s
            out.append(tuple(e))
    return out


def linf_offsets(d: int) -> list:
    return [t for t in itertools.product((-1, 0, 1), repeat=d) if any(t)]


def shell_region(shells: tuple, v: tuple) -> int:
    """Index i of the region ``M_i <= |v|_inf < M_{i+1}`` (``M_0 = 0``)."""
    r = max(abs(c) for c in v)
    return sum(1 for m in shells if m <= r)


def _alt_edge(shells, u, v) -> bool:
    if sum(abs(a - b) for a, b in zip(u, v)) == 1:
        return True
    return min(shell_region(shells, u), shell_region(shells, v)) % 2 == 1


def neighbors(g, v) -> list:
    """Exact neighbor list of ``v`` (no duplicates, never ``v`` itself)."""
    v = validate_vertex(g, v)
    if isinstance(g, ZdNearest):
        return [tuple(a + b for a, b in zip(v, e)) for e in nn_offsets(g.d)]
    if isinstance(g, ZdLinf):
        return [tuple(a + b for a, b in zip(v, e)) for e in linf_offsets(g.d)]
    if isinstance(g, AlternatingZ3):
        out = []
        for e in linf_offsets(3):
            w = tuple(a + b for a, b in zip(v, e))
            if _alt_edge(g.shells, v, w):
                out.append(w)
        return out
    if isinstance(g, HairyHalfLine):
        if isinstance(v, Hair):
            return [g.a[v.anchor - 1]]
        out = [v - 1] if v > 0 else []
        out.append(v + 1)
        if v in g.a:
            k = g.a.index(v) + 1
            out.extend(Hair(k, j) for j in range(1, g.b[k - 1] + 1))
        return out
    if isinstance(g, FiniteModification):
        if v in g._nbr:
            return list(g._nbr[v])
        return neighbors(g.base, v)
    raise DomainError(f"unknown family {g!r}")


def degree(g, v) -> int:
    v = validate_vertex(g, v)
    if isinstance(g, ZdNearest):
        return 2 * g.d
    if isinstance(g, ZdLinf):
        return 3 ** g.d - 1
    if isinstance(g, HairyHalfLine):
        if isinstance(v, Hair):
            return 1
        deg = 2 if v > 0 else 1
        if v in g.a:
            deg += g.b[g.a.index(v)]
        return deg
    return len(neighbors(g, v))


def max_degree(g):
    """Maximal degree, or ``UNBOUNDED`` for the hairy half-line."""
    if isinstance(g, ZdNearest):
        return 2 * g.d
    if isinstance(g, ZdLinf):
        return 3 ** g.d - 1
    if isinstance(g, AlternatingZ3):
        return 26 if g.shells else 6
    if isinstance(g, HairyHalfLine):
        return UNBOUNDED
    base = max_degree(g.base)
    return max([base] + [len(n) for n in g._nbr.values()])


def ball(g, x, r: int) -> list:
    """Vertices at graph distance at most ``r`` from ``x``, in BFS order."""
    if r < 0:
        raise DomainError("radius must be nonnegative")
    x = validate_vertex(g, x)
    dist = {x: 0}
    queue = deque([x])
    while queue:
        v = queue.popleft()
        if dist[v] == r:
            continue
        for w in neighbors(g, v):
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return list(dist)


def graph_distance(g, x, y, budget: int):
    """BFS distance, or ``BUDGET_EXCEEDED`` when it is larger than ``budget``."""
    if budget < 0:
        raise DomainError("budget must be nonnegative")
    x = validate_vertex(g, x)
    y = validate_vertex(g, y)
    if x == y:
        return 0
    dist = {x: 0}
    queue = deque([x])
    while queue:
        v = queue.popleft()
        if dist[v] >= budget:
            continue
        for w in neighbors(g, v):
            if w not in dist:
                if w == y:
                    return dist[v] + 1
                dist[w] = dist[v] + 1
                queue.append(w)
    return BUDGET_EXCEEDED


def reference_norm(g, v) -> int:
    """Norm used for escape radii: l1 on Z^d, l-inf on the l-inf families,
    spine position on the hairy half-line."""
    v = validate_vertex(g, v)
    if isinstance(g, HairyHalfLine):
        return g.a[v.anchor - 1] + 1 if isinstance(v, Hair) else v
    base = g.base if isinstance(g, FiniteModification) else g
    if isinstance(base, ZdNearest):
        return sum(abs(c) for c in v)
    return max(abs(c) for c in v)


# ---------------------------------------------------------------- schedules

def hairy_schedule(mode: str, p, k_max: int) -> tuple:
    """Anchor positions and hair counts for the hairy half-line.

    ``mode="paper"`` takes the smallest admissible ``a_n`` with
    ``a_n > exp((sum_{i<n} (a_i + b_i))**2)`` (the empty sum for ``n = 1``
    is taken as 1, so ``a_1 = 3``) and ``b_n = floor(n**-4 p**(-2 a_n))``.
    It raises ``ScheduleOverflowError`` at the first term that does not
    fit in 63 bits.  ``mode="desk"`` uses ``a_k = 4 + 3k`` and
    ``b_k = ceil(k**-2 p**(-a_k / 2))`` capped at ``10**6``.

    Returns
    -------
    (a, b) : tuple of tuple of int
    """
    if not 0 < float(p) < 1:
        raise DomainError("p must lie in (0, 1)")
    if k_max < 1:
        raise DomainError("k_max must be at least 1")
    a: list = []
    b: list = []
    if mode == "paper":
        pf = p if isinstance(p, Fraction) else Fraction(str(p))
        limit = (1 << 63) - 1
        for n in range(1, k_max + 1):
            s = sum(x + y for x, y in zip(a, b)) if n > 1 else 1
            if s * s > math.log(limit):
                raise ScheduleOverflowError(
                    n, f"paper schedule term a_{n} > exp({s}^2) overflows 63-bit integers "
                       f"(first infeasible index {n})")
            an = math.floor(math.exp(s * s)) + 1
            bn_exact = Fraction(1, n ** 4) / pf ** (2 * an)
            bn = bn_exact.numerator // bn_exact.denominator
            if bn > limit:
                raise ScheduleOverflowError(
                    n, f"paper schedule term b_{n} overflows 63-bit integers "
                       f"(first infeasible index {n})")
            a.append(an)
            b.append(bn)
    elif mode == "desk":
        pf = float(p)
        for k in range(1, k_max + 1):
            ak = 4 + 3 * k
            bk = math.ceil(k ** -2 * pf ** (-ak / 2))
            a.append(ak)
            b.append(min(bk, 10 ** 6))
    else:
        raise DomainError(f"unknown schedule mode {mode!r}")
    return tuple(a), tuple(b)


# ---------------------------------------------------------------- kernels

def _base_kind(g):
    if isinstance(g, ZdNearest):
        return KIND_NN
    if isinstance(g, ZdLinf):
        return KIND_LINF
    if isinstance(g, AlternatingZ3):
        return KIND_ALT
    if isinstance(g, HairyHalfLine):
        return KIND_HAIRY
    raise DomainError(f"unknown family {g!r}")


def kernel_spec(g) -> tuple:
    """Pack a family into the array tuple consumed by the compiled kernels.

    Layout: ``(kind, d, bits, deltas, dcoords, shells, hair_a, hair_b,
    mod_vertices, mod_added, mod_removed)``.
    """
    base = g.base if isinstance(g, FiniteModification) else g
    kind = _base_kind(base)
    empty2 = np.zeros((0, 2), dtype=np.int64)
    shells = np.zeros(0, dtype=np.int64)
    hair_a = np.zeros(0, dtype=np.int64)
    hair_b = np.zeros(0, dtype=np.int64)
    if kind == KIND_HAIRY:
        d, bits = 1, 0
        dc = np.zeros((0, 1), dtype=np.int64)
        hair_a = np.asarray(base.a, dtype=np.int64)
        hair_b = np.asarray(base.b, dtype=np.int64)
    else:
        d = base.d
        bits = key_bits(d)
        offs = nn_offsets(d) if kind == KIND_NN else linf_offsets(d)
        dc = np.asarray(offs, dtype=np.int64).reshape(len(offs), d)
        if kind == KIND_ALT:
            shells = np.asarray(base.shells, dtype=np.int64)
    deltas = np.zeros(dc.shape[0], dtype=np.int64)
    for i in range(d if kind != KIND_HAIRY else 0):
        deltas += dc[:, i] << (bits * i)
    mod_v = np.zeros(0, dtype=np.int64)
    mod_add = empty2
    mod_rem = empty2
    if isinstance(g, FiniteModification):
        mod_add = np.asarray([[vertex_key(u), vertex_key(v)] for u, v in g.added],
                             dtype=np.int64).reshape(-1, 2)
        mod_rem = np.asarray([[vertex_key(u), vertex_key(v)] for u, v in g.removed],
                             dtype=np.int64).reshape(-1, 2)
        mod_v = np.unique(np.concatenate([mod_add.ravel(), mod_rem.ravel()]))
    return (np.int64(kind), np.int64(d), np.int64(bits), deltas, dc, shells,
            hair_a, hair_b, mod_v, mod_add, mod_rem)


def buffer_size(g) -> int:
    """Neighbor buffer length large enough for every vertex of ``g``."""
    m = max_degree(g)
    if m == UNBOUNDED:
        return max(g.b, default=0) + 2
    return int(m) + 2 * len(getattr(g, "added", ())) + 1
