"""Capacity of finite vertex sets.

The capacity of ``A`` is ``sum_{x in A} P^x(T_A = infinity)``.  Two
independent routes are offered:

``capacity_exact``
    For an exhaustion radius ``m`` solve the Dirichlet problem
    ``h = 1`` on ``A``, ``h`` harmonic at vertices of graph distance
    ``< m`` from the origin, ``h = 0`` at distance ``>= m``.  The escape
    probability of ``x in A`` is ``deg(x)^-1 sum_{y ~ x} (1 - h(y))``.
    Values decrease with ``m``; the limit is extrapolated from the last
    two radii assuming a ``1/m`` correction.
``capacity_mc``
    Count walks from each ``x in A`` that leave a ball of the reference
    norm before returning to ``A``.

With unit edge conductances the effective conductance between ``A`` and
the grounded set is ``sum_x deg(x) P^x(escape)``; it is reported too
(``unit_conductance``), since on regular graphs it differs from the
capacity by the factor ``deg``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from . import _kernels as K
from . import graph_core as gc
from .rng import as_seed

CG_RTOL = 1e-10
CG_MAXITER = 100_000


class SolverError(ArithmeticError):
    """The linear solver did not reach the requested residual."""

    def __init__(self, residual: float, message: str):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class CapacityEstimate:
    """Capacity value with its uncertainty.

    For ``method="exact_dirichlet"`` the uncertainty is the bracket
    half-width ``|c(r_last) - value|`` (``None`` with a single radius) and
    ``per_radius`` holds the finite-radius values.  For
    ``method="mc_escape"`` it is the standard error.
    """
    value: float
    uncertainty: Optional[float]
    method: str
    radii: tuple
    per_radius: tuple = ()
    unit_conductance: tuple = ()
    doubling_gap: Optional[float] = None
    extra: dict = field(default_factory=dict)

    @property
    def bracket(self) -> Optional[tuple]:
        if self.uncertainty is None:
            return None
        return (self.value - self.uncertainty, self.value + self.uncertainty)


# ---------------------------------------------------------------- problem setup

@dataclass
class _Problem:
    n_unknown: int
    n_set: int
    # neighbor pairs of unknowns: source unknown index, target class/index
    u_src: np.ndarray
    u_cls: np.ndarray
    u_idx: np.ndarray
    # neighbor pairs of set vertices
    a_src: np.ndarray
    a_cls: np.ndarray
    a_idx: np.ndarray


_UNK, _SET, _GND = 0, 1, 2


def _family_offsets(base):
    if isinstance(base, gc.ZdNearest):
        return np.asarray(gc.nn_offsets(base.d), dtype=np.int64)
    return np.asarray(gc.linf_offsets(base.d), dtype=np.int64)


class _Cube:
    """Flat-indexed cube [-m, m]^d holding a lattice family near the origin."""

    def __init__(self, g, m: int):
        self.g = g
        self.base = g.base if isinstance(g, gc.FiniteModification) else g
        self.d = d = g.d
        self.m = m
        self.side = side = 2 * m + 1
        self.strides = np.asarray([side ** (d - 1 - i) for i in range(d)], dtype=np.int64)
        self.offsets = _family_offsets(self.base)
        self.off_flat = self.offsets @ self.strides
        self.is_nn_off = np.abs(self.offsets).sum(axis=1) == 1
        self.region = None
        if isinstance(self.base, gc.AlternatingZ3):
            shells = np.asarray(self.base.shells, dtype=np.int64)
            linf = self.linf(np.arange(side ** d, dtype=np.int64))
            self.region = np.searchsorted(shells, linf, side="right").astype(np.int16)
        self.mods = {}
        if isinstance(g, gc.FiniteModification):
            for v, nb in g._nbr.items():
                self.mods[self.flat(v)] = np.asarray([self.flat(w) for w in nb], dtype=np.int64)

    def flat(self, v) -> int:
        return int(sum((c + self.m) * s for c, s in zip(v, self.strides)))

    def coords(self, flat: np.ndarray) -> np.ndarray:
        out = np.empty((flat.shape[0], self.d), dtype=np.int64)
        rem = flat.copy()
        for i, s in enumerate(self.strides):
            out[:, i] = rem // s - self.m
            rem = rem % s
        return out

    def linf(self, flat):
        return np.abs(self.coords(flat)).max(axis=1)

    def pairs(self, flat: np.ndarray):
        """All (position in ``flat``, neighbor flat index) adjacency pairs."""
        n = flat.shape[0]
        src = np.repeat(np.arange(n, dtype=np.int64), len(self.off_flat))
        dst = (flat[:, None] + self.off_flat[None, :]).ravel()
        if self.region is not None:
            ok = np.repeat(self.is_nn_off[None, :], n, axis=0).ravel()
            rmin = np.minimum(self.region[flat][:, None].repeat(len(self.off_flat), 1).ravel(),
                              self.region[dst])
            ok |= (rmin % 2) == 1
            src, dst = src[ok], dst[ok]
        if self.mods:
            modset = np.fromiter(self.mods.keys(), dtype=np.int64)
            keep = ~np.isin(flat[src], modset)
            src, dst = src[keep], dst[keep]
            pos = {int(f): i for i, f in enumerate(flat)}
            extra_s, extra_d = [], []
            for f, nb in self.mods.items():
                if f in pos:
                    extra_s.extend([pos[f]] * len(nb))
                    extra_d.extend(nb.tolist())
            src = np.concatenate([src, np.asarray(extra_s, dtype=np.int64)])
            dst = np.concatenate([dst, np.asarray(extra_d, dtype=np.int64)])
        return src, dst

    def inside(self) -> np.ndarray:
        """Flat indices at graph distance < m from the origin."""
        m = self.m
        simple = not self.mods and self.region is None
        if simple:
            r = np.abs(np.arange(-m, m + 1, dtype=np.int32))
            axes = [r.reshape((-1,) + (1,) * (self.d - 1 - i)) for i in range(self.d)]
            op = np.add if isinstance(self.base, gc.ZdNearest) else np.maximum
            dist = axes[0]
            for ax in axes[1:]:
                dist = op(dist, ax)
            return np.flatnonzero(dist.ravel() < m).astype(np.int64)
        seen = np.zeros(self.side ** self.d, dtype=bool)
        o = self.flat((0,) * self.d)
        seen[o] = True
        frontier = np.asarray([o], dtype=np.int64)
        layers = [frontier]
        for _ in range(m - 1):
            _, dst = self.pairs(frontier)
            dst = np.unique(dst)
            dst = dst[~seen[dst]]
            seen[dst] = True
            frontier = dst
            layers.append(dst)
        return np.sort(np.concatenate(layers))


def _lattice_problem(g, A: list, m: int) -> _Problem:
    cube = _Cube(g, m)
    inside = cube.inside()
    a_flat = np.asarray([cube.flat(a) for a in A], dtype=np.int64)
    if not np.all(np.isin(a_flat, inside)):
        raise gc.DomainError("the set must lie inside the exhaustion ball")
    total = cube.side ** cube.d
    cls = np.full(total, _GND, dtype=np.int8)
    idx = np.full(total, -1, dtype=np.int64)
    unknown = np.setdiff1d(inside, a_flat)
    cls[unknown] = _UNK
    idx[unknown] = np.arange(unknown.shape[0])
    cls[a_flat] = _SET
    idx[a_flat] = np.arange(a_flat.shape[0])
    us, ud = cube.pairs(unknown)
    as_, ad = cube.pairs(a_flat)
    return _Problem(unknown.shape[0], a_flat.shape[0], us, cls[ud], idx[ud], as_, cls[ad], idx[ad])


def _generic_problem(g, A: list, m: int) -> _Problem:
    o = gc.origin(g)
    dist = {o: 0}
    queue = deque([o])
    while queue:
        v = queue.popleft()
        if dist[v] >= m - 1:
            continue
        for w in gc.neighbors(g, v):
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    aset = {a: i for i, a in enumerate(A)}
    if any(a not in dist for a in A):
        raise gc.DomainError("the set must lie inside the exhaustion ball")
    unk = {v: i for i, v in enumerate(v for v in dist if v not in aset)}

    def classify(vs):
        s, c, ix = [], [], []
        for i, v in enumerate(vs):
            for w in gc.neighbors(g, v):
                s.append(i)
                if w in unk:
                    c.append(_UNK)
                    ix.append(unk[w])
                elif w in aset:
                    c.append(_SET)
                    ix.append(aset[w])
                else:
                    c.append(_GND)
                    ix.append(-1)
        return (np.asarray(s, dtype=np.int64), np.asarray(c, dtype=np.int8),
                np.asarray(ix, dtype=np.int64))

    us, uc, ui = classify(list(unk))
    as_, ac, ai = classify(A)
    return _Problem(len(unk), len(A), us, uc, ui, as_, ac, ai)


def _problem(g, A, m):
    if gc.is_lattice(g):
        return _lattice_problem(g, A, m)
    return _generic_problem(g, A, m)


# ---------------------------------------------------------------- solves

def _laplacian(pr: _Problem):
    deg = np.bincount(pr.u_src, minlength=pr.n_unknown).astype(float)
    mask = pr.u_cls == _UNK
    off = sp.csr_matrix((-np.ones(int(mask.sum())), (pr.u_src[mask], pr.u_idx[mask])),
                        shape=(pr.n_unknown, pr.n_unknown))
    return (sp.diags(deg) + off).tocsr(), deg


def _cg(M, b, deg):
    if b.shape[0] == 0:
        return b
    if not np.any(b):
        return np.zeros_like(b)
    pre = sp.diags(1.0 / deg)
    x, info = cg(M, b, rtol=CG_RTOL, atol=0.0, maxiter=CG_MAXITER, M=pre)
    res = float(np.linalg.norm(M @ x - b) / np.linalg.norm(b))
    if info != 0 or res > 10 * CG_RTOL:
        raise SolverError(res, f"conjugate gradient did not converge (relative residual {res:.3e})")
    return x


def solve_potential(pr: _Problem) -> np.ndarray:
    """Harmonic h on the unknowns with h = 1 on the set and 0 when grounded."""
    M, deg = _laplacian(pr)
    b = np.bincount(pr.u_src[pr.u_cls == _SET], minlength=pr.n_unknown).astype(float)
    return _cg(M, b, deg)


def _escape_from_potential(pr: _Problem, h: np.ndarray) -> np.ndarray:
    hv = np.where(pr.a_cls == _UNK, h[np.maximum(pr.a_idx, 0)],
                  np.where(pr.a_cls == _SET, 1.0, 0.0))
    deg = np.bincount(pr.a_src, minlength=pr.n_set).astype(float)
    flux = np.bincount(pr.a_src, weights=1.0 - hv, minlength=pr.n_set)
    return flux / deg, flux


def dirichlet_energy(pr: _Problem, h: np.ndarray) -> float:
    """Sum over edges of (h(u) - h(v))^2 for the potential h."""
    hu = h[pr.u_src]
    hv = np.where(pr.u_cls == _UNK, h[np.maximum(pr.u_idx, 0)],
                  np.where(pr.u_cls == _SET, 1.0, 0.0))
    sq = (hu - hv) ** 2
    inner = pr.u_cls == _UNK
    e = 0.5 * sq[inner].sum() + sq[~inner].sum()
    # set-to-grounded edges (only when the set touches the grounded layer)
    e += float(np.sum(pr.a_cls == _GND))
    return float(e)


@dataclass(frozen=True)
class RadiusSolve:
    radius: int
    escape: np.ndarray
    capacity: float
    unit_conductance: float
    energy: float


def solve_radius(g, A: Sequence, m: int) -> RadiusSolve:
    """Escape probabilities of the set ``A`` to graph distance ``m``."""
    A = _as_set(g, A)
    pr = _problem(g, A, m)
    h = solve_potential(pr)
    esc, flux = _escape_from_potential(pr, h)
    return RadiusSolve(m, esc, float(esc.sum()), float(flux.sum()), dirichlet_energy(pr, h))


def escape_probability_direct(g, x, m: int) -> float:
    """P^x(reach graph distance m before returning to x), solved for the
    escape function 1 - h directly (grounded layer as the source)."""
    A = _as_set(g, [x])
    pr = _problem(g, A, m)
    M, deg = _laplacian(pr)
    b = np.bincount(pr.u_src[pr.u_cls == _GND], minlength=pr.n_unknown).astype(float)
    f = _cg(M, b, deg)
    fv = np.where(pr.a_cls == _UNK, f[np.maximum(pr.a_idx, 0)],
                  np.where(pr.a_cls == _GND, 1.0, 0.0))
    return float(fv.sum() / pr.a_src.shape[0])


def _as_set(g, A) -> list:
    pts = []
    for a in A:
        v = gc.validate_vertex(g, a)
        if v not in pts:
            pts.append(v)
    if not pts:
        raise gc.DomainError("the set must be nonempty")
    return pts


def capacity_exact(g, A: Sequence, radii: Sequence[int] = (25, 50, 100)) -> CapacityEstimate:
    """Capacity by Dirichlet solves at each radius plus 1/m extrapolation.

    The set must lie within graph distance ``min(radii) - 2`` of the
    origin.  The finite-radius values are required to be nonincreasing.
    """
    A = _as_set(g, A)
    radii = tuple(sorted(int(r) for r in radii))
    o = gc.origin(g)
    for a in A:
        d = gc.graph_distance(g, o, a, radii[0] - 2)
        if d == gc.BUDGET_EXCEEDED:
            raise gc.DomainError(f"{a} is not within B(o, {radii[0] - 2})")
    solves = [solve_radius(g, A, m) for m in radii]
    vals = tuple(s.capacity for s in solves)
    if any(b > a * (1 + 1e-9) + 1e-12 for a, b in zip(vals, vals[1:])):
        raise SolverError(0.0, f"finite-radius capacities are not nonincreasing: {vals}")
    if len(radii) == 1:
        value, unc = vals[0], None
    else:
        r1, r2 = radii[-2], radii[-1]
        c1, c2 = vals[-2], vals[-1]
        value = (r2 * c2 - r1 * c1) / (r2 - r1)
        unc = abs(c2 - value)
    return CapacityEstimate(float(value), unc, "exact_dirichlet", radii, vals,
                            tuple(s.unit_conductance for s in solves),
                            extra={"energy": tuple(s.energy for s in solves)})


def capacity_mc(g, A: Sequence, escape_radius: int = 100, replicas: int = 10_000,
                seed: int = 0, doubling_check: bool = False, stream: int = 3) -> CapacityEstimate:
    """Capacity as the summed escape frequencies of walks from each x in A.

    A walk escapes when its reference-norm distance from the origin
    exceeds ``escape_radius`` before it returns to ``A``.  With
    ``doubling_check`` the estimate is repeated at twice the radius on
    fresh walks and the difference is reported as ``doubling_gap``.
    """
    A = _as_set(g, A)
    fam = gc.kernel_spec(g)
    starts = np.asarray([gc.vertex_key(a) for a in A], dtype=np.int64)
    targets = np.unique(starts)
    center = np.int64(gc.vertex_key(gc.origin(g)))

    def run(radius, strm):
        esc = K.batch_set_escape(fam, starts, targets, center, np.int64(radius), as_seed(seed),
                                 np.int64(strm), np.int64(replicas))
        f = esc / replicas
        return float(f.sum()), float(np.sqrt(np.sum(f * (1 - f)) / replicas)), f

    value, se, f = run(escape_radius, stream)
    gap = None
    extra = {"escape": tuple(f.tolist())}
    if doubling_check:
        v2, se2, _ = run(2 * escape_radius, stream + 1)
        gap = value - v2
        extra["doubled"] = (v2, se2)
    return CapacityEstimate(value, se, "mc_escape", (escape_radius,), doubling_gap=gap,
                            extra=extra)


@dataclass(frozen=True)
class CapacityComparison:
    ca_z3: CapacityEstimate
    ca_z3_linf: CapacityEstimate
    strict_less: bool
    indeterminate: bool


def capacity_compare_z3(A: Sequence, radii: Sequence[int] = (12, 24, 48)) -> CapacityComparison:
    """Capacities of ``A`` on Z^3 and on the l-inf lattice, with a strictness verdict.

    ``strict_less`` requires disjoint brackets with the Z^3 bracket
    below; overlapping or missing brackets give ``indeterminate``.
    """
    a = capacity_exact(gc.ZdNearest(3), A, radii)
    b = capacity_exact(gc.ZdLinf(3), A, radii)
    if a.bracket is None or b.bracket is None:
        return CapacityComparison(a, b, False, True)
    disjoint = a.bracket[1] < b.bracket[0] or b.bracket[1] < a.bracket[0]
    if not disjoint:
        return CapacityComparison(a, b, False, True)
    return CapacityComparison(a, b, a.bracket[1] < b.bracket[0], False)
