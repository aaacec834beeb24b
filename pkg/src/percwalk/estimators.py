"""Statistics over replicas and the estimators built on them."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from . import graph_core as gc
from .percolation import DEFAULT_CAP, cluster_sizes
from .rng import as_seed
from .union_process import sausage_batch, simulate_batch
from .walk import return_survival

CI_LEVEL = 0.99
MERGE_EPS = 1e-12


def z_value(level: float = CI_LEVEL) -> float:
    return NormalDist().inv_cdf(0.5 + level / 2)


class RecurrentFamilyWarning(UserWarning):
    """The requested estimator targets a constant that is 0 on this family."""


@dataclass
class BatchStats:
    """Mergeable count, mean and centered second moment of a sample.

    Merging uses the pairwise update of Chan, Golub and LeVeque, so the
    result does not depend on how replicas were split across workers up
    to rounding of order ``MERGE_EPS``.
    """
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    min: float = math.inf
    max: float = -math.inf

    @classmethod
    def from_samples(cls, x) -> "BatchStats":
        x = np.asarray(x, dtype=float).ravel()
        if x.size == 0:
            return cls()
        mu = float(x.mean())
        return cls(int(x.size), mu, float(np.sum((x - mu) ** 2)), float(x.min()), float(x.max()))

    def merge(self, other: "BatchStats") -> "BatchStats":
        if other.count == 0:
            return BatchStats(self.count, self.mean, self.m2, self.min, self.max)
        if self.count == 0:
            return BatchStats(other.count, other.mean, other.m2, other.min, other.max)
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return BatchStats(n, mean, m2, min(self.min, other.min), max(self.max, other.max))

    @property
    def variance(self) -> float:
        if self.count < 2:
            raise ValueError("variance needs at least two samples")
        return self.m2 / (self.count - 1)

    @property
    def se(self) -> float:
        return math.sqrt(self.variance / self.count)

    def ci(self, level: float = CI_LEVEL) -> tuple:
        h = z_value(level) * self.se
        return (self.mean - h, self.mean + h)

    def to_dict(self) -> dict:
        out = {"count": self.count, "mean": self.mean, "min": self.min, "max": self.max}
        if self.count >= 2:
            out.update(variance=self.variance, se=self.se, ci=list(self.ci()))
        return out


def combined_se(*ses: float) -> float:
    return math.sqrt(sum(s * s for s in ses))


def is_transient(g) -> bool:
    base = g.base if isinstance(g, gc.FiniteModification) else g
    if isinstance(base, gc.HairyHalfLine):
        return False
    return base.d >= 3


# ---------------------------------------------------------------- c_p

@dataclass(frozen=True)
class CpEstimate:
    method: str
    p: float
    value: float
    se: float
    n: Optional[int] = None
    truncation_rate: float = 0.0
    replicas: int = 0
    extra: dict = field(default_factory=dict)


def estimate_cp_lln(g, p: float, n: int, replicas: int, seed: int = 0,
                    cap: int = DEFAULT_CAP, first_replica: int = 0) -> CpEstimate:
    """Mean of U_n / n over replicas."""
    if n < 1000:
        raise ValueError("the LLN estimator needs n >= 1000")
    if not is_transient(g):
        warnings.warn("family is recurrent: U_n/n tends to 0", RecurrentFamilyWarning,
                      stacklevel=2)
    b = simulate_batch(g, p, [n], replicas, seed, cap, first_replica, boundary=False)
    s = BatchStats.from_samples(b.U[:, 0] / n)
    return CpEstimate("lln", p, s.mean, s.se, n, b.truncation_rate, replicas)


def estimate_cp_cluster(g, p: float, replicas: int, method: str = "capacity", seed: int = 0,
                        walks_per_vertex: int = 100, escape_radius: int = 100,
                        cap: int = DEFAULT_CAP, first_replica: int = 0) -> CpEstimate:
    """c_p from cluster samples.

    ``method="capacity"``: mean over clusters C_o of the escape-walk
    capacity estimate of C_o.  ``method="escape_formula"``: mean of
    |C_o| times the escape frequency from o avoiding C_o.  Truncated
    clusters are excluded and counted.
    """
    if method not in ("capacity", "escape_formula"):
        raise ValueError(f"unknown method {method!r}")
    if not gc.is_lattice(g):
        raise ValueError("cluster estimators need a lattice family")
    o = np.int64(gc.vertex_key(gc.origin(g)))
    cap_est, esc_est, sizes, trunc = K.batch_cluster_escape(
        gc.kernel_spec(g), o, float(p), as_seed(seed), np.int64(first_replica),
        np.int64(replicas), np.int64(cap), np.int64(escape_radius), as_seed(seed),
        np.int64(walks_per_vertex), gc.buffer_size(g))
    vals = cap_est if method == "capacity" else esc_est
    s = BatchStats.from_samples(vals[~trunc])
    name = "cluster_capacity" if method == "capacity" else "cluster_escape"
    return CpEstimate(name, p, s.mean, s.se, None, float(trunc.mean()), replicas,
                      extra={"mean_cluster_size": float(sizes[~trunc].mean()),
                             "truncated": int(trunc.sum()),
                             "escape_radius": escape_radius,
                             "walks_per_vertex": walks_per_vertex})


# ---------------------------------------------------------------- mean growth

@dataclass(frozen=True)
class SandwichResult:
    lower: float
    lower_se: float
    mean: float
    mean_se: float
    upper: float
    upper_se: float
    satisfied: bool
    indeterminate: bool
    survival_sum: float = 0.0
    mean_cluster_size: float = 1.0


def mean_growth_sandwich(g, p: float, n: int, replicas: int, seed: int = 0,
                         cap: int = DEFAULT_CAP, level: float = CI_LEVEL) -> SandwichResult:
    """Check ``(1-p)^Delta S_n <= E[U_n] <= E|C_o| S_n`` with
    ``S_n = sum_{i<=n} P(T_o > i)``, every term estimated by MC.

    The check passes when neither inequality is violated by more than
    the combined confidence half-width; a violation inside that band is
    reported as ``indeterminate``.
    """
    delta = gc.max_degree(g)
    if delta == gc.UNBOUNDED:
        raise ValueError("needs a bounded-degree vertex-transitive family")
    _, _, t = return_survival(g, n, replicas, seed=seed)
    s = BatchStats.from_samples(np.minimum(t, n + 1))
    sizes, trunc = cluster_sizes(g, p, replicas, seed, cap, first_replica=replicas)
    c = BatchStats.from_samples(sizes)
    b = simulate_batch(g, p, [n], replicas, seed, cap, 2 * replicas, boundary=False)
    u = BatchStats.from_samples(b.U[:, 0])
    f = (1 - p) ** delta
    lower, lower_se = f * s.mean, f * s.se
    upper = c.mean * s.mean
    upper_se = math.sqrt((c.se * s.mean) ** 2 + (c.mean * s.se) ** 2)
    z = z_value(level)
    tol_lo = z * combined_se(lower_se, u.se)
    tol_hi = z * combined_se(upper_se, u.se)
    within = lower - u.mean <= tol_lo and u.mean - upper <= tol_hi
    strict = lower <= u.mean <= upper
    return SandwichResult(lower, lower_se, u.mean, u.se, upper, upper_se, within,
                          within and not strict, s.mean, c.mean)


# ---------------------------------------------------------------- scaling

def jackknife_variance_se(x) -> tuple:
    """Sample variance and its delete-one jackknife standard error."""
    x = np.asarray(x, dtype=float)
    n = x.size
    m = x.mean()
    dev = x - m
    S = np.sum(dev ** 2)
    var = S / (n - 1)
    loo = (S - dev ** 2 * n / (n - 1)) / (n - 2)
    se = math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2))
    return float(var), float(se)


@dataclass(frozen=True)
class ScalingRow:
    n: int
    variance: float
    variance_se: float
    normalized: float
    normalized_se: float


def _var_normalizer(g, n, sausage):
    if not sausage and isinstance(g, gc.ZdNearest) and g.d == 2:
        return math.log(n) ** 4 / n ** 2
    return 1.0 / n


def variance_scaling(g, p: float, n_values: Sequence[int], replicas: int, seed: int = 0,
                     shape=None, cap: int = DEFAULT_CAP) -> list:
    """Sample variance of U_n (or of the sausage volume when ``shape`` is
    given) with jackknife errors.  Z^2 unions are normalized by
    ``(log n)^4 / n^2``, everything else by ``1 / n``."""
    if replicas < 1000:
        raise ValueError("variance scaling needs at least 1000 replicas")
    n_values = sorted(int(n) for n in n_values)
    if shape is not None:
        data = sausage_batch(g, shape, n_values, replicas, seed)
    else:
        data = simulate_batch(g, p, n_values, replicas, seed, cap, boundary=False).U
    rows = []
    for j, n in enumerate(n_values):
        v, se = jackknife_variance_se(data[:, j])
        k = _var_normalizer(g, n, shape is not None)
        rows.append(ScalingRow(n, v, se, v * k, se * k))
    return rows


@dataclass(frozen=True)
class BoundaryRow:
    n: int
    mean_L: float
    mean_L2: float
    normalized: float
    normalized_se: float
    ratio: float
    ratio_se: float


def boundary_scaling(g, n_values: Sequence[int], replicas: int, seed: int = 0) -> list:
    """Inner boundary statistics of the range on Z^1 or Z^2.

    On Z^2 the normalized value is ``(log n)^2 / n * mean L_n``; on Z^1
    it is ``mean L_n`` itself.
    """
    if not (isinstance(g, gc.ZdNearest) and g.d in (1, 2)):
        raise ValueError("boundary scaling is defined for Z^1 and Z^2")
    n_values = sorted(int(n) for n in n_values)
    b = simulate_batch(g, 0.0, n_values, replicas, seed)
    rows = []
    for j, n in enumerate(n_values):
        L = b.L[:, j].astype(float)
        ratio = L / b.R[:, j]
        k = math.log(n) ** 2 / n if g.d == 2 and n > 1 else 1.0
        sL = BatchStats.from_samples(L)
        sr = BatchStats.from_samples(ratio)
        rows.append(BoundaryRow(n, sL.mean, float(np.mean(L ** 2)), k * sL.mean, k * sL.se,
                                sr.mean, sr.se))
    return rows


@dataclass(frozen=True)
class BoundarySandwich:
    lower: float
    middle: float
    upper: float
    middle_se: float
    lower_se: float
    upper_se: float
    holds: bool


def boundary_sandwich(g, p: float, n: int, replicas: int, seed: int = 0,
                      cap: int = DEFAULT_CAP, level: float = CI_LEVEL) -> BoundarySandwich:
    """``(p/Delta) E L_n <= E U_n - E R_n <= E|C| E L_n`` within combined CI."""
    delta = gc.max_degree(g)
    b = simulate_batch(g, p, [n], replicas, seed, cap)
    L = BatchStats.from_samples(b.L[:, 0])
    mid = BatchStats.from_samples(b.U[:, 0] - b.R[:, 0])
    sizes, _ = cluster_sizes(g, p, replicas, seed, cap, first_replica=replicas)
    c = BatchStats.from_samples(sizes)
    lo, lo_se = p / delta * L.mean, p / delta * L.se
    hi = c.mean * L.mean
    hi_se = math.sqrt((c.se * L.mean) ** 2 + (c.mean * L.se) ** 2)
    z = z_value(level)
    holds = (lo - mid.mean <= z * combined_se(lo_se, mid.se)
             and mid.mean - hi <= z * combined_se(hi_se, mid.se))
    return BoundarySandwich(lo, mid.mean, hi, mid.se, lo_se, hi_se, holds)


# ---------------------------------------------------------------- Laplace transforms

def _neg_log_mean_exp(x: np.ndarray) -> float:
    m = x.max()
    return float(-(m + math.log(np.mean(np.exp(x - m)))))


@dataclass(frozen=True)
class LaplaceNegative:
    u_side: float
    r_side: float
    u_normalized: float
    r_normalized: float
    batch_u: np.ndarray
    batch_r: np.ndarray
    exponent: float

    @property
    def normalized_gap(self) -> float:
        return self.u_normalized - self.r_normalized


def laplace_negative(g, p: float, theta: float, n: int, replicas: int, seed: int = 0,
                     batches: int = 10, cap: int = DEFAULT_CAP) -> LaplaceNegative:
    """``-log mean exp(-theta U_n)`` and the same for R_n.

    Both are divided by ``n^{d/(d+2)}``.  Per batch the U side is never
    below the R side because ``U_n >= R_n`` pointwise.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    b = simulate_batch(g, p, [n], replicas, seed, cap, boundary=False)
    U = b.U[:, 0].astype(float)
    R = b.R[:, 0].astype(float)
    bu = np.array([_neg_log_mean_exp(-theta * c) for c in np.array_split(U, batches)])
    br = np.array([_neg_log_mean_exp(-theta * c) for c in np.array_split(R, batches)])
    d = g.d
    expo = d / (d + 2)
    nu = n ** expo
    u = _neg_log_mean_exp(-theta * U)
    r = _neg_log_mean_exp(-theta * R)
    return LaplaceNegative(u, r, u / nu, r / nu, bu, br, expo)


@dataclass(frozen=True)
class LaplacePositive:
    n_values: tuple
    values: tuple
    ses: tuple
    running_inf: tuple
    jensen_floor: tuple
    aborted: bool
    message: str = ""


def laplace_positive_small_theta(g, p: float, theta: float, n_values: Sequence[int],
                                 replicas: int, seed: int = 0, cap: int = DEFAULT_CAP,
                                 theta_ceiling: float = 0.05) -> LaplacePositive:
    """``log mean exp(theta U_{n-1}) / n`` for each n, with its running
    infimum and the Jensen floor ``theta * mean U_{n-1} / n``.  Standard
    errors come from the delta method applied to the sample mean of
    ``exp(theta U)``.

    Stops with ``aborted=True`` (keeping the values computed so far) when
    the top 1% of the samples of ``exp(theta U)`` carry more than half of
    their sum.
    """
    if not 0 < theta <= theta_ceiling:
        raise ValueError(f"theta must lie in (0, {theta_ceiling}]")
    n_values = sorted(int(n) for n in n_values)
    b = simulate_batch(g, p, [n - 1 for n in n_values], replicas, seed, cap, boundary=False)
    vals, ses, infs, floors = [], [], [], []
    for j, n in enumerate(n_values):
        x = theta * b.U[:, j].astype(float)
        w = np.exp(x - x.max())
        top = np.sort(w)[::-1][: max(1, replicas // 100)]
        if top.sum() > 0.5 * w.sum():
            return LaplacePositive(tuple(n_values[:j]), tuple(vals), tuple(ses), tuple(infs),
                                   tuple(floors), True, f"heavy tail at n={n}: top 1% carry "
                                         f"{top.sum() / w.sum():.2f} of the mass")
        v = (x.max() + math.log(w.mean())) / n
        vals.append(v)
        ses.append(float(w.std(ddof=1) / (w.mean() * math.sqrt(replicas))) / n)
        infs.append(min(infs[-1], v) if infs else v)
        floors.append(theta * b.U[:, j].mean() / n)
    return LaplacePositive(tuple(n_values), tuple(vals), tuple(ses), tuple(infs), tuple(floors),
                           False)
