"""Config-driven experiment runner and the two headline demos.

A config is a flat file of ``key = value`` lines (``#`` starts a
comment); list values are comma separated.  Command-line flags override
file values.  Output is deterministic for a fixed config: per-replica
CSV files carry the header ``# percwalk-csv v1`` and JSON summaries
round every float to 12 significant digits and embed the resolved
config and the package version.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Optional

import numpy as np

from . import __version__
from . import _kernels as K
from . import graph_core as gc
from .capacity import capacity_exact, capacity_mc
from .estimators import (BatchStats, boundary_scaling, combined_se, estimate_cp_cluster,
                         estimate_cp_lln, laplace_negative, laplace_positive_small_theta,
                         variance_scaling, z_value)
from .oracle import exact_mean_union
from .percolation import DEFAULT_CAP, PercolationConfig, temperley_lower_bound
from .rng import as_seed
from .union_process import (intersection_batch, linf_ball_shape, sausage_batch, simulate_batch,
                            union_volume)

CSV_HEADER = "# percwalk-csv v1"
SIG_DIGITS = 12

SUBCOMMANDS = ("simulate", "cp-scan", "boundary", "variance", "laplace", "sausage", "intersect",
               "fluctuate", "hairy-demo", "oracle-check", "capacity")


class ConfigError(ValueError):
    """Invalid config; carries the offending field and, for files, the line."""

    def __init__(self, field: str, message: str, line: Optional[int] = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{field}: {message}")
        self.field = field
        self.line = line


class TemperleyWarning(UserWarning):
    """p is at least half of the guaranteed subcritical bound."""


# ---------------------------------------------------------------- config

def _ints(s: str) -> tuple:
    return tuple(int(x) for x in s.split(",") if x.strip()) if s.strip() else ()


def _floats(s: str) -> tuple:
    return tuple(float(x) for x in s.split(",") if x.strip()) if s.strip() else ()


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "simulate"
    graph: str = "z3"
    p: float = 0.0
    n: tuple = (1000,)
    replicas: int = 100
    seed: int = 0
    escape_radius: int = 100
    cluster_cap: int = DEFAULT_CAP
    output: str = "-"
    trace_out: str = ""
    format: str = "auto"
    method: str = ""
    theta: float = 0.5
    shells: tuple = ()
    windows: tuple = (1000, 8000)
    mode: str = "desk"
    k: int = 4
    schedule_p: float = 0.0
    p_values: tuple = (0.0, 0.05, 0.1, 0.15)
    shape: str = "origin"
    radii: tuple = (25, 50, 100)
    walks: int = 100
    box_radius: int = 2

    def resolved_format(self) -> str:
        if self.format != "auto":
            return self.format
        return "csv" if self.experiment == "simulate" else "json"


_PARSERS = {int: int, float: float, str: str}
_LISTS = {"n": _ints, "shells": _ints, "windows": _ints, "radii": _ints, "p_values": _floats}


def _field_types() -> dict:
    defaults = ExperimentConfig()
    return {f.name: type(getattr(defaults, f.name)) for f in fields(ExperimentConfig)}


def parse_value(name: str, raw: str, line: Optional[int] = None):
    types = _field_types()
    if name not in types:
        raise ConfigError(name, "unknown field", line)
    try:
        if name in _LISTS:
            return _LISTS[name](raw)
        return _PARSERS[types[name]](raw.strip())
    except ValueError as exc:
        raise ConfigError(name, f"cannot parse {raw!r}: {exc}", line) from None


def _format_value(v) -> str:
    if isinstance(v, tuple):
        return ",".join(_format_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_config(text: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Parse ``key = value`` lines, then apply ``overrides`` (raw strings)."""
    values = {}
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("?", f"expected 'key = value', got {raw.strip()!r}", i)
        key, val = (s.strip() for s in line.split("=", 1))
        values[key] = parse_value(key, val, i)
    for key, val in (overrides or {}).items():
        values[key] = parse_value(key, val)
    return ExperimentConfig(**values)


def serialize_config(cfg: ExperimentConfig) -> str:
    return "".join(f"{f.name} = {_format_value(getattr(cfg, f.name))}\n"
                   for f in fields(ExperimentConfig))


def build_graph(cfg: ExperimentConfig):
    """Graph family named by ``cfg.graph``: ``z<d>``, ``linf<d>``, ``alt``
    (with ``cfg.shells``) or ``hairy`` (schedule from ``mode``, ``k`` and
    ``schedule_p``, falling back to ``p``)."""
    name = cfg.graph.strip().lower()
    try:
        if name.startswith("linf"):
            return gc.ZdLinf(int(name[4:]))
        if name.startswith("z") and name[1:].isdigit():
            return gc.ZdNearest(int(name[1:]))
        if name == "alt":
            return gc.AlternatingZ3(tuple(cfg.shells))
        if name == "hairy":
            a, b = gc.hairy_schedule(cfg.mode, cfg.schedule_p or cfg.p, cfg.k)
            return gc.HairyHalfLine(a, b)
    except (gc.DomainError, ValueError) as exc:
        raise ConfigError("graph", str(exc)) from None
    raise ConfigError("graph", f"unknown family {cfg.graph!r} (z<d>, linf<d>, alt, hairy)")


def build_set(g, spec: str) -> list:
    """Finite set named by ``spec``: ``origin``, ``pair`` (o and e1),
    ``linf<r>`` (l-inf ball) or explicit points ``x,y,z;x,y,z``."""
    d = g.d
    s = spec.strip().lower()
    if s == "origin":
        return [(0,) * d]
    if s == "pair":
        return [(0,) * d, (1,) + (0,) * (d - 1)]
    if s.startswith("linf") and s[4:].isdigit():
        return linf_ball_shape(d, int(s[4:]))
    try:
        pts = [tuple(int(c) for c in part.split(",")) for part in s.split(";") if part.strip()]
    except ValueError:
        raise ConfigError("shape", f"cannot parse set {spec!r}") from None
    if not pts or any(len(q) != d for q in pts):
        raise ConfigError("shape", f"points must have {d} coordinates")
    return pts


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Range checks; emits ``TemperleyWarning`` when p is not well below
    the guaranteed subcritical bound."""
    def need(ok, name, msg):
        if not ok:
            raise ConfigError(name, msg)

    need(cfg.experiment in SUBCOMMANDS, "experiment", f"must be one of {', '.join(SUBCOMMANDS)}")
    need(0.0 <= cfg.p <= 1.0, "p", "must lie in [0, 1]")
    need(all(0.0 <= q <= 1.0 for q in cfg.p_values), "p_values", "must lie in [0, 1]")
    need(len(cfg.n) > 0 and all(0 <= x <= 10 ** 9 for x in cfg.n), "n",
         "needs values in [0, 1e9]")
    need(1 <= cfg.replicas <= 10 ** 9, "replicas", "must lie in [1, 1e9]")
    need(0 <= cfg.seed < 2 ** 64, "seed", "must lie in [0, 2^64)")
    need(2 <= cfg.escape_radius <= 10 ** 6, "escape_radius", "must lie in [2, 1e6]")
    need(1 <= cfg.cluster_cap <= 10 ** 9, "cluster_cap", "must lie in [1, 1e9]")
    need(cfg.format in ("auto", "csv", "json"), "format", "must be auto, csv or json")
    need(cfg.theta > 0, "theta", "must be positive")
    need(cfg.k >= 1, "k", "must be at least 1")
    need(cfg.walks >= 1, "walks", "must be at least 1")
    need(cfg.box_radius >= 0, "box_radius", "must be nonnegative")
    need(len(cfg.windows) >= 2 and all(w >= 1 for w in cfg.windows), "windows",
         "needs at least two positive values")
    need(all(r >= 4 for r in cfg.radii), "radii", "must be at least 4")
    need(cfg.mode in ("desk", "paper"), "mode", "must be desk or paper")
    if cfg.experiment == "hairy-demo":
        g = None
    elif cfg.experiment == "fluctuate":
        g = gc.AlternatingZ3(tuple(cfg.shells))
    else:
        g = build_graph(cfg)
    if g is not None and gc.max_degree(g) != gc.UNBOUNDED:
        bound = float(temperley_lower_bound(g))
        top = max((cfg.p,) + (cfg.p_values if cfg.experiment == "cp-scan" else ()))
        if top >= bound / 2:
            warnings.warn(f"p={top} is at least half the subcritical bound "
                          f"1/(Delta-1)={bound:.4g} for {g!r}", TemperleyWarning,
                          stacklevel=2)
    return cfg


# ---------------------------------------------------------------- output helpers

def round_sig(x, digits: int = SIG_DIGITS):
    """Recursively round floats to ``digits`` significant digits."""
    if isinstance(x, dict):
        return {k: round_sig(v, digits) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [round_sig(v, digits) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{digits}g}")
    if isinstance(x, Fraction):
        return str(x)
    return x


def summary(experiment, family, p, n, estimator, value, se, seed, truncation_rate=0.0,
            **extra) -> dict:
    h = z_value() * se if se is not None and math.isfinite(se) else None
    out = {"experiment": experiment, "family": family, "p": p, "n": n, "estimator": estimator,
           "value": value, "se": se, "ci": None if h is None else [value - h, value + h],
           "truncation_rate": truncation_rate, "seed": seed}
    out.update(extra)
    return out


def dump_json(cfg: ExperimentConfig, results: list, extra: Optional[dict] = None) -> str:
    doc = {"version": __version__, "experiment": cfg.experiment, "config": asdict(cfg),
           "results": results}
    if extra:
        doc["extra"] = extra
    return json.dumps(round_sig(doc), sort_keys=True, indent=2) + "\n"


def _emit(path: str, text: str):
    if path in ("", "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv(header: list, rows) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _family(g) -> str:
    return repr(g) if not isinstance(g, gc.HairyHalfLine) else f"HairyHalfLine(k={len(g.a)})"


# ---------------------------------------------------------------- demos

@dataclass(frozen=True)
class FluctuationReport:
    shells: tuple
    p: float
    windows: tuple
    means: tuple
    ses: tuple
    linf_occupancy: tuple
    heavy_window: int
    light_window: int
    gap: float
    gap_se: float
    separation: float
    reference_z3: object
    reference_z3_linf: object
    reference_gap: float
    reference_gap_se: float
    same_sign: Optional[bool]
    inconclusive: bool
    truncation_rate: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["reference_z3"] = asdict(self.reference_z3)
        d["reference_z3_linf"] = asdict(self.reference_z3_linf)
        return d


def fluctuation_demo(shells, p: float, windows, replicas: int, seed: int = 0,
                     cap: int = DEFAULT_CAP, reference_n: int = 1000,
                     reference_replicas: int = 100, reference_cap: int = 10 ** 4,
                     level: float = 0.99) -> FluctuationReport:
    """U_n/n at each window on the alternating graph, against the pure lattices.

    The gap is oriented from the window that spent the larger fraction of
    time in l-inf regions to the one that spent the smaller; it should
    carry the sign of ``c(l-inf lattice) - c(Z^3)``.  With equal
    occupancies the gap is first minus last window and ``same_sign`` is
    ``None``.  Overlapping window CIs set ``inconclusive``.
    """
    g = gc.AlternatingZ3(tuple(shells))
    windows = tuple(sorted(int(w) for w in windows))
    b = simulate_batch(g, p, windows, replicas, seed, cap, boundary=False)
    ratios = b.U / np.asarray(windows, dtype=float)
    stats = [BatchStats.from_samples(ratios[:, j]) for j in range(len(windows))]
    ck = np.asarray(windows, dtype=np.int64)
    occ = K.batch_region_occupancy(gc.kernel_spec(g), np.int64(gc.vertex_key((0, 0, 0))),
                                   np.int64(windows[-1]), ck, as_seed(seed), np.int64(0),
                                   np.int64(0), np.int64(replicas)).mean(axis=0)
    heavy, light = int(np.argmax(occ)), int(np.argmin(occ))
    if heavy == light:
        heavy, light = 0, len(windows) - 1
    gap = stats[heavy].mean - stats[light].mean
    gap_se = combined_se(stats[heavy].se, stats[light].se)
    ref0 = estimate_cp_lln(gc.ZdNearest(3), p, reference_n, reference_replicas, seed + 1,
                           reference_cap)
    ref1 = estimate_cp_lln(gc.ZdLinf(3), p, reference_n, reference_replicas, seed + 1,
                           reference_cap)
    rgap = ref1.value - ref0.value
    same = None if occ[heavy] == occ[light] else bool(np.sign(gap) == np.sign(rgap))
    z = z_value(level)
    ci = [(s.mean - z * s.se, s.mean + z * s.se) for s in (stats[heavy], stats[light])]
    overlap = ci[0][0] <= ci[1][1] and ci[1][0] <= ci[0][1]
    return FluctuationReport(tuple(shells), p, windows, tuple(s.mean for s in stats),
                             tuple(s.se for s in stats), tuple(float(x) for x in occ),
                             windows[heavy], windows[light], gap, gap_se,
                             abs(gap) / gap_se if gap_se > 0 else math.inf, ref0, ref1, rgap,
                             combined_se(ref0.se, ref1.se), same, overlap, b.truncation_rate)


@dataclass(frozen=True)
class HairyAnchorReport:
    k: int
    anchor: int
    hairs: int
    reached: int
    hit_time_mean: float
    hit_time_quartiles: tuple
    u_mean: float
    u_se: float
    r_mean: float
    threshold: float
    exceed_frequency: float
    v_mean: float
    v_se: float
    v_expected: float
    percolation_variance: Optional[float]


def hairy_demo(mode: str, p: float, k: int, replicas: int, seed: int = 0,
               cap: int = DEFAULT_CAP, max_steps: int = 10 ** 8, schedule_p: Optional[float] = None,
               percolation_repeats: int = 200) -> list:
    """Per-anchor statistics on the hairy half-line.

    For anchor ``a_k`` with ``b_k`` hairs: the first hitting time, U at
    that time, the frequency of ``U > p b_k / 2``, the number V_k of open
    hairs (binomial, mean ``p b_k``) and the variance of U over
    percolation repeats along one fixed walk.
    """
    a, b = gc.hairy_schedule(mode, schedule_p or p, k)
    g = gc.HairyHalfLine(a, b)
    fam = gc.kernel_spec(g)
    T, Uk, Rk, V, trunc = K.batch_hairy(fam, float(p), as_seed(seed), as_seed(seed), np.int64(0),
                                        np.int64(replicas), np.int64(cap), np.int64(max_steps),
                                        gc.buffer_size(g))
    preps = np.arange(replicas, replicas + percolation_repeats, dtype=np.int64)
    pv, hits = K.batch_hairy_fixed_walk(fam, float(p), as_seed(seed), as_seed(seed), np.int64(0),
                                        preps, np.int64(cap), np.int64(max_steps),
                                        gc.buffer_size(g))
    out = []
    for j in range(len(a)):
        ok = T[:, j] >= 0
        t = T[ok, j].astype(float)
        u = BatchStats.from_samples(Uk[ok, j])
        v = BatchStats.from_samples(V[:, j])
        thr = p * b[j] / 2
        var = float(np.var(pv[:, j], ddof=1)) if hits[j] >= 0 and percolation_repeats > 1 else None
        out.append(HairyAnchorReport(
            j + 1, a[j], b[j], int(ok.sum()), float(t.mean()) if t.size else math.nan,
            tuple(float(q) for q in np.quantile(t, [0.25, 0.5, 0.75])) if t.size else (),
            u.mean, u.se if u.count > 1 else math.nan, float(Rk[ok, j].mean()) if ok.any() else math.nan,
            thr, float((Uk[ok, j] > thr).mean()) if ok.any() else math.nan,
            v.mean, v.se, p * b[j], var))
    return out


# ---------------------------------------------------------------- runners

def _run_simulate(cfg, g):
    b = simulate_batch(g, cfg.p, cfg.n, cfg.replicas, cfg.seed, cfg.cluster_cap)
    rows = []
    for i in range(cfg.replicas):
        for j, n in enumerate(b.n_values):
            rows.append((i, int(n), int(b.R[i, j]), int(b.L[i, j]), int(b.U[i, j]),
                         int(bool(b.truncated[i]))))
    if cfg.trace_out:
        pc = PercolationConfig(cfg.p, cfg.seed, 0, cfg.cluster_cap)
        res = union_volume(g, pc, gc.origin(g), int(b.n_values[-1]))
        trows = [(k, int(res.r_sequence[k]), int(res.l_sequence[k]), int(res.u_sequence[k]))
                 for k in range(res.u_sequence.shape[0])]
        _emit(cfg.trace_out, _csv(["k", "R_k", "L_k", "U_k"], trows))
    if cfg.resolved_format() == "csv":
        return _csv(["replica", "n", "R_n", "L_n", "U_n", "truncated"], rows)
    results = []
    for j, n in enumerate(b.n_values):
        s = BatchStats.from_samples(b.U[:, j] / max(int(n), 1))
        results.append(summary(cfg.experiment, _family(g), cfg.p, int(n), "U_n/n", s.mean,
                               s.se if s.count > 1 else None, cfg.seed, b.truncation_rate))
    return dump_json(cfg, results)


def _cp_summary(cfg, g, e):
    return summary(cfg.experiment, _family(g), e.p, e.n, e.method, e.value, e.se, cfg.seed,
                   e.truncation_rate, **e.extra)


def _run_cp_scan(cfg, g):
    method = cfg.method or "lln"
    if method not in ("lln", "cluster", "both"):
        raise ConfigError("method", "cp-scan takes lln, cluster or both")
    results = []
    for q in cfg.p_values:
        if method in ("lln", "both"):
            results.append(_cp_summary(cfg, g, estimate_cp_lln(g, q, max(cfg.n), cfg.replicas,
                                                               cfg.seed, cfg.cluster_cap)))
        if method in ("cluster", "both"):
            results.append(_cp_summary(cfg, g, estimate_cp_cluster(
                g, q, cfg.replicas, "capacity", cfg.seed, cfg.walks, cfg.escape_radius,
                cfg.cluster_cap)))
    return dump_json(cfg, results)


def _run_boundary(cfg, g):
    rows = boundary_scaling(g, cfg.n, cfg.replicas, cfg.seed)
    return dump_json(cfg, [summary(cfg.experiment, _family(g), 0.0, r.n, "normalized_L_n",
                                   r.normalized, r.normalized_se, cfg.seed, mean_L=r.mean_L,
                                   mean_L2=r.mean_L2, ratio=r.ratio, ratio_se=r.ratio_se)
                           for r in rows])


def _run_variance(cfg, g):
    method = cfg.method or "union"
    if method not in ("union", "sausage"):
        raise ConfigError("method", "variance takes union or sausage")
    shape = build_set(g, cfg.shape) if method == "sausage" else None
    rows = variance_scaling(g, cfg.p, cfg.n, cfg.replicas, cfg.seed, shape, cfg.cluster_cap)
    return dump_json(cfg, [summary(cfg.experiment, _family(g), cfg.p, r.n, f"normalized_var_{method}",
                                   r.normalized, r.normalized_se, cfg.seed, variance=r.variance,
                                   variance_se=r.variance_se) for r in rows])


def _run_laplace(cfg, g):
    method = cfg.method or "negative"
    results = []
    if method == "negative":
        for n in cfg.n:
            r = laplace_negative(g, cfg.p, cfg.theta, n, cfg.replicas, cfg.seed,
                                 cap=cfg.cluster_cap)
            results.append(summary(cfg.experiment, _family(g), cfg.p, n, "neg_laplace_gap",
                                   r.normalized_gap, None, cfg.seed, theta=cfg.theta,
                                   u_side=r.u_side, r_side=r.r_side,
                                   u_normalized=r.u_normalized, r_normalized=r.r_normalized,
                                   batch_dominance=bool(np.all(r.batch_u >= r.batch_r))))
        return dump_json(cfg, results)
    if method == "positive":
        r = laplace_positive_small_theta(g, cfg.p, cfg.theta, cfg.n, cfg.replicas, cfg.seed,
                                         cfg.cluster_cap)
        for n, v, inf, fl in zip(r.n_values, r.values, r.running_inf, r.jensen_floor):
            results.append(summary(cfg.experiment, _family(g), cfg.p, n, "pos_laplace", v, None,
                                   cfg.seed, theta=cfg.theta, running_inf=inf, jensen_floor=fl))
        return dump_json(cfg, results, {"aborted": r.aborted, "message": r.message})
    raise ConfigError("method", "laplace takes negative or positive")


def _run_sausage(cfg, g):
    A = build_set(g, cfg.shape)
    V = sausage_batch(g, A, cfg.n, cfg.replicas, cfg.seed)
    results = []
    for j, n in enumerate(sorted(cfg.n)):
        s = BatchStats.from_samples(V[:, j] / max(n, 1))
        results.append(summary(cfg.experiment, _family(g), 0.0, n, "sausage_U_n(A)/n", s.mean,
                               s.se if s.count > 1 else None, cfg.seed, set_size=len(A)))
    return dump_json(cfg, results)


def _run_intersect(cfg, g):
    results = []
    for n in cfg.n:
        U1, U2, I, tr = intersection_batch(g, cfg.p, n, cfg.replicas, cfg.seed, cfg.cluster_cap)
        s = BatchStats.from_samples(I)
        results.append(summary(cfg.experiment, _family(g), cfg.p, n, "I_n", s.mean,
                               s.se if s.count > 1 else None, cfg.seed, float(tr.mean()),
                               mean_u1=float(U1.mean()), mean_u2=float(U2.mean())))
    return dump_json(cfg, results)


def _run_fluctuate(cfg, g):
    r = fluctuation_demo(cfg.shells, cfg.p, cfg.windows, cfg.replicas, cfg.seed,
                         cfg.cluster_cap)
    results = [summary(cfg.experiment, "AlternatingZ3", cfg.p, w, "U_n/n", m, s, cfg.seed,
                       r.truncation_rate, linf_occupancy=o)
               for w, m, s, o in zip(r.windows, r.means, r.ses, r.linf_occupancy)]
    return dump_json(cfg, results, r.to_dict())


def _run_hairy(cfg, g):
    reps = hairy_demo(cfg.mode, cfg.p, cfg.k, cfg.replicas, cfg.seed, cfg.cluster_cap,
                      schedule_p=cfg.schedule_p or None)
    results = [summary(cfg.experiment, "HairyHalfLine", cfg.p, r.anchor, "P(U_T>p*b/2)",
                       r.exceed_frequency,
                       math.sqrt(r.exceed_frequency * (1 - r.exceed_frequency) / max(r.reached, 1)),
                       cfg.seed, **{k: v for k, v in asdict(r).items()}) for r in reps]
    return dump_json(cfg, results)


def _run_oracle(cfg, g):
    p = Fraction(repr(cfg.p))
    n = min(cfg.n)
    res = exact_mean_union(g, p, gc.origin(g), n, cfg.box_radius)
    b = simulate_batch(g, cfg.p, [n], cfg.replicas, cfg.seed, cfg.cluster_cap, boundary=False)
    s = BatchStats.from_samples(b.U[:, 0])
    lo, hi = res.interval_float
    se = s.se if s.count > 1 else 0.0
    inside = lo - 4 * se <= s.mean <= hi + 4 * se
    return dump_json(cfg, [summary(cfg.experiment, _family(g), cfg.p, n, "mc_mean_U_n", s.mean,
                                   se, cfg.seed, b.truncation_rate, oracle_value=float(res.value),
                                   oracle_exact=str(res.value), epsilon=float(res.epsilon),
                                   box=res.box, inside=inside)])


def _run_capacity(cfg, g):
    A = build_set(g, cfg.shape)
    method = cfg.method or "exact"
    results = []
    if method in ("exact", "both"):
        c = capacity_exact(g, A, cfg.radii)
        results.append(summary(cfg.experiment, _family(g), 0.0, None, c.method, c.value,
                               c.uncertainty, cfg.seed, per_radius=c.per_radius,
                               radii=c.radii, unit_conductance=c.unit_conductance))
    if method in ("mc", "both"):
        c = capacity_mc(g, A, cfg.escape_radius, cfg.replicas, cfg.seed, doubling_check=True)
        results.append(summary(cfg.experiment, _family(g), 0.0, None, c.method, c.value,
                               c.uncertainty, cfg.seed, doubling_gap=c.doubling_gap))
    if not results:
        raise ConfigError("method", "capacity takes exact, mc or both")
    return dump_json(cfg, results)


_RUNNERS = {"simulate": _run_simulate, "cp-scan": _run_cp_scan, "boundary": _run_boundary,
            "variance": _run_variance, "laplace": _run_laplace, "sausage": _run_sausage,
            "intersect": _run_intersect, "fluctuate": _run_fluctuate, "hairy-demo": _run_hairy,
            "oracle-check": _run_oracle, "capacity": _run_capacity}


def render(cfg: ExperimentConfig) -> str:
    """Validate and run ``cfg``; return the primary artifact as text."""
    validate(cfg)
    g = None if cfg.experiment in ("fluctuate", "hairy-demo") else build_graph(cfg)
    return _RUNNERS[cfg.experiment](cfg, g)


def run(cfg: ExperimentConfig) -> int:
    """Run ``cfg`` and write its artifacts; returns the exit status."""
    _emit(cfg.output, render(cfg))
    return 0
