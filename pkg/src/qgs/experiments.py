"""Quantitative checks of gap means, local Weyl laws, heat kernels and bounds.

Each experiment is a pure function of a graph and parameters and returns
either a small result record or an :class:`ExperimentReport` pairing running
empirical values with the exact theoretical limit.

Eigenvalues are indexed from 1 (n = 1 is the bottom of the spectrum, the
ground state is included in every mean). Quantities at degenerate
eigenvalues are eigenspace sums split evenly over the multiplicity slots, so
every per-n table is independent of the basis chosen inside an eigenspace.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .eigenfunctions import sup_norm
from .graph import MetricGraph, _effective_circumference_exact
from .secular import SolverConfig, SpectralResult, counting_function, dirichlet_eigenvalues, eigenvalues

log = logging.getLogger(__name__)

DEFAULT_TAU_NODES = 16
GAP_TOL = 1e-6
DOMINATION_TOL = 1e-6


class ExperimentError(RuntimeError):
    pass


class DegeneratePathWarning(UserWarning):
    pass


# ---------------------------------------------------------------- plumbing


def worker_count() -> int:
    """Worker cap from QGS_THREADS (default: 1, i.e. serial)."""
    raw = os.environ.get("QGS_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ExperimentError(f"QGS_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def parallel_map(fn: Callable, items: Iterable) -> list:
    """Ordered map over ``items`` using up to ``worker_count()`` threads."""
    items = list(items)
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))


_CACHE: dict[tuple, SpectralResult] = {}
_CACHE_LIMIT = 64


def _config_key(config: SolverConfig | None) -> tuple:
    c = config or SolverConfig()
    return (c.rank_tol, c.bracket_tol, c.isolation_tol, c.cluster_tol, c.scan_per_cell, c.max_refinements, c.cross_check)


def spectrum(g: MetricGraph, n: int, config: SolverConfig | None = None) -> SpectralResult:
    """Spectrum holding at least ``n`` eigenvalues, cached per graph and solver settings."""
    key = (g.fingerprint(), _config_key(config))
    hit = _CACHE.get(key)
    if hit is not None and len(hit) >= n:
        return hit
    res = eigenvalues(g, n, config=config)
    if len(_CACHE) >= _CACHE_LIMIT:
        _CACHE.pop(next(iter(_CACHE)))
    _CACHE[key] = res
    return res


def clear_cache() -> None:
    _CACHE.clear()


def _apply_sigma(g: MetricGraph, sigma) -> MetricGraph:
    return g if sigma is None else g.with_sigma(sigma)


def _values(g: MetricGraph, n: int, config: SolverConfig | None) -> np.ndarray:
    return spectrum(g, n, config).values[:n]


def _running_mean(x: np.ndarray) -> np.ndarray:
    return np.cumsum(x) / np.arange(1, len(x) + 1)


def _metadata(g: MetricGraph, config: SolverConfig | None, **extra) -> dict:
    c = config or SolverConfig()
    meta = {"graph": g.fingerprint(), "rank_tol": c.rank_tol, "bracket_tol": c.bracket_tol}
    meta.update(extra)
    return meta


# ---------------------------------------------------------------- types


@dataclass
class GapSequence:
    """d_n = lambda_n(sigma) - lambda_n(reference), n = 1..N.

    ``reference_kind`` is "neumann" (same potential, sigma = 0) or "free"
    (V = 0, sigma = 0).
    """

    sigma: tuple[float, ...]
    reference_kind: str
    lam_sigma: np.ndarray
    lam_reference: np.ndarray

    @property
    def gaps(self) -> np.ndarray:
        return self.lam_sigma - self.lam_reference

    @property
    def entries(self) -> list[tuple[int, float, float, float]]:
        return [(n + 1, float(a), float(b), float(a - b)) for n, (a, b) in enumerate(zip(self.lam_sigma, self.lam_reference))]

    def __len__(self) -> int:
        return len(self.lam_sigma)


@dataclass
class ExperimentReport:
    """Running empirical values against a theoretical limit.

    The verdict compares the value at the final N with the limit, relative
    to |limit| (absolute when the limit is 0). ``columns`` holds extra
    running series written next to the main one in the CSV.
    """

    name: str
    running_values: list[tuple[int, float]]
    theoretical_limit: float
    tolerance: float
    metadata: dict = field(default_factory=dict)
    columns: dict[str, list[float]] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    verdict: bool = field(init=False)

    def __post_init__(self) -> None:
        self.verdict = self.within_tolerance() and all(self.checks.values())

    @property
    def final(self) -> float:
        return self.running_values[-1][1]

    def error(self, value: float) -> float:
        return abs(value - self.theoretical_limit)

    def within_tolerance(self) -> bool:
        err = self.error(self.final)
        if self.theoretical_limit == 0:
            return err <= self.tolerance
        return err <= self.tolerance * abs(self.theoretical_limit)

    def rows(self) -> list[dict]:
        out = []
        lim = self.theoretical_limit
        for i, (n, v) in enumerate(self.running_values):
            err = self.error(v)
            row = {
                "N": n,
                "empirical": repr(float(v)),
                "limit": repr(float(lim)),
                "abs_error": repr(float(err)),
                "rel_error": repr(float(err / abs(lim))) if lim != 0 else "",
            }
            for name, series in self.columns.items():
                row[name] = repr(float(series[i]))
            out.append(row)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        fields = ["N", "empirical", "limit", "abs_error", "rel_error", *self.columns]
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows())
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "experiment": self.name,
            "N": self.running_values[-1][0],
            "empirical": float(self.final),
            "limit": float(self.theoretical_limit),
            "tolerance": self.tolerance,
            "abs_error": float(self.error(self.final)),
            "checks": dict(self.checks),
            "verdict": "PASS" if self.verdict else "FAIL",
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


# ---------------------------------------------------------------- gap means


def gap_sequence(g: MetricGraph, sigma, N: int, reference_kind: str = "neumann", config: SolverConfig | None = None) -> GapSequence:
    """Ordered-with-multiplicity differences lambda_n(sigma) - lambda_n(ref), n <= N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    gs = _apply_sigma(g, sigma)
    if reference_kind == "neumann":
        ref = gs.neumann()
    elif reference_kind == "free":
        ref = gs.free()
    else:
        raise ValueError(f"reference_kind must be 'neumann' or 'free', got {reference_kind!r}")
    a = _values(gs, N, config)
    b = a if ref == gs else _values(ref, N, config)
    return GapSequence(gs.sigma, reference_kind, a, b)


def mean_gap_limit(g: MetricGraph) -> Fraction:
    """(2/L) sum_v sigma_v/deg_v, exact in the input floats."""
    return 2 * _effective_circumference_exact(g) / Fraction(g.total_length)


def mean_gap_hat_limit(g: MetricGraph) -> float:
    """(2/L)(sum_v sigma_v/deg_v + 1/2 sum_e int v_e)."""
    return float(mean_gap_limit(g)) + g.potential_integral() / g.total_length


def mean_gap(g: MetricGraph, sigma, N: int, tolerance: float = 0.02, config: SolverConfig | None = None) -> ExperimentReport:
    gs = _apply_sigma(g, sigma)
    seq = gap_sequence(gs, None, N, "neumann", config)
    run = _running_mean(seq.gaps)
    return ExperimentReport(
        "mean-gap",
        [(n + 1, float(v)) for n, v in enumerate(run)],
        float(mean_gap_limit(gs)),
        tolerance,
        _metadata(gs, config, reference="neumann"),
    )


def mean_gap_hat(g: MetricGraph, sigma, N: int, tolerance: float = 0.02, config: SolverConfig | None = None) -> ExperimentReport:
    gs = _apply_sigma(g, sigma)
    seq = gap_sequence(gs, None, N, "free", config)
    run = _running_mean(seq.gaps)
    return ExperimentReport(
        "mean-gap-hat",
        [(n + 1, float(v)) for n, v in enumerate(run)],
        mean_gap_hat_limit(gs),
        tolerance,
        _metadata(gs, config, reference="free"),
    )


# ---------------------------------------------------------------- Feynman-Hellmann


@dataclass
class FeynmanHellmannResult:
    n: int
    reconstructed: float
    direct: float
    tau_nodes: np.ndarray
    integrand: np.ndarray
    degenerate_nodes: list[float]

    @property
    def defect(self) -> float:
        return abs(self.reconstructed - self.direct)


def _cluster_of(res: SpectralResult, n: int) -> int:
    total = 0
    for i, (_, m) in enumerate(res.eigenvalues):
        total += m
        if total >= n:
            return i
    raise ExperimentError(f"spectrum has fewer than {n} eigenvalues")


def feynman_hellmann_check(
    g: MetricGraph,
    sigma,
    n: int,
    tau_nodes: int = DEFAULT_TAU_NODES,
    gap_tol: float = GAP_TOL,
    config: SolverConfig | None = None,
) -> FeynmanHellmannResult:
    """Integrate d lambda_n / d tau = sum_v sigma_v |f_n^{tau sigma}(v)|^2 over tau in [0, 1].

    At a degenerate node the eigenspace sum split over the multiplicity is
    used and a :class:`DegeneratePathWarning` is issued.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    gs = _apply_sigma(g, sigma)
    if gs.has_dirichlet:
        raise ExperimentError("the coupling path needs finite sigma at every vertex")
    x, w = np.polynomial.legendre.leggauss(tau_nodes)
    taus = 0.5 * (x + 1.0)
    weights = 0.5 * w
    sig = np.array(gs.sigma)

    def node(tau: float) -> tuple[float, bool]:
        gt = gs.scaled_sigma(tau)
        res = eigenvalues(gt, n + 1, config=config)
        i = _cluster_of(res, n)
        lam, m = res.eigenvalues[i]
        neighbours = [res.eigenvalues[j][0] for j in (i - 1, i + 1) if 0 <= j < len(res.eigenvalues)]
        gap = min((abs(lam - mu) for mu in neighbours), default=math.inf)
        degenerate = m > 1 or gap <= gap_tol * max(1.0, abs(lam))
        funcs = res.eigenbasis[i]
        val = sum(float(np.dot(sig, [f.vertex_value(v) ** 2 for v in range(len(sig))])) for f in funcs) / m
        return val, degenerate

    out = parallel_map(node, taus)
    integrand = np.array([v for v, _ in out])
    degenerate = [float(t) for t, (_, d) in zip(taus, out) if d]
    if degenerate:
        warnings.warn(f"lambda_{n} is degenerate or nearly so at tau = {degenerate}", DegeneratePathWarning, stacklevel=2)
    direct = float(_values(gs, n, config)[n - 1] - _values(gs.neumann(), n, config)[n - 1])
    return FeynmanHellmannResult(n, float(np.dot(weights, integrand)), direct, taus, integrand, degenerate)


# ---------------------------------------------------------------- local Weyl law


@dataclass(frozen=True)
class Point:
    """A vertex (``edge is None``) or an interior point (edge, x)."""

    vertex: str | None = None
    edge: str | None = None
    x: float | None = None

    def label(self) -> str:
        return self.vertex if self.edge is None else f"{self.edge}:{self.x!r}"


def resolve_point(g: MetricGraph, point) -> Point:
    """Accept a vertex id, an (edge, x) pair, a "edge:x" string or a :class:`Point`.

    Edge points at x = 0 or x = l are mapped to the endpoint vertex.
    """
    if isinstance(point, Point):
        p = point
    elif isinstance(point, tuple):
        p = Point(edge=str(point[0]), x=float(point[1]))
    elif isinstance(point, str) and point in g.vertices:
        p = Point(vertex=point)
    elif isinstance(point, str) and ":" in point:
        eid, xs = point.rsplit(":", 1)
        p = Point(edge=eid, x=float(xs))
    else:
        raise ExperimentError(f"cannot interpret point {point!r} (vertex id or edge:x)")
    if p.edge is None:
        g.vertex_index(p.vertex)
        return p
    e = g.edges[g.edge_index(p.edge)]
    if not 0.0 <= p.x <= e.length:
        raise ExperimentError(f"x={p.x} outside [0, {e.length}] on edge {e.id!r}")
    if p.x == 0.0:
        return Point(vertex=g.vertices[e.start])
    if p.x == e.length:
        return Point(vertex=g.vertices[e.end])
    return p


def point_degree(g: MetricGraph, point: Point) -> int:
    return 2 if point.edge is not None else g.degrees[g.vertex_index(point.vertex)]


def point_weights(res: SpectralResult, point: Point) -> np.ndarray:
    if point.edge is None:
        return res.vertex_weights(point.vertex)
    return res.point_weights(point.edge, point.x)


def local_weyl_limit(g: MetricGraph, point: Point) -> float:
    if point.edge is None and math.isinf(g.sigma_of(point.vertex)):
        return 0.0
    return 2.0 / (g.total_length * point_degree(g, point))


def local_weyl(g: MetricGraph, sigma, point, N: int, tolerance: float = 0.05, config: SolverConfig | None = None) -> ExperimentReport:
    """Cesaro means of |f_n(x)|^2 against 2/(L deg_x)."""
    gs = _apply_sigma(g, sigma)
    p = resolve_point(gs, point)
    res = spectrum(gs, N, config)
    run = _running_mean(point_weights(res, p)[:N])
    return ExperimentReport(
        "local-weyl",
        [(n + 1, float(v)) for n, v in enumerate(run)],
        local_weyl_limit(gs, p),
        tolerance,
        _metadata(gs, config, point=p.label(), degree=point_degree(gs, p)),
    )


@dataclass
class WeylCount:
    Lambda: float
    count: int
    weyl: float

    @property
    def ratio(self) -> float:
        return self.count / self.weyl if self.weyl > 0 else math.inf


def weyl_counting(g: MetricGraph, sigma, Lambda: float) -> WeylCount:
    """N(Lambda) = #{n : lambda_n <= Lambda} against (L/pi) sqrt(Lambda)."""
    gs = _apply_sigma(g, sigma)
    above = math.nextafter(Lambda, math.inf) + 1e-13 * max(1.0, abs(Lambda))
    count = counting_function(gs, above)
    weyl = gs.total_length / math.pi * math.sqrt(max(Lambda, 0.0))
    return WeylCount(float(Lambda), count, weyl)


def karamata_ratio(g: MetricGraph, sigma, point, N: int, config: SolverConfig | None = None) -> float:
    """sum_{n <= N} |f_n(x)|^2 / ((2/(pi deg_x)) sqrt(lambda_N))."""
    gs = _apply_sigma(g, sigma)
    p = resolve_point(gs, point)
    res = spectrum(gs, N, config)
    lam = res.values[N - 1]
    return float(point_weights(res, p)[:N].sum() / (2.0 / (math.pi * point_degree(gs, p)) * math.sqrt(lam)))


# ---------------------------------------------------------------- sup-norm bounds


def sobolev_bound(D: float, min_length: float) -> float:
    """min over 0 < eps <= min l_e of eps*D + 2/eps (bound on |f|_inf^2 for unit f with |f'|^2 <= D)."""
    if D <= 0:
        return 2.0 / min_length
    eps = math.sqrt(2.0 / D)
    if eps < min_length:
        return 2.0 * math.sqrt(2.0 * D)
    return D * min_length + 2.0 / min_length


def _energy_bounds(g: MetricGraph, res: SpectralResult, N: int) -> np.ndarray:
    """Per-n upper bound D_n for |f_n'|^2.

    With sigma >= 0 and V = 0, |f_n'|^2 <= q[f_n] = lambda_n(sigma) <= lambda_n(inf)
    and the Dirichlet eigenvalue is used; otherwise the measured kinetic energy.
    """
    if g.potential_free and all(s >= 0 for s in g.sigma):
        return dirichlet_eigenvalues(g, N)
    return res.per_index(lambda fs: sum(f.kinetic_energy() for f in fs))[:N]


@dataclass
class SupNormScan:
    lam: np.ndarray
    sup_norms: np.ndarray
    bounds: np.ndarray

    @property
    def bounded(self) -> bool:
        return bool(np.all(self.sup_norms**2 <= self.bounds * (1 + 1e-9)))

    def stable(self, tolerance: float = 0.1) -> bool:
        n = len(self.sup_norms)
        half = self.sup_norms[: max(1, n // 2)].max()
        return bool(self.sup_norms.max() <= (1 + tolerance) * half)

    @property
    def verdict(self) -> bool:
        return self.bounded and self.stable()


def sup_norm_scan(g: MetricGraph, sigma, N: int, config: SolverConfig | None = None) -> SupNormScan:
    """Grid sup-norms of f_1..f_N with their certified Sobolev bounds on |f_n|_inf^2."""
    gs = _apply_sigma(g, sigma)
    res = spectrum(gs, N, config)
    sups = []
    for (_, m), funcs in zip(res.eigenvalues, res.eigenbasis):
        sups.extend(sup_norm(f) for f in funcs)
    D = _energy_bounds(gs, res, N)
    lmin = float(min(gs.lengths))
    bounds = np.array([sobolev_bound(float(d), lmin) for d in D])
    return SupNormScan(res.values[:N], np.array(sups[:N]), bounds)


# ---------------------------------------------------------------- heat kernel


@dataclass
class HeatResult:
    t: float
    value: float
    asymptote: float
    terms: int
    tail_bound: float

    @property
    def ratio(self) -> float:
        return self.value / self.asymptote


def _heat_series(g: MetricGraph, point: Point, t: float, trunc_tol: float, config: SolverConfig | None, max_terms: int) -> HeatResult:
    lmin = float(min(g.lengths))
    vmin, _ = g.potential_bounds()
    lam_floor = min(vmin, 0.0)
    # first guess: free-graph Weyl count at the level where e^{-lam t} * bound < tol
    lam_needed = max(math.log(max(sobolev_bound(1.0 / t, lmin), 1.0) / trunc_tol) / t, 1.0) - lam_floor
    n = max(16, math.ceil(g.total_length / math.pi * math.sqrt(lam_needed)) + 8)
    while True:
        if n > max_terms:
            raise ExperimentError(f"heat series not truncated within {max_terms} eigenvalues at t={t:g}")
        res = spectrum(g, n, config)
        lam = res.values[:n]
        D = _energy_bounds(g, res, n)
        bounds = np.array([sobolev_bound(float(d), lmin) for d in D])
        tail = np.exp(-lam * t) * bounds
        ok = np.nonzero(tail < trunc_tol)[0]
        if len(ok):
            cut = int(ok[0]) + 1
            # keep whole eigenspaces: extend the cut to the end of its cluster
            while cut < n and lam[cut] == lam[cut - 1]:
                cut += 1
            w = point_weights(res, point)[:cut]
            value = float(np.dot(np.exp(-lam[:cut] * t), w))
            asym = 1.0 / math.sqrt(4 * math.pi * t) * 2.0 / point_degree(g, point)
            return HeatResult(t, value, asym, cut, float(tail[cut - 1]))
        n *= 2


def heat_kernel_diag(
    g: MetricGraph,
    sigma,
    point,
    t: float,
    trunc_tol: float = 1e-12,
    config: SolverConfig | None = None,
    max_terms: int = 20000,
) -> HeatResult:
    """p(t; x, x) = sum_n e^{-lambda_n t} |f_n(x)|^2 with its leading small-t term.

    The series is cut at the first N with e^{-lambda_N t} * B_N < trunc_tol,
    where B_N is the certified Sobolev bound on |f_N|_inf^2.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    gs = _apply_sigma(g, sigma)
    return _heat_series(gs, resolve_point(gs, point), t, trunc_tol, config, max_terms)


@dataclass
class DominationResult:
    sigma_hat: float
    v_hat: float
    samples: list[dict]

    @property
    def max_violation(self) -> float:
        return max(s["violation"] for s in self.samples)

    @property
    def verdict(self) -> bool:
        return self.max_violation <= DOMINATION_TOL


def heat_domination_check(
    g: MetricGraph,
    sigma,
    points: Sequence,
    times: Sequence[float],
    sigma_hat: float | None = None,
    v_hat: float | None = None,
    trunc_tol: float = 1e-12,
    config: SolverConfig | None = None,
) -> DominationResult:
    """p^{sigma,V}(t;x,x) - e^{(sigma_hat + v_hat) t} p^{0,0}(t;x,x) over a (t, x) grid.

    ``sigma_hat`` and ``v_hat`` default to the smallest admissible values,
    max(0, -min sigma_v) and sup V_-.
    """
    gs = _apply_sigma(g, sigma)
    if gs.has_dirichlet:
        raise ExperimentError("domination check needs finite couplings")
    need_s = max(0.0, -min(gs.sigma))
    need_v = max(e.potential.negative_part_sup(e.length) for e in gs.edges)
    sigma_hat = need_s if sigma_hat is None else float(sigma_hat)
    v_hat = need_v if v_hat is None else float(v_hat)
    if sigma_hat < need_s - 1e-15 or v_hat < need_v - 1e-12:
        raise ExperimentError(f"supplied bounds sigma_hat={sigma_hat}, v_hat={v_hat} below required {need_s}, {need_v}")
    free = gs.free()
    resolved = [resolve_point(gs, p) for p in points]
    samples = []
    for t in times:
        for p in resolved:
            a = _heat_series(gs, p, t, trunc_tol, config, 20000)
            b = _heat_series(free, p, t, trunc_tol, config, 20000)
            bound = math.exp((sigma_hat + v_hat) * t) * b.value
            samples.append({"t": float(t), "point": p.label(), "p": a.value, "dominating": bound, "violation": a.value - bound})
    return DominationResult(sigma_hat, v_hat, samples)


# ---------------------------------------------------------------- bounds


def cesaro_limit(g: MetricGraph) -> float:
    return sum(local_weyl_limit(g, Point(vertex=v)) for v in g.vertices)


def cesaro_bound_scan(
    g: MetricGraph,
    sigma,
    N: int,
    points: Sequence = (),
    tolerance: float = 0.1,
    c_report: float | None = None,
    config: SolverConfig | None = None,
) -> ExperimentReport:
    """Running means of sum_v |f_n(v)|^2 (plus one column per interior point).

    Checks: the final value stays below ``c_report`` (default 1.5 times the
    local-Weyl limit sum_v 2/(L deg_v)) and is within ``tolerance`` of it.
    """
    gs = _apply_sigma(g, sigma)
    res = spectrum(gs, N, config)
    total = np.zeros(N)
    for v in gs.vertices:
        total += res.vertex_weights(v)[:N]
    run = _running_mean(total)
    limit = cesaro_limit(gs)
    c_report = 1.5 * limit if c_report is None else c_report
    columns = {}
    for pt in points:
        p = resolve_point(gs, pt)
        columns[f"point {p.label()}"] = list(_running_mean(point_weights(res, p)[:N]))
    return ExperimentReport(
        "cesaro",
        [(n + 1, float(v)) for n, v in enumerate(run)],
        limit,
        tolerance,
        _metadata(gs, config, c_report=c_report),
        columns,
        {"bounded": bool(run[-1] <= c_report)},
    )


@dataclass
class UniformBoundScan:
    d: np.ndarray
    d_hat: np.ndarray

    @property
    def max_d(self) -> float:
        return float(np.abs(self.d).max())

    @property
    def max_d_hat(self) -> float:
        return float(np.abs(self.d_hat).max())

    @staticmethod
    def _no_growth(x: np.ndarray, tolerance: float) -> bool:
        a = np.abs(x)
        half = a[: max(1, len(a) // 2)].max()
        return bool(a.max() <= (1 + tolerance) * half + 1e-12)

    def tail_attains(self, tolerance: float = 0.1) -> tuple[bool, bool]:
        """Whether max over n in [N/2, N] equals the overall max up to ``tolerance``."""
        out = []
        for x in (self.d, self.d_hat):
            a = np.abs(x)
            out.append(bool(a[len(a) // 2 :].max() >= (1 - tolerance) * a.max() - 1e-12))
        return out[0], out[1]

    def verdict(self, tolerance: float = 0.1) -> bool:
        return self._no_growth(self.d, tolerance) and self._no_growth(self.d_hat, tolerance)


def uniform_bound_scan(g: MetricGraph, sigma, N: int, config: SolverConfig | None = None) -> UniformBoundScan:
    gs = _apply_sigma(g, sigma)
    return UniformBoundScan(
        gap_sequence(gs, None, N, "neumann", config).gaps,
        gap_sequence(gs, None, N, "free", config).gaps,
    )


# ---------------------------------------------------------------- two-edge star


def _bisect(f: Callable[[float], float], a: float, b: float) -> float:
    fa = f(a)
    fb = f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise ExperimentError(f"bisection bracket [{a!r}, {b!r}] has no sign change")
    while True:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            return m
        fm = f(m)
        if fm == 0.0:
            return m
        if fa * fm < 0:
            b = m
        else:
            a, fa = m, fm


@dataclass
class StarOracle:
    length: float
    sigma: float
    antisymmetric: np.ndarray
    symmetric: np.ndarray
    spectrum: np.ndarray
    even_gap: float


def star_oracle(length: float, sigma: float, N: int) -> StarOracle:
    """Spectrum of the equal-armed two-edge star with coupling ``sigma`` at the centre.

    Antisymmetric modes have k = (2j-1) pi/(2l). Symmetric modes solve
    2k sin(kl) = sigma cos(kl) (equivalently tan(kl) = sigma/(2k)), with the
    j-th root in [(j-1) pi/l, (2j-1) pi/(2l)). ``even_gap`` is the largest
    |d_{2n}| against sigma = 0, which vanishes exactly.
    """
    if not length > 0:
        raise ValueError("length must be positive")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if N < 1:
        raise ValueError("N must be >= 1")
    half = (N + 1) // 2 + 1
    j = np.arange(1, half + 1)
    anti = (2 * j - 1) * math.pi / (2 * length)

    def symmetric(s: float) -> np.ndarray:
        roots = []
        for jj in range(1, half + 1):
            lo = (jj - 1) * math.pi / length
            hi = (2 * jj - 1) * math.pi / (2 * length)
            if s == 0.0:
                roots.append(lo)
                continue
            f = lambda k: 2 * k * math.sin(k * length) - s * math.cos(k * length)  # noqa: E731
            roots.append(_bisect(f, lo, hi))
        return np.array(roots)

    sym = symmetric(float(sigma))
    merged = np.sort(np.concatenate([sym**2, anti**2]))[:N]
    base = np.sort(np.concatenate([symmetric(0.0) ** 2, anti**2]))[:N]
    d = merged - base
    even = np.abs(d[1::2]).max() if N >= 2 else 0.0
    return StarOracle(float(length), float(sigma), anti, sym, merged, float(even))


def sigma_sweep(g: MetricGraph, vertex: str, values: Sequence[float], N: int, config: SolverConfig | None = None) -> np.ndarray:
    """Rows of the lowest N eigenvalues for each coupling value at ``vertex``."""
    return np.array(parallel_map(lambda s: _values(g.with_sigma({vertex: s}), N, config), values))

