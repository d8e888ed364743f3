"""Secular matrix, eigenvalue counting and the eigenvalue search.

Unknowns are the coefficients (alpha_e, beta_e) of u_e = alpha_e c_e + beta_e s_e
on every edge; columns 2j and 2j+1 belong to edge j. Each vertex contributes
deg_v rows: deg_v - 1 rows equating the values at its incident edge-ends and
one delta-coupling row

    sum of inward derivatives - sigma_v * value = 0,

or, at a Dirichlet vertex, deg_v rows "value = 0". Eigenvalues are the zeros
of det M(lam), and the multiplicity is the null-space dimension of M.

Root isolation does not rely on sign changes alone. The exact counting function

    N(lam) = #{eigenvalues < lam}
           = sum_e #{Dirichlet eigenvalues of e below lam} + #{negative eigenvalues of Q(lam)}

(Q the vertex Dirichlet-to-Neumann form of q - lam) is evaluated on a grid in
k = sign(lam) sqrt|lam| and bisected until every cell holds one eigenvalue
or one tight cluster. Simple roots are then polished by Brent's method on
the scaled determinant. Clusters are polished by a golden-section search
on the smallest singular value of M, and the rank test supplies the
multiplicity.
"""

from __future__ import annotations

import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .edge_ode import EdgeSolution
from .graph import MetricGraph

log = logging.getLogger(__name__)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class SpectrumError(RuntimeError):
    """Root search failed (count mismatch after refinements, bracket failure)."""


class CountMismatchError(SpectrumError):
    def __init__(self, message: str, interval: tuple[float, float]):
        super().__init__(f"{message} in [{interval[0]:.12g}, {interval[1]:.12g}]")
        self.interval = interval


class NotARootError(ValueError):
    pass


@dataclass
class SolverConfig:
    rank_tol: float = 1e-7
    bracket_tol: float = 1e-12
    # count bisection stops splitting a cluster below this relative k-width
    isolation_tol: float = 1e-9
    # isolated roots closer than this (relative, in k) are one cluster
    cluster_tol: float = 1e-7
    scan_per_cell: int = 8
    max_refinements: int = 3
    cross_check: bool = True
    cross_check_count: int = 20

    def __post_init__(self) -> None:
        for name in ("rank_tol", "bracket_tol", "isolation_tol", "cluster_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class SecularMatrix:
    lam: float
    entries: np.ndarray
    row_plan: tuple[tuple[str, str, str], ...]
    column_plan: tuple[tuple[str, str], ...]


def k_of(lam: float) -> float:
    return math.copysign(math.sqrt(abs(lam)), lam)


def lam_of(k: float) -> float:
    return k * abs(k)


class _Evaluator:
    """Edge solutions for one graph, cached for recently used lam values."""

    def __init__(self, g: MetricGraph, cache_size: int = 64):
        self.g = g
        self.ends = g.edge_ends()
        self._cache: OrderedDict[float, list[EdgeSolution]] = OrderedDict()
        self.cache_size = cache_size
        self.evaluations = 0
        nondir = [v for v, s in enumerate(g.sigma) if not math.isinf(s)]
        self.q_index = {v: i for i, v in enumerate(nondir)}

    def solutions(self, lam: float) -> list[EdgeSolution]:
        lam = float(lam)
        sols = self._cache.get(lam)
        if sols is None:
            self.evaluations += 1
            sols = [EdgeSolution(e.potential, e.length, lam) for e in self.g.edges]
            self._cache[lam] = sols
            if len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        else:
            self._cache.move_to_end(lam)
        return sols

    def matrix(self, lam: float, with_scale: bool = False):
        """M(lam); with ``with_scale`` also the matrix of summed absolute contributions.

        The second matrix carries the size each entry would have without the
        cancellation that makes M singular, and is what scaling is based on.
        """
        g = self.g
        sols = self.solutions(lam)
        ne = len(g.edges)
        M = np.zeros((2 * ne, 2 * ne))
        S = np.zeros((2 * ne, 2 * ne))
        # w: frequency scale making (u, u'/w) comparable; the magnitudes
        # hypot(c, c'/w) and hypot(w s, s') never vanish, unlike c' or s alone
        w = math.sqrt(max(abs(lam), 1.0))
        row = 0
        for v, ends in enumerate(self.ends):
            vals, ders, vmag, dmag = [], [], [], []
            for j, side in ends:
                val = np.zeros(2 * ne)
                der = np.zeros(2 * ne)
                vm = np.zeros(2 * ne)
                dm = np.zeros(2 * ne)
                if side == 0:
                    val[2 * j] = 1.0
                    der[2 * j + 1] = 1.0
                    ec, es = 1.0, 1.0
                else:
                    t = sols[j].transfer
                    val[2 * j : 2 * j + 2] = t[0]
                    der[2 * j : 2 * j + 2] = -t[1]
                    ec = math.hypot(t[0, 0], t[1, 0] / w)
                    es = math.hypot(w * t[0, 1], t[1, 1])
                vm[2 * j : 2 * j + 2] = (ec, es / w)
                dm[2 * j : 2 * j + 2] = (w * ec, es)
                vals.append(val)
                ders.append(der)
                vmag.append(vm)
                dmag.append(dm)
            if math.isinf(g.sigma[v]):
                for val, vm in zip(vals, vmag):
                    M[row] = val
                    S[row] = vm
                    row += 1
                continue
            for val, vm in zip(vals[1:], vmag[1:]):
                M[row] = val - vals[0]
                S[row] = vm + vmag[0]
                row += 1
            M[row] = np.sum(ders, axis=0) - g.sigma[v] * vals[0]
            S[row] = np.sum(dmag, axis=0) + abs(g.sigma[v]) * vmag[0]
            row += 1
        return (M, S) if with_scale else M

    def scaled(self, lam: float) -> tuple[np.ndarray, np.ndarray]:
        """Row- then column-scaled M and the column scale factors.

        Rows and columns are divided by the max-norm of the uncancelled
        contributions, so the scaling is smooth in lam and does not
        renormalize a row that vanishes at a root.
        """
        M, S = self.matrix(lam, with_scale=True)
        r = S.max(axis=1)
        r = np.where(r > 0, r, 1.0)
        M = M / r[:, None]
        c = (S / r[:, None]).max(axis=0)
        c = np.where(c > 0, c, 1.0)
        return M / c[None, :], 1.0 / c

    def singular_values(self, lam: float, vectors: bool = False):
        """Singular values of the scaled M relative to the scaled contribution norm.

        At a multiple root every singular value of M can be tiny, so the rank
        reference is the norm of the uncancelled contributions, not sigma_max(M).
        """
        M, S = self.matrix(lam, with_scale=True)
        r = S.max(axis=1)
        r = np.where(r > 0, r, 1.0)
        c = (S / r[:, None]).max(axis=0)
        c = np.where(c > 0, c, 1.0)
        Ms = M / r[:, None] / c[None, :]
        ref = float(np.linalg.norm(S / r[:, None] / c[None, :], 2))
        if vectors:
            _, sv, vt = np.linalg.svd(Ms)
            return sv / ref, vt, 1.0 / c
        return np.linalg.svd(Ms, compute_uv=False) / ref

    def det(self, lam: float) -> tuple[float, float]:
        sign, logdet = np.linalg.slogdet(self.scaled(lam)[0])
        return float(sign), float(logdet)

    def det_value(self, lam: float) -> float:
        sign, logdet = self.det(lam)
        return sign * math.exp(logdet) if sign != 0 else 0.0

    def sigma_min(self, lam: float) -> float:
        return float(np.linalg.svd(self.scaled(lam)[0], compute_uv=False)[-1])

    def count(self, lam: float) -> int:
        """Number of eigenvalues strictly below ``lam``."""
        g = self.g
        sols = self.solutions(lam)
        n_dir = sum(s.dirichlet_count() for s in sols)
        nq = len(self.q_index)
        if nq == 0:
            return n_dir
        Q = np.zeros((nq, nq))
        for v, i in self.q_index.items():
            Q[i, i] += g.sigma[v]
        for j, e in enumerate(g.edges):
            t = sols[j].transfer
            c, s, sp_ = t[0, 0], t[0, 1], t[1, 1]
            if s == 0.0:
                # exactly on an edge Dirichlet eigenvalue; the count is right-continuous enough
                return self.count(math.nextafter(lam, math.inf) + 1e-14 * max(1.0, abs(lam)))
            ia = self.q_index.get(e.start)
            ib = self.q_index.get(e.end)
            if e.is_loop:
                if ia is not None:
                    Q[ia, ia] += (c + sp_ - 2.0) / s
                continue
            if ia is not None:
                Q[ia, ia] += c / s
            if ib is not None:
                Q[ib, ib] += sp_ / s
            if ia is not None and ib is not None:
                Q[ia, ib] -= 1.0 / s
                Q[ib, ia] -= 1.0 / s
        return n_dir + int(np.count_nonzero(np.linalg.eigvalsh(Q) < 0))


_EVALUATORS: "OrderedDict[int, tuple[MetricGraph, _Evaluator]]" = OrderedDict()


def _evaluator(g: MetricGraph) -> _Evaluator:
    key = id(g)
    hit = _EVALUATORS.get(key)
    if hit is not None and hit[0] is g:
        _EVALUATORS.move_to_end(key)
        return hit[1]
    ev = _Evaluator(g)
    _EVALUATORS[key] = (g, ev)
    if len(_EVALUATORS) > 16:
        _EVALUATORS.popitem(last=False)
    return ev


def secular_matrix(g: MetricGraph, lam: float) -> SecularMatrix:
    """Vertex-condition matrix M(lam) with its row and column plans."""
    ev = _evaluator(g)
    rows: list[tuple[str, str, str]] = []
    for v, ends in enumerate(ev.ends):
        vid = g.vertices[v]
        labels = [f"{g.edges[j].id}:{side}" for j, side in ends]
        if math.isinf(g.sigma[v]):
            rows.extend((vid, "dirichlet", lab) for lab in labels)
            continue
        rows.extend((vid, "continuity", f"{lab}={labels[0]}") for lab in labels[1:])
        rows.append((vid, "flux", ",".join(labels)))
    cols = tuple((e.id, coef) for e in g.edges for coef in ("alpha", "beta"))
    return SecularMatrix(float(lam), ev.matrix(lam), tuple(rows), cols)


def secular_value(g: MetricGraph, lam: float) -> tuple[int, float]:
    """Sign and log-magnitude of det of the row/column-scaled M(lam)."""
    sign, logdet = _evaluator(g).det(lam)
    return int(sign), logdet


def counting_function(g: MetricGraph, lam: float) -> int:
    """Exact number of eigenvalues strictly below ``lam``, with multiplicity."""
    return _evaluator(g).count(lam)


def _golden_min(f, a: float, b: float, tol: float) -> float:
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass
class SpectralResult:
    """Eigenvalues (ascending, distinct, with multiplicity) and their null spaces.

    ``null_bases[i]`` holds, column-wise, an orthonormal basis of the null
    space of M at ``eigenvalues[i][0]``; :attr:`eigenbasis` turns these into
    L^2-orthonormal eigenfunctions on first access.
    """

    graph: MetricGraph
    eigenvalues: list[tuple[float, int]]
    null_bases: list[np.ndarray]
    diagnostics: dict = field(default_factory=dict)
    _eigenbasis: list | None = field(default=None, repr=False)

    @property
    def values(self) -> np.ndarray:
        """Eigenvalues repeated according to multiplicity."""
        return np.repeat([lam for lam, _ in self.eigenvalues], [m for _, m in self.eigenvalues]).astype(float)

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([m for _, m in self.eigenvalues], dtype=int)

    def __len__(self) -> int:
        return int(sum(m for _, m in self.eigenvalues))

    def count_leq(self, lam: float) -> int:
        return int(sum(m for mu, m in self.eigenvalues if mu <= lam))

    @property
    def eigenbasis(self) -> list:
        if self._eigenbasis is None:
            from .eigenfunctions import reconstruct

            self._eigenbasis = [
                reconstruct(self.graph, lam, basis) for (lam, _), basis in zip(self.eigenvalues, self.null_bases)
            ]
        return self._eigenbasis

    def truncated(self, n: int) -> SpectralResult:
        """Clusters covering the first ``n`` eigenvalues (the last one kept whole)."""
        keep = 0
        total = 0
        for _, m in self.eigenvalues:
            if total >= n:
                break
            total += m
            keep += 1
        basis = None if self._eigenbasis is None else self._eigenbasis[:keep]
        return SpectralResult(self.graph, self.eigenvalues[:keep], self.null_bases[:keep], self.diagnostics, basis)

    def per_index(self, quantity) -> np.ndarray:
        """Spread an eigenspace-summed quantity evenly over its multiplicity slots.

        ``quantity(functions)`` receives the orthonormal eigenfunctions of one
        eigenvalue and returns their summed value; basis-independent sums give
        basis-independent per-n tables.
        """
        out = []
        for (lam, m), funcs in zip(self.eigenvalues, self.eigenbasis):
            out.extend([quantity(funcs) / m] * m)
        return np.array(out)

    def vertex_weights(self, vertex) -> np.ndarray:
        """Per-n |f_n(v)|^2 (eigenspace sums split evenly)."""
        v = self.graph.vertex_index(vertex)
        return self.per_index(lambda fs: sum(f.vertex_value(v) ** 2 for f in fs))

    def point_weights(self, edge, x: float) -> np.ndarray:
        j = self.graph.edge_index(edge) if not isinstance(edge, (int, np.integer)) else int(edge)
        return self.per_index(lambda fs: sum(float(f.value(j, x)) ** 2 for f in fs))


class _Search:
    def __init__(self, g: MetricGraph, config: SolverConfig):
        self.g = g
        self.cfg = config
        self.ev = _evaluator(g)
        self.bisections = 0
        self.brent = 0
        self.golden = 0
        self.fallbacks: list[float] = []

    def count_k(self, k: float) -> int:
        return self.ev.count(lam_of(k))

    def lower_k(self) -> float:
        vmin, _ = self.g.potential_bounds()
        lam = min(vmin, 0.0) - 1.2137
        span = 1.2137
        while self.ev.count(lam) > 0:
            span *= 4.0
            lam = min(vmin, 0.0) - span
        return k_of(lam)

    def upper_k(self, n: int) -> float:
        g = self.g
        _, vmax = g.potential_bounds()
        L = g.total_length
        k = math.pi * (n + len(g.edges) + len(g.vertices) + 1) / L + math.sqrt(max(vmax, 0.0)) + 1.0
        while self.count_k(k) < n:
            k *= 1.25
        return k

    def isolate(self, a: float, b: float, ca: int, cb: int, out: list) -> None:
        m = cb - ca
        if m <= 0:
            return
        width_tol = self.cfg.isolation_tol * max(abs(a), abs(b), 1.0)
        if m == 1 or b - a <= width_tol:
            out.append((a, b, ca, cb))
            return
        mid = 0.5 * (a + b)
        cm = self.count_k(mid)
        self.bisections += 1
        if not ca <= cm <= cb:
            log.debug("non-monotone count at k=%r (%d not in [%d, %d])", mid, cm, ca, cb)
            cm = min(max(cm, ca), cb)
        self.isolate(a, mid, ca, cm, out)
        self.isolate(mid, b, cm, cb, out)

    def merge(self, cells: list) -> list:
        """Fuse adjacent cells whose joint span is below ``cluster_tol``.

        Round-off in the count can split one multiple eigenvalue into
        several unit jumps a few ulps apart; they are one eigenvalue.
        """
        out: list = []
        for cell in cells:
            if out:
                a, b, ca, cb = out[-1]
                if cell[0] - b <= 0.0 and cell[1] - a <= self.cfg.cluster_tol * max(abs(a), abs(cell[1]), 1.0):
                    out[-1] = (a, cell[1], ca, cell[3])
                    continue
            out.append(cell)
        return out

    def polish(self, a: float, b: float, m: int) -> float:
        f = lambda k: self.ev.det_value(lam_of(k))  # noqa: E731
        if m == 1:
            fa, fb = f(a), f(b)
            if fa == 0.0:
                return a
            if fb == 0.0:
                return b
            if fa * fb < 0:
                self.brent += 1
                return scipy.optimize.brentq(f, a, b, xtol=1e-15, rtol=9e-16, maxiter=500)
            # no sign change: shrink with the count, then minimize below
            ca = self.count_k(a)
            tol = self.cfg.isolation_tol * max(abs(a), abs(b), 1.0)
            while b - a > tol:
                mid = 0.5 * (a + b)
                if self.count_k(mid) > ca:
                    b = mid
                else:
                    a = mid
                self.bisections += 1
            self.fallbacks.append(lam_of(0.5 * (a + b)))
        self.golden += 1
        pad = 0.5 * (b - a)
        tol = 4e-16 * max(abs(a), abs(b), 1e-8)
        return _golden_min(lambda k: self.ev.sigma_min(lam_of(k)), a - pad, b + pad, tol)

    def run(self, n: int | None, cutoff: float | None, refine: int) -> tuple[list[tuple[float, int]], float]:
        k_lo = self.lower_k()
        if cutoff is not None:
            k_hi = k_of(cutoff)
            k_hi = k_hi + 1e-12 * max(1.0, abs(k_hi))
            if k_hi <= k_lo:
                return [], k_hi
        else:
            k_hi = self.upper_k(n)
        dk = math.pi / (self.cfg.scan_per_cell * self.g.total_length * 2**refine)
        steps = max(1, math.ceil((k_hi - k_lo) / dk))
        grid = np.linspace(k_lo, k_hi, steps + 1)
        counts = [self.count_k(k) for k in grid]
        for i in range(1, len(counts)):
            if counts[i] < counts[i - 1]:
                log.debug("non-monotone scan count at k=%r", grid[i])
                counts[i] = counts[i - 1]
        cells: list = []
        for i in range(len(grid) - 1):
            self.isolate(grid[i], grid[i + 1], counts[i], counts[i + 1], cells)
        roots = []
        cells = self.merge(cells)
        for a, b, ca, cb in cells:
            k = self.polish(a, b, cb - ca)
            roots.append((lam_of(k), cb - ca))
        roots.sort()
        merged: list[tuple[float, int]] = []
        for lam, m in roots:
            if merged and abs(lam - merged[-1][0]) <= self.cfg.bracket_tol * max(1.0, abs(lam)):
                merged[-1] = (merged[-1][0], merged[-1][1] + m)
            else:
                merged.append((lam, m))
        if cutoff is not None:
            merged = [(lam, m) for lam, m in merged if lam <= cutoff]
        return merged, lam_of(k_hi)

    def null_basis(self, lam: float, m: int) -> tuple[np.ndarray, int]:
        s, vt, colscale = self.ev.singular_values(lam, vectors=True)
        rank_def = int(np.count_nonzero(s <= self.cfg.rank_tol))
        basis = (colscale[:, None] * vt[-m:].T) if m > 0 else np.zeros((len(s), 0))
        q, _ = np.linalg.qr(basis)
        return q, rank_def


def _cross_check(g: MetricGraph, found: list[tuple[float, int]], cfg: SolverConfig) -> list[dict]:
    """Compare found counts with the finite-element oracle below a few thresholds."""
    from .fem import fem_count, mesh_for

    distinct = [lam for lam, _ in found]
    if not distinct:
        return []
    top = min(len(distinct), cfg.cross_check_count)
    thresholds = [distinct[0] - 1.0]
    thresholds += [0.5 * (distinct[i] + distinct[i + 1]) for i in range(top - 1)]
    mesh = mesh_for(g, max(abs(t) for t in thresholds) + 1.0, rel_error=2e-4)
    report = []
    for lam in thresholds:
        secular = sum(m for mu, m in found if mu <= lam)
        lo = fem_count(g, mesh, lam, margin=False)
        hi = fem_count(g, mesh, lam, margin=True)
        report.append({"lambda": lam, "secular": secular, "fem_lower": lo, "fem_upper": hi, "ok": lo <= secular <= hi})
    return report


def eigenvalues(
    g: MetricGraph,
    count: int | None = None,
    cutoff: float | None = None,
    config: SolverConfig | None = None,
) -> SpectralResult:
    """All eigenvalues up to the ``count``-th, or all eigenvalues <= ``cutoff``.

    Multiplicities come from the exact counting function and are checked
    against the numerical null-space dimension of M (singular values below
    ``rank_tol`` times the largest); disagreements are listed in
    ``diagnostics["rank_mismatch"]``.
    """
    cfg = config or SolverConfig()
    if (count is None) == (cutoff is None):
        raise ValueError("give exactly one of count or cutoff")
    if count is not None and count < 1:
        raise ValueError("count must be >= 1")
    search = _Search(g, cfg)
    history = []
    for refine in range(cfg.max_refinements + 1):
        found, lam_hi = search.run(count, cutoff, refine)
        if count is not None:
            found = _first_clusters(found, count)
        check = _cross_check(g, found, cfg) if cfg.cross_check else []
        bad = [c for c in check if not c["ok"]]
        history.append({"refine": refine, "cross_check_failures": len(bad)})
        if not bad:
            break
        log.warning("count mismatch against FEM oracle at refinement %d: %s", refine, bad[0])
    else:
        c = bad[0]
        raise CountMismatchError(
            f"secular count {c['secular']} vs FEM [{c['fem_lower']}, {c['fem_upper']}] after "
            f"{cfg.max_refinements} refinements",
            (found[0][0] if found else c["lambda"], c["lambda"]),
        )
    bases = []
    mismatch = []
    for lam, m in found:
        basis, rank_def = search.null_basis(lam, m)
        if rank_def != m:
            mismatch.append({"lambda": lam, "count_multiplicity": m, "null_dimension": rank_def})
        bases.append(basis)
    diagnostics = {
        "evaluations": search.ev.evaluations,
        "bisections": search.bisections,
        "brent_polishes": search.brent,
        "cluster_polishes": search.golden,
        "no_sign_change": search.fallbacks,
        "rank_mismatch": mismatch,
        "cross_check": check,
        "refinements": history,
        "rank_tol": cfg.rank_tol,
        "bracket_tol": cfg.bracket_tol,
    }
    return SpectralResult(g, found, bases, diagnostics)


def _first_clusters(found: list[tuple[float, int]], n: int) -> list[tuple[float, int]]:
    out = []
    total = 0
    for lam, m in found:
        if total >= n:
            break
        out.append((lam, m))
        total += m
    if total < n:
        raise SpectrumError(f"only {total} eigenvalues located, {n} requested")
    return out


def multiplicity(g: MetricGraph, lam_star: float, config: SolverConfig | None = None) -> int:
    """Null-space dimension of M(lam_star) under the rank tolerance."""
    cfg = config or SolverConfig()
    s = _evaluator(g).singular_values(lam_star)
    dim = int(np.count_nonzero(s <= cfg.rank_tol))
    if dim == 0:
        raise NotARootError(f"lam={lam_star!r} is not within tolerance of an eigenvalue (relative sigma_min={s[-1]:.3g})")
    return dim


def _edge_dirichlet(sol_at, count_at, n: int, lo: float) -> list[float]:
    """First n roots of s(l; lam) for one edge via its exact zero count."""
    k_lo = k_of(lo)
    k = max(k_lo + 1.0, 1.0)
    while count_at(lam_of(k)) < n:
        k *= 1.5
    out: list[float] = []

    def rec(a, b, ca, cb):
        if cb - ca <= 0:
            return
        if cb - ca == 1:
            f = lambda kk: sol_at(lam_of(kk))  # noqa: E731
            fa, fb = f(a), f(b)
            if fa * fb > 0:
                raise SpectrumError(f"Dirichlet bracket without sign change in k=[{a}, {b}]")
            out.append(lam_of(scipy.optimize.brentq(f, a, b, xtol=1e-15, rtol=9e-16)))
            return
        mid = 0.5 * (a + b)
        cm = count_at(lam_of(mid))
        rec(a, mid, ca, cm)
        rec(mid, b, cm, cb)

    rec(k_lo, k, count_at(lam_of(k_lo)), count_at(lam_of(k)))
    return sorted(out)[:n]


def dirichlet_eigenvalues(g: MetricGraph, n: int) -> np.ndarray:
    """Lowest ``n`` eigenvalues with Dirichlet conditions at every vertex.

    The graph decouples into its edges; the result is the merged union of
    the edge spectra, repeated by multiplicity.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    vals: list[float] = []
    for e in g.edges:
        c = e.potential.constant_value
        if c is not None:
            j = np.arange(1, n + 1)
            vals.extend((j * math.pi / e.length) ** 2 + c)
            continue
        vmin, _ = e.potential.bounds(e.length)
        sol_at = lambda lam, e=e: EdgeSolution(e.potential, e.length, lam).transfer[0, 1]  # noqa: E731
        count_at = lambda lam, e=e: EdgeSolution(e.potential, e.length, lam).dirichlet_count()  # noqa: E731
        vals.extend(_edge_dirichlet(sol_at, count_at, n, vmin - 1.0))
    return np.sort(np.array(vals))[:n]
