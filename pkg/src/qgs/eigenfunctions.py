"""Eigenfunctions rebuilt from null vectors of the secular matrix.

An eigenfunction is stored as its per-edge coefficients (alpha_e, beta_e)
in the fundamental basis, u_e = alpha_e c_e + beta_e s_e, already scaled to
unit L^2 norm. Norms and Gram matrices use composite Gauss-Legendre
quadrature of order 10 with at least 8 panels per local wavelength.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .edge_ode import EdgeSolution
from .graph import MetricGraph

QUADRATURE_ORDER = 10
PANELS_PER_WAVELENGTH = 8
SUP_POINTS_PER_WAVELENGTH = 32
GRAM_CONDITION_LIMIT = 1e8
VERTEX_TOL = 1e-7

_GL_X, _GL_W = np.polynomial.legendre.leggauss(QUADRATURE_ORDER)


class EigenfunctionError(ValueError):
    pass


def _wavenumber(g: MetricGraph, j: int, lam: float) -> float:
    e = g.edges[j]
    vmin, _ = e.potential.bounds(e.length)
    return math.sqrt(max(lam - vmin, 1.0))


def _quadrature(g: MetricGraph, j: int, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Composite GL nodes and weights on edge j resolving the local wavelength."""
    e = g.edges[j]
    k = _wavenumber(g, j, lam)
    panels = max(2, math.ceil(PANELS_PER_WAVELENGTH * k * e.length / (2 * math.pi)))
    h = e.length / panels
    left = np.arange(panels)[:, None] * h
    x = (left + 0.5 * h * (_GL_X + 1.0)[None, :]).ravel()
    w = np.tile(0.5 * h * _GL_W, panels)
    return x, w


@dataclass
class Eigenfunction:
    """Unit-norm eigenfunction at ``lam``.

    ``coefficients[j] = (alpha, beta)`` on edge j; ``normalization`` is the
    factor that took the unit null vector of M to unit L^2 norm.
    """

    graph: MetricGraph
    lam: float
    coefficients: np.ndarray
    normalization: float
    quadrature_order: int = QUADRATURE_ORDER
    _solutions: list = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.coefficients = np.asarray(self.coefficients, dtype=float).reshape(len(self.graph.edges), 2)
        if self._solutions is None:
            self._solutions = [EdgeSolution(e.potential, e.length, self.lam) for e in self.graph.edges]

    def _edge(self, edge) -> int:
        if isinstance(edge, (int, np.integer)):
            return int(edge)
        return self.graph.edge_index(edge)

    def value(self, edge, x):
        j = self._edge(edge)
        c, _, s, _ = self._solutions[j].at(x)
        a, b = self.coefficients[j]
        return a * c + b * s

    def derivative(self, edge, x):
        j = self._edge(edge)
        _, cp, _, sp = self._solutions[j].at(x)
        a, b = self.coefficients[j]
        return a * cp + b * sp

    def end_values(self, vertex) -> list[float]:
        v = self.graph.vertex_index(vertex) if not isinstance(vertex, (int, np.integer)) else int(vertex)
        out = []
        for j, side in self.graph.edge_ends()[v]:
            x = 0.0 if side == 0 else self.graph.edges[j].length
            out.append(float(self.value(j, x)))
        return out

    def vertex_value(self, vertex) -> float:
        """Common value at a vertex (mean over its edge-ends)."""
        vals = self.end_values(vertex)
        return float(np.mean(vals))

    def residuals(self) -> dict[str, float]:
        """Largest continuity and delta-coupling residuals over all vertices.

        The flux residual is divided by max(1, sqrt|lam|), the size of a
        derivative of a unit-size oscillation.
        """
        g = self.graph
        cont = 0.0
        flux = 0.0
        scale = max(1.0, math.sqrt(abs(self.lam)))
        for v, ends in enumerate(g.edge_ends()):
            vals, inward = [], []
            for j, side in ends:
                if side == 0:
                    vals.append(float(self.value(j, 0.0)))
                    inward.append(float(self.derivative(j, 0.0)))
                else:
                    length = g.edges[j].length
                    vals.append(float(self.value(j, length)))
                    inward.append(-float(self.derivative(j, length)))
            if math.isinf(g.sigma[v]):
                cont = max(cont, max(abs(x) for x in vals))
                continue
            cont = max(cont, max(abs(x - vals[0]) for x in vals))
            flux = max(flux, abs(sum(inward) - g.sigma[v] * vals[0]) / scale)
        return {"continuity": cont, "flux": flux}

    def norm(self) -> float:
        total = 0.0
        for j in range(len(self.graph.edges)):
            x, w = _quadrature(self.graph, j, self.lam)
            total += float(np.dot(w, self.value(j, x) ** 2))
        return math.sqrt(total)

    def kinetic_energy(self) -> float:
        """Integral of |f'|^2 over the graph."""
        total = 0.0
        for j in range(len(self.graph.edges)):
            x, w = _quadrature(self.graph, j, self.lam)
            total += float(np.dot(w, self.derivative(j, x) ** 2))
        return total


def _raw_gram(g: MetricGraph, lam: float, basis: np.ndarray, sols: list) -> np.ndarray:
    m = basis.shape[1]
    G = np.zeros((m, m))
    for j in range(len(g.edges)):
        x, w = _quadrature(g, j, lam)
        c, _, s, _ = sols[j].at(x)
        P = np.array([[np.dot(w, c * c), np.dot(w, c * s)], [np.dot(w, c * s), np.dot(w, s * s)]])
        C = basis[2 * j : 2 * j + 2, :]
        G += C.T @ P @ C
    return 0.5 * (G + G.T)


def reconstruct(g: MetricGraph, lam_star: float, null_basis: np.ndarray) -> list[Eigenfunction]:
    """L^2-orthonormal eigenfunctions spanning the given null space of M(lam_star).

    ``null_basis`` has one column (length 2|E|) per null vector.
    """
    basis = np.asarray(null_basis, dtype=float)
    if basis.ndim == 1:
        basis = basis[:, None]
    if basis.shape[0] != 2 * len(g.edges) or basis.shape[1] == 0:
        raise EigenfunctionError(f"null basis of shape {basis.shape} does not fit {len(g.edges)} edges")
    sols = [EdgeSolution(e.potential, e.length, lam_star) for e in g.edges]
    G = _raw_gram(g, lam_star, basis, sols)
    evals, evecs = np.linalg.eigh(G)
    if evals[0] <= 0 or evals[-1] / evals[0] > GRAM_CONDITION_LIMIT:
        cond = math.inf if evals[0] <= 0 else evals[-1] / evals[0]
        raise EigenfunctionError(f"numerically dependent null basis at lam={lam_star:.12g} (Gram condition {cond:.3g})")
    # symmetric orthonormalization G^{-1/2}: basis-independent up to rotation
    coeffs = basis @ (evecs / np.sqrt(evals)) @ evecs.T
    out = []
    for i in range(coeffs.shape[1]):
        col = coeffs[:, i]
        out.append(Eigenfunction(g, float(lam_star), col.reshape(-1, 2), float(np.linalg.norm(col)), QUADRATURE_ORDER, sols))
    return out


def gram_matrix(functions: list[Eigenfunction]) -> np.ndarray:
    """L^2 Gram matrix of eigenfunctions sharing one graph (and one lam)."""
    if not functions:
        return np.zeros((0, 0))
    f0 = functions[0]
    basis = np.column_stack([f.coefficients.ravel() for f in functions])
    return _raw_gram(f0.graph, f0.lam, basis, f0._solutions)


def vertex_values(f: Eigenfunction, g: MetricGraph | None = None) -> dict[str, float]:
    """|f(v)|^2 per vertex id; raises if the edge-end values disagree."""
    g = g or f.graph
    out = {}
    for v, vid in enumerate(g.vertices):
        vals = f.end_values(v)
        spread = max(vals) - min(vals)
        if spread > VERTEX_TOL * max(1.0, max(abs(x) for x in vals)):
            raise EigenfunctionError(f"inconsistent values {vals} at vertex {vid!r} (lam={f.lam:.12g})")
        out[vid] = float(np.mean(vals)) ** 2
    return out


def point_value(f: Eigenfunction, g: MetricGraph | None, edge, x: float) -> float:
    """|f_e(x)|^2."""
    g = g or f.graph
    j = g.edge_index(edge) if not isinstance(edge, (int, np.integer)) else int(edge)
    length = g.edges[j].length
    if not 0.0 <= x <= length:
        raise EigenfunctionError(f"x={x} outside [0, {length}] on edge {g.edges[j].id!r}")
    return float(f.value(j, x)) ** 2


def sup_norm(f: Eigenfunction, g: MetricGraph | None = None) -> float:
    """max |f| on a grid of >= 32 points per local wavelength (plus the edge ends).

    Grid-based, not certified: the true maximum can exceed it by a relative
    amount of order (pi/32)^2/2, about 0.5%.
    """
    g = g or f.graph
    best = 0.0
    for j, e in enumerate(g.edges):
        k = _wavenumber(g, j, f.lam)
        n = max(64, math.ceil(SUP_POINTS_PER_WAVELENGTH * k * e.length / (2 * math.pi)))
        x = np.linspace(0.0, e.length, n + 1)
        best = max(best, float(np.max(np.abs(f.value(j, x)))))
    return best


def energy(f: Eigenfunction, g: MetricGraph | None = None) -> float:
    """Quadratic form q[f] = int |f'|^2 + V |f|^2 + sum_v sigma_v |f(v)|^2 (finite sigma only)."""
    g = g or f.graph
    total = 0.0
    for j, e in enumerate(g.edges):
        x, w = _quadrature(g, j, f.lam)
        u = f.value(j, x)
        du = f.derivative(j, x)
        total += float(np.dot(w, du * du + e.potential(x, e.length) * u * u))
    for v, s in enumerate(g.sigma):
        if not math.isinf(s) and s != 0.0:
            total += s * f.vertex_value(v) ** 2
    return total
