"""Conforming P1 finite elements for the quadratic form of -Delta + V with delta couplings.

The form is

    q[f] = sum_e int (|f_e'|^2 + v_e |f_e|^2) dx + sum_v sigma_v |f(v)|^2

on H^1 of the graph. Vertex degrees of freedom are shared by all incident
edge-ends, so continuity holds by construction and the coupling enters only
as sigma_v on the vertex diagonal. No flux condition is discretized.
Dirichlet vertices are removed from the unknowns.

This module is the independent check on the secular solver and must not
import it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import MetricGraph

DENSE_LIMIT = 6000

_G2 = np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)])


class FemError(RuntimeError):
    pass


@dataclass(frozen=True)
class FemMesh:
    """Uniform mesh per edge; ``elements[j]`` elements on edge j.

    DOF layout: interior nodes edge by edge, then the non-Dirichlet vertices.
    """

    graph: MetricGraph
    elements: tuple[int, ...]
    strict: bool = True

    def __post_init__(self) -> None:
        g = self.graph
        object.__setattr__(self, "elements", tuple(int(n) for n in self.elements))
        if len(self.elements) != len(g.edges):
            raise FemError("one element count per edge required")
        if any(n < 1 for n in self.elements):
            raise FemError("each edge needs at least one element")
        if any(e.is_loop and n < 2 for e, n in zip(g.edges, self.elements)):
            raise FemError("a loop needs at least two elements")
        if self.strict:
            lmin = min(g.lengths)
            worst = max(self.spacings)
            if worst > lmin / 8 * (1 + 1e-12):
                raise FemError(f"mesh spacing {worst:g} exceeds min(l_e)/8 = {lmin / 8:g}")
        if self.n_dofs == 0:
            raise FemError("Dirichlet elimination leaves no degrees of freedom")

    @property
    def spacings(self) -> np.ndarray:
        return self.graph.lengths / np.array(self.elements)

    @property
    def h(self) -> float:
        return float(self.spacings.max())

    @property
    def vertex_dofs(self) -> list[int | None]:
        base = sum(n - 1 for n in self.elements)
        out: list[int | None] = []
        k = base
        for s in self.graph.sigma:
            if math.isinf(s):
                out.append(None)
            else:
                out.append(k)
                k += 1
        return out

    @property
    def n_dofs(self) -> int:
        nv = sum(1 for s in self.graph.sigma if not math.isinf(s))
        return sum(n - 1 for n in self.elements) + nv

    def refined(self, factor: int = 2) -> FemMesh:
        return FemMesh(self.graph, tuple(factor * n for n in self.elements), self.strict)

    def error_scale(self, lam: float) -> float:
        """Leading P1 eigenvalue error h^2 lam^2 / 12 (uniform interval value)."""
        return self.h**2 * lam**2 / 12.0


def build_mesh(g: MetricGraph, h: float | None = None, min_per_edge: int = 8) -> FemMesh:
    """Mesh with spacing at most ``h`` and at most min(l_e)/8 on every edge."""
    lmin = float(min(g.lengths))
    target = lmin / 8.0 if h is None else min(h, lmin / 8.0)
    counts = tuple(max(min_per_edge, math.ceil(e.length / target * (1 - 1e-12))) for e in g.edges)
    return FemMesh(g, counts)


def mesh_for(g: MetricGraph, lam_max: float, rel_error: float = 1e-3, max_dofs: int = 200_000) -> FemMesh:
    """Mesh whose leading error h^2 lam^2/12 is below ``rel_error * lam_max``."""
    lam_max = max(abs(lam_max), 1.0)
    h = math.sqrt(12.0 * rel_error / lam_max)
    total = g.total_length / h
    if total > max_dofs:
        h = g.total_length / max_dofs
    return build_mesh(g, h)


def mesh_per_wavelength(g: MetricGraph, lam_max: float, per_wavelength: int = 32, min_per_edge: int = 8) -> FemMesh:
    """Mesh resolving the wavelength at ``lam_max`` with ``per_wavelength`` elements.

    The right size for Richardson-extrapolated comparisons: with 32 elements
    per wavelength the extrapolated eigenvalues are accurate to about 1e-6
    relative up to lam_max.
    """
    vmin, _ = g.potential_bounds()
    k = math.sqrt(max(lam_max - vmin, 1.0))
    counts = tuple(max(min_per_edge, math.ceil(per_wavelength * k * e.length / (2 * math.pi))) for e in g.edges)
    return FemMesh(g, counts, strict=False)


def _edge_nodes(mesh: FemMesh, j: int) -> np.ndarray:
    """Global DOF per node of edge j (-1 for an eliminated Dirichlet vertex)."""
    g = mesh.graph
    e = g.edges[j]
    n = mesh.elements[j]
    start = sum(m - 1 for m in mesh.elements[:j])
    vd = mesh.vertex_dofs
    nodes = np.empty(n + 1, dtype=int)
    nodes[1:n] = start + np.arange(n - 1)
    nodes[0] = -1 if vd[e.start] is None else vd[e.start]
    nodes[n] = -1 if vd[e.end] is None else vd[e.end]
    return nodes


def fem_assemble(g: MetricGraph, mesh: FemMesh) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Stiffness-plus-potential matrix A and consistent mass matrix B.

    The potential term uses two-point Gauss quadrature per element, which is
    exact for constant potentials (so V = c gives A = A0 + c B exactly).
    """
    if mesh.graph is not g and mesh.graph != g:
        raise FemError("mesh belongs to a different graph")
    rows, cols, avals, bvals = [], [], [], []
    for j, e in enumerate(g.edges):
        n = mesh.elements[j]
        h = e.length / n
        nodes = _edge_nodes(mesh, j)
        left = np.arange(n) * h
        q0 = e.potential(left + _G2[0] * h, e.length)
        q1 = e.potential(left + _G2[1] * h, e.length)
        # phi_left = 1 - xi, phi_right = xi at the two Gauss points
        p00 = 0.5 * h * (q0 * (1 - _G2[0]) ** 2 + q1 * (1 - _G2[1]) ** 2)
        p11 = 0.5 * h * (q0 * _G2[0] ** 2 + q1 * _G2[1] ** 2)
        p01 = 0.5 * h * (q0 * _G2[0] * (1 - _G2[0]) + q1 * _G2[1] * (1 - _G2[1]))
        a_loc = [(0, 0, 1.0 / h + p00), (1, 1, 1.0 / h + p11), (0, 1, -1.0 / h + p01), (1, 0, -1.0 / h + p01)]
        b_loc = [(0, 0, 2.0), (1, 1, 2.0), (0, 1, 1.0), (1, 0, 1.0)]
        for (i, k, a), (_, _, b) in zip(a_loc, b_loc):
            ri = nodes[i : i + n]
            ck = nodes[k : k + n]
            keep = (ri >= 0) & (ck >= 0)
            rows.append(ri[keep])
            cols.append(ck[keep])
            avals.append(np.broadcast_to(a, (n,))[keep])
            bvals.append(np.full(n, b * h / 6.0)[keep])
    for v, dof in enumerate(mesh.vertex_dofs):
        if dof is not None and g.sigma[v] != 0.0:
            rows.append(np.array([dof]))
            cols.append(np.array([dof]))
            avals.append(np.array([g.sigma[v]]))
            bvals.append(np.array([0.0]))
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    shape = (mesh.n_dofs, mesh.n_dofs)
    A = sp.coo_matrix((np.concatenate(avals), (r, c)), shape=shape).tocsr()
    B = sp.coo_matrix((np.concatenate(bvals), (r, c)), shape=shape).tocsr()
    return A, B


def fem_eigenvalues(g: MetricGraph, mesh: FemMesh, n: int, richardson: bool = False) -> np.ndarray:
    """Lowest ``n`` generalized eigenvalues of (A, B), ascending.

    Discretization error is about h^2 lam^2 / 12 and the values are upper
    bounds of the exact ones. With ``richardson`` the mesh is also halved and
    (4 lam_{h/2} - lam_h)/3 returned, cancelling the h^2 term.
    """
    if n < 1 or n > mesh.n_dofs:
        raise FemError(f"requested {n} eigenvalues from {mesh.n_dofs} degrees of freedom")
    if mesh.n_dofs > DENSE_LIMIT:
        raise FemError(f"{mesh.n_dofs} DOFs exceeds the dense limit {DENSE_LIMIT}")
    A, B = fem_assemble(g, mesh)
    try:
        vals = scipy.linalg.eigh(A.toarray(), B.toarray(), eigvals_only=True, subset_by_index=[0, n - 1])
    except np.linalg.LinAlgError as exc:
        raise FemError(f"mass matrix factorization failed ({exc}); assembly bug") from None
    if richardson:
        fine = fem_eigenvalues(g, mesh.refined(2), n)
        return (4.0 * fine - vals) / 3.0
    return vals


def inertia_count(K: sp.spmatrix) -> int:
    """Number of negative eigenvalues of a sparse symmetric matrix.

    LDL^T without pivoting via SuperLU in natural order; with the DOF layout
    of :class:`FemMesh` (edge interiors first) elimination creates fill only
    in the small vertex block.
    """
    K = sp.csc_matrix(K)
    n = K.shape[0]
    try:
        lu = spla.splu(K, permc_spec="NATURAL", diag_pivot_thresh=0.0, options={"SymmetricMode": True})
    except RuntimeError:
        lu = None
    if lu is not None and np.array_equal(lu.perm_r, np.arange(n)) and np.array_equal(lu.perm_c, np.arange(n)):
        d = lu.U.diagonal()
        if np.all(d != 0):
            return int(np.count_nonzero(d < 0))
    if n > DENSE_LIMIT:
        raise FemError("inertia count needs pivoting on a matrix above the dense limit")
    return int(np.count_nonzero(np.linalg.eigvalsh(K.toarray()) < 0))


def fem_count(g: MetricGraph, mesh: FemMesh, lam: float, margin: bool = True) -> int:
    """Number of discrete eigenvalues <= lam (+ 3 h^2 lam^2/12 when ``margin``).

    Because conforming P1 eigenvalues lie above the exact ones,
    ``fem_count(lam, margin=False)`` is a lower bound for the exact count and
    the margin version is an upper bound whenever the error estimate holds.
    """
    shift = lam
    if margin:
        shift = lam + 3.0 * mesh.error_scale(lam) + 1e-9 * max(1.0, abs(lam))
    A, B = fem_assemble(g, mesh)
    # counting "<= shift": nudge past a pivot that is exactly zero
    shift_up = shift + 1e-14 * max(1.0, abs(shift))
    return inertia_count((A - shift_up * B).tocsc())
