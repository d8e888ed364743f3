import math

import numpy as np
import pytest

from qgs.catalog import interval, loop, star
from qgs.fem import FemError, FemMesh, build_mesh, fem_assemble, fem_count, fem_eigenvalues, mesh_per_wavelength
from qgs.graph import DIRICHLET, PotentialSpec
from qgs.secular import eigenvalues

from conftest import robin_k


def test_two_element_textbook_matrices():
    g = interval()
    mesh = FemMesh(g, (2,), strict=False)
    A, B = fem_assemble(g, mesh)
    h = 0.5
    # DOF order: interior node, then v0, v1
    order = [1, 0, 2]
    A = A.toarray()[np.ix_(order, order)]
    B = B.toarray()[np.ix_(order, order)]
    assert np.allclose(A, np.array([[1, -1, 0], [-1, 2, -1], [0, -1, 1]]) / h, atol=1e-14)
    assert np.allclose(B, h / 6 * np.array([[2, 1, 0], [1, 4, 1], [0, 1, 2]]), atol=1e-15)


def test_sigma_enters_vertex_diagonal_exactly():
    g1 = star(2, sigma_center=1.0)
    g0 = g1.neumann()
    mesh = build_mesh(g1)
    A1, _ = fem_assemble(g1, mesh)
    A0, _ = fem_assemble(g0, build_mesh(g0))
    diff = (A1 - A0).toarray()
    c = mesh.vertex_dofs[0]
    assert diff[c, c] == 1.0
    diff[c, c] = 0.0
    assert np.abs(diff).max() == 0.0


def test_constant_potential_is_mass_shift():
    g = interval(1.3, potential=PotentialSpec.constant(2.7))
    mesh = build_mesh(g)
    A, B = fem_assemble(g, mesh)
    A0, _ = fem_assemble(g.free(), build_mesh(g.free()))
    assert np.abs((A - A0 - 2.7 * B).toarray()).max() < 1e-12


def test_symmetric(test_graph):
    _, g = test_graph
    A, B = fem_assemble(g, build_mesh(g))
    assert abs(A - A.T).max() < 1e-12 and abs(B - B.T).max() < 1e-12


def test_neumann_interval_order_two():
    g = interval()
    exact = (np.arange(5) * math.pi) ** 2
    errs = []
    for n in (40, 80, 160):
        errs.append(np.abs(fem_eigenvalues(g, FemMesh(g, (n,)), 5) - exact)[1:])
    rates = np.log2(errs[0] / errs[1]), np.log2(errs[1] / errs[2])
    assert np.all(np.abs(np.array(rates) - 2.0) < 0.05)


def test_richardson_neumann_interval():
    g = interval()
    vals = fem_eigenvalues(g, FemMesh(g, (200,)), 5, richardson=True)
    assert np.allclose(vals, (np.arange(5) * math.pi) ** 2, rtol=1e-6, atol=1e-9)


def test_robin_ground_state():
    g = interval(sigma=(1.0, 0.0))
    lam = fem_eigenvalues(g, FemMesh(g, (200,)), 1, richardson=True)[0]
    assert lam == pytest.approx(robin_k(1.0, 1) ** 2, rel=1e-8)
    assert lam == pytest.approx(0.74017, abs=1e-5)


def test_loop_pairs():
    g = loop()
    vals = fem_eigenvalues(g, FemMesh(g, (400,)), 5)
    assert vals[1] == pytest.approx(vals[2], rel=1e-10)
    assert vals[3] == pytest.approx(vals[4], rel=1e-10)
    assert vals[1] == pytest.approx(math.pi**2, rel=1e-4)


def test_counts():
    g = interval()
    mesh = build_mesh(g, 1e-2)
    assert fem_count(g, mesh, 10.0) == 2
    assert fem_count(g, mesh, -1.0) == 0
    s = star(2, sigma_center=1.0)
    sec = eigenvalues(s, cutoff=50.0)
    assert fem_count(s, build_mesh(s, 1e-2), 50.0) == len(sec)


def test_strict_mesh_invariant():
    with pytest.raises(FemError, match="exceeds"):
        FemMesh(interval(), (2,))
    assert build_mesh(star(3)).h <= 1.0 / 8


def test_dirichlet_elimination():
    g = interval().with_sigma([DIRICHLET, DIRICHLET])
    vals = fem_eigenvalues(g, FemMesh(g, (400,)), 3, richardson=True)
    assert np.allclose(vals, (np.arange(1, 4) * math.pi) ** 2, rtol=1e-7)
    with pytest.raises(FemError, match="no degrees of freedom"):
        FemMesh(g, (1,), strict=False)


def test_upper_bound_and_refinement_monotone(test_graph):
    _, g = test_graph
    sec = eigenvalues(g, 20).values[:20]
    mesh = mesh_per_wavelength(g, sec[-1], 8)
    coarse = fem_eigenvalues(g, mesh, 20)
    fine = fem_eigenvalues(g, mesh.refined(), 20)
    assert np.all(coarse >= sec - 1e-8 * np.maximum(1, np.abs(sec)))
    assert np.all(fine <= coarse + 1e-10 * np.maximum(1, np.abs(coarse)))


def test_oracle_agreement_with_error_scale(test_graph):
    _, g = test_graph
    sec = eigenvalues(g, 30).values[:30]
    mesh = mesh_per_wavelength(g, sec[-1], 16)
    fe = fem_eigenvalues(g, mesh, 30)
    assert np.all(np.abs(fe - sec) <= np.maximum(1e-6, 3 * mesh.h**2 * sec**2))
    rich = fem_eigenvalues(g, mesh_per_wavelength(g, sec[-1], 32), 30, richardson=True)
    assert np.all(np.abs(rich - sec) <= 1e-4 * np.maximum(1.0, np.abs(sec)))
