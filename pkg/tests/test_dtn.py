"""Forward solver, DtN assembly and the radial transfer-matrix oracle."""

import numpy as np
import pytest

from calderonlab import dtn as D
from calderonlab import grid as G
from calderonlab.conductivity import family_bump, family_gamma_R, m_x
from calderonlab.errors import DegenerateLayers, DegreeTooHigh, ShapeMismatch, SupportViolation


@pytest.fixture(scope="module")
def grid():
    return G.Grid(256, 4.0)


@pytest.fixture(scope="module")
def gamma_half(grid):
    return family_gamma_R(grid, 0.5)


def test_mesh_invariants():
    for m in (8, 16, 48):
        mesh = D.disk_mesh(m)
        b = mesh.points[mesh.boundary]
        assert np.max(np.abs(np.hypot(b[:, 0], b[:, 1]) - 1.0)) < 1e-12
        assert mesh.min_angle() >= 20.0
        th = mesh.boundary_angles()
        assert np.all(np.diff(th) > 0)  # ordered by angle
        # conforming: triangle areas tile the polygon area
        area, _, _ = mesh.geometry()
        n_bd = 6 * m
        polygon = 0.5 * n_bd * np.sin(2 * np.pi / n_bd)
        assert np.sum(area) == pytest.approx(polygon, rel=1e-12)


def test_solve_harmonic_extension_convergence():
    """gamma = 1 with harmonic data: nodal error against c r^j cos(j theta), order ~2."""
    j = 3
    errs = []
    for m in (8, 16, 32):
        mesh = D.disk_mesh(m)
        u = D.solve_dirichlet(None, (j, 1), mesh)
        exact = D.harmonic_extension_nodal(mesh, j, 1)
        errs.append(np.max(np.abs(u - exact)))
    order1 = np.log2(errs[0] / errs[1])
    order2 = np.log2(errs[1] / errs[2])
    assert order1 > 1.5 and order2 > 1.5


def test_solve_constant_mode():
    mesh = D.disk_mesh(16)
    u = D.solve_dirichlet(None, (0, 0), mesh)
    assert np.max(np.abs(u - 1.0)) < 1e-12


def test_solve_matches_radial_profile_oracle():
    mesh = D.disk_mesh(48)
    radii, values = [0.25, 0.5], [1.0, 3.0]
    cond = {"radii": radii, "values": values}

    def gamma(z):
        a = np.abs(z)
        out = np.ones_like(a, dtype=float)
        out[(a >= 0.25) & (a < 0.5)] = 3.0
        return out

    j = 2
    u = D.solve_dirichlet(gamma, (j, 1), mesh)
    pts = mesh.points
    r = np.hypot(pts[:, 0], pts[:, 1])
    th = np.arctan2(pts[:, 1], pts[:, 0])
    prof = D.radial_profile(radii, values, j, r)
    exact = D.BASIS_NORMALIZATION * prof * np.cos(j * th)
    rel = np.max(np.abs(u - exact)) / np.max(np.abs(exact))
    assert rel <= 1e-2


def test_dtn_identity_matrix(grid):
    mesh = D.disk_mesh(32)
    A = D.dtn_matrix(None, 6, mesh)
    A0 = D.dtn_matrix_identity(6)
    c2pi = D.BASIS_NORMALIZATION**2 * np.pi
    assert abs(A.entry(0, 0, 0, 0)) < 1e-10 * c2pi
    for j in range(1, 7):
        for p in (1, -1):
            assert A.entry(j, p, j, p) == pytest.approx(c2pi * j, rel=1e-3)
    off = A.entries - np.diag(np.diag(A.entries))
    assert np.max(np.abs(off)) <= 1e-3 * np.max(np.diag(A.entries))
    # the analytic reference is exactly diagonal
    assert np.max(np.abs(A0.entries - np.diag(np.diag(A0.entries)))) == 0.0


def test_dtn_symmetry(gamma_half):
    A = D.dtn_matrix(gamma_half, 6, D.disk_mesh(32))
    assert np.max(np.abs(A.entries - A.entries.T)) <= 1e-8 * np.max(np.abs(A.entries))


def test_dtn_gamma_R_difference_eigenvalue(gamma_half):
    mesh = D.disk_mesh(48)
    A = D.dtn_matrix(gamma_half, 6, mesh)
    A0 = D.dtn_matrix(None, 6, mesh)
    got = D.exponential_difference_eigenvalue(A, A0, 1)
    assert got == pytest.approx(m_x(0.5, 1.0), rel=1e-2)  # 0.2222...


def test_dtn_entry_decay(gamma_half):
    """log |diagonal difference entry| vs j decays at least like log r0 + 0.1."""
    mesh = D.disk_mesh(48)
    A = D.dtn_matrix(gamma_half, 6, mesh)
    A0 = D.dtn_matrix(None, 6, mesh)
    eig = [abs(D.exponential_difference_eigenvalue(A, A0, j)) for j in range(1, 7)]
    slope = np.polyfit(np.arange(1, 7), np.log(eig), 1)[0]
    assert slope <= np.log(0.5) + 0.1


def test_dtn_degree_guard(gamma_half):
    with pytest.raises(DegreeTooHigh):
        D.dtn_matrix(gamma_half, 12, D.disk_mesh(16))


def test_dtn_distance(gamma_half):
    mesh = D.disk_mesh(48)
    A = D.dtn_matrix(gamma_half, 8, mesh)
    A0 = D.dtn_matrix(None, 8, mesh)
    assert D.dtn_distance(A, A) == 0.0
    rho = D.dtn_distance(A, A0)
    assert rho > 0
    # stability under mesh refinement
    mesh2 = D.disk_mesh(96)
    rho2 = D.dtn_distance(D.dtn_matrix(gamma_half, 8, mesh2), D.dtn_matrix(None, 8, mesh2))
    assert abs(rho2 - rho) <= 0.05 * rho
    # monotone in the truncation degree (sup over nested spaces)
    rhos = []
    for N in (2, 4, 8):
        rhos.append(D.dtn_distance(D.dtn_matrix(gamma_half, N, mesh), D.dtn_matrix(None, N, mesh)))
    assert rhos[0] <= rhos[1] * (1 + 1e-12) and rhos[1] <= rhos[2] * (1 + 1e-12)
    with pytest.raises(ShapeMismatch):
        D.dtn_distance(A, D.dtn_matrix(gamma_half, 4, mesh))


def test_radial_oracle():
    assert D.radial_dtn_oracle([0.5], [1.0], 3) == pytest.approx(3.0, rel=1e-14)
    assert D.radial_dtn_oracle([0.25, 0.5], [1.0, 3.0], 1) == pytest.approx(
        1.0 + m_x(0.5, 1.0), rel=1e-12
    )
    for j in (1, 2, 4):
        lam = D.radial_dtn_oracle([0.0004, 0.02], [1.0, 3.0], j)  # R = 0.02
        assert abs(lam - j) < 1e-2 * j
    with pytest.raises(DegenerateLayers):
        D.radial_dtn_oracle([], [], 1)
    with pytest.raises(DegenerateLayers):
        D.radial_dtn_oracle([0.5, 0.25], [1.0, 2.0], 1)
    with pytest.raises(DegenerateLayers):
        D.radial_dtn_oracle([0.5], [-2.0], 1)


def test_oracle_matrix_matches_fem(gamma_half):
    mesh = D.disk_mesh(96)
    A = D.dtn_matrix(gamma_half, 6, mesh)
    A0 = D.dtn_matrix(None, 6, mesh)
    O = D.oracle_dtn_matrix([0.25, 0.5], [1.0, 3.0], 6)
    O0 = D.dtn_matrix_identity(6)
    assert D.dtn_distance(A, A0) == pytest.approx(D.dtn_distance(O, O0), rel=1e-2)


def test_compare_lambdas_bound(grid, gamma_half):
    mesh = D.disk_mesh(32)
    lhs, rhs = D.compare_lambdas_bound(gamma_half, gamma_half, (0.0, 0.6), (1, 1), (1, 1), mesh)
    assert lhs == 0.0
    lhs, rhs = D.compare_lambdas_bound(gamma_half, None, (0.0, 0.55), (1, 1), (1, 1), mesh)
    assert lhs > 0 and lhs <= 3.0 * rhs  # C_K fitted by the experiment layer
    with pytest.raises(SupportViolation):
        D.compare_lambdas_bound(gamma_half, None, (0.0, 0.3), (1, 1), (1, 1), mesh)


def test_compare_lambdas_shrinking_support(grid):
    mesh = D.disk_mesh(32)
    rows = []
    for radius in (0.6, 0.4, 0.2):
        cond = family_bump(grid, 1.0, radius)
        rows.append(D.compare_lambdas_bound(cond, None, (0.0, radius + 0.05), (1, 1), (1, 1), mesh))
    lhs = [r[0] for r in rows]
    rhs = [r[1] for r in rows]
    assert lhs[0] > lhs[1] > lhs[2]
    assert rhs[0] > rhs[1] > rhs[2]


def test_dtn_json_roundtrip(gamma_half):
    A = D.dtn_matrix(gamma_half, 4, D.disk_mesh(16))
    B = D.DtNMatrix.from_json(A.to_json())
    assert B.max_degree == A.max_degree
    assert B.pairing == A.pairing
    assert np.array_equal(B.entries, A.entries)
