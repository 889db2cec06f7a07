"""Galerkin forward solver on the unit disk and DtN matrices in the harmonic basis.

Boundary data are the L^2(dtheta/2pi)-orthonormal harmonics f_{j,1} =
sqrt(2) cos(j theta), f_{j,-1} = sqrt(2) sin(j theta), f_{0,0} = 1.  DtN
entries are stored as the raw area pairing

    A[(j,p),(k,q)] = integral over D of gamma grad u_{jp} . grad u_{kq} dm,

which coincides with the pairing against the interpolated harmonic extension
P_{kq} by the Galerkin orthogonality, and is exactly symmetric.  For gamma = 1
the diagonal is c^2 pi j with c = sqrt(2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.spatial import Delaunay

from .conductivity import ConductivityField
from .errors import DegenerateLayers, DegreeTooHigh, ShapeMismatch, SolverFailure, SupportViolation

BASIS_NORMALIZATION = np.sqrt(2.0)  # orthonormal in L^2(dtheta / 2 pi)
PAIRING_TAG = "area-form-c-sqrt2"


# ---------------------------------------------------------------------------
# mesh

class DiskMesh:
    """Concentric-ring triangulation of the unit disk.

    Ring i of m carries 6i nodes at radius i/m (staggered on alternate
    rings); triangles come from the Delaunay triangulation of the node set.
    The boundary ring is ordered by angle.
    """

    __slots__ = ("m", "points", "triangles", "boundary", "interior", "_geom")

    def __init__(self, m: int):
        if m < 4:
            raise ValueError("refinement parameter m must be at least 4")
        pts = [(0.0, 0.0)]
        for i in range(1, m + 1):
            count = 6 * i
            offset = 0.5 * (i % 2)
            th = 2.0 * np.pi * (np.arange(count) + offset) / count
            r = i / m
            pts.extend(zip(r * np.cos(th), r * np.sin(th)))
        points = np.array(pts)
        tri = Delaunay(points)
        n_bd = 6 * m
        boundary = np.arange(len(points) - n_bd, len(points))
        order = np.argsort(np.arctan2(points[boundary, 1], points[boundary, 0]))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "triangles", np.array(tri.simplices))
        object.__setattr__(self, "boundary", boundary[order])
        interior = np.setdiff1d(np.arange(len(points)), boundary)
        object.__setattr__(self, "interior", interior)
        object.__setattr__(self, "_geom", None)
        if self.min_angle() < 20.0:
            raise ValueError(f"mesh quality violated: min angle {self.min_angle():.1f} deg")

    def __setattr__(self, name, value):
        raise AttributeError("DiskMesh is immutable")

    def geometry(self):
        """Per-element areas, centroids and P1 basis gradients, cached."""
        if self._geom is None:
            p = self.points[self.triangles]  # (T, 3, 2)
            e1 = p[:, 1] - p[:, 0]
            e2 = p[:, 2] - p[:, 0]
            det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
            area = 0.5 * np.abs(det)
            centroids = p.mean(axis=1)
            # grad of barycentric basis i: rotated opposite edge / det
            grads = np.empty((len(det), 3, 2))
            for i in range(3):
                a = p[:, (i + 1) % 3]
                b = p[:, (i + 2) % 3]
                grads[:, i, 0] = (a[:, 1] - b[:, 1]) / det
                grads[:, i, 1] = (b[:, 0] - a[:, 0]) / det
            object.__setattr__(self, "_geom", (area, centroids, grads))
        return self._geom

    def min_angle(self) -> float:
        p = self.points[self.triangles]
        angles = []
        for i in range(3):
            a = p[:, (i + 1) % 3] - p[:, i]
            b = p[:, (i + 2) % 3] - p[:, i]
            cosv = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            angles.append(np.degrees(np.arccos(np.clip(cosv, -1.0, 1.0))))
        return float(np.min(angles))

    def boundary_angles(self) -> np.ndarray:
        b = self.points[self.boundary]
        return np.arctan2(b[:, 1], b[:, 0])


@lru_cache(maxsize=8)
def disk_mesh(m: int) -> DiskMesh:
    return DiskMesh(m)


# ---------------------------------------------------------------------------
# conductivity sampling and assembly

def _gamma_on_elements(gamma, mesh: DiskMesh) -> np.ndarray:
    """Evaluate the coefficient at element centroids (evaluator preferred)."""
    _, centroids, _ = mesh.geometry()
    zc = centroids[:, 0] + 1j * centroids[:, 1]
    if gamma is None:
        return np.ones(len(zc))
    if isinstance(gamma, ConductivityField):
        if gamma.evaluator is not None:
            return np.asarray(gamma.evaluator(zc), dtype=float)
        g = gamma.gamma
        idx_x = np.clip(np.round((zc.real + g.grid.half_width) / g.grid.h).astype(int), 0, g.grid.n - 1)
        idx_y = np.clip(np.round((zc.imag + g.grid.half_width) / g.grid.h).astype(int), 0, g.grid.n - 1)
        return g.values.real[idx_x, idx_y]
    return np.asarray(gamma(zc), dtype=float)


def stiffness_matrix(gamma, mesh: DiskMesh) -> sp.csr_matrix:
    area, _, grads = mesh.geometry()
    ge = _gamma_on_elements(gamma, mesh)
    t = mesh.triangles
    rows, cols, vals = [], [], []
    for i in range(3):
        for j in range(3):
            rows.append(t[:, i])
            cols.append(t[:, j])
            vals.append(ge * area * np.sum(grads[:, i] * grads[:, j], axis=1))
    S = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(mesh.points), len(mesh.points)),
    )
    return S.tocsr()


def harmonic_trace(mesh: DiskMesh, j: int, p: int) -> np.ndarray:
    """Boundary nodal values of f_{jp} (c cos / c sin / 1)."""
    th = mesh.boundary_angles()
    if j == 0:
        return np.ones(len(th))
    c = BASIS_NORMALIZATION
    return c * np.cos(j * th) if p == 1 else c * np.sin(j * th)


def harmonic_extension_nodal(mesh: DiskMesh, j: int, p: int) -> np.ndarray:
    """Nodal interpolant of P_{jp}(r e^(i theta)) = r^j f_{jp}(e^(i theta))."""
    x, y = mesh.points[:, 0], mesh.points[:, 1]
    z = x + 1j * y
    if j == 0:
        return np.ones(len(z))
    c = BASIS_NORMALIZATION
    w = z**j
    return c * w.real if p == 1 else c * w.imag


class _FactorizedSolver:
    def __init__(self, gamma, mesh: DiskMesh):
        self.mesh = mesh
        self.S = stiffness_matrix(gamma, mesh)
        ii = mesh.interior
        self.lu = spla.splu(self.S[ii][:, ii].tocsc())

    def solve(self, boundary_values: np.ndarray) -> np.ndarray:
        mesh = self.mesh
        u = np.zeros(len(mesh.points))
        u[mesh.boundary] = boundary_values
        rhs = -(self.S[mesh.interior][:, mesh.boundary] @ boundary_values)
        u[mesh.interior] = self.lu.solve(rhs)
        ii = mesh.interior
        res = self.S[ii] @ u
        scale = max(np.linalg.norm(rhs), 1e-30)
        if np.linalg.norm(res) > 1e-10 * scale:
            raise SolverFailure(f"interior residual {np.linalg.norm(res) / scale:.2e}")
        return u


def solve_dirichlet(gamma, boundary_data, mesh: DiskMesh) -> np.ndarray:
    """P1 Galerkin solution with Dirichlet trace given by (j, p) or a nodal vector."""
    if isinstance(boundary_data, tuple):
        boundary_data = harmonic_trace(mesh, *boundary_data)
    return _FactorizedSolver(gamma, mesh).solve(np.asarray(boundary_data, dtype=float))


def gradient_norm(mesh: DiskMesh, u: np.ndarray, region=None) -> float:
    """L2 norm of the elementwise gradient, optionally over a disk region=(center, radius)."""
    area, centroids, grads = mesh.geometry()
    gu = np.einsum("tid,ti->td", grads, u[mesh.triangles])
    dens = np.sum(gu * gu, axis=1) * area
    if region is not None:
        center, radius = region
        zc = centroids[:, 0] + 1j * centroids[:, 1]
        dens = dens[np.abs(zc - center) <= radius]
    return float(np.sqrt(np.sum(dens)))


# ---------------------------------------------------------------------------
# DtN matrices

def basis_indices(N: int) -> list[tuple[int, int]]:
    out = [(0, 0)]
    for j in range(1, N + 1):
        out.append((j, 1))
        out.append((j, -1))
    return out


@dataclass(frozen=True)
class DtNMatrix:
    """Truncated DtN matrix in the boundary-harmonic basis, raw area pairing."""

    max_degree: int
    entries: np.ndarray
    pairing: str = PAIRING_TAG

    def index(self, j: int, p: int) -> int:
        return 0 if j == 0 else 2 * j - 1 + (0 if p == 1 else 1)

    def entry(self, j: int, p: int, k: int, q: int) -> float:
        return float(self.entries[self.index(j, p), self.index(k, q)])

    def normalized(self) -> np.ndarray:
        """Operator matrix in the orthonormal basis with the dtheta/2pi pairing."""
        return self.entries / (2.0 * np.pi)

    def to_json(self) -> str:
        return json.dumps(
            {
                "N": self.max_degree,
                "pairing": self.pairing,
                "entries": [[float(v) for v in row] for row in self.entries],
            },
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "DtNMatrix":
        obj = json.loads(text)
        return DtNMatrix(int(obj["N"]), np.array(obj["entries"]), obj["pairing"])


def max_resolvable_degree(mesh: DiskMesh) -> int:
    """At least 16 boundary vertices per wavelength of the highest degree."""
    return (6 * mesh.m) // 16


def dtn_matrix(gamma, N: int, mesh: DiskMesh) -> DtNMatrix:
    """Assemble the truncated DtN matrix of gamma by 2N+1 forward solves."""
    if N > max_resolvable_degree(mesh):
        raise DegreeTooHigh(
            f"degree {N} not resolvable on mesh m={mesh.m} (max {max_resolvable_degree(mesh)})"
        )
    solver = _FactorizedSolver(gamma, mesh)
    idx = basis_indices(N)
    sols = np.array([solver.solve(harmonic_trace(mesh, j, p)) for j, p in idx])
    entries = sols @ (solver.S @ sols.T)
    entries = 0.5 * (entries + entries.T)
    return DtNMatrix(N, entries)


def dtn_matrix_identity(N: int) -> DtNMatrix:
    """Analytic reference for gamma = 1: diagonal c^2 pi j in the area pairing."""
    idx = basis_indices(N)
    diag = [BASIS_NORMALIZATION**2 * np.pi * j if j > 0 else 0.0 for j, _ in idx]
    return DtNMatrix(N, np.diag(diag))


def exponential_difference_eigenvalue(A: DtNMatrix, A0: DtNMatrix, j: int) -> float:
    """Degree-j eigenvalue of Lambda - Lambda_0 in the exponential basis.

    For radial gamma this is the Steklov eigenvalue shift lambda_j - j
    (j m_j for the annulus family).
    """
    if A.max_degree != A0.max_degree or A.pairing != A0.pairing:
        raise ShapeMismatch("operands differ in degree or pairing")
    if j == 0:
        return float((A.entries[0, 0] - A0.entries[0, 0]) / (2.0 * np.pi))
    d = A.entries - A0.entries
    i1, i2 = A.index(j, 1), A.index(j, -1)
    return float((d[i1, i1] + d[i2, i2]) / (2.0 * np.pi * BASIS_NORMALIZATION**2))


def dtn_distance(A1: DtNMatrix, A2: DtNMatrix) -> float:
    """Spectral norm of W^(-1/2) (A1 - A2) W^(-1/2), W = diag(1 + j).

    Discretization of the H^(1/2) -> H^(-1/2) operator norm with the standard
    harmonic trace weight; equivalent weights change the value by fixed
    constants only.
    """
    if A1.max_degree != A2.max_degree or A1.pairing != A2.pairing:
        raise ShapeMismatch("operands differ in degree or pairing")
    w = np.array([1.0 + j for j, _ in basis_indices(A1.max_degree)])
    scale = 1.0 / np.sqrt(w)
    mat = (A1.normalized() - A2.normalized()) * scale[:, None] * scale[None, :]
    return float(np.linalg.norm(mat, 2))


# ---------------------------------------------------------------------------
# radial transfer-matrix oracle

def radial_dtn_oracle(radii, values, j: int) -> float:
    """Steklov eigenvalue lambda_j for a piecewise-constant radial conductivity.

    Layer i has conductivity values[i] on [radii[i-1], radii[i]); the
    outermost layer [radii[-1], 1] has conductivity 1.  Propagates
    (a, r a'/j) across layers with continuity of a and gamma a'.
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(radii) != len(values) or len(radii) == 0:
        raise DegenerateLayers("radii and values must be equal-length, nonempty")
    if np.any(np.diff(radii) <= 0) or radii[0] <= 0 or radii[-1] >= 1.0:
        raise DegenerateLayers("radii must increase strictly inside (0, 1)")
    if np.any(values <= 0):
        raise DegenerateLayers("layer conductivities must be positive")
    if j == 0:
        return 0.0
    gammas = np.concatenate([values, [1.0]])
    # innermost layer: a = r^j, state (u, w) = (a, r a'/j) at r = radii[0]
    u, w = 1.0, 1.0
    for i, r in enumerate(radii):
        w *= gammas[i] / gammas[i + 1]
        r_next = radii[i + 1] if i + 1 < len(radii) else 1.0
        ratio = (r_next / r) ** j
        alpha = 0.5 * (u + w) * ratio
        beta = 0.5 * (u - w) / ratio
        u, w = alpha + beta, alpha - beta
        scale = max(abs(u), abs(w), 1e-300)
        u, w = u / scale, w / scale
    return float(j * w / u)


def steklov_difference_oracle(radii, values, j: int) -> float:
    """lambda_j(gamma) - j for the radial oracle (j m_j for the annulus family)."""
    return radial_dtn_oracle(radii, values, j) - float(j)


def radial_profile(radii, values, j: int, rs) -> np.ndarray:
    """Mode-j radial factor a(r), normalized to a(1) = 1, for layered conductivities.

    The forward solution with boundary data f_{j,p} is a(r) f_{jp}(e^(i theta)).
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    rs = np.asarray(rs, dtype=float)
    if j == 0:
        return np.ones_like(rs)
    gammas = np.concatenate([values, [1.0]])
    edges = np.concatenate([radii, [1.0]])
    # coefficient pairs (alpha_i, beta_i) per layer with a = alpha r^j + beta r^-j
    coeffs = [(1.0, 0.0)]
    u = w = radii[0] ** j  # state (a, r a'/j) of the innermost a = r^j
    for i, r in enumerate(radii):
        w *= gammas[i] / gammas[i + 1]
        alpha = 0.5 * (u + w) / r**j
        beta = 0.5 * (u - w) * r**j
        coeffs.append((alpha, beta))
        r_next = edges[i + 1]
        u = alpha * r_next**j + beta * r_next ** (-j)
        w = alpha * r_next**j - beta * r_next ** (-j)
    a1 = u
    out = np.empty_like(rs)
    for idx, r in enumerate(rs):
        layer = int(np.searchsorted(edges, r, side="right"))
        layer = min(layer, len(coeffs) - 1)
        alpha, beta = coeffs[layer]
        out[idx] = alpha * r**j + (beta * r ** (-j) if r > 0 else 0.0)
    return out / a1


def oracle_dtn_matrix(radii, values, N: int) -> DtNMatrix:
    """DtN matrix of a radial conductivity from the per-mode oracle (exact per mode)."""
    idx = basis_indices(N)
    diag = []
    for j, _ in idx:
        lam = radial_dtn_oracle(radii, values, j) if j > 0 else 0.0
        diag.append(BASIS_NORMALIZATION**2 * np.pi * lam if j > 0 else 0.0)
    return DtNMatrix(N, np.diag(diag))


# ---------------------------------------------------------------------------
# locality bound of the DtN pairing

def compare_lambdas_bound(gamma1, gamma2, U, f1, f2, mesh: DiskMesh) -> tuple[float, float]:
    """|<(Lambda_1 - Lambda_2) f_1, f_2>| against ||grad u_2||_{L2(U)} ||grad F||_{L2(D)}.

    U = (center, radius) must contain the support of gamma_1 - gamma_2 at the
    element centroids; f1, f2 are (j, p) basis indices.  Returns both sides;
    the experiment layer fits the single constant.
    """
    g1 = _gamma_on_elements(gamma1, mesh)
    g2 = _gamma_on_elements(gamma2, mesh)
    _, centroids, _ = mesh.geometry()
    zc = centroids[:, 0] + 1j * centroids[:, 1]
    center, radius = U
    outside = np.abs(zc - center) > radius
    if np.max(np.abs(g1 - g2)[outside], initial=0.0) > 1e-12:
        raise SupportViolation("gamma_1 - gamma_2 is not supported in U")
    S1 = stiffness_matrix(gamma1, mesh)
    S2 = stiffness_matrix(gamma2, mesh)
    u1 = solve_dirichlet(gamma1, f1, mesh)
    u2 = solve_dirichlet(gamma2, f1, mesh)
    F = harmonic_extension_nodal(mesh, *f2)
    lhs = abs(u1 @ (S1 @ F) - u2 @ (S2 @ F))
    rhs = gradient_norm(mesh, u2, region=U) * gradient_norm(mesh, F)
    return float(lhs), float(rhs)
