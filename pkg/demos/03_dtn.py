"""Forward Dirichlet problem on the disk and DtN matrices.

For the annulus conductivity 1 + 2 chi_{R D \\ R^2 D} the difference
spectrum has the closed form j m_j with m_x = 4(R^2x - R^4x)/(4 - 3R^2x +
2R^4x); the FEM assembly reproduces it at second order in the mesh, and the
radial transfer-matrix oracle reproduces it to machine precision.
"""

from calderonlab import dtn as D
from calderonlab import grid as G
from calderonlab.conductivity import family_gamma_R, m_x

g = G.Grid(256, 4.0)
cond = family_gamma_R(g, 0.5)

print("transfer-matrix oracle vs closed form:")
for j in (1, 2, 3, 6):
    got = D.steklov_difference_oracle([0.25, 0.5], [1.0, 3.0], j)
    print(f"  j={j}: oracle {got:.10f}   j m_j {j * m_x(0.5, j):.10f}")

print("FEM difference eigenvalues (mesh refinement):")
for m in (24, 48, 96):
    mesh = D.disk_mesh(m)
    A = D.dtn_matrix(cond, 6, mesh)
    A0 = D.dtn_matrix(None, 6, mesh)
    errs = [
        abs(D.exponential_difference_eigenvalue(A, A0, j) - j * m_x(0.5, j))
        for j in range(1, 7)
    ]
    print(f"  m={m}: max abs err {max(errs):.2e}")

mesh = D.disk_mesh(48)
A = D.dtn_matrix(cond, 8, mesh)
A0 = D.dtn_matrix(None, 8, mesh)
print("weighted DtN distance rho(gamma_R, 1):", D.dtn_distance(A, A0))

# locality of the pairing: the difference is controlled through the
# perturbation region U
lhs, rhs = D.compare_lambdas_bound(cond, None, (0.0, 0.55), (1, 1), (1, 1), mesh)
print(f"pairing bound: lhs {lhs:.4f} <= C * {rhs:.4f}")
