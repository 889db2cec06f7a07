"""Complex geometric optics solutions and the scattering transform.

The CGOS f(z, k) = e^{ikz} M(z, k) solves dbar f = mu conj(d f); its Jost
function M comes out of a masked real-linear Krylov solve.  The scattering
transform tau(k) couples the +mu and -mu solves and drives the transport
equation d_kbar u = -i tau conj(u).
"""

import numpy as np

from calderonlab import cgos as CG
from calderonlab import grid as G
from calderonlab import scattering as SC
from calderonlab.conductivity import family_bump, gamma_to_mu, radial_stretch, radial_stretch_mu

g = G.Grid(256, 4.0)

# the principal solution of the radial-stretch coefficient has a closed form
mu_rs = radial_stretch_mu(g, 2.0)
f, resid, its = CG.solve_principal(mu_rs)
phi = radial_stretch(2.0)(g.nodes())
r = np.abs(g.nodes())
print(f"principal solution: {its} iterations, residual {resid:.1e}, "
      f"sup err vs closed form {np.max(np.abs(f.values - phi)[r <= 2.9]):.2e}")

cond = family_bump(g, 0.8, 0.8)
mu = gamma_to_mu(cond).mu

for k in (1.0, 4.0, 16.0):
    rec = CG.solve_cgos(mu, k)
    phi_k, info = CG.phi_from_cgos(rec)
    sup = np.max(np.abs(phi_k.values - g.nodes())[r <= 1.5])
    print(f"k={k}: {rec.iterations} Krylov iters, residual {rec.residual:.1e}, "
          f"||phi - id|| {sup:.3f}, exp-defect {info['exp_defect']:.1e}")

# scattering transform and the transport equation
print("tau along the positive real axis:")
for k in (0.5, 1.0, 2.0, 4.0):
    print(f"  tau({k}) = {SC.tau(mu, k):.5f}")
res = SC.transport_residual(cond, 1.0, 1e-2)
print(f"transport-equation residual at k=1, dk=1e-2: {res:.2e}")

# the conductivity CGOS combines the +mu and -mu Beltrami solutions
u, rp, rm = CG.u_gamma(cond, 1.0)
print("weak conductivity residual of u_gamma:",
      CG.conductivity_weak_residual(cond, rp, rm))
