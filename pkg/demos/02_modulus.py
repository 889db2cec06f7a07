"""Integral moduli of continuity as a regularity gauge.

The modulus omega_p f(t) = sup_{|y|<=t} ||f - tau_y f||_p distinguishes jump
fields (omega_2 ~ sqrt(t)), Lipschitz bumps (~t) and Holder fields (~t^s).
"""

from calderonlab import grid as G
from calderonlab import modulus as M
from calderonlab.conductivity import family_bump, family_gamma_R, family_holder

g = G.Grid(512, 4.0)

fields = {
    "disk indicator  ": G.disk_indicator(g),
    "gamma_R annulus  ": G.GridField(g, family_gamma_R(g, 0.5).gamma.values - 1.0),
    "smooth bump      ": G.GridField(g, family_bump(g, 0.8, 0.8).gamma.values - 1.0),
    "holder s=0.5 fan ": G.GridField(g, family_holder(g, 0.5, seed=1).gamma.values - 1.0),
}

for name, f in fields.items():
    curve = M.modulus_curve(f, 2.0, t_max=1.0)
    slope = curve.fitted_slope(4 * g.h, 0.25)
    print(f"{name} omega_2 slope ~ {slope:.2f}   curve:",
          " ".join(f"{v:.3f}" for v in curve.values()))

# membership in the a priori class: ellipticity + support + modulus bound
cond = family_holder(g, 0.5, seed=1, K=2.0)
report = M.check_membership(
    cond.gamma, 2.0, M.ModulusSpec.power(0.5, 2.0), K=2.0, support_radius=0.9
)
print("holder member of G(2, 0.9D, 2, 2 t^0.5)?", report.ok)

# the Fourier tail lemma: high-frequency mass is controlled by the modulus
chi = G.disk_indicator(g)
for R in (4.0, 8.0, 16.0):
    lhs, rhs = M.fourier_tail_check(chi, 2.0, R)
    print(f"tail R={R}: ||fhat||_tail={lhs:.3f}  omega_2(1/R)={rhs:.3f}  ratio {lhs/rhs:.2f}")
