"""Beltrami solvers: principal solution, the parameterized linear equation and CGOS.

The nonlinear CGOS f(z, k) = exp(ikz) M(z, k) is obtained from the real-linear
integral equation for h = dbar M,

    h = nu conj(B h) - i conj(k) nu conj(C h) - i conj(k) nu,
    nu = mu e_{-k},

derived by substituting the exponential ansatz into dbar f = mu conj(d f).
The unknown is supported in supp(mu), so the Krylov iteration runs on the
masked vector (real/imaginary split); B and C act through the truncated
kernel symbols, which are alias-free for disk-supported data evaluated where
|z| <= 3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .conductivity import BeltramiField, ConductivityField, gamma_to_mu
from .errors import NoConvergence, UnsupportedSupport, ZeroFrequency, ZeroOnGrid
from .grid import (
    SUPPORT_TOL,
    Grid,
    GridField,
    _beurling_symbol,
    _cauchy_symbol,
    _d_cauchy_symbol,
    _fft_raw,
    _ifft_raw,
    _pad_values,
    cauchy_with_derivatives,
    lp_norm,
    modulation_field,
    relative_mass_outside,
    smooth_bump_derivatives,
)


class DiskTransforms:
    """Zero-padded Cauchy/Beurling application for disk-supported data.

    All solver stages share these symbols, so the reported residuals refer to
    the same discrete operators that produced the fields.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self.n2 = 2 * grid.n
        self.L2 = 2 * grid.half_width
        self.c_sym = _cauchy_symbol(self.n2, self.L2)
        self.b_sym = _d_cauchy_symbol(self.n2, self.L2)
        self.sl = slice(grid.n // 2, grid.n // 2 + grid.n)

    def cauchy_beurling(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        F = _fft_raw(_pad_values(values, self.grid.n), self.n2, self.L2)
        sl = self.sl
        c = _ifft_raw(self.c_sym * F, self.n2, self.L2)[sl, sl]
        b = _ifft_raw(self.b_sym * F, self.n2, self.L2)[sl, sl]
        return c, b

    def beurling(self, values: np.ndarray) -> np.ndarray:
        F = _fft_raw(_pad_values(values, self.grid.n), self.n2, self.L2)
        return _ifft_raw(self.b_sym * F, self.n2, self.L2)[self.sl, self.sl]

    def cauchy(self, values: np.ndarray) -> np.ndarray:
        F = _fft_raw(_pad_values(values, self.grid.n), self.n2, self.L2)
        return _ifft_raw(self.c_sym * F, self.n2, self.L2)[self.sl, self.sl]


def _mu_values(mu) -> tuple[Grid, np.ndarray]:
    if isinstance(mu, BeltramiField):
        return mu.grid, mu.mu.values
    if isinstance(mu, ConductivityField):
        raise TypeError("pass a Beltrami coefficient, not a conductivity (use gamma_to_mu)")
    return mu.grid, mu.values


def _apply_symbol(values, symbol, n, L):
    return _ifft_raw(symbol * _fft_raw(values, n, L), n, L)


# ---------------------------------------------------------------------------
# principal solution and the linear psi_k equation share one Neumann loop

def _neumann_dbar(coef, grid, tol, max_iter, apply_B) -> tuple[np.ndarray, int]:
    """Fixed point h = coef * B h + coef; geometric with rate sup|coef| * ||B||."""
    h = np.array(coef)
    delta = np.inf
    for it in range(1, max_iter + 1):
        h_new = coef * apply_B(h) + coef
        delta = np.linalg.norm(h_new - h) * grid.h
        h = h_new
        if delta <= tol:
            return h, it
    raise NoConvergence("Neumann iteration did not reach tolerance", residual=delta, iterations=max_iter)


def solve_principal(
    mu, *, tol: float = 1e-10, max_iter: int = 500, support_radius: float = 1.0
) -> tuple[GridField, float, int]:
    """Principal solution f = z + C(dbar f) with dbar f = (I - mu B)^(-1) mu.

    mu may be any complex-valued coefficient field with sup |mu| < 1 supported
    in the disk of ``support_radius``; returns (f, residual, iterations) where
    the residual is the relative L2(2D) defect of dbar f = mu d f.  All
    operators act through the zero-padded truncated kernel, so f agrees with
    the true principal map wherever |z| < 4 - support_radius; sup-norm
    comparisons restrict to that region (the maximum principle puts the
    supremum inside the coefficient support anyway).
    """
    grid, m = _mu_values(mu)
    kappa = float(np.max(np.abs(m)))
    if kappa >= 1.0:
        raise ValueError("need sup |mu| < 1")
    probe = GridField(grid, m, check_finite=False)
    if relative_mass_outside(probe, support_radius + grid.h) > SUPPORT_TOL:
        raise UnsupportedSupport(f"mu must be supported in the disk of radius {support_radius}")
    tr = DiskTransforms(grid)
    h, iterations = _neumann_dbar(m, grid, tol, max_iter, tr.beurling)
    c, dc = tr.cauchy_beurling(h)
    Z = grid.nodes()
    f = GridField(grid, Z + c, check_finite=False)
    df = 1.0 + dc
    defect = h - m * df
    mask = np.abs(Z) <= 2.0
    residual = float(
        np.sqrt(np.sum(np.abs(defect[mask]) ** 2) / np.sum(np.abs(df[mask]) ** 2))
    )
    return f, residual, iterations


@dataclass(frozen=True)
class NeumannDiagnostics:
    """Per-term norms and tail of the modulated Neumann series at one (nu, k)."""

    truncation: int
    kappa: float
    term_l2_norms: tuple[float, ...]
    tail_l2_norm: float
    partial_sum: GridField
    tail: GridField
    iterations: int

    def tail_bound(self, s: float = 2.0) -> float:
        """Closed-form tail bound kappa pi^(1/s) (kappa ||B||)^(N+1) / (1 - kappa ||B||), ||B||_2 = 1."""
        k = self.kappa
        return k * np.pi ** (1.0 / s) * k ** (self.truncation + 1) / (1.0 - k)

    def partial_sum_bound(self, s: float = 2.0) -> float:
        k = self.kappa
        return k * np.pi ** (1.0 / s) / (1.0 - k)

    def term_bound(self, n: int, s: float = 2.0) -> float:
        k = self.kappa
        return k ** (n + 1) * np.pi ** (1.0 / s)


def solve_linear_psi(
    nu,
    k: complex,
    truncation: int = 10,
    *,
    tol: float = 1e-10,
    max_iter: int = 500,
    support_radius: float = 1.0,
) -> tuple[GridField, NeumannDiagnostics]:
    """Quasiconformal solution of dbar psi = -(conj(k)/k) e_{-k} nu d psi, psi - z -> 0.

    Returns psi together with the Neumann-series diagnostics: the terms
    G_{n,k} = (-conj(k)/k)^(n+1) e_{-(n+1)k} f_n for n <= truncation (the
    partial sum g_k) and the remainder h_k obtained by iterating to
    convergence.  The plain multiplier Beurling transform is used throughout
    so that ||B||_2 = 1 holds exactly and the closed-form bounds apply
    verbatim to the discrete objects.
    """
    if k == 0:
        raise ZeroFrequency("the linear equation is parameterized by k != 0")
    grid, nu_vals = _mu_values(nu)
    kappa = float(np.max(np.abs(nu_vals)))
    if kappa >= 1.0:
        raise ValueError("need sup |nu| < 1")
    coef = -(np.conj(k) / k) * modulation_field(grid, -k) * nu_vals
    n, L = grid.n, grid.half_width
    symbol = _beurling_symbol(n, L)
    h_full, iterations = _neumann_dbar(
        coef, grid, tol, max_iter, lambda v: _apply_symbol(v, symbol, n, L)
    )
    # partial sums of the same fixed point reproduce the G_n identity
    term = np.array(coef)  # G_0
    partial = np.array(term)
    norms = [float(np.linalg.norm(term) * grid.h)]
    for _ in range(truncation):
        term = coef * _apply_symbol(term, symbol, n, L)
        partial += term
        norms.append(float(np.linalg.norm(term) * grid.h))
    tail = h_full - partial
    c, _, _ = cauchy_with_derivatives(
        GridField(grid, h_full, check_finite=False), support_radius=support_radius
    )
    psi = GridField(grid, grid.nodes() + c.values, check_finite=False)
    diag = NeumannDiagnostics(
        truncation=truncation,
        kappa=kappa,
        term_l2_norms=tuple(norms),
        tail_l2_norm=float(np.linalg.norm(tail) * grid.h),
        partial_sum=GridField(grid, partial, check_finite=False),
        tail=GridField(grid, tail, check_finite=False),
        iterations=iterations,
    )
    return psi, diag


def neumann_terms(nu, k: complex, count: int) -> list[np.ndarray]:
    """The fields f_n of the recursion f_n = nu T_n f_{n-1}, T_n = e_{nk} B e_{-nk}.

    Exposed for the tail experiment; f_n relates to the series term by
    G_{n,k} = (-conj(k)/k)^(n+1) e_{-(n+1)k} f_n, so the L^p norms agree.
    """
    grid, nu_vals = _mu_values(nu)
    n, L = grid.n, grid.half_width
    symbol = _beurling_symbol(n, L)
    out = [np.array(nu_vals)]
    for m in range(1, count + 1):
        e_plus = modulation_field(grid, m * k)
        f_prev = out[-1]
        out.append(nu_vals * (e_plus * _apply_symbol(np.conj(e_plus) * f_prev, symbol, n, L)))
    return out


# ---------------------------------------------------------------------------
# nonlinear CGOS

@dataclass(frozen=True)
class CGOSRecord:
    """Converged CGOS at one (mu, k): Jost function M, f = e^(ikz) M, diagnostics."""

    k: complex
    M: GridField
    f: GridField
    h: GridField  # dbar M, supported in supp mu
    dM: GridField  # d M
    residual: float
    iterations: int
    converged: bool
    method: str

    @property
    def grid(self) -> Grid:
        return self.M.grid


def _cgos_linear_operator(nu_vals, k, grid, mask, tr: DiskTransforms):
    """Masked real-linear map h -> h - nu conj(Bh) + i conj(k) nu conj(Ch)."""
    nu_m = nu_vals[mask]
    ik_bar = 1j * np.conj(k)
    size = int(mask.sum())

    def matvec_complex(h_m):
        full = np.zeros(grid.shape, dtype=np.complex128)
        full[mask] = h_m
        Ch, Bh = tr.cauchy_beurling(full)
        return h_m - nu_m * np.conj(Bh[mask]) + ik_bar * nu_m * np.conj(Ch[mask])

    def matvec(x):
        h_m = x[:size] + 1j * x[size:]
        out = matvec_complex(h_m)
        return np.concatenate([out.real, out.imag])

    op = spla.LinearOperator((2 * size, 2 * size), matvec=matvec, dtype=np.float64)
    return op, nu_m, size


def solve_cgos(
    mu,
    k: complex,
    *,
    tol: float = 1e-9,
    max_iter: int = 600,
    method: str = "auto",
    initial: np.ndarray | None = None,
) -> CGOSRecord:
    """CGOS of the Beltrami equation dbar f = mu conj(d f) with f = e^(ikz)(1 + O(1/z)).

    method 'gmres' solves the real-linear system with a Krylov iteration,
    'fixed-point' iterates the contraction (reliable for small kappa (1+|k|)),
    'auto' picks GMRES except at k = 0 where f = 1 identically.
    """
    grid, mu_vals = _mu_values(mu)
    kappa = float(np.max(np.abs(mu_vals)))
    if kappa >= 1.0:
        raise ValueError("need sup |mu| < 1")
    if relative_mass_outside(GridField(grid, mu_vals, check_finite=False), 1.0 + grid.h) > SUPPORT_TOL:
        raise UnsupportedSupport("mu must be supported in the closed unit disk")
    Z = grid.nodes()
    if k == 0:
        one = GridField(grid, np.ones(grid.shape), check_finite=False)
        zero = GridField(grid, np.zeros(grid.shape), check_finite=False)
        return CGOSRecord(0.0, one, one, zero, zero, 0.0, 0, True, "exact")
    nu_vals = mu_vals * modulation_field(grid, -k)
    mask = np.abs(mu_vals) > 0
    if not mask.any():
        f = GridField(grid, np.exp(1j * k * Z), check_finite=False)
        one = GridField(grid, np.ones(grid.shape), check_finite=False)
        zero = GridField(grid, np.zeros(grid.shape), check_finite=False)
        return CGOSRecord(k, one, f, zero, zero, 0.0, 0, True, "exact")

    tr = DiskTransforms(grid)
    op, nu_m, size = _cgos_linear_operator(nu_vals, k, grid, mask, tr)
    rhs_m = -1j * np.conj(k) * nu_m
    rhs = np.concatenate([rhs_m.real, rhs_m.imag])
    iterations = 0
    converged = True
    used = method
    if method in ("auto", "gmres"):
        used = "gmres"
        x0 = initial if initial is not None else None
        counter = {"n": 0}

        def cb(_):
            counter["n"] += 1

        x, info = spla.gmres(
            op, rhs, x0=x0, rtol=tol, atol=0.0, restart=200, maxiter=max(3, max_iter // 200),
            callback=cb, callback_type="pr_norm",
        )
        iterations = counter["n"]
        converged = info == 0
        if not converged and method == "auto" and abs(k) <= 1.0:
            # contraction regime: fall back to the plain fixed point
            return solve_cgos(mu, k, tol=tol, max_iter=max_iter, method="fixed-point", initial=initial)
    elif method == "fixed-point":
        x = np.zeros_like(rhs) if initial is None else np.array(initial)
        prev = None
        for it in range(1, max_iter + 1):
            # h <- rhs + (I - A) h
            x_new = rhs + x - op.matvec(x)
            delta = np.linalg.norm(x_new - x)
            x = x_new
            iterations = it
            if delta <= tol * max(np.linalg.norm(x), 1e-300):
                break
            if prev is not None and delta > 2.0 * prev:
                raise NoConvergence("fixed-point iteration diverging", residual=delta, iterations=it)
            prev = delta
        else:
            converged = False
    else:
        raise ValueError(f"unknown method {method}")

    h_vals = np.zeros(grid.shape, dtype=np.complex128)
    h_vals[mask] = x[:size] + 1j * x[size:]
    h = GridField(grid, h_vals, check_finite=False)
    c, dc = tr.cauchy_beurling(h_vals)
    M_vals = 1.0 + c
    dM_vals = dc
    # Beltrami defect of the assembled fields, relative on 2D; the same padded
    # operators produce the fields and the defect, so a converged Krylov
    # solve makes this the true discrete-equation residual
    defect = h_vals - nu_vals * (np.conj(dM_vals) - 1j * np.conj(k) * np.conj(M_vals))
    phase = np.exp(1j * k * Z)
    df = phase * (1j * k * M_vals + dM_vals)
    reg = np.abs(Z) <= 2.0
    residual = float(
        np.sqrt(
            np.sum(np.abs(phase[reg] * defect[reg]) ** 2)
            / np.sum(np.abs(df[reg]) ** 2)
        )
    )
    if converged and residual > 1e-6:
        converged = False
    return CGOSRecord(
        k,
        GridField(grid, M_vals, check_finite=False),
        GridField(grid, phase * M_vals, check_finite=False),
        h,
        GridField(grid, dM_vals, check_finite=False),
        residual,
        iterations,
        converged,
        used,
    )


def masked_solution_vector(rec: CGOSRecord) -> np.ndarray:
    """Real/imaginary split of dbar M on supp(mu); warm start for nearby k sweeps."""
    mask = np.abs(rec.h.values) > 0
    h_m = rec.h.values[np.abs(rec.h.values) > 0] if mask.any() else np.array([])
    return np.concatenate([h_m.real, h_m.imag])


# ---------------------------------------------------------------------------
# derived objects

def phi_from_cgos(rec: CGOSRecord) -> tuple[GridField, dict]:
    """The principal map phi with f = e^(ik phi), via dbar phi = dbar f / (ik f).

    Branch free: phi = z + C(h / (ik M)).  The info dict reports the pointwise
    reconstruction defect of e^(ik phi) against f on 2D, the uniform-decay
    constant max |z||phi - z| over 2 <= |z| <= L/2, and a principal-log
    consistency defect sampled on a ray where |M - 1| < 1.
    """
    if rec.k == 0:
        raise ZeroFrequency("phi is defined for k != 0")
    grid = rec.grid
    M = rec.M.values
    scale = float(np.max(np.abs(M)))
    if np.min(np.abs(M)) < 1e-12 * scale:
        raise ZeroOnGrid("f vanishes on the grid; no exponential representation")
    dbar_phi = rec.h.values / (1j * rec.k * M)
    c, _, _ = cauchy_with_derivatives(GridField(grid, dbar_phi, check_finite=False))
    Z = grid.nodes()
    phi = GridField(grid, Z + c.values, check_finite=False)
    # e^(ik phi) = f, compared where the magnitudes are benign
    reg = np.abs(Z) <= 2.0
    recon = np.exp(1j * rec.k * phi.values[reg])
    f_reg = rec.f.values[reg]
    exp_defect = float(np.max(np.abs(recon - f_reg) / np.abs(f_reg)))
    ring = (np.abs(Z) >= 2.0) & (np.abs(Z) <= grid.half_width / 2.0)
    decay_constant = float(np.max(np.abs(Z[ring]) * np.abs(phi.values[ring] - Z[ring])))
    # principal log of M along the positive real axis, where M stays near 1
    i0 = grid.n // 2
    ray = np.abs(Z[:, i0] - 1.5 - 0j).argmin()
    sl = slice(ray, min(ray + grid.n // 8, grid.n))
    Mray = M[sl, i0]
    log_defect = float(
        np.max(np.abs(1j * rec.k * (phi.values[sl, i0] - Z[sl, i0]) - np.log(Mray)))
    ) if np.all(np.abs(Mray - 1.0) < 1.0) else np.inf
    info = {"exp_defect": exp_defect, "decay_constant": decay_constant, "log_defect": log_defect}
    return phi, info


def u_gamma(cond, k: complex, **solver_kwargs) -> tuple[GridField, CGOSRecord, CGOSRecord]:
    """CGOS of the conductivity equation: u = Re f_mu + i Im f_{-mu}."""
    if isinstance(cond, ConductivityField):
        mu = gamma_to_mu(cond).mu
    elif isinstance(cond, BeltramiField):
        mu = cond.mu
    else:
        mu = cond
    rec_p = solve_cgos(mu, k, **solver_kwargs)
    rec_m = solve_cgos(GridField(mu.grid, -mu.values, check_finite=False), k, **solver_kwargs)
    u_vals = rec_p.f.values.real + 1j * rec_m.f.values.imag
    return GridField(mu.grid, u_vals, check_finite=False), rec_p, rec_m


def gradient_fields(rec: CGOSRecord) -> tuple[np.ndarray, np.ndarray]:
    """(d_x f, d_y f) assembled from the solver fields, free of finite differencing."""
    grid = rec.grid
    phase = np.exp(1j * rec.k * grid.nodes())
    df = phase * (1j * rec.k * rec.M.values + rec.dM.values)
    dbf = phase * rec.h.values
    return df + dbf, 1j * (df - dbf)


def u_gamma_gradient(rec_p: CGOSRecord, rec_m: CGOSRecord) -> tuple[np.ndarray, np.ndarray]:
    px, py = gradient_fields(rec_p)
    mx, my = gradient_fields(rec_m)
    return px.real + 1j * mx.imag, py.real + 1j * my.imag


def conductivity_weak_residual(cond: ConductivityField, rec_p, rec_m, centers=(0.0, 0.4 + 0.3j)) -> float:
    """Relative weak-form defect of div(gamma grad u) = 0 against smooth bumps in D."""
    grid = cond.grid
    ux, uy = u_gamma_gradient(rec_p, rec_m)
    gam = cond.gamma.values.real
    worst = 0.0
    for center in centers:
        v, dv, dbv = smooth_bump_derivatives(grid, 0.5, center)
        vx = (dv.values + dbv.values).real
        vy = (1j * (dv.values - dbv.values)).real
        integrand = gam * (ux * vx + uy * vy)
        defect = abs(np.sum(integrand)) * grid.cell_area
        mask = np.abs(grid.nodes() - center) <= 0.5
        scale = (
            np.sqrt(np.sum((np.abs(ux) ** 2 + np.abs(uy) ** 2)[mask] * gam[mask] ** 2))
            * np.sqrt(np.sum(vx**2 + vy**2))
            * grid.cell_area
        )
        worst = max(worst, defect / scale)
    return worst


def lambda_mu_field(rec_p: CGOSRecord, rec_m: CGOSRecord) -> GridField:
    """Unimodular lambda with u_gamma = f_{lambda mu}: conj(F)/F for F = f_mu - f_{-mu}."""
    F = rec_p.f.values - rec_m.f.values
    scale = np.abs(rec_p.f.values) + np.abs(rec_m.f.values)
    out = np.ones_like(F)
    good = np.abs(F) > 1e-12 * scale
    out[good] = np.conj(F[good]) / F[good]
    return GridField(rec_p.grid, out, check_finite=False)


def lambda_mu(mu, k: complex, **solver_kwargs) -> GridField:
    """The rotation field lambda(z, k) from fresh solves at +mu and -mu."""
    grid, mu_vals = _mu_values(mu)
    rec_p = solve_cgos(mu, k, **solver_kwargs)
    rec_m = solve_cgos(GridField(grid, -mu_vals, check_finite=False), k, **solver_kwargs)
    return lambda_mu_field(rec_p, rec_m)


def f_lambda_from_pair(rec_p: CGOSRecord, rec_m: CGOSRecord, lam: complex) -> GridField:
    """Rotation identity: f_{lambda mu} reconstructed from f_{+mu} and f_{-mu}."""
    S = rec_p.f.values + rec_m.f.values
    F = rec_p.f.values - rec_m.f.values
    vals = (F / S + 1.0 / lam) * lam * S / 2.0
    return GridField(rec_p.grid, vals, check_finite=False)


def f_lambda_identity_check(mu, k: complex, lam: complex, **solver_kwargs) -> float:
    """Relative L2(D) defect between the direct solve at lambda mu and the identity."""
    grid, mu_vals = _mu_values(mu)
    rec_p = solve_cgos(mu, k, **solver_kwargs)
    rec_m = solve_cgos(GridField(grid, -mu_vals, check_finite=False), k, **solver_kwargs)
    predicted = f_lambda_from_pair(rec_p, rec_m, lam)
    direct = solve_cgos(GridField(grid, lam * mu_vals, check_finite=False), k, **solver_kwargs)
    return float(
        lp_norm(direct.f - predicted, 2, region=(0.0, 1.0))
        / lp_norm(direct.f, 2, region=(0.0, 1.0))
    )


def radial_cutoff(
    grid: Grid, inner: float = 1.0, outer: float = 2.0, taper: str = "cosine"
) -> tuple[np.ndarray, np.ndarray]:
    """Lipschitz cutoff: 1 on inner D, 0 outside outer D; returns (phi, grad phi).

    The gradient is packed as the complex field phi_x + i phi_y.  The default
    cosine taper has a continuous gradient, so products with it contribute
    O(t) to a p-modulus; the plain ramp contributes t^(1/p) through its
    gradient jumps across the two circles.
    """
    Z = grid.nodes()
    a = np.abs(Z)
    w = (a - inner) / (outer - inner)
    grad = np.zeros(grid.shape, dtype=np.complex128)
    ramp = (a > inner) & (a < outer)
    if taper == "cosine":
        phi = np.where(a <= inner, 1.0, np.where(a >= outer, 0.0,
                       0.5 * (1.0 + np.cos(np.pi * np.clip(w, 0.0, 1.0)))))
        mag = 0.5 * np.pi * np.sin(np.pi * w[ramp]) / (outer - inner)
    elif taper == "ramp":
        phi = np.clip(1.0 - w, 0.0, 1.0)
        mag = np.full(int(ramp.sum()), 1.0 / (outer - inner))
    else:
        raise ValueError(f"unknown taper {taper}")
    grad[ramp] = -(Z[ramp] / a[ramp]) * mag
    return phi, grad


def caccioppoli_modulus_check(
    mu,
    k: complex,
    p: float = 2.0,
    r: float | None = None,
    *,
    cutoff: tuple[float, float] = (1.0, 2.0),
    t_max: float = 0.5,
    rec: CGOSRecord | None = None,
):
    """Both sides of the Caccioppoli modulus inequality for the CGOS at (mu, k).

    lhs(t) = omega_p(phi dbar f)(t); rhs(t) = ||f grad phi||_{L^r} omega_q mu(t)
    + omega_p(f grad phi)(t) with 1/q = 1/p - 1/r.  Returns (ts, lhs, rhs,
    pieces) where pieces holds the two rhs terms separately; the experiment
    layer fits the single corpus constant with lhs <= C rhs.
    """
    from .errors import BadExponents
    from .modulus import dyadic_ladder, omega_p

    grid, mu_vals = _mu_values(mu)
    kappa = float(np.max(np.abs(mu_vals)))
    p_kappa = np.inf if kappa == 0 else 1.0 + 1.0 / kappa
    if not (1.0 < p < p_kappa) or kappa >= 1.0:
        raise BadExponents(f"need 1 < p < p_kappa = {p_kappa}")
    if r is None:
        r = min(4.0, 0.5 * (p + p_kappa))
    if not (p <= r < p_kappa):
        raise BadExponents(f"need r in [p, p_kappa) = [{p}, {p_kappa})")
    q = np.inf if r == p else 1.0 / (1.0 / p - 1.0 / r)
    if rec is None:
        rec = solve_cgos(mu, k)
    phi, grad = radial_cutoff(grid, *cutoff)
    phase = np.exp(1j * k * grid.nodes())
    dbar_f = phase * rec.h.values
    lhs_field = GridField(grid, phi * dbar_f, check_finite=False)
    fgrad = GridField(grid, rec.f.values * grad, check_finite=False)
    fgrad_r = lp_norm(fgrad, r)
    mu_field = GridField(grid, mu_vals, check_finite=False)
    ts = dyadic_ladder(grid, t_max=t_max)
    lhs, rhs, mods, shifts = [], [], [], []
    for t in ts:
        lt = omega_p(lhs_field, p, float(t))
        m1 = fgrad_r * omega_p(mu_field, q, float(t))
        m2 = omega_p(fgrad, p, float(t))
        lhs.append(lt)
        mods.append(m1)
        shifts.append(m2)
        rhs.append(m1 + m2)
    return np.array(ts), np.array(lhs), np.array(rhs), {
        "coefficient_term": np.array(mods),
        "cutoff_term": np.array(shifts),
        "q": q,
        "r": r,
    }


def derivative_reciprocal_norm(rec: CGOSRecord, s_star: float) -> float:
    """|| |d f|^{-1} ||_{L^{s*}(D)}, the Jacobian integrability gauge."""
    grid = rec.grid
    Z = grid.nodes()
    phase = np.exp(1j * rec.k * Z)
    df = np.abs(phase * (1j * rec.k * rec.M.values + rec.dM.values))
    mask = np.abs(Z) <= 1.0
    vals = 1.0 / df[mask]
    return float((np.sum(vals**s_star) * grid.cell_area) ** (1.0 / s_star))
