"""Conductivity fields, the gamma <-> mu dictionary and named test families.

Family constructors return fields carrying an analytic ``evaluator`` closure
(vectorized z -> value) alongside the grid samples, so meshes and composition
checks can evaluate the same coefficient off the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EllipticityViolation
from .grid import Grid, GridField


@dataclass(frozen=True)
class EllipticityProfile:
    """Ellipticity bound K >= 1 with its quasiconformal counterparts."""

    K: float

    def __post_init__(self):
        if self.K < 1.0:
            raise EllipticityViolation("K must be at least 1")

    @property
    def kappa(self) -> float:
        return (self.K - 1.0) / (self.K + 1.0)

    @property
    def critical_exponent(self) -> float:
        """p_kappa = 1 + 1/kappa = 2K/(K-1), infinite for K = 1."""
        k = self.kappa
        return np.inf if k == 0.0 else 1.0 + 1.0 / k

    @staticmethod
    def from_kappa(kappa: float) -> "EllipticityProfile":
        if not (0.0 <= kappa < 1.0):
            raise EllipticityViolation("kappa must lie in [0, 1)")
        return EllipticityProfile((1.0 + kappa) / (1.0 - kappa))


class ConductivityField:
    """Real positive gamma on a grid, equal to 1 outside the support disk."""

    __slots__ = ("gamma", "support_radius", "profile", "evaluator")

    def __init__(
        self,
        gamma: GridField,
        support_radius: float,
        profile: EllipticityProfile | None = None,
        evaluator: Callable | None = None,
    ):
        vals = gamma.values
        if np.max(np.abs(vals.imag)) > 1e-12 or np.min(vals.real) <= 0:
            raise EllipticityViolation("gamma must be real and positive")
        observed_K = float(max(vals.real.max(), (1.0 / vals.real).max()))
        if profile is None:
            profile = EllipticityProfile(observed_K)
        elif observed_K > profile.K * (1.0 + 1e-12):
            raise EllipticityViolation(
                f"gamma violates the declared bound K={profile.K} (observed {observed_K})"
            )
        Z = gamma.grid.nodes()
        outside = np.abs(Z) > support_radius
        if np.max(np.abs(vals[outside] - 1.0), initial=0.0) > 1e-12:
            raise EllipticityViolation("gamma must equal 1 outside the support disk")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "support_radius", float(support_radius))
        object.__setattr__(self, "profile", profile)
        object.__setattr__(self, "evaluator", evaluator)

    def __setattr__(self, name, value):
        raise AttributeError("ConductivityField is immutable")

    @property
    def grid(self) -> Grid:
        return self.gamma.grid


class BeltramiField:
    """Real mu with |mu| <= kappa, supported in the closed unit disk."""

    __slots__ = ("mu", "profile", "evaluator")

    def __init__(
        self,
        mu: GridField,
        profile: EllipticityProfile | None = None,
        evaluator: Callable | None = None,
    ):
        vals = mu.values
        if np.max(np.abs(vals.imag)) > 1e-12:
            raise EllipticityViolation("mu must be real valued")
        observed = float(np.max(np.abs(vals.real)))
        if observed >= 1.0:
            raise EllipticityViolation("mu must satisfy |mu| < 1")
        if profile is None:
            profile = EllipticityProfile.from_kappa(observed)
        elif observed > profile.kappa * (1.0 + 1e-12) + 1e-15:
            raise EllipticityViolation(
                f"mu violates the declared bound kappa={profile.kappa}"
            )
        Z = mu.grid.nodes()
        if np.max(np.abs(vals[np.abs(Z) > 1.0]), initial=0.0) > 1e-12:
            raise EllipticityViolation("mu must be supported in the closed unit disk")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "profile", profile)
        object.__setattr__(self, "evaluator", evaluator)

    def __setattr__(self, name, value):
        raise AttributeError("BeltramiField is immutable")

    @property
    def grid(self) -> Grid:
        return self.mu.grid


def gamma_to_mu(cond: ConductivityField) -> BeltramiField:
    """mu = (1 - gamma)/(1 + gamma); real, |mu| = (K-1)/(K+1) at the extremes."""
    g = cond.gamma.values.real
    mu_vals = (1.0 - g) / (1.0 + g)
    ev = None
    if cond.evaluator is not None:
        inner = cond.evaluator
        ev = lambda z: (1.0 - inner(z)) / (1.0 + inner(z))
    return BeltramiField(
        GridField(cond.grid, mu_vals.astype(np.complex128), check_finite=False),
        profile=cond.profile,
        evaluator=ev,
    )


def mu_to_gamma(belt: BeltramiField, support_radius: float = 1.0) -> ConductivityField:
    """gamma = (1 - mu)/(1 + mu), the inverse dictionary (gamma_{mu_gamma} = gamma)."""
    m = belt.mu.values.real
    g_vals = (1.0 - m) / (1.0 + m)
    ev = None
    if belt.evaluator is not None:
        inner = belt.evaluator
        ev = lambda z: (1.0 - inner(z)) / (1.0 + inner(z))
    return ConductivityField(
        GridField(belt.grid, g_vals.astype(np.complex128), check_finite=False),
        support_radius=support_radius,
        profile=belt.profile,
        evaluator=ev,
    )


# ---------------------------------------------------------------------------
# named families

def family_gamma_R(grid: Grid, R: float) -> ConductivityField:
    """The annulus conductivity 1 + 2 chi_{R D minus R^2 D}; K = 3, jumps sampled sharply."""
    if not (0.0 < R < 1.0):
        raise ValueError("R must lie in (0, 1)")

    def ev(z):
        a = np.abs(np.asarray(z))
        return 1.0 + 2.0 * ((a < R) & (a >= R * R))

    Z = grid.nodes()
    vals = ev(Z).astype(np.complex128)
    return ConductivityField(
        GridField(grid, vals), support_radius=R, profile=EllipticityProfile(3.0), evaluator=ev
    )


def family_radial_layers(grid: Grid, radii, values) -> ConductivityField:
    """Piecewise-constant radial profile: values[i] on [radii[i-1], radii[i]), 1 beyond."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(radii) != len(values) or len(radii) == 0:
        raise ValueError("radii and values must be equal-length, nonempty")
    if np.any(np.diff(radii) <= 0) or radii[-1] >= 1.0 or radii[0] <= 0.0:
        raise ValueError("radii must be strictly increasing inside (0, 1)")
    if np.any(values <= 0):
        raise EllipticityViolation("layer values must be positive")

    def ev(z):
        a = np.abs(np.asarray(z))
        out = np.ones_like(a, dtype=float)
        lo = 0.0
        for r, v in zip(radii, values):
            out[(a >= lo) & (a < r)] = v
            lo = r
        return out

    Z = grid.nodes()
    K = float(max(values.max(), (1.0 / values).max(), 1.0))
    return ConductivityField(
        GridField(grid, ev(Z).astype(np.complex128)),
        support_radius=float(radii[-1]),
        profile=EllipticityProfile(K),
        evaluator=ev,
    )


def family_bump(grid: Grid, amplitude: float, radius: float = 0.8) -> ConductivityField:
    """Smooth conductivity 1 + amplitude * bump(z / radius)."""
    if amplitude <= -1.0:
        raise EllipticityViolation("amplitude must exceed -1")
    if not (0.0 < radius <= 1.0):
        raise ValueError("radius must lie in (0, 1]")

    def ev(z):
        r2 = (np.abs(np.asarray(z)) / radius) ** 2
        out = np.ones_like(r2)
        inside = r2 < 1.0
        out[inside] += amplitude * np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return out

    Z = grid.nodes()
    K = max(1.0 + max(amplitude, 0.0), 1.0 / (1.0 + min(amplitude, 0.0)))
    return ConductivityField(
        GridField(grid, ev(Z).astype(np.complex128)),
        support_radius=radius,
        profile=EllipticityProfile(K),
        evaluator=ev,
    )


def family_holder(
    grid: Grid,
    s: float,
    seed: int,
    K: float = 2.0,
    support_radius: float = 0.9,
    scales: int | None = None,
    directions: int = 3,
    base_frequency: float | None = None,
) -> ConductivityField:
    """Lacunary cosine sum with Holder regularity s, scaled into [1/K, K].

    gamma = K^(w) where w is a cutoff-windowed Weierstrass-type fan

        sum_{j, d} 2^(-j s) cos(2^j q0 u_d . z + phi_{j,d}),

    u_d a fixed fan of ``directions`` unit vectors and phi deterministic in
    the seed, normalized to sup |w| = 1 on the grid.  The modulus of
    continuity of gamma behaves like t^s down to the finest generated scale.
    ``base_frequency`` fixes q0 (default pi / support_radius); the level-j
    content resonates with the spectral parameter at |k| = 2^j q0 / 2, which
    the decay experiments exploit by aligning q0 with their |k| ladder.
    """
    if not (0.0 < s < 1.0):
        raise ValueError("s must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    q0 = np.pi / support_radius if base_frequency is None else float(base_frequency)
    if scales is None:
        # finest oscillation wavelength 2 pi / (q0 2^(J-1)) resolves ~4h
        scales = max(3, int(np.ceil(np.log2(2.0 * np.pi / (q0 * 4.0 * grid.h)))) + 1)
    phases = 2.0 * np.pi * rng.random((scales, directions))
    dirs = np.exp(1j * np.pi * np.arange(directions) / directions)
    amps = 2.0 ** (-s * np.arange(scales))
    ramp_lo = 0.8 * support_radius

    def raw(z):
        z = np.asarray(z)
        acc = np.zeros(z.shape, dtype=float)
        for j in range(scales):
            for d in range(directions):
                acc += amps[j] * np.cos((2.0**j) * q0 * (dirs[d] * z).real + phases[j, d])
        a = np.abs(z)
        window = np.clip((support_radius - a) / (support_radius - ramp_lo), 0.0, 1.0)
        return acc * window

    Z = grid.nodes()
    w = raw(Z)
    norm = float(np.max(np.abs(w)))

    def ev(z):
        return K ** np.clip(raw(z) / norm, -1.0, 1.0)

    return ConductivityField(
        GridField(grid, ev(Z).astype(np.complex128)),
        support_radius=support_radius,
        profile=EllipticityProfile(K),
        evaluator=ev,
    )


# ---------------------------------------------------------------------------
# closed forms used by the DtN experiments

def m_x(R: float, x) -> float | np.ndarray:
    """Difference-spectrum closed form 4(R^2x - R^4x)/(4 - 3 R^2x + 2 R^4x)."""
    if not (0.0 < R < 1.0):
        raise ValueError("R must lie in (0, 1)")
    u = R ** (2.0 * np.asarray(x, dtype=float))
    out = 4.0 * (u - u * u) / (4.0 - 3.0 * u + 2.0 * u * u)
    return float(out) if out.ndim == 0 else out


def m_of_u(u) -> np.ndarray:
    """Same quantity as a function of u = R^(2x); it depends on R, x only through u."""
    u = np.asarray(u, dtype=float)
    return 4.0 * (u - u * u) / (4.0 - 3.0 * u + 2.0 * u * u)


def radial_stretch(K: float) -> Callable:
    """The K-quasiconformal principal map z |z|^(1/K - 1) inside the disk, identity outside."""

    def phi(z):
        z = np.asarray(z, dtype=complex)
        a = np.abs(z)
        out = np.array(z, copy=True)
        inside = (a < 1.0) & (a > 0.0)
        out[inside] = z[inside] * a[inside] ** (1.0 / K - 1.0)
        return out

    return phi


def radial_stretch_mu(grid: Grid, K: float, supersample: int = 4) -> GridField:
    """Beltrami coefficient of the radial stretch: -kappa z/conj(z) inside the disk.

    Complex valued, so it is returned as a raw field rather than a real-valued
    :class:`BeltramiField`.  The phase z/conj(z) rotates fully within cells
    near the origin, so cells are represented by a ``supersample`` x
    ``supersample`` average (which keeps |mu| <= kappa); pass 1 for plain
    center sampling.
    """
    kappa = EllipticityProfile(K).kappa
    ss = max(1, int(supersample))
    offs = (np.arange(ss) + 0.5) / ss - 0.5
    ax = grid.axis()
    vals = np.zeros(grid.shape, dtype=np.complex128)
    for ox in offs:
        for oy in offs:
            Z = (ax[:, None] + ox * grid.h) + 1j * (ax[None, :] + oy * grid.h)
            inside = (np.abs(Z) <= 1.0) & (np.abs(Z) > 0)
            m = np.zeros(grid.shape, dtype=np.complex128)
            m[inside] = -kappa * Z[inside] / np.conj(Z[inside])
            vals += m
    return GridField(grid, vals / ss**2)
