"""Moduli of continuity: geometry oracles, operator interaction, tail lemma."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calderonlab import grid as G
from calderonlab import modulus as M
from calderonlab.conductivity import family_bump, family_gamma_R, family_holder, gamma_to_mu, radial_stretch
from calderonlab.errors import TooFine


def sym_diff_area(s):
    """Exact area of D symmetric-difference (D + y) for |y| = s (unit disks)."""
    if s >= 2.0:
        return 2 * np.pi
    lens = 2 * np.arccos(s / 2) - (s / 2) * np.sqrt(4 - s * s)
    return 2 * (np.pi - lens)


@pytest.fixture(scope="module")
def grid512():
    return G.Grid(512, 4.0)


@pytest.fixture(scope="module")
def grid256():
    return G.Grid(256, 4.0)


def test_omega_zero_field(grid512):
    z = G.GridField(grid512, np.zeros(grid512.shape))
    for t in (0.05, 0.3, 1.0):
        assert M.omega_p(z, 1.0, t) == 0.0


def test_omega_too_fine(grid512):
    f = G.gaussian(grid512)
    with pytest.raises(TooFine):
        M.omega_p(f, 2.0, grid512.h / 2)
    with pytest.raises(TooFine):
        M.averaged_modulus_equiv(f, 2.0, grid512.h)


def test_omega_disk_indicator_geometry_oracle():
    g = G.Grid(1024, 4.0)
    chi = G.disk_indicator(g)
    for t in (0.05, 0.1):
        got = M.omega_p(chi, 1.0, t)
        want = sym_diff_area(t)  # ~ 4t for small t
        assert abs(got - want) <= 0.10 * want


def test_omega_monotone(grid256):
    f = family_holder(grid256, 0.4, seed=3).gamma
    curve = M.modulus_curve(f, 2.0)
    vals = curve.values()
    assert np.all(np.diff(vals) >= 0)
    # single evaluations agree with the sweep and preserve monotonicity
    assert M.omega_p(f, 2.0, 0.1) <= M.omega_p(f, 2.0, 0.3)


def test_curve_chi_sqrt_behavior(grid256):
    chi = G.disk_indicator(grid256)
    curve = M.modulus_curve(chi, 2.0, t_max=1.0)
    slope = curve.fitted_slope(0.04, 0.5)
    assert 0.35 < slope < 0.65


def test_curve_holder_cusp_sup_modulus(grid512):
    """|z|^s cutoff has sup-norm modulus ~ t^s; the cusp is invisible in L^2."""
    Z = grid512.nodes()
    f = G.GridField(grid512, (np.abs(Z) ** 0.5) * G.smooth_bump(grid512, 1.5).values)
    curve = M.modulus_curve(f, np.inf, t_max=0.5)
    assert abs(curve.fitted_slope(None, 0.2) - 0.5) <= 0.075


def test_curve_holder_family_slope(grid512):
    cond = family_holder(grid512, 0.5, seed=1, K=2.0)
    probe = G.GridField(grid512, cond.gamma.values - 1.0)
    curve = M.modulus_curve(probe, 2.0, t_max=1.0)
    assert abs(curve.fitted_slope(4 * grid512.h, 0.25) - 0.5) <= 0.1


def test_modulus_vanishes_toward_zero_scale(grid256):
    """For L^p fields (p < inf) the curve extrapolates toward 0 at t -> 0."""
    probe = G.GridField(grid256, family_bump(grid256, 0.8, 0.8).gamma.values - 1.0)
    curve = M.modulus_curve(probe, 2.0, t_max=1.0)
    assert curve.values()[0] <= 0.2 * curve.values()[-1]


def test_besov_zero_and_scaling(grid512):
    omega = M.ModulusSpec.power(0.5)
    z = G.GridField(grid512, np.zeros(grid512.shape))
    assert M.besov_seminorm(z, 2.0, omega) == 0.0
    f = family_holder(grid512, 0.5, seed=2).gamma
    one = M.besov_seminorm(f, 2.0, omega)
    two = M.besov_seminorm(G.GridField(grid512, 2.0 * f.values), 2.0, omega)
    assert two == pytest.approx(2.0 * one, rel=1e-12)


def test_besov_stable_under_refinement():
    omega = M.ModulusSpec.power(0.5)
    vals = []
    for n in (256, 512):
        g = G.Grid(n, 4.0)
        # same underlying function on both grids: pin the scale count
        probe = G.GridField(g, family_holder(g, 0.5, seed=1, scales=6).gamma.values - 1.0)
        vals.append(M.besov_seminorm(probe, 2.0, omega, t_max=1.0, t_min=4 * 8.0 / 256))
    assert abs(vals[1] - vals[0]) <= 0.10 * vals[0]


def test_membership_identity(grid256):
    one = G.GridField(grid256, np.ones(grid256.shape))
    for K in (1.0, 2.0, 10.0):
        rep = M.check_membership(one, 2.0, M.ModulusSpec.power(0.5, 1e-9), K=K)
        assert rep.ok


def test_membership_gamma_R_violation(grid256):
    cond = family_gamma_R(grid256, 0.5)
    small = M.ModulusSpec.power(1.0, 0.5)  # well below the true jump modulus
    rep = M.check_membership(cond.gamma, 2.0, small, K=3.0, support_radius=0.5)
    assert not rep.ok and not rep.modulus_ok
    assert rep.first_violation_t is not None
    big = M.ModulusSpec.power(0.5, 4.0)
    rep2 = M.check_membership(cond.gamma, 2.0, big, K=3.0, support_radius=0.5)
    assert rep2.ok


def test_membership_ellipticity_violation(grid256):
    mu = G.GridField(grid256, 0.6 * G.disk_indicator(grid256, 0.5).values)
    rep = M.check_membership(mu, 2.0, M.ModulusSpec.power(0.5, 10.0), kappa=0.5)
    assert not rep.ok and not rep.ellipticity_ok


def test_fourier_tail_zero_and_chi(grid512):
    z = G.GridField(grid512, np.zeros(grid512.shape))
    assert M.fourier_tail_check(z, 2.0, 8.0) == (0.0, 0.0)
    chi = G.disk_indicator(grid512)
    rows = [M.fourier_tail_check(chi, 2.0, R) for R in (4.0, 8.0, 16.0)]
    lhs = [r[0] for r in rows]
    assert lhs[0] > lhs[1] > lhs[2]  # decreasing in R
    ratios = [l / r for l, r in rows]
    assert max(ratios) < 2.5  # one constant serves all R


def test_fourier_tail_smooth_ratio_vanishes(grid512):
    gau = G.gaussian(grid512, 1.0)
    ratios = [np.divide(*M.fourier_tail_check(gau, 2.0, R)) for R in (4.0, 8.0, 16.0)]
    assert max(ratios) < 1e-4


def test_fourier_tail_validation(grid512):
    f = G.gaussian(grid512)
    with pytest.raises(ValueError):
        M.fourier_tail_check(f, 3.0, 8.0)
    with pytest.raises(ValueError):
        M.fourier_tail_check(f, 2.0, 10 * grid512.max_frequency)


def test_averaged_modulus(grid512):
    z = G.GridField(grid512, np.zeros(grid512.shape))
    assert M.averaged_modulus_equiv(z, 2.0, 0.1) == (0.0, 0.0)
    chi = G.disk_indicator(grid512)
    for t in (0.05, 0.1, 0.2, 0.5):
        sup_form, avg_form = M.averaged_modulus_equiv(chi, 2.0, t)
        assert 0.3 <= sup_form / avg_form <= 3.0
    probe = G.GridField(grid512, family_holder(grid512, 0.5, seed=1).gamma.values - 1.0)
    ratios = [np.divide(*M.averaged_modulus_equiv(probe, 2.0, t)) for t in (0.0625, 0.125, 0.25)]
    assert max(ratios) <= 1.2 * min(ratios)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000))
def test_triangle_inequality(seed):
    g = G.Grid(64, 4.0)
    rng = np.random.default_rng(seed)
    f = G.gaussian(g, rng.uniform(0.3, 1.5), center=complex(*rng.uniform(-1, 1, 2)))
    h = G.smooth_bump(g, rng.uniform(0.5, 2.0), center=complex(*rng.uniform(-1, 1, 2)))
    fh = G.GridField(g, f.values + h.values)
    for t in (0.25, 0.5, 1.0):
        assert M.omega_p(fh, 2.0, t) <= M.omega_p(f, 2.0, t) + M.omega_p(h, 2.0, t) + 1e-12


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 10_000))
def test_product_rule(seed):
    """omega_p(hg) <= omega_q1(h) ||g||_r1 + omega_q2(g) ||h||_r2, Holder splits."""
    g = G.Grid(64, 4.0)
    rng = np.random.default_rng(seed)
    h = G.gaussian(g, rng.uniform(0.4, 1.2), center=complex(*rng.uniform(-0.5, 0.5, 2)))
    f = G.smooth_bump(g, rng.uniform(0.8, 2.0))
    prod = G.GridField(g, h.values * f.values)
    p, q1, r1, q2, r2 = 2.0, 4.0, 4.0, 4.0, 4.0  # 1/2 = 1/4 + 1/4
    for t in (0.25, 1.0):
        lhs = M.omega_p(prod, p, t)
        rhs = M.omega_p(h, q1, t) * G.lp_norm(f, r1) + M.omega_p(f, q2, t) * G.lp_norm(h, r2)
        assert lhs <= rhs + 1e-12


def test_beurling_modulus_bound(grid256):
    """Translation-invariant operator bound at p = q = 2 where ||B|| = 1."""
    for f in (G.smooth_bump(grid256, 1.1), family_holder(grid256, 0.5, seed=4).gamma):
        Bf = G.beurling(f)
        for t in (0.0625, 0.25, 1.0):
            assert M.omega_p(Bf, 2.0, t) <= M.omega_p(f, 2.0, t) * (1 + 1e-8)


def test_composition_with_radial_stretch(grid256):
    """omega_q(mu o phi)(t) <= C omega_p(mu)(C_K t^(1/K)) for q < p/K."""
    K, p, q, C_K = 2.0, 4.0, 1.5, 3.0
    phi = radial_stretch(K)
    Z = grid256.nodes()
    ratios = []
    for seed in (1, 2):
        mu = gamma_to_mu(family_holder(grid256, 0.5, seed=seed, K=2.0))
        composed = G.GridField(grid256, mu.evaluator(phi(Z)).astype(np.complex128))
        for t in (0.05, 0.1, 0.2):
            lhs = M.omega_p(composed, q, t)
            rhs = M.omega_p(mu.mu, p, min(C_K * t ** (1.0 / K), 2.0))
            ratios.append(lhs / rhs)
    assert max(ratios) < 3.0  # one corpus constant


def test_kernel_besov_diagnostic(grid256):
    """Discrete Besov boundedness of the truncated kernel for p < 2."""
    Phi = M.cauchy_kernel_field(grid256)
    for p in (1.2, 1.5):
        eps = 0.5 * (2.0 / p - 1.0)
        curve = M.modulus_curve(Phi, p, t_max=1.0)
        ratios = curve.values() / curve.ts() ** eps
        assert ratios.max() < 5.0
        assert ratios[0] <= 1.2 * ratios[-1]  # no blow-up toward fine scales


def test_modulus_spec_json_roundtrip():
    for spec in (
        M.ModulusSpec.power(0.5, 2.0),
        M.ModulusSpec.log_power(0.3),
        M.ModulusSpec.tabulated([(0.1, 0.2), (0.5, 0.8)]),
    ):
        again = M.ModulusSpec.from_json(spec.to_json())
        assert again == spec
        assert again(0.25) == spec(0.25)


def test_curve_csv(tmp_path, grid256):
    curve = M.modulus_curve(G.disk_indicator(grid256), 2.0, t_max=0.5)
    path = tmp_path / "curve.csv"
    curve.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,value"
    assert len(lines) == len(curve.samples) + 1
