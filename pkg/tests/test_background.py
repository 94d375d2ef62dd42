import math

import numpy as np
import pytest

from wedgeshock import background, polar
from wedgeshock.errors import DegenerateEllipticityError, DetachedWedgeError
from wedgeshock.gas import GasModel


def transonic_weak_angle(gamma=1.4, q0=1.3, q_edge=0.0):
    """An angle inside the weak-transonic window for the given upstream."""
    gas = GasModel(gamma)
    lo = polar.sonic_deflection(gas, q0, q_edge)
    hi = polar.critical_angle(gas, q0, q_edge)
    return 0.5 * (lo + hi)


@pytest.fixture
def weak_bg():
    return background.solve_background(1.4, 1.3, transonic_weak_angle(), branch="weak")


@pytest.fixture
def strong_bg():
    return background.solve_background(1.4, 1.3, math.radians(10.0), branch="strong")


def test_perpendicular_reduction():
    bg = background.solve_background(1.4, 1.3, math.radians(10.0), u03_minus=0.0, branch="weak")
    assert bg.omega1 == 0.0
    assert bg.omega3 == pytest.approx(0.5 * math.pi)
    assert bg.n == 2


def test_weak_speed_matches_polar_point():
    gas = GasModel(1.4)
    theta = math.radians(10.0)
    bg = background.solve_background(1.4, 1.3, theta, branch="weak")
    pt = polar.wedge_solutions(gas, 1.3, theta).weak
    assert bg.q0_plus == pytest.approx(math.hypot(pt.v1, pt.v2), rel=1e-13)


def test_strong_speed_below_weak():
    theta = math.radians(10.0)
    bg_w = background.solve_background(1.4, 1.3, theta, branch="weak")
    bg_s = background.solve_background(1.4, 1.3, theta, branch="strong")
    gas = GasModel(1.4)
    pt = polar.wedge_solutions(gas, 1.3, theta).strong
    assert bg_s.q0_plus == pytest.approx(math.hypot(pt.v1, pt.v2), rel=1e-13)
    assert bg_s.q0_plus < bg_w.q0_plus


def test_detached_raises():
    theta_c = polar.critical_angle(GasModel(1.4), 1.3)
    with pytest.raises(DetachedWedgeError):
        background.solve_background(1.4, 1.3, theta_c + 1e-4)


def test_direction_cosines_and_edge_continuity():
    bg = background.solve_background(1.4, 1.3, math.radians(6.0), u03_minus=0.35, branch="weak")
    assert math.cos(bg.omega1) ** 2 + math.cos(bg.omega3) ** 2 == pytest.approx(1.0, abs=1e-12)
    assert bg.u03_minus == pytest.approx(bg.q0_plus * math.cos(bg.omega3), abs=1e-10)
    assert bg.n == 3


def test_background_front_annihilates_potential_difference(weak_bg):
    # phi0 = (U- - U+).x vanishes on the plane x1*k = x2*q0- sin(alpha_w)
    rng = np.random.default_rng(3)
    s = weak_bg.q0_minus * math.sin(weak_bg.alpha_w)
    p = weak_bg.upstream - weak_bg.downstream
    for _ in range(20):
        tau = rng.normal()
        x = np.array([s * tau, weak_bg.k * tau])
        assert abs(np.dot(p, x)) < 1e-12


def test_du0_positive(weak_bg, strong_bg):
    assert weak_bg.du0_dy1 > 0
    assert strong_bg.du0_dy1 > 0


def test_sigma_sign_dichotomy(weak_bg, strong_bg):
    assert weak_bg.sigma_s > 0
    assert weak_bg.nu_ratio > 0
    assert strong_bg.sigma_s < 0
    assert strong_bg.nu_ratio < 0


def test_exponent_ranges(weak_bg, strong_bg):
    for bg in (weak_bg, strong_bg):
        assert 0 < bg.omega_s < 0.5 * math.pi
        assert -0.5 * math.pi < bg.phi_s < 0.5 * math.pi
        assert np.sign(bg.sigma_s) == np.sign(bg.nu_ratio)


def test_skew_exponents_coincide_at_perpendicular(weak_bg):
    e = weak_bg.exponents
    assert e.sigma_s == pytest.approx(e.sigma_s_perp, rel=1e-12)
    assert e.omega_s == pytest.approx(e.omega_s_perp, rel=1e-12)


def test_supersonic_weak_background_has_no_exponents():
    bg = background.solve_background(1.4, 1.3, math.radians(4.0), branch="weak")
    assert not bg.transonic
    assert bg.exponents is None
    with pytest.raises(DegenerateEllipticityError):
        background.stability_exponents(bg)


def test_canonical_transform_normalizes_operator(weak_bg, strong_bg):
    for bg in (weak_bg, strong_bg):
        p = bg.transforms.P
        prod = p @ bg.J0.T @ bg.A0 @ bg.J0 @ p.T
        assert np.max(np.abs(prod - np.eye(bg.n))) < 1e-10
        assert np.trace(prod) == pytest.approx(bg.n, abs=1e-9)


def test_p0_identity_at_perpendicular(weak_bg):
    assert np.allclose(weak_bg.transforms.P0, np.eye(weak_bg.n))


def test_skew_sector_transform_reaches_laplacian():
    bg = background.solve_background(1.4, 1.6, math.radians(14.0), u03_minus=0.4, branch="strong")
    t = bg.transforms.sector
    prod = t @ bg.J0.T @ bg.A0 @ bg.J0 @ t.T
    assert np.max(np.abs(prod - bg.transforms.laplace_scale * np.eye(bg.n))) < 1e-10
    # random second-derivative matrices: tr(A0~ D2y) = scale * tr(D2X)
    rng = np.random.default_rng(11)
    a_tilde = bg.coefficient_matrix_tilde()
    for _ in range(10):
        d2x = rng.normal(size=(bg.n, bg.n))
        d2x = d2x + d2x.T
        d2y = t.T @ d2x @ t
        lhs = np.einsum("ij,ij->", a_tilde, d2y)
        rhs = bg.transforms.laplace_scale * np.trace(d2x)
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_skew_shock_coefficients_transform_with_p0():
    bg = background.solve_background(1.4, 1.6, math.radians(14.0), u03_minus=0.4, branch="strong")
    nu_tilde = bg.transforms.P0 @ bg.nu
    m, c1 = bg.mach_plus, math.cos(bg.omega1)
    fac = math.sqrt(1.0 - (m * c1) ** 2)
    assert nu_tilde[0] == pytest.approx(bg.nu[0] / fac, rel=1e-12)
    assert nu_tilde[1] == pytest.approx(bg.nu[1], rel=1e-12)


def test_sector_map_sends_quarter_plane_to_sector(weak_bg):
    t = bg_t = weak_bg.transforms.sector
    omega_s = weak_bg.omega_s
    # wedge boundary {y2 = 0} -> positive X1-axis
    x = bg_t @ np.array([1.0, 0.0])
    assert x[1] == pytest.approx(0.0, abs=1e-14)
    assert x[0] > 0
    # shock boundary {y1 = 0} -> ray at angle omega_s
    x = t @ np.array([0.0, 1.0])
    assert math.atan2(x[1], x[0]) == pytest.approx(omega_s, abs=1e-12)


def test_admissible_windows_md_gate(weak_bg, strong_bg):
    w = background.admissible_weights(weak_bg, 3)
    assert not w.empty
    assert w.contains(-0.5, 0.5 * weak_bg.sigma_s)
    assert not w.contains(-0.5, 0.0)  # sigma0 strictly positive in M-D
    s = background.admissible_weights(strong_bg, 3)
    assert s.empty


def test_admissible_windows_2d(weak_bg, strong_bg):
    w = background.admissible_weights(weak_bg, 2)
    assert w.contains(-0.5, 0.0)
    assert w.sigma0_range[1] == pytest.approx(weak_bg.sigma_s)
    s = background.admissible_weights(strong_bg, 2)
    assert not s.empty
    # lambda_1 > 2 makes the corner window reach past sigma0 = 1
    assert s.sigma0_range[1] > 1.0
    assert s.contains(-0.5, 1.0)


def test_record_round_trip(weak_bg):
    rec = weak_bg.to_record()
    assert rec["branch"] == "weak"
    assert rec["J0_10"] == pytest.approx(float(weak_bg.J0[1, 0]))
    import json

    json.dumps(rec)
