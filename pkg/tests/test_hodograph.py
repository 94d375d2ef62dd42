import math

import numpy as np
import pytest
from scipy.optimize import brentq

from wedgeshock import background, hodograph, polar
from wedgeshock.gas import GasModel
from wedgeshock.hodograph import WedgePerturbation


@pytest.fixture
def bg():
    gas = GasModel(1.4)
    lo = polar.sonic_deflection(gas, 1.3)
    hi = polar.critical_angle(gas, 1.3)
    return background.solve_background(1.4, 1.3, 0.5 * (lo + hi), branch="weak")


# ---------------------------------------------------------------------------
# manufactured maps for the finite-difference oracles

class ManufacturedPhi2D:
    """Smooth potential-difference field on x-space, n = 2."""

    def __init__(self, p, amp=0.08):
        self.p = np.asarray(p, dtype=float)
        self.amp = amp

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return (
            x @ self.p
            + self.amp * np.sin(x[..., 0]) * np.cos(0.7 * x[..., 1])
        )

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        g = np.empty_like(x)
        g[..., 0] = self.p[0] + self.amp * np.cos(x[..., 0]) * np.cos(0.7 * x[..., 1])
        g[..., 1] = self.p[1] - 0.7 * self.amp * np.sin(x[..., 0]) * np.sin(0.7 * x[..., 1])
        return g

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        s, c = np.sin(x[..., 0]), np.cos(x[..., 0])
        s2, c2 = np.sin(0.7 * x[..., 1]), np.cos(0.7 * x[..., 1])
        h = np.empty(x.shape[:-1] + (2, 2))
        h[..., 0, 0] = -self.amp * s * c2
        h[..., 0, 1] = h[..., 1, 0] = -0.7 * self.amp * c * s2
        h[..., 1, 1] = -0.49 * self.amp * s * c2
        return h


class Bump3D:
    """phi_w(x1, x3) with analytic first and second derivatives."""

    def __init__(self, delta=0.05):
        self.delta = delta

    def value(self, x1, x3):
        return self.delta * x1 * x1 * np.exp(-x1) * (1.0 + 0.3 * np.sin(x3))

    def d_x1(self, x1, x3):
        return self.delta * (2 * x1 - x1 * x1) * np.exp(-x1) * (1.0 + 0.3 * np.sin(x3))

    def d_x3(self, x1, x3):
        return self.delta * x1 * x1 * np.exp(-x1) * 0.3 * np.cos(x3)

    def d_x1x1(self, x1, x3):
        return self.delta * (2 - 4 * x1 + x1 * x1) * np.exp(-x1) * (1.0 + 0.3 * np.sin(x3))

    def d_x1x3(self, x1, x3):
        return self.delta * (2 * x1 - x1 * x1) * np.exp(-x1) * 0.3 * np.cos(x3)

    def d_x3x3(self, x1, x3):
        return -self.delta * x1 * x1 * np.exp(-x1) * 0.3 * np.sin(x3)


def invert_u_2d(y, phi, pert):
    """Solve phi(x1, y2 + phi_w(x1)) = y1 for x1 = u(y)."""

    def resid(x1):
        return phi.value(np.array([x1, y[1] + pert.value(x1)])) - y[0]

    return brentq(resid, -10.0, 30.0, xtol=1e-14, rtol=8.9e-16)


def invert_u_3d(y, phi_grad_p, bump):
    """Same inversion for n = 3 with a linear phi = p.x + quadratic tweak."""
    p, amp = phi_grad_p

    def phi_val(x):
        return x @ p + amp * np.sin(x[0]) * np.cos(0.5 * x[1]) * np.cos(0.4 * x[2])

    def resid(x1):
        x2 = y[1] + bump.value(x1, y[2])
        return phi_val(np.array([x1, x2, y[2]])) - y[0]

    return brentq(resid, -10.0, 30.0, xtol=1e-14, rtol=8.9e-16)


# ---------------------------------------------------------------------------
# pointwise kernels

def test_background_velocity_recovery(bg):
    dphi = hodograph.velocity_from_u(bg.du0, np.zeros(1))
    expected = bg.upstream - bg.downstream
    assert np.allclose(dphi, expected, atol=1e-13)


def test_jacobian_background_matches_j0(bg):
    j = hodograph.jacobian(bg.du0, np.zeros(1))
    assert np.allclose(j, bg.J0, atol=1e-13)


def test_jacobian_triangular_structure_without_perturbation():
    rng = np.random.default_rng(2)
    for n in (2, 3, 4):
        du = rng.normal(size=n)
        du[0] = 1.0 + abs(du[0])
        j = hodograph.jacobian(du, np.zeros(n - 1))
        assert j[0, 0] == 1.0
        assert np.allclose(j[0, 1:], 0.0)
        for a in range(1, n):
            assert j[a, a] == du[0]
        assert np.allclose(j[1:, 1], np.r_[du[0], np.zeros(n - 2)])


def test_jacobian_determinant_is_power_of_du1():
    rng = np.random.default_rng(8)
    for n in (2, 3, 5):
        du = rng.normal(size=n)
        du[0] = 1.3
        dphi_w = 0.2 * rng.normal(size=n - 1)
        j = hodograph.jacobian(du, dphi_w)
        assert np.linalg.det(j) == pytest.approx(du[0] ** (n - 1), rel=1e-12)


def test_chain_rule_inverse_jacobians():
    rng = np.random.default_rng(4)
    n = 3
    for _ in range(10):
        du = rng.normal(size=n)
        du[0] = 1.1 + abs(du[0])
        dphi_w = 0.3 * rng.normal(size=n - 1)
        j = hodograph.jacobian(du, dphi_w)
        dy_dx = j.T / du[0]
        dx_dy = np.zeros((n, n))
        dx_dy[0, :] = du
        dx_dy[1, :] = dphi_w[0] * du
        dx_dy[1, 1] += 1.0
        dx_dy[1, 2:] += dphi_w[1:]
        for k in range(2, n):
            dx_dy[k, k] = 1.0
        assert np.allclose(dy_dx @ dx_dy, np.eye(n), atol=1e-12)


def test_phi_w_source_vanishes_for_linear_perturbation(bg):
    rng = np.random.default_rng(6)
    du = np.array([0.8, 0.3])
    val = hodograph.source_phi_w(
        np.zeros((1, 1)), du, np.array([0.1]), bg.upstream, bg.gas
    )
    assert val == 0.0


def test_phi_w_source_linear_in_curvature(bg):
    # Phi_w = sum_{ij != 2} d2phi_w[i,j] * Phi_w^{ij}(Du; Dphi_w):
    # reassembling from the coefficient extraction must reproduce it
    rng = np.random.default_rng(9)
    n = 3
    upstream = np.array([1.2, -0.2, 0.35])
    gas = GasModel(1.4)
    du = np.array([0.9, 0.25, 0.15])
    dphi_w = np.array([0.07, -0.04])
    d2 = rng.normal(size=(2, 2))
    d2 = d2 + d2.T
    direct = hodograph.source_phi_w(d2, du, dphi_w, upstream, gas)
    assembled = 0.0
    for a in range(2):
        for b in range(2):
            basis = np.zeros((2, 2))
            basis[a, b] = 1.0
            coeff = hodograph.source_phi_w(basis, du, dphi_w, upstream, gas)
            assembled += d2[a, b] * coeff
    assert direct == pytest.approx(assembled, rel=1e-12)


def test_boundary_operators_vanish_at_background(bg):
    zero_w = np.zeros(1)
    g1 = hodograph.boundary_g1(bg.du0, zero_w, bg.upstream)
    g2 = hodograph.boundary_g2(bg.du0, zero_w, bg.upstream, bg.gas)
    assert abs(g1) < 1e-13
    assert abs(g2) < 1e-12


def test_grad_g1_matches_finite_differences(bg):
    h = 1e-7
    fd = np.zeros(2)
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd[k] = (
            hodograph.boundary_g1(bg.du0 + e, np.zeros(1), bg.upstream)
            - hodograph.boundary_g1(bg.du0 - e, np.zeros(1), bg.upstream)
        ) / (2 * h)
    analytic = hodograph.grad_g1_background(bg)
    assert np.allclose(fd, analytic, atol=1e-7)
    # proportional to (-q0- sin(alpha_w), 1): the recorded constant is -1
    direction = np.array([-bg.q0_minus * math.sin(bg.alpha_w), 1.0])
    assert np.allclose(analytic, -direction, atol=1e-12)


def test_grad_g2_resolves_transpose_question(bg):
    h = 1e-7
    fd = np.zeros(2)
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd[k] = (
            hodograph.boundary_g2(bg.du0 + e, np.zeros(1), bg.upstream, bg.gas)
            - hodograph.boundary_g2(bg.du0 - e, np.zeros(1), bg.upstream, bg.gas)
        ) / (2 * h)
    with_transpose = -(bg.k**2) * (bg.J0.T @ bg.nu)
    without_transpose = -(bg.k**2) * (bg.J0 @ bg.nu)
    assert np.allclose(fd, with_transpose, atol=1e-6)
    assert np.linalg.norm(fd - without_transpose) > 1e-3


# ---------------------------------------------------------------------------
# composed finite-difference oracles through the inverse map

def test_composition_identity_2d():
    pert = WedgePerturbation(0.04, 1.0)
    phi = ManufacturedPhi2D(p=np.array([1.1, -0.45]))
    rng = np.random.default_rng(12)
    for _ in range(10):
        y = np.array([rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0)])
        u = invert_u_2d(y, phi, pert)
        x = hodograph.inverse_map(y, u, pert)
        y_back = hodograph.forward_map(x, phi.value, pert)
        assert np.max(np.abs(y_back - y)) < 1e-10


def test_hessian_identity_2d():
    """D2x phi = -(u_y1)^{-3} J D2u J^T + J_w, via FD of the implicit u."""
    pert = WedgePerturbation(0.04, 1.0)
    phi = ManufacturedPhi2D(p=np.array([1.1, -0.45]))
    y0 = np.array([0.8, 0.9])
    h = 2e-4

    def u_at(y):
        return invert_u_2d(y, phi, pert)

    du = np.zeros(2)
    d2u = np.zeros((2, 2))
    base = u_at(y0)
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        up, dn = u_at(y0 + e), u_at(y0 - e)
        du[i] = (up - dn) / (2 * h)
        d2u[i, i] = (up - 2 * base + dn) / (h * h)
    e01 = np.array([h, h])
    e0m1 = np.array([h, -h])
    d2u[0, 1] = d2u[1, 0] = (
        u_at(y0 + e01) - u_at(y0 + e0m1) - u_at(y0 - e0m1) + u_at(y0 - e01)
    ) / (4 * h * h)

    x0 = hodograph.inverse_map(y0, base, pert)
    dphi_w = np.array([pert.d1(base)])
    d2phi_w = np.array([[pert.d2(base)]])

    j = hodograph.jacobian(du, dphi_w)
    jw = hodograph.jacobian_w(d2phi_w, du, dphi_w)
    lhs = phi.hess(x0)
    rhs = -(j @ d2u @ j.T) / du[0] ** 3 + jw
    assert np.max(np.abs(lhs - rhs)) < 2e-5
    # gradient recovery along the way
    assert np.allclose(hodograph.velocity_from_u(du, dphi_w), phi.grad(x0), atol=1e-8)


def test_hessian_identity_3d_pins_wprime_layout():
    """The n = 3 identity with x3-dependent phi_w fixes the W' block."""
    bump = Bump3D(0.05)
    p = np.array([1.15, -0.4, 0.3])
    amp = 0.05
    y0 = np.array([0.9, 0.7, 0.6])
    h = 3e-4

    def u_at(y):
        return invert_u_3d(y, (p, amp), bump)

    base = u_at(y0)
    du = np.zeros(3)
    d2u = np.zeros((3, 3))
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        up, dn = u_at(y0 + e), u_at(y0 - e)
        du[i] = (up - dn) / (2 * h)
        d2u[i, i] = (up - 2 * base + dn) / (h * h)
    for i in range(3):
        for j in range(i + 1, 3):
            ei, ej = np.zeros(3), np.zeros(3)
            ei[i], ej[j] = h, h
            d2u[i, j] = d2u[j, i] = (
                u_at(y0 + ei + ej) - u_at(y0 + ei - ej) - u_at(y0 - ei + ej) + u_at(y0 - ei - ej)
            ) / (4 * h * h)

    x2 = y0[1] + bump.value(base, y0[2])
    x0 = np.array([base, x2, y0[2]])

    def phi_val(x):
        return x @ p + amp * np.sin(x[0]) * np.cos(0.5 * x[1]) * np.cos(0.4 * x[2])

    # analytic hessian of phi
    s0, c0 = np.sin(x0[0]), np.cos(x0[0])
    s1, c1 = np.sin(0.5 * x0[1]), np.cos(0.5 * x0[1])
    s2, c2 = np.sin(0.4 * x0[2]), np.cos(0.4 * x0[2])
    hess = np.array(
        [
            [-amp * s0 * c1 * c2, -0.5 * amp * c0 * s1 * c2, -0.4 * amp * c0 * c1 * s2],
            [-0.5 * amp * c0 * s1 * c2, -0.25 * amp * s0 * c1 * c2, 0.2 * amp * s0 * s1 * s2],
            [-0.4 * amp * c0 * c1 * s2, 0.2 * amp * s0 * s1 * s2, -0.16 * amp * s0 * c1 * c2],
        ]
    )

    dphi_w = np.array([bump.d_x1(base, y0[2]), bump.d_x3(base, y0[2])])
    d2phi_w = np.array(
        [
            [bump.d_x1x1(base, y0[2]), bump.d_x1x3(base, y0[2])],
            [bump.d_x1x3(base, y0[2]), bump.d_x3x3(base, y0[2])],
        ]
    )
    j = hodograph.jacobian(du, dphi_w)
    jw = hodograph.jacobian_w(d2phi_w, du, dphi_w)
    rhs = -(j @ d2u @ j.T) / du[0] ** 3 + jw
    assert np.max(np.abs(hess - rhs)) < 5e-5

    # trace version: the full interior residual agrees with the x-space form
    gas = GasModel(1.4)
    upstream = np.array([1.4, -0.3, 0.3])
    dphi = hodograph.velocity_from_u(du, dphi_w)
    a = gas.coefficient_matrix(upstream - dphi)
    res_x = np.einsum("ij,ij->", a, hess)
    res_y = hodograph.interior_residual(d2u, du, dphi_w, d2phi_w, upstream, gas)
    # -(u1)^{-3} tr(A~ D2u) + Phi_w = tr(A D2x phi) by the Hessian identity
    assert res_x == pytest.approx(res_y, abs=5e-5)


def test_perturbation_template_edge_conditions():
    pert = WedgePerturbation(0.3, 1.0)
    assert pert.value(0.0) == 0.0
    assert pert.d1(0.0) == 0.0
    x = np.linspace(0, 30, 200)
    assert np.max(np.abs(pert.value(x))) < 2.0 * 0.3
    h = 1e-6
    xs = np.array([0.3, 1.0, 2.7])
    fd1 = (pert.value(xs + h) - pert.value(xs - h)) / (2 * h)
    fd2 = (pert.value(xs + h) - 2 * pert.value(xs) + pert.value(xs - h)) / (h * h)
    assert np.allclose(fd1, pert.d1(xs), atol=1e-9)
    assert np.allclose(fd2, pert.d2(xs), atol=1e-4)
