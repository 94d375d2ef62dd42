"""The partial hodograph transformation and the nonlinear operators on
the fixed quarter-plane domain.

The free shock front is frozen by the change of variables

    y = (phi(x), x2 - phi_w(x1, x'), x'),

whose inverse is x = (u(y), y2 + phi_w(u(y), y'), y').  Everything the
nonlinear problem needs is a pointwise algebraic function of Du, the
wedge-perturbation derivatives evaluated at x1 = u, and the (constant)
upstream gradient:

* the recovered gradient Dphi and the Jacobi factor J with
  dy/dx = J^T / (du/dy1);
* the transformed coefficients A~ = J^T A J and the source term
  Phi_w = tr(A J_w) collecting the second derivatives of phi_w;
* the two boundary operators: G1 (rigidity on the wedge image y2 = 0)
  and G2 (the jump relation on the shock image y1 = 0).

All kernels are vectorized over a leading batch of points; vectors of
phi_w-derivatives are ordered (x1, x3, ..., xn), i.e. the x2 slot -- on
which phi_w never depends -- is skipped.
"""

import numpy as np

from .background import BackgroundShock
from .errors import NonInvertibleError
from .gas import GasModel
from .polar import jump_function

_EPS = 1e-14


def _as_batch(a, ncomp):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.shape[-1] != ncomp:
        raise ValueError(f"expected {ncomp} components, got {a.shape[-1]}")
    return a


def _full_dphi_w(dphi_w, n):
    """Insert the zero x2-slot: (w1, w3, ..., wn) -> (w1, 0, w3, ..., wn)."""
    out = np.zeros(dphi_w.shape[:-1] + (n,))
    out[..., 0] = dphi_w[..., 0]
    out[..., 2:] = dphi_w[..., 1:]
    return out


def velocity_from_u(du, dphi_w):
    """Recover Dphi from Du and the wedge-surface slope.

    Dphi = (1 + w1 u_{y2}, -u_{y2}, -u_{y3} + w3 u_{y2}, ...) / u_{y1}.
    """
    du = np.asarray(du, dtype=float)
    squeeze = du.ndim == 1
    n = du.shape[-1]
    du = _as_batch(du, n)
    dphi_w = _as_batch(dphi_w, n - 1)
    u1 = du[..., 0]
    if np.any(np.abs(u1) < _EPS):
        raise NonInvertibleError("du/dy1 vanished: hodograph map not invertible")
    u2 = du[..., 1]
    out = np.empty_like(du)
    out[..., 0] = 1.0 + dphi_w[..., 0] * u2
    out[..., 1] = -u2
    out[..., 2:] = -du[..., 2:] + dphi_w[..., 1:] * u2[..., None]
    out = out / u1[..., None]
    return out[0] if squeeze else out


def jacobian(du, dphi_w):
    """The matrix J with dy/dx = J^T / u_{y1}.

    The cross terms cancel in the determinant: det J = (u_{y1})^{n-1}
    exactly (checked against numeric determinants in tests).
    """
    du = np.asarray(du, dtype=float)
    squeeze = du.ndim == 1
    n = du.shape[-1]
    du = _as_batch(du, n)
    dphi_w = _as_batch(dphi_w, n - 1)
    m = du.shape[0]
    u1, u2 = du[..., 0], du[..., 1]
    w1 = dphi_w[..., 0]
    j = np.zeros((m, n, n))
    j[..., 0, 0] = 1.0 + w1 * u2
    j[..., 0, 1] = -w1 * u1
    j[..., 1, 0] = -u2
    j[..., 1, 1] = u1
    for a in range(2, n):
        wa = dphi_w[..., a - 1]
        j[..., a, 0] = -du[..., a] + wa * u2
        j[..., a, 1] = -wa * u1
        j[..., a, a] = u1
    return j[0] if squeeze else j


def jacobian_w(d2phi_w, du, dphi_w):
    """The second-derivative block J_w of the transformed Hessian:

        J_w = u_{y2}/u_{y1}^2 (W_1 (Du)^T + W' dy'/dy) J^T,

    where W_j stacks the phi_w second derivatives with a zero x2 slot and
    dy'/dy = [0 | I].  The index layout is the one pinned down by the
    chain-rule consistency of the full Hessian identity (see tests).
    """
    du = np.asarray(du, dtype=float)
    squeeze = du.ndim == 1
    n = du.shape[-1]
    du = _as_batch(du, n)
    dphi_w = _as_batch(dphi_w, n - 1)
    d2 = np.asarray(d2phi_w, dtype=float)
    if d2.ndim == 2:
        d2 = d2[None, :, :]
    m = du.shape[0]
    if d2.shape[-2:] != (n - 1, n - 1):
        raise ValueError(f"d2phi_w must be (..., {n-1}, {n-1})")
    u1, u2 = du[..., 0], du[..., 1]
    s = u2 / (u1 * u1)

    # W_1 and the columns of W' share the zero x2 slot
    w_all = np.zeros((m, n - 1, n))
    w_all[..., 0] = d2[..., 0]
    w_all[..., 2:] = d2[..., 1:]
    w1 = w_all[:, 0, :]
    core = w1[:, :, None] * du[:, None, :]
    if n > 2:
        w_prime = np.transpose(w_all[:, 1:, :], (0, 2, 1))  # (m, n, n-2)
        e = np.zeros((n - 2, n))
        e[:, 2:] = np.eye(n - 2)
        core = core + w_prime @ e
    j = jacobian(du, dphi_w)
    if j.ndim == 2:
        j = j[None]
    jw = s[:, None, None] * (core @ np.transpose(j, (0, 2, 1)))
    return jw[0] if squeeze else jw


def coefficients(du, dphi_minus, dphi_w, gas: GasModel):
    """A~ = J^T A(Dphi- - Dphi) J, the transformed interior coefficients."""
    du = np.asarray(du, dtype=float)
    squeeze = du.ndim == 1
    n = du.shape[-1]
    dphi = velocity_from_u(du, dphi_w)
    if dphi.ndim == 1:
        dphi = dphi[None]
    downstream = np.asarray(dphi_minus, dtype=float) - dphi
    a = gas.coefficient_matrix(downstream)
    j = jacobian(du, dphi_w)
    if j.ndim == 2:
        j = j[None]
    at = np.transpose(j, (0, 2, 1)) @ a @ j
    return at[0] if squeeze else at


def source_phi_w(d2phi_w, du, dphi_w, dphi_minus, gas: GasModel):
    """Phi_w = tr(A J_w); vanishes whenever phi_w has no curvature."""
    du = np.asarray(du, dtype=float)
    squeeze = du.ndim == 1
    dphi = velocity_from_u(du, dphi_w)
    if dphi.ndim == 1:
        dphi = dphi[None]
    downstream = np.asarray(dphi_minus, dtype=float) - dphi
    a = gas.coefficient_matrix(downstream)
    jw = jacobian_w(d2phi_w, du, dphi_w)
    if jw.ndim == 2:
        jw = jw[None]
    phi = np.einsum("...ij,...ji->...", a, jw)
    return phi[0] if squeeze else phi


def boundary_g1(du, dphi_w, dphi_minus):
    """Rigidity residual on the wedge image y2 = 0."""
    du = np.asarray(du, dtype=float)
    squeeze = du.ndim == 1
    n = du.shape[-1]
    du = _as_batch(du, n)
    dphi_w = _as_batch(dphi_w, n - 1)
    pm = np.asarray(dphi_minus, dtype=float)
    if pm.ndim == 1:
        pm = pm[None, :]
    w1 = dphi_w[..., 0]
    wj = dphi_w[..., 1:]
    lead = w1 * pm[..., 0] - pm[..., 1] + np.sum(wj * pm[..., 2:], axis=-1)
    w_sq = w1 * w1 + np.sum(wj * wj, axis=-1)
    g = (
        lead * du[..., 0]
        - (1.0 + w_sq) * du[..., 1]
        + np.sum(wj * du[..., 2:], axis=-1)
        - w1
    )
    return g[0] if squeeze else g


def boundary_g2(du, dphi_w, dphi_minus, gas: GasModel):
    """Jump-relation residual on the shock image y1 = 0."""
    dphi = velocity_from_u(du, dphi_w)
    return jump_function(gas, dphi, np.asarray(dphi_minus, dtype=float))


def boundary_g(du, dphi_w, dphi_minus, gas: GasModel):
    return (
        boundary_g1(du, dphi_w, dphi_minus),
        boundary_g2(du, dphi_w, dphi_minus, gas),
    )


def interior_residual(d2u, du, dphi_w, d2phi_w, dphi_minus, gas: GasModel):
    """Pointwise residual of the transformed potential equation,

        -(u_{y1})^{-3} sum a~_ij u_{y_i y_j} + Phi_w.
    """
    du = np.asarray(du, dtype=float)
    squeeze = du.ndim == 1
    du_b = _as_batch(du, du.shape[-1])
    d2u = np.asarray(d2u, dtype=float)
    if d2u.ndim == 2:
        d2u = d2u[None]
    at = coefficients(du, dphi_minus, dphi_w, gas)
    if at.ndim == 2:
        at = at[None]
    phi_w = source_phi_w(d2phi_w, du, dphi_w, dphi_minus, gas)
    phi_w = np.atleast_1d(phi_w)
    u1 = du_b[..., 0]
    res = -np.einsum("...ij,...ij->...", at, d2u) / u1**3 + phi_w
    return res[0] if squeeze else res


class WedgePerturbation:
    """Closed-form wedge-surface bump delta * x1^2 exp(-decay x1).

    Vanishes with its slope at the edge (the unperturbed-edge condition)
    and decays downstream; all derivatives are analytic, so compositions
    phi_w(u(y), y') never involve numerical differentiation.
    """

    def __init__(self, delta, decay=1.0):
        self.delta = float(delta)
        self.decay = float(decay)

    def value(self, x1):
        x1 = np.asarray(x1, dtype=float)
        return self.delta * x1 * x1 * np.exp(-self.decay * x1)

    def d1(self, x1):
        x1 = np.asarray(x1, dtype=float)
        return self.delta * (2.0 * x1 - self.decay * x1 * x1) * np.exp(-self.decay * x1)

    def d2(self, x1):
        x1 = np.asarray(x1, dtype=float)
        k = self.decay
        return self.delta * (2.0 - 4.0 * k * x1 + k * k * x1 * x1) * np.exp(-k * x1)

    def scaled(self, delta):
        return WedgePerturbation(delta, self.decay)


def forward_map(x, phi, pert: WedgePerturbation):
    """y = (phi(x), x2 - phi_w(x1, x'), x') for a callable phi(x)."""
    x = np.asarray(x, dtype=float)
    y = x.copy()
    y[..., 0] = phi(x)
    y[..., 1] = x[..., 1] - pert.value(x[..., 0])
    return y


def inverse_map(y, u_value, pert: WedgePerturbation):
    """x = (u, y2 + phi_w(u, y'), y') given the unknown's value u(y)."""
    y = np.asarray(y, dtype=float)
    x = y.copy()
    x[..., 0] = u_value
    x[..., 1] = y[..., 1] + pert.value(u_value)
    return x


def grad_g1_background(bg: BackgroundShock):
    """Analytic gradient of G1 in Du at the background.

    Constant in Du because G1(Du; 0) = q0- sin(alpha_w) u_{y1} - u_{y2}.
    """
    return bg.grad_g_wedge()


def grad_g2_background(bg: BackgroundShock):
    """Analytic gradient of G2 in Du at the background,
    -(du0/dy1)^{-2} J0^T nu (the transpose resolves the J0-vs-J0^T
    ambiguity; confirmed against finite differences in tests)."""
    return bg.grad_g_shock()
