"""The unperturbed shock solution in the wedge-aligned frame.

Frame convention: x1 lies in the wedge surface perpendicular to the edge,
x2 is perpendicular to the wedge surface (pointing into the flow), and x3
is aligned with the edge-tangential component of the downstream velocity.
Upstream then reads

    U- = (q0- cos(alpha_w), -q0- sin(alpha_w), u03, 0, ...),

and downstream U+ = q0+ (cos(omega1), 0, cos(omega3), 0, ...) with
cos^2(omega1) + cos^2(omega3) = 1 and u03 = q0+ cos(omega3).

The module also assembles every matrix the linear theory consumes: the
coefficient matrix A0 at the downstream state, the hodograph Jacobian J0,
the canonical transforms taking the constant-coefficient operator to the
Laplacian on a sector, the sector opening omega_s, the oblique angle
phi_s, and the stability exponent sigma_s = phi_s / omega_s whose sign
separates weak from strong transonic shocks.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import polar
from .errors import DegenerateEllipticityError, DetachedWedgeError, WedgeShockError
from .gas import GasModel

WEAK = "weak"
STRONG = "strong"


@dataclass(frozen=True)
class StabilityExponents:
    """Sector opening, oblique angle and their ratio for a background.

    For a skew background (omega1 != 0) these are the tilded quantities
    built with the in-plane Mach factor sqrt(1 - M^2 cos^2 omega1); the
    plain perpendicular-formula values are kept alongside for comparison
    and coincide when omega1 = 0.
    """

    omega_s: float
    phi_s: float
    sigma_s: float
    omega_s_perp: float | None = None
    phi_s_perp: float | None = None
    sigma_s_perp: float | None = None


@dataclass(frozen=True)
class WeightWindow:
    """Admissible weight exponents (gradient convention).

    sigma_inf ranges over (lo, hi], sigma0 over [lo, hi) -- with an open
    lower end in the higher-dimensional case; empty when the criterion
    fails.
    """

    sigma_inf_range: tuple | None
    sigma0_range: tuple | None
    sigma0_lo_open: bool = False

    @property
    def empty(self):
        if self.sigma_inf_range is None or self.sigma0_range is None:
            return True
        return (
            self.sigma_inf_range[0] >= self.sigma_inf_range[1]
            or self.sigma0_range[0] >= self.sigma0_range[1]
        )

    def contains(self, sigma_inf, sigma0):
        if self.empty:
            return False
        lo_i, hi_i = self.sigma_inf_range
        lo_0, hi_0 = self.sigma0_range
        ok_lo = lo_0 < sigma0 if self.sigma0_lo_open else lo_0 <= sigma0
        return lo_i < sigma_inf <= hi_i and ok_lo and sigma0 < hi_0


@dataclass(frozen=True)
class Transforms:
    """Linear maps taking the background operator to the Laplacian.

    P is the perpendicular-case transform A0^(-1/2) (J0^(-1))^T with
    P J0^T A0 J0 P^T = I; P0 is the skew normalization (identity when
    omega1 = 0).  `sector` is the map actually applied to y before a
    sector solve, and `laplace_scale` the constant s in
    tr(A0~ D^2_y u) = s * Laplacian_X u under that map.
    """

    P: np.ndarray
    P0: np.ndarray
    sector: np.ndarray
    laplace_scale: float


@dataclass(frozen=True)
class BackgroundShock:
    n: int
    gamma: float
    alpha_w: float
    q0_minus: float
    u03_minus: float
    branch: str
    q0_plus: float
    omega1: float
    omega3: float
    upstream: np.ndarray = field(repr=False)
    downstream: np.ndarray = field(repr=False)
    nu: np.ndarray = field(repr=False)
    A0: np.ndarray = field(repr=False)
    J0: np.ndarray = field(repr=False)
    exponents: StabilityExponents = None
    transforms: Transforms = None

    @property
    def gas(self):
        return GasModel(self.gamma)

    @property
    def k(self):
        """d(phi0)/d(x1) = q0- cos(alpha_w) - q0+ cos(omega1) > 0."""
        return self.q0_minus * math.cos(self.alpha_w) - self.q0_plus * math.cos(self.omega1)

    @property
    def du0_dy1(self):
        return 1.0 / self.k

    @property
    def du0(self):
        """Gradient of the background inverse-hodograph unknown u0."""
        g = np.zeros(self.n)
        g[0] = 1.0 / self.k
        g[1] = self.q0_minus * math.sin(self.alpha_w) / self.k
        return g

    def u0(self, y1, y2):
        return (np.asarray(y1) + np.asarray(y2) * self.q0_minus * math.sin(self.alpha_w)) / self.k

    @property
    def c_plus(self):
        return float(self.gas.sound_speed(self.q0_plus**2))

    @property
    def mach_plus(self):
        return self.q0_plus / self.c_plus

    @property
    def transonic(self):
        return self.q0_plus < self.gas.q_cr

    @property
    def omega_s(self):
        return self.exponents.omega_s

    @property
    def phi_s(self):
        return self.exponents.phi_s

    @property
    def sigma_s(self):
        return self.exponents.sigma_s

    @property
    def nu_ratio(self):
        """nu1/nu2 in the wedge-aligned frame; positive exactly for weak
        transonic backgrounds."""
        return float(self.nu[0] / self.nu[1])

    def coefficient_matrix_tilde(self):
        """A0~ = J0^T A0 J0, the constant coefficients of the linearized
        interior operator."""
        return self.J0.T @ self.A0 @ self.J0

    def grad_g_wedge(self):
        """Gradient of the wedge boundary operator at the background,
        proportional to (-q0- sin(alpha_w), 1, 0, ...)."""
        b = np.zeros(self.n)
        b[0] = self.q0_minus * math.sin(self.alpha_w)
        b[1] = -1.0
        return b

    def grad_g_shock(self):
        """Gradient of the shock boundary operator at the background:
        -(du0/dy1)^(-2) J0^T nu."""
        return -(self.k**2) * (self.J0.T @ self.nu)

    def to_record(self):
        """Flat key-value record (JSON-compatible) of the background."""
        rec = {
            "n": self.n,
            "gamma": self.gamma,
            "alpha_w": self.alpha_w,
            "q0_minus": self.q0_minus,
            "u03_minus": self.u03_minus,
            "branch": self.branch,
            "q0_plus": self.q0_plus,
            "omega1": self.omega1,
            "omega3": self.omega3,
            "c_plus": self.c_plus,
            "mach_plus": float(self.mach_plus),
            "transonic": bool(self.transonic),
            "k": self.k,
            "nu_ratio": self.nu_ratio,
            "omega_s": self.exponents.omega_s,
            "phi_s": self.exponents.phi_s,
            "sigma_s": self.exponents.sigma_s,
        }
        for name, mat in (
            ("A0", self.A0),
            ("J0", self.J0),
            ("P", self.transforms.P),
            ("P0", self.transforms.P0),
        ):
            for i in range(self.n):
                for j in range(self.n):
                    rec[f"{name}_{i}{j}"] = float(mat[i, j])
        for i in range(self.n):
            rec[f"nu_{i}"] = float(self.nu[i])
            rec[f"upstream_{i}"] = float(self.upstream[i])
            rec[f"downstream_{i}"] = float(self.downstream[i])
        return rec


def _j0_matrix(n, k, q0_minus, alpha_w):
    j0 = np.eye(n)
    j0[1, 0] = -q0_minus * math.sin(alpha_w)
    j0[0, 0] = k
    return j0 / k


def _inv_sqrt_spd(a):
    # diagonal shortcut (exact in the perpendicular frame)
    if np.allclose(a, np.diag(np.diagonal(a)), atol=1e-14):
        d = np.diagonal(a)
        if np.any(d <= 0):
            raise DegenerateEllipticityError("coefficient matrix not positive definite")
        return np.diag(1.0 / np.sqrt(d))
    w, v = np.linalg.eigh(a)
    if np.any(w <= 0):
        raise DegenerateEllipticityError("coefficient matrix not positive definite")
    return (v / np.sqrt(w)) @ v.T


def stability_exponents(bg: BackgroundShock) -> StabilityExponents:
    """Exponents {omega_s, phi_s, sigma_s} of a transonic background."""
    if bg.exponents is None:
        raise DegenerateEllipticityError("downstream state is not elliptic")
    return bg.exponents


def _exponents_from(gamma, alpha_w, q0_minus, q0_plus, omega1, nu) -> StabilityExponents:
    gas = GasModel(gamma)
    c_plus = float(gas.sound_speed(q0_plus**2))
    mach = q0_plus / c_plus
    cos_w1 = math.cos(omega1)
    if mach * abs(cos_w1) >= 1.0:
        raise DegenerateEllipticityError(
            f"in-plane Mach number {mach * cos_w1} >= 1: interior operator degenerates"
        )
    k = q0_minus * math.cos(alpha_w) - q0_plus * cos_w1
    s = q0_minus * math.sin(alpha_w)
    ratio = nu[0] / nu[1]

    fac = math.sqrt(1.0 - (mach * cos_w1) ** 2)
    omega_s = math.atan2(k * fac, s)
    phi_s = math.atan(ratio / fac)
    sigma_s = phi_s / omega_s

    perp = (None, None, None)
    if mach < 1.0:
        fac_p = math.sqrt(1.0 - mach * mach)
        omega_p = math.atan2((q0_minus * math.cos(alpha_w) - q0_plus) * fac_p, s)
        phi_p = math.atan(ratio / fac_p)
        perp = (omega_p, phi_p, phi_p / omega_p)
    return StabilityExponents(omega_s, phi_s, sigma_s, *perp)


def canonical_transforms(bg: BackgroundShock) -> Transforms:
    n = bg.n
    mach = bg.mach_plus
    if mach >= 1.0:
        raise DegenerateEllipticityError("canonical transforms need a transonic background")
    j0_inv_t = np.linalg.inv(bg.J0).T
    p = _inv_sqrt_spd(bg.A0) @ j0_inv_t

    cos_w1 = math.cos(bg.omega1)
    cos_w3 = math.cos(bg.omega3)
    p0 = np.eye(n)
    if abs(cos_w1) > 1e-14 and n >= 3:
        m_sq = mach * mach
        a = 1.0 - m_sq * cos_w1 * cos_w1
        p0[0, 0] = 1.0 / math.sqrt(a)
        p0[2, 0] = m_sq * cos_w1 * cos_w3 / math.sqrt((1.0 - m_sq) * a)
        p0[2, 2] = math.sqrt(a / (1.0 - m_sq))
        sector = p0 @ j0_inv_t
        scale = bg.c_plus**2
    else:
        sector = p
        scale = 1.0
    return Transforms(P=p, P0=p0, sector=sector, laplace_scale=scale)


def solve_background(gamma, q0_minus, alpha_w, u03_minus=0.0, branch=WEAK, n=None):
    """Assemble the full unperturbed solution for the given wedge data.

    Raises DetachedWedgeError past the critical angle.  The returned
    object is immutable and carries every derived matrix; exponents are
    computed whenever the downstream state keeps the interior operator
    elliptic (always for transonic branches).
    """
    if branch not in (WEAK, STRONG):
        raise WedgeShockError(f"branch must be 'weak' or 'strong', got {branch!r}")
    if n is None:
        n = 2 if u03_minus == 0.0 else 3
    if n < 2 or (n == 2 and u03_minus != 0.0):
        raise WedgeShockError(f"dimension n={n} incompatible with u03={u03_minus}")
    gas = GasModel(gamma)

    sols = polar.wedge_solutions(gas, q0_minus, alpha_w, q_edge=u03_minus)
    if sols.detached:
        raise DetachedWedgeError(
            f"alpha_w={alpha_w} exceeds the critical angle {sols.critical_angle}"
        )
    pt = sols.weak if branch == WEAK else sols.strong
    v_pl = math.hypot(pt.v1, pt.v2)
    q0_plus = math.sqrt(v_pl**2 + u03_minus**2)
    omega1 = math.acos(min(v_pl / q0_plus, 1.0))
    omega3 = math.acos(max(min(u03_minus / q0_plus, 1.0), -1.0))

    upstream = np.zeros(n)
    upstream[0] = q0_minus * math.cos(alpha_w)
    upstream[1] = -q0_minus * math.sin(alpha_w)
    if n >= 3:
        upstream[2] = u03_minus
    downstream = np.zeros(n)
    downstream[0] = q0_plus * math.cos(omega1)
    if n >= 3:
        downstream[2] = q0_plus * math.cos(omega3)

    p0_vec = upstream - downstream
    k = p0_vec[0]
    if not k > 0:
        raise WedgeShockError(
            f"background with d(phi0)/d(x1) = {k} <= 0: hodograph not invertible"
        )
    nu = polar.jump_gradient(gas, p0_vec, upstream)

    a0 = gas.coefficient_matrix(downstream)
    j0 = _j0_matrix(n, k, q0_minus, alpha_w)

    exponents = None
    mach_inplane = v_pl / gas.sound_speed(q0_plus**2)
    if mach_inplane < 1.0:
        exponents = _exponents_from(gamma, alpha_w, q0_minus, q0_plus, omega1, nu)

    bg = BackgroundShock(
        n=n,
        gamma=gamma,
        alpha_w=alpha_w,
        q0_minus=q0_minus,
        u03_minus=u03_minus,
        branch=branch,
        q0_plus=q0_plus,
        omega1=omega1,
        omega3=omega3,
        upstream=upstream,
        downstream=downstream,
        nu=nu,
        A0=a0,
        J0=j0,
        exponents=exponents,
    )
    transforms = None
    if bg.mach_plus < 1.0:
        transforms = canonical_transforms(bg)
    object.__setattr__(bg, "transforms", transforms)

    _check_invariants(bg)
    return bg


def _check_invariants(bg: BackgroundShock):
    c1, c3 = math.cos(bg.omega1), math.cos(bg.omega3)
    if abs(c1 * c1 + c3 * c3 - 1.0) > 1e-12:
        raise WedgeShockError("direction cosines violate cos^2 w1 + cos^2 w3 = 1")
    if abs(bg.u03_minus - bg.q0_plus * c3) > 1e-10:
        raise WedgeShockError("edge-tangential component not continuous across the shock")
    residual = polar.jump_function(bg.gas, bg.upstream - bg.downstream, bg.upstream)
    if abs(residual) > 1e-9:
        raise WedgeShockError(f"background jump residual {residual} too large")
    if bg.exponents is not None:
        if not (0 < bg.exponents.omega_s < 0.5 * math.pi):
            raise WedgeShockError(f"omega_s={bg.exponents.omega_s} outside (0, pi/2)")
        if not (-0.5 * math.pi < bg.exponents.phi_s < 0.5 * math.pi):
            raise WedgeShockError(f"phi_s={bg.exponents.phi_s} outside (-pi/2, pi/2)")


def admissible_weights(bg: BackgroundShock, dim) -> WeightWindow:
    """Admissible (sigma_inf, sigma0) windows, gradient convention.

    dim >= 3: nonempty only for weak transonic backgrounds
    (sigma_s > 0), with sigma_inf in (-1, 0] and sigma0 in (0, sigma_s).
    dim == 2: weak gives sigma0 in [0, sigma_s); strong gives
    sigma_inf in (max(-1, sigma_s), 0] and sigma0 in [0, pi/omega_s + sigma_s).
    """
    if bg.exponents is None:
        raise DegenerateEllipticityError("background has no elliptic downstream state")
    sig = bg.exponents.sigma_s
    om = bg.exponents.omega_s
    if dim >= 3:
        if sig > 0:
            return WeightWindow((-1.0, 0.0), (0.0, sig), sigma0_lo_open=True)
        return WeightWindow(None, None)
    if sig > 0:
        return WeightWindow((-1.0, 0.0), (0.0, sig))
    if sig < 0:
        return WeightWindow((max(-1.0, sig), 0.0), (0.0, math.pi / om + sig))
    return WeightWindow(None, None)
