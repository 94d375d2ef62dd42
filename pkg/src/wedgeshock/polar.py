"""Shock polar and shock balloon for steady potential flow.

The upstream state is (q0, 0, ..., 0) in the polar frame, optionally with
an edge-tangential component q_edge carried unchanged across the shock.
Admissible downstream velocities (v1, v2) satisfy the jump relation

    (rho + rho-) q0 v1 - rho q^2 - rho- q0^2 = 0,

where the densities are evaluated at the *full* squared speeds, i.e. with
q_edge^2 added.  The edge-tangential terms cancel identically in the jump
relation, so the balloon cut by the edge constraint is again a 2-D polar
with shifted density arguments; that is the single code path used here
for both the planar and the higher-dimensional case.

A wedge ray v2 = v1 tan(theta_w) meets the polar loop in two points:
the strong solution (smaller v1) and the weak one (larger v1).  They
coalesce at the critical angle, beyond which the shock detaches.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import DetachedWedgeError, NoRootError
from .gas import GasModel

RH_TOL = 1e-12

WEAK_TRANSONIC = "weak_transonic"
WEAK_SUPERSONIC = "weak_supersonic"
STRONG_TRANSONIC = "strong_transonic"
CRITICAL = "critical"


@dataclass(frozen=True)
class PolarPoint:
    """A downstream state on the shock polar.

    v1, v2 are the in-plane components in the polar frame (upstream along
    the v1-axis), v_t the edge-tangential components.  q and rho are the
    full downstream speed and density.
    """

    v1: float
    v2: float
    v_t: tuple = ()
    q: float = 0.0
    rho: float = 0.0

    @property
    def velocity(self):
        return np.array([self.v1, self.v2, *self.v_t])


@dataclass(frozen=True)
class WedgeSolutions:
    strong: PolarPoint | None
    weak: PolarPoint | None
    detached: bool
    critical_angle: float


@dataclass(frozen=True)
class PolarNormal:
    """Gradient of the jump function H_s in Dphi at a polar point.

    Unnormalized; only the direction (and the ratio nu1/nu2 after the
    frame rotation) is contractual.
    """

    nu: np.ndarray = field(repr=False, default=None)

    @property
    def nu1(self):
        return float(self.nu[0])

    @property
    def nu2(self):
        return float(self.nu[1])


def jump_function(gas: GasModel, p, p_minus):
    """H_s(p; p-) = p . (rho(|p- - p|^2)(p- - p) - rho(|p-|^2) p-).

    p = Dphi- - Dphi+ is the gradient of the potential difference; the
    downstream velocity is p- - p.
    """
    p = np.asarray(p, dtype=float)
    p_minus = np.asarray(p_minus, dtype=float)
    w = p_minus - p
    rho = gas.density(np.sum(w * w, axis=-1))
    rho_minus = gas.density(np.sum(p_minus * p_minus, axis=-1))
    flux = rho[..., None] * w - rho_minus[..., None] * p_minus
    return np.sum(p * flux, axis=-1)


def jump_gradient(gas: GasModel, p, p_minus):
    """Analytic gradient of jump_function with respect to p.

    At a background state this is the paper-normal of the shock balloon:
    with w = p- - p (downstream velocity),

        grad = rho w - rho- p- - 2 rho'(|w|^2) (p . w) w - rho p.
    """
    p = np.asarray(p, dtype=float)
    p_minus = np.asarray(p_minus, dtype=float)
    w = p_minus - p
    w_sq = np.sum(w * w, axis=-1)
    rho = gas.density(w_sq)
    drho = gas.density_dq_sq(w_sq)
    rho_minus = gas.density(np.sum(p_minus * p_minus, axis=-1))
    p_dot_w = np.sum(p * w, axis=-1)
    return (
        rho[..., None] * w
        - rho_minus[..., None] * p_minus
        - 2.0 * (drho * p_dot_w)[..., None] * w
        - rho[..., None] * p
    )


def balloon_residual(gas: GasModel, q0, v1, v2, q_edge=0.0):
    """(rho + rho-) q0 v1 - rho q_pl^2 - rho- q0^2 with shifted densities."""
    e2 = q_edge * q_edge
    s = v1 * v1 + v2 * v2
    rho = gas.density(s + e2)
    rho_minus = gas.density(q0 * q0 + e2)
    return (rho + rho_minus) * q0 * v1 - rho * s - rho_minus * q0 * q0


def planar_critical_speed(gas: GasModel, q_edge=0.0):
    """In-plane speed at which the in-plane mass flux rho(v^2+e^2) v peaks.

    Closed form v^2 = (2 - (gamma-1) e^2) / (gamma+1); it is also the
    speed at which the in-plane component equals the local sound speed.
    """
    v_sq = (2.0 - (gas.gamma - 1.0) * q_edge * q_edge) / (gas.gamma + 1.0)
    if v_sq <= 0:
        raise NoRootError("edge-tangential speed leaves no in-plane sonic speed")
    return math.sqrt(v_sq)


def normal_shock_speed(gas: GasModel, q0, q_edge=0.0):
    """Subsonic in-plane root of the mass-flux identity rho(v^2+e^2) v = rho- q0.

    This is the v2 = 0 endpoint of the polar loop opposite to the trivial
    point v1 = q0.
    """
    e2 = q_edge * q_edge
    _require_supersonic(gas, q0, q_edge)
    target = gas.density(q0 * q0 + e2) * q0
    v_cr = planar_critical_speed(gas, q_edge)

    def flux_defect(v):
        return gas.density(v * v + e2) * v - target

    lo = 1e-14
    if flux_defect(lo) >= 0 or flux_defect(v_cr) <= 0:
        raise NoRootError(f"no normal-shock root for q0={q0}, q_edge={q_edge}")
    return brentq(flux_defect, lo, v_cr, xtol=1e-15, rtol=8.9e-16)


def _require_supersonic(gas: GasModel, q0, q_edge):
    v_cr = planar_critical_speed(gas, q_edge)
    if not q0 > v_cr:
        raise NoRootError(
            f"upstream in-plane speed q0={q0} must exceed the in-plane "
            f"sonic speed {v_cr} for a shock polar to exist"
        )
    e2 = q_edge * q_edge
    if q0 * q0 + e2 >= gas.q_max_sq:
        raise NoRootError("upstream state beyond the cavitation speed")


def polar_transverse_speed(gas: GasModel, q0, v1, q_edge=0.0):
    """Transverse speed v2 >= 0 solving the jump relation at given v1.

    The relation is strictly decreasing in q^2 on the bracket, so a
    bracketed Brent solve lands the residual at machine precision.
    """
    _require_supersonic(gas, q0, q_edge)
    e2 = q_edge * q_edge
    v1n = normal_shock_speed(gas, q0, q_edge)
    if v1 < v1n - 1e-12 or v1 > q0 + 1e-12:
        raise NoRootError(f"v1={v1} outside the polar range [{v1n}, {q0}]")
    v1 = min(max(v1, v1n), q0)

    def resid(s):
        rho = gas.density(s + e2)
        rho_minus = gas.density(q0 * q0 + e2)
        return (rho + rho_minus) * q0 * v1 - rho * s - rho_minus * q0 * q0

    lo = v1 * v1
    hi = min(q0 * v1, gas.q_max_sq - e2)
    r_lo = resid(lo)
    if abs(r_lo) < RH_TOL or hi <= lo:
        return 0.0
    if r_lo < 0:
        raise NoRootError(f"v1={v1} admits no transverse root")
    s = brentq(resid, lo, hi, xtol=1e-16, rtol=8.9e-16)
    return math.sqrt(max(s - v1 * v1, 0.0))


def polar_point(gas: GasModel, q0, v1, q_edge=0.0):
    v2 = polar_transverse_speed(gas, q0, v1, q_edge)
    q_sq = v1 * v1 + v2 * v2 + q_edge * q_edge
    v_t = (q_edge,) if q_edge != 0.0 else ()
    return PolarPoint(v1=v1, v2=v2, v_t=v_t, q=math.sqrt(q_sq), rho=float(gas.density(q_sq)))


def deflection(gas: GasModel, q0, v1, q_edge=0.0):
    """Flow deflection arctan(v2/v1) at the polar point with abscissa v1."""
    v2 = polar_transverse_speed(gas, q0, v1, q_edge)
    return math.atan2(v2, v1)


def _golden_max(f, a, b, tol=1e-12):
    """Golden-section maximizer on [a, b]; returns (x, f(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    invphi2 = (3.0 - math.sqrt(5.0)) / 2.0
    h = b - a
    c, d = a + invphi2 * h, a + invphi * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + invphi2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + invphi * h
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


@lru_cache(maxsize=256)
def _deflection_maximum_cached(gamma, q0, q_edge):
    gas = GasModel(gamma)
    v1n = normal_shock_speed(gas, q0, q_edge)
    return _golden_max(lambda v1: deflection(gas, q0, v1, q_edge), v1n, q0, tol=1e-12)


def deflection_maximum(gas: GasModel, q0, q_edge=0.0):
    """(v1*, theta_max): abscissa and value of the deflection maximum."""
    return _deflection_maximum_cached(gas.gamma, float(q0), float(q_edge))


def critical_angle(gas: GasModel, q0, q_edge=0.0):
    """Largest attainable flow deflection over the polar."""
    return deflection_maximum(gas, q0, q_edge)[1]


def sonic_deflection(gas: GasModel, q0, q_edge=0.0):
    """Deflection of the weak-branch point with full downstream speed q_cr.

    Wedge angles between this value and the critical angle yield a weak
    *transonic* solution; below it the weak solution is supersonic.
    """
    v1_star, theta_max = deflection_maximum(gas, q0, q_edge)
    e2 = q_edge * q_edge

    def excess(v1):
        v2 = polar_transverse_speed(gas, q0, v1, q_edge)
        return v1 * v1 + v2 * v2 + e2 - gas.q_cr_sq

    if excess(v1_star) >= 0:
        raise NoRootError("deflection maximum is not transonic for these inputs")
    v1_sonic = brentq(excess, v1_star, q0, xtol=1e-15, rtol=8.9e-16)
    return deflection(gas, q0, v1_sonic, q_edge)


def wedge_solutions(gas: GasModel, q0, theta_w, q_edge=0.0):
    """Both intersection points of the wedge ray with the polar loop.

    Strong = smaller v1 root, weak = larger; coincident (within 1e-9 in
    v1) at the critical angle; detached flag instead of points beyond it.
    """
    if theta_w < 0 or theta_w >= 0.5 * math.pi:
        raise NoRootError(f"wedge angle {theta_w} outside [0, pi/2)")
    v1n = normal_shock_speed(gas, q0, q_edge)
    v1_star, theta_max = deflection_maximum(gas, q0, q_edge)
    if theta_w > theta_max:
        return WedgeSolutions(None, None, True, theta_max)

    def defect(v1):
        return deflection(gas, q0, v1, q_edge) - theta_w

    if theta_w == 0.0:
        v1_strong, v1_weak = v1n, q0
    elif theta_max - theta_w < 1e-13:
        v1_strong = v1_weak = v1_star
    else:
        v1_strong = brentq(defect, v1n, v1_star, xtol=1e-15, rtol=8.9e-16)
        v1_weak = brentq(defect, v1_star, q0, xtol=1e-15, rtol=8.9e-16)
    return WedgeSolutions(
        strong=polar_point(gas, q0, v1_strong, q_edge),
        weak=polar_point(gas, q0, v1_weak, q_edge),
        detached=False,
        critical_angle=theta_max,
    )


def upstream_vector(q0, q_edge=0.0):
    """Upstream velocity in the polar frame, (q0, 0[, q_edge])."""
    if q_edge != 0.0:
        return np.array([q0, 0.0, q_edge])
    return np.array([q0, 0.0])


def polar_normal(gas: GasModel, point: PolarPoint, upstream):
    """Outward balloon normal at a polar point, in the upstream's frame.

    Computed as the analytic gradient of the jump function in the
    potential-difference gradient p = upstream - v.
    """
    upstream = np.asarray(upstream, dtype=float)
    v = np.zeros_like(upstream)
    v[0], v[1] = point.v1, point.v2
    v[2:] = point.v_t
    p = upstream - v
    return PolarNormal(nu=jump_gradient(gas, p, upstream))


def classify(gas: GasModel, q0, point: PolarPoint, q_edge=0.0):
    """Regime label: weak/strong by branch, transonic by full speed."""
    v1_star, _ = deflection_maximum(gas, q0, q_edge)
    if abs(point.v1 - v1_star) <= 1e-9:
        return CRITICAL
    transonic = point.q < gas.q_cr
    if point.v1 < v1_star:
        if not transonic:
            raise NoRootError(
                "strong-branch point with supersonic full speed; the edge"
                f"-tangential component {q_edge} is outside the regime"
            )
        return STRONG_TRANSONIC
    return WEAK_TRANSONIC if transonic else WEAK_SUPERSONIC
