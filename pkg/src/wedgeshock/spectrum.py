"""Eigenvalues of the oblique angular problem on a sector.

Blowing up the sector with t = ln r turns the homogeneous problem for
r^lambda v(omega) into a two-point ODE boundary problem on the opening
(-omega*/2, omega*/2):

    v'' + lambda^2 v = 0,
    -v'(omega+) + lambda alpha+ v(omega+) = 0,
    +v'(omega-) + lambda alpha- v(omega-) = 0.

Nontrivial kernels occur exactly at lambda = 0 (constants) and at
lambda_m = (m pi - Phi)/omega* with Phi = arctan(alpha-) + arctan(alpha+).
The characteristic determinant below is evaluated from the solution basis
numerically and serves as the independent oracle for the closed form.

For the shock sector of a 2-D background the two faces carry alpha = 0
(wedge) and alpha = -tan(omega_s + phi_s) (shock), so Phi is congruent to
-(omega_s + phi_s) mod pi and the set becomes
{0} U {1 + (m pi + phi_s)/omega_s}: the apparent unit shift against the
generic display is exactly the solution-versus-gradient exponent
convention.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .background import BackgroundShock
from .errors import DegenerateEllipticityError, NoRootError

FORMULA = "formula"
DETERMINANT = "determinant"


@dataclass(frozen=True)
class ObliqueAngularProblem:
    """Opening angle plus the tangential-derivative coefficients of the
    two oblique boundary operators (and edge-tangential coefficients for
    the mode problems; zero in 2-D)."""

    omega_star: float
    alpha_plus: float
    alpha_minus: float
    c_plus: float = 0.0
    c_minus: float = 0.0

    def __post_init__(self):
        if not 0 < self.omega_star < 2 * math.pi:
            raise NoRootError(f"opening angle {self.omega_star} outside (0, 2*pi)")

    @property
    def phi(self):
        return math.atan(self.alpha_minus) + math.atan(self.alpha_plus)


@dataclass(frozen=True)
class EigenSet:
    values: tuple
    source: str

    def __contains__(self, lam):
        return any(abs(lam - v) < 1e-10 for v in self.values)


def char_determinant(problem: ObliqueAngularProblem, lam):
    """Boundary determinant of the homogeneous angular ODE at lambda.

    Built from the solution basis {cos(lam w), sin(lam w)} (or {1, w} in
    the degenerate case lam = 0); zero exactly at nontrivial-kernel
    values.  Evaluated numerically, independent of the closed form.
    """
    w_p = 0.5 * problem.omega_star
    w_m = -0.5 * problem.omega_star
    a_p, a_m = problem.alpha_plus, problem.alpha_minus
    if lam == 0.0:
        basis = ((lambda w: 1.0, lambda w: 0.0), (lambda w: w, lambda w: 1.0))
    else:
        basis = (
            (lambda w: math.cos(lam * w), lambda w: -lam * math.sin(lam * w)),
            (lambda w: math.sin(lam * w), lambda w: lam * math.cos(lam * w)),
        )
    rows = np.empty((2, 2))
    for j, (v, dv) in enumerate(basis):
        rows[0, j] = -dv(w_p) + lam * a_p * v(w_p)
        rows[1, j] = dv(w_m) + lam * a_m * v(w_m)
    return float(rows[0, 0] * rows[1, 1] - rows[0, 1] * rows[1, 0])


def kernel_direction(problem: ObliqueAngularProblem, lam, tol=1e-8):
    """Coefficients (A, B) of the kernel element A cos + B sin at an
    eigenvalue (or (A, B) against {1, w} for lam = 0)."""
    w_p = 0.5 * problem.omega_star
    w_m = -0.5 * problem.omega_star
    if abs(char_determinant(problem, lam)) > tol:
        raise NoRootError(f"lambda={lam} is not an eigenvalue (determinant nonzero)")
    if lam == 0.0:
        return np.array([1.0, 0.0])
    rows = np.array(
        [
            [
                lam * math.sin(lam * w_p) + lam * problem.alpha_plus * math.cos(lam * w_p),
                -lam * math.cos(lam * w_p) + lam * problem.alpha_plus * math.sin(lam * w_p),
            ],
            [
                -lam * math.sin(lam * w_m) + lam * problem.alpha_minus * math.cos(lam * w_m),
                lam * math.cos(lam * w_m) + lam * problem.alpha_minus * math.sin(lam * w_m),
            ],
        ]
    )
    _, _, vt = np.linalg.svd(rows)
    return vt[-1]


def formula_eigenvalues(problem: ObliqueAngularProblem, interval):
    """Closed-form set {0} U {(m pi - Phi)/omega*} clipped to interval."""
    lo, hi = interval
    if not lo < hi:
        raise NoRootError(f"empty query interval {interval}")
    vals = set()
    if lo <= 0.0 <= hi:
        vals.add(0.0)
    m_lo = math.floor((lo * problem.omega_star + problem.phi) / math.pi) - 1
    m_hi = math.ceil((hi * problem.omega_star + problem.phi) / math.pi) + 1
    for m in range(m_lo, m_hi + 1):
        lam = (m * math.pi - problem.phi) / problem.omega_star
        if lo <= lam <= hi:
            vals.add(lam)
    return tuple(sorted(vals))


def determinant_eigenvalues(problem: ObliqueAngularProblem, interval, step=0.01):
    """Eigenvalues located by sign changes of the determinant.

    The determinant carries a factor lambda^2, so the zero at the origin
    is found from the degenerate basis rather than a sign change; every
    other zero is simple and bisected to 1e-12.
    """
    lo, hi = interval
    vals = []
    if lo <= 0.0 <= hi:
        vals.append(0.0)
    grid = np.arange(lo, hi + step, step)
    det = np.array([char_determinant(problem, g) for g in grid])
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        if a <= 0.0 <= b:
            # strip out the structural double zero before bracketing
            da = char_determinant(problem, a) / (a * a) if a != 0 else None
            db = char_determinant(problem, b) / (b * b) if b != 0 else None
            if da is not None and db is not None and da * db < 0:
                root = brentq(
                    lambda x: char_determinant(problem, x) / (x * x), a, b, xtol=1e-12
                )
                vals.append(root)
            continue
        if det[i] == 0.0 and a != 0.0:
            vals.append(a)
        elif det[i] * det[i + 1] < 0:
            vals.append(brentq(lambda x: char_determinant(problem, x), a, b, xtol=1e-12))
    return tuple(sorted(set(round(v, 12) for v in vals)))


def eigenvalues_in(problem: ObliqueAngularProblem, interval, source=FORMULA) -> EigenSet:
    if source == FORMULA:
        return EigenSet(formula_eigenvalues(problem, interval), FORMULA)
    if source == DETERMINANT:
        return EigenSet(determinant_eigenvalues(problem, interval), DETERMINANT)
    raise NoRootError(f"unknown eigenvalue source {source!r}")


def admissible_sigma(problem: ObliqueAngularProblem):
    """Open interval of admissible exponents between 0 and -Phi/omega*.

    None when Phi = 0 (the interval collapses).
    """
    if problem.phi == 0.0:
        return None
    edge = -problem.phi / problem.omega_star
    return (min(0.0, edge), max(0.0, edge))


def problem_from_background(bg: BackgroundShock) -> ObliqueAngularProblem:
    """Angular problem of the linearized shock sector.

    The wedge face is a pure normal derivative (alpha- = 0); the shock
    face, written in canonical oblique form, carries
    alpha+ = -tan(omega_s + phi_s) and, for a skew background, the
    edge-tangential coefficient from the transformed balloon normal.
    """
    if bg.exponents is None:
        raise DegenerateEllipticityError("background is not transonic/elliptic")
    om, ph = bg.omega_s, bg.phi_s
    if abs(om + ph - 0.5 * math.pi) < 1e-10:
        raise DegenerateEllipticityError(
            "shock boundary condition is tangential (omega_s + phi_s = pi/2)"
        )
    c_plus = 0.0
    if bg.n >= 3 and bg.omega1 != 0.0:
        nu_t = bg.transforms.P0 @ bg.nu
        e_r = np.array([math.cos(om), math.sin(om), 0.0])
        e_w = np.array([-math.sin(om), math.cos(om), 0.0])
        scale = -1.0 / np.dot(nu_t, e_w)
        alpha_plus = scale * np.dot(nu_t, e_r)
        c_plus = scale * nu_t[2]
        assert abs(alpha_plus - (-math.tan(om + ph))) < 1e-9
    return ObliqueAngularProblem(
        omega_star=om,
        alpha_plus=-math.tan(om + ph),
        alpha_minus=0.0,
        c_plus=float(c_plus),
        c_minus=0.0,
    )


def shifted_2d_eigenset(bg: BackgroundShock, interval) -> EigenSet:
    """The 2-D corner eigenvalue set {0} U {1 + (m pi + phi_s)/omega_s}.

    Identical to the generic angular set of the mapped problem; the
    agreement is asserted here rather than assumed.
    """
    lo, hi = interval
    om, ph = bg.omega_s, bg.phi_s
    vals = set()
    if lo <= 0.0 <= hi:
        vals.add(0.0)
    m_lo = math.floor(((lo - 1.0) * om - ph) / math.pi) - 1
    m_hi = math.ceil(((hi - 1.0) * om - ph) / math.pi) + 1
    for m in range(m_lo, m_hi + 1):
        lam = 1.0 + (m * math.pi + ph) / om
        if lo <= lam <= hi:
            vals.add(lam)
    generic = formula_eigenvalues(problem_from_background(bg), interval)
    mine = tuple(sorted(vals))
    if len(generic) != len(mine) or any(abs(a - b) > 1e-9 for a, b in zip(generic, mine)):
        raise NoRootError(
            f"corner set {mine} disagrees with the angular-problem set {generic}"
        )
    return EigenSet(mine, FORMULA)


def corner_eigenvalues(bg: BackgroundShock):
    """(lambda_-1, lambda_0, lambda_1): the three decisive corner modes."""
    om, ph = bg.omega_s, bg.phi_s
    return (
        1.0 + (-math.pi + ph) / om,
        1.0 + ph / om,
        1.0 + (math.pi + ph) / om,
    )
