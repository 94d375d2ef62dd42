"""Thermodynamics of steady potential flow for a polytropic gas.

All speeds are nondimensional with the stagnation sound speed equal to 1,
so the Bernoulli density is rho(q^2) = (1 - (gamma-1)/2 q^2)^(1/(gamma-1))
and the local sound speed is c(q^2) = (1 - (gamma-1)/2 q^2)^(1/2).
Two speeds organize the whole theory:

* q_max = sqrt(2/(gamma-1)), where the density vanishes (cavitation);
* q_cr  = sqrt(2/(gamma+1)), the unique speed with q = c(q^2) (sonic).

Everything here is a pure function of immutable inputs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class GasModel:
    """Polytropic gas with adiabatic exponent gamma > 1."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise DomainError(f"gamma must exceed 1, got {self.gamma}")

    @property
    def q_max_sq(self):
        return 2.0 / (self.gamma - 1.0)

    @property
    def q_max(self):
        return np.sqrt(self.q_max_sq)

    @property
    def q_cr_sq(self):
        return 2.0 / (self.gamma + 1.0)

    @property
    def q_cr(self):
        return np.sqrt(self.q_cr_sq)

    def _check_q_sq(self, q_sq):
        q_sq = np.asarray(q_sq, dtype=float)
        if np.any(q_sq < -_DOMAIN_SLACK) or np.any(q_sq > self.q_max_sq * (1 + _DOMAIN_SLACK)):
            raise DomainError(
                f"q^2 = {q_sq} outside [0, q_max^2 = {self.q_max_sq}] (cavitation)"
            )
        return np.clip(q_sq, 0.0, self.q_max_sq)

    def density(self, q_sq):
        """Bernoulli density rho(q^2); rho(0) = 1, strictly decreasing."""
        q_sq = self._check_q_sq(q_sq)
        return (1.0 - 0.5 * (self.gamma - 1.0) * q_sq) ** (1.0 / (self.gamma - 1.0))

    def density_dq_sq(self, q_sq):
        """d rho / d(q^2), needed for gradients of the jump function."""
        q_sq = self._check_q_sq(q_sq)
        base = 1.0 - 0.5 * (self.gamma - 1.0) * q_sq
        expo = 1.0 / (self.gamma - 1.0) - 1.0
        return -0.5 * base**expo

    def sound_speed_sq(self, q_sq):
        """c^2 = 1 - (gamma-1)/2 q^2."""
        q_sq = self._check_q_sq(q_sq)
        return 1.0 - 0.5 * (self.gamma - 1.0) * q_sq

    def sound_speed(self, q_sq):
        return np.sqrt(self.sound_speed_sq(q_sq))

    def mach(self, v):
        """Mach number |v| / c(|v|^2) of a velocity vector.

        M < 1 exactly when |v| < q_cr.
        """
        v = np.asarray(v, dtype=float)
        q_sq = np.sum(v * v, axis=-1)
        return np.sqrt(q_sq / self.sound_speed_sq(q_sq))

    def mass_flux(self, q):
        """rho(q^2) q, maximal exactly at q = q_cr."""
        q = np.asarray(q, dtype=float)
        return self.density(q * q) * q

    def coefficient_matrix(self, dphi):
        """Second-order coefficient matrix A(Dphi) of the potential equation.

        Diagonal entries c^2 - (d_{x_i} phi)^2, off-diagonal
        -d_{x_i} phi d_{x_j} phi.  Symmetric; positive definite exactly
        when |Dphi| < q_cr.  Accepts a single n-vector or a stack
        (..., n) and returns (..., n, n).
        """
        dphi = np.asarray(dphi, dtype=float)
        q_sq = np.sum(dphi * dphi, axis=-1)
        c_sq = self.sound_speed_sq(q_sq)
        n = dphi.shape[-1]
        eye = np.eye(n)
        outer = dphi[..., :, None] * dphi[..., None, :]
        return c_sq[..., None, None] * eye - outer
