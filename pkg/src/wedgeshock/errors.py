"""Exception types shared across the package."""


class WedgeShockError(Exception):
    """Base class for all package-specific failures."""


class DomainError(WedgeShockError):
    """A thermodynamic or kinematic quantity left its physical domain
    (cavitation, speed beyond the maximal speed, ...)."""


class NoRootError(WedgeShockError):
    """A bracketed root does not exist for the requested parameters."""


class DetachedWedgeError(WedgeShockError):
    """The wedge angle exceeds the critical angle: no attached shock."""


class DegenerateEllipticityError(WedgeShockError):
    """The downstream state is sonic/supersonic where a subsonic
    (elliptic) state is required."""


class NonInvertibleError(WedgeShockError):
    """The hodograph map lost invertibility (d u / d y1 too small)."""


class ResonanceError(WedgeShockError):
    """A requested decay exponent sits on (or within 1e-6 of) an
    eigenvalue of the angular problem."""


class SingularSystemError(WedgeShockError):
    """The discrete linear system could not be factorized or its
    residual check failed."""


class FitError(WedgeShockError):
    """A regression (corner-exponent fit) is undefined for the data."""


class ConfigError(WedgeShockError):
    """A run configuration failed validation; message carries the
    offending field path."""
