"""Numerical laboratory for transonic shocks attached to wedges.

Modules:
    gas        -- polytropic thermodynamics and the coefficient matrix
    polar      -- shock polar / balloon, wedge solutions, balloon normal
    background -- the full unperturbed shock solution and its transforms
    hodograph  -- partial hodograph transform and nonlinear operators
    spectrum   -- angular eigenvalue set and admissible weight windows
    elliptic   -- sector solver on the log-polar strip, weighted norms
    iterate    -- contractive fixed-point iteration and diagnostics
    cli        -- configuration-driven command line front end
"""

from .gas import GasModel

__all__ = ["GasModel"]
__version__ = "0.1.0"
