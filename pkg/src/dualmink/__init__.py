"""Numerical tools for the L_p dual Minkowski problem on the sphere.

Spherical grids and harmonic calculus (:mod:`.sphere`), convex bodies
(:mod:`.bodies`), curvature measures (:mod:`.measures`), a Monge-Ampere
solver (:mod:`.solver`) and numerical checks of integral estimates
(:mod:`.estimates`).
"""

from .bodies import *  # noqa: F401,F403
from .bodies import __all__ as _bodies_all
from .estimates import Report, Row
from .measures import *  # noqa: F401,F403
from .measures import __all__ as _measures_all
from .solver import *  # noqa: F401,F403
from .solver import __all__ as _solver_all
from .sphere import *  # noqa: F401,F403
from .sphere import __all__ as _sphere_all

__version__ = "0.1.0"
__all__ = [*_sphere_all, *_bodies_all, *_measures_all, *_solver_all, "Report", "Row"]
