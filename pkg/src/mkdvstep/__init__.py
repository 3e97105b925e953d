"""Long-time asymptotics of the focusing mKdV equation with step-like data.

Submodules: specfun, scattering, whitham, asymptotics, rhp, pde, cli.
"""

__version__ = "0.1.0"

from .scattering import StepProblem  # noqa: F401
from .specfun import DomainError  # noqa: F401
