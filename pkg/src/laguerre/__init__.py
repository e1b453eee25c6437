"""Complex Wishart (Laguerre) matrix diffusions.

Simulation of the matrix and eigenvalue SDEs, matrix-argument hypergeometric
functions by zonal series and determinantal formulas, and the closed-form
laws of the process (Laplace transform, transition densities, generalized
Hartman-Watson law, hitting-time laws), with a Monte Carlo verification
harness and a batch CLI.
"""

__version__ = "0.1.0"

from . import errors, laws, mc, process, specfun, symfun  # noqa: F401
from .process import LaguerreModel  # noqa: F401
