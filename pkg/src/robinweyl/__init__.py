"""Numerical laboratory for the semiclassical Robin Laplacian.

Submodules
----------
oned_models
    1D Robin model operators in the normal variable.
geometry
    Planar boundary curves and tubular coordinates.
effective_ops
    Boundary operators, effective Hamiltonians and Weyl volumes.
robin2d
    Full 2D solvers (disk oracle, finite elements, boundary tube) and diagnostics.
weyl_lab
    Counting, sandwich and bracketing experiments.
"""

__version__ = "0.1.0"

from .errors import MeshError, ParameterError, SolverError, TruncationError  # noqa: E402
from .spectrum import Spectrum  # noqa: E402

__all__ = ["MeshError", "ParameterError", "SolverError", "Spectrum", "TruncationError", "__version__"]
