"""Solvers for the Robin Laplacian on planar domains."""

from .diagnostics import agmon_profile, born_oppenheimer_correction, feshbach_diagnostics
from .disk import DiskModeRoot, disk_mode_function, disk_mode_root, disk_negative_spectrum
from .fem import RobinProblem, fem_count_below, fem_spectrum, write_eigenfunction_csv
from .mesh import TriMesh, generate_mesh, refine
from .tube import TubeResult, default_delta, tube_solve, tube_spectrum

__all__ = [
    "DiskModeRoot",
    "RobinProblem",
    "TriMesh",
    "TubeResult",
    "agmon_profile",
    "born_oppenheimer_correction",
    "default_delta",
    "disk_mode_function",
    "disk_mode_root",
    "disk_negative_spectrum",
    "feshbach_diagnostics",
    "fem_count_below",
    "fem_spectrum",
    "generate_mesh",
    "refine",
    "tube_solve",
    "tube_spectrum",
    "write_eigenfunction_csv",
]
