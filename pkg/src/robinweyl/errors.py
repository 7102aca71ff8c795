"""Exception types raised by the solvers."""


class ParameterError(ValueError):
    """An input lies outside the range where an operation is defined."""


class SolverError(RuntimeError):
    """An eigensolver or root finder failed to converge."""


class TruncationError(ValueError):
    """A truncated spectrum does not reach far enough to answer a counting query."""


class MeshError(RuntimeError):
    """A generated triangulation failed a quality or resolution check."""
