"""Ratios of modified Bessel functions without forming I_m itself.

For large arguments ``I_m(x)`` overflows long before the ratio
``I_{m+1}(x) / I_m(x)`` loses accuracy, so only the ratio is computed, from
the continued fraction

    I_{m+1}/I_m = 1 / (2(m+1)/x + 1 / (2(m+2)/x + ...)),

evaluated with the modified Lentz algorithm.
"""

from __future__ import annotations

import math

from .errors import SolverError

_TINY = 1e-300


def bessel_i_ratio(m: int, x: float, rtol: float = 1e-16, max_terms: int = 100000) -> float:
    """``I_{m+1}(x) / I_m(x)`` for integer ``m >= 0`` and ``x >= 0``."""
    if m < 0 or x < 0:
        raise ValueError("need m >= 0 and x >= 0")
    if x == 0.0:
        return 0.0
    f = _TINY
    C, D = f, 0.0
    for j in range(1, max_terms + 1):
        b = 2.0 * (m + j) / x
        D = b + D
        D = _TINY if D == 0.0 else D
        C = b + 1.0 / C
        C = _TINY if C == 0.0 else C
        D = 1.0 / D
        delta = C * D
        f *= delta
        if abs(delta - 1.0) < rtol:
            return f
    raise SolverError(f"Bessel ratio continued fraction did not converge (m={m}, x={x})")


def log_derivative(m: int, x: float) -> float:
    """``x I_m'(x) / I_m(x) = m + x I_{m+1}(x) / I_m(x)``."""
    return m + x * bessel_i_ratio(m, x)
