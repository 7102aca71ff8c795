"""Exact negative spectrum of the Robin Laplacian on a disk.

Separating ``u = f(r) e^{i m phi}``, a negative eigenvalue ``-h^2 k^2`` needs
``f = I_m(k r)``, and the Robin condition ``d_r u(R) = h^{-1/2} u(R)`` becomes

    F_m(k R) = R h^{-1/2},    F_m(x) = x I_m'(x) / I_m(x).

``F_m`` increases from ``m`` at ``x = 0`` (to infinity), so each angular
index ``m <= R h^{-1/2}`` carries exactly one negative eigenvalue, double
for ``m >= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ive

from .._bessel import log_derivative
from ..errors import ParameterError
from ..spectrum import Spectrum

_ZERO_ROOT_RTOL = 1e-12


@dataclass(frozen=True)
class DiskModeRoot:
    m: int
    k: float
    eigenvalue: float
    multiplicity: int

    def to_dict(self):
        return {"m": self.m, "k": self.k, "eigenvalue": self.eigenvalue, "multiplicity": self.multiplicity}


def _check(R, h):
    if not R > 0:
        raise ParameterError("R must be positive")
    if not 0 < h < 1:
        raise ParameterError("h must lie in (0, 1)")


def _root_x(m, target):
    """Root of ``F_m(x) = target`` for ``m < target``, bisected to float resolution."""
    lo, hi = 0.0, target + 1.0
    while log_derivative(m, hi) < target:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if log_derivative(m, mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def disk_mode_root(R: float, h: float, m: int) -> DiskModeRoot | None:
    """The negative (or zero) eigenvalue in angular mode ``m``, if any."""
    _check(R, h)
    target = R / math.sqrt(h)
    mult = 1 if m == 0 else 2
    if abs(m - target) <= _ZERO_ROOT_RTOL * target:
        return DiskModeRoot(m, 0.0, 0.0, mult)
    if m > target:
        return None
    x = _root_x(m, target)
    k = x / R
    return DiskModeRoot(m, k, -h * h * k * k, mult)


def disk_negative_spectrum(R: float, h: float, ceiling: float = 0.0) -> Spectrum:
    """All eigenvalues ``<= ceiling <= 0`` of the Robin Laplacian on the disk of radius ``R``.

    Angular modes are scanned upwards from ``m = 0`` and the scan stops after
    two consecutive modes without an eigenvalue below ``ceiling``. The roots
    are stored in ``meta["roots"]``.
    """
    _check(R, h)
    if ceiling > 0:
        raise ParameterError("ceiling must be nonpositive")
    roots, empty, m = [], 0, 0
    tol = _ZERO_ROOT_RTOL * max(abs(ceiling), h)
    while empty < 2:
        root = disk_mode_root(R, h, m)
        if root is not None and root.eigenvalue <= ceiling + tol:
            roots.append(root)
            empty = 0
        else:
            empty += 1
        m += 1
    vals = np.repeat([r.eigenvalue for r in roots], [r.multiplicity for r in roots])
    target = R / math.sqrt(h)
    resid = max((abs(log_derivative(r.m, r.k * R) - target) / target for r in roots if r.k > 0), default=0.0)
    meta = {
        "operator": "robin_disk",
        "R": R,
        "h": h,
        "ceiling": ceiling,
        "modes_scanned": m,
        "max_relative_residual": resid,
        "roots": roots,
    }
    return Spectrum(vals, meta)


def disk_mode_function(R: float, root: DiskModeRoot, x, y, phase: str = "cos"):
    """Eigenfunction ``I_m(k r) cos(m phi)`` (or ``sin``), scaled to 1 at ``r = R``, phi = 0.

    Uses exponentially scaled Bessel values so large ``k R`` does not overflow.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.hypot(x, y)
    phi = np.arctan2(y, x)
    ang = np.cos(root.m * phi) if phase == "cos" else np.sin(root.m * phi)
    if root.k == 0.0:
        radial = (r / R) ** root.m
    else:
        kR = root.k * R
        radial = ive(root.m, root.k * r) / ive(root.m, kR) * np.exp(root.k * (r - R))
    return radial * ang
