"""Boundary operators: Laplace-Beltrami spectra, effective Hamiltonians, Weyl volumes.

All boundary operators act on functions of arclength on a closed curve of
length ``|Gamma|`` and have the form

    a * (-d^2/ds^2) - b * kappa(s) + c,

discretized with Fourier spectral differentiation on a uniform arclength grid
and the curvature applied pointwise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.integrate import quad

from .errors import ParameterError, TruncationError
from .geometry import PlanarCurve
from .spectrum import Spectrum

VARIANTS = ("plain", "plus", "minus")
COUNT_TIE_RTOL = 1e-10


@dataclass(frozen=True)
class EffectiveParams:
    """Parameters of the effective Hamiltonians.

    ``variant`` selects ``-h + h^2 L - h^{3/2} kappa`` (plain) or its
    perturbations with constants ``C_plus``/``C_minus``.
    """

    h: float
    E: float = 0.0
    variant: str = "plain"
    C_plus: float = 0.0
    C_minus: float = 0.0
    n_modes: int = 32
    n_grid: int | None = None

    def __post_init__(self):
        if not 0 < self.h < 1:
            raise ParameterError(f"h must lie in (0, 1), got {self.h}")
        if self.variant not in VARIANTS:
            raise ParameterError(f"variant must be one of {VARIANTS}")
        if self.C_plus < 0 or self.C_minus < 0:
            raise ParameterError("sandwich constants must be nonnegative")
        if self.n_modes < 8:
            raise ParameterError("n_modes must be at least 8")

    def coefficients(self):
        """``(a, c)`` in ``a (-d^2/ds^2) - h^{3/2} kappa + c``."""
        h = self.h
        if self.variant == "plain":
            return h * h, -h
        if self.variant == "plus":
            return (1 + self.C_plus * math.sqrt(h)) * h * h, -h + self.C_plus * h * h
        return (1 - self.C_minus * math.sqrt(h)) * h * h, -h - self.C_minus * h * h


def _second_derivative_matrix(n, length):
    """Symmetric matrix of ``-d^2/ds^2`` on ``n`` periodic points (Fourier)."""
    k = np.fft.fftfreq(n, d=1.0 / n) * (2 * np.pi / length)
    if n % 2 == 0:
        k[n // 2] = np.pi * n / length
    eye = np.eye(n)
    D = np.fft.ifft((k**2)[:, None] * np.fft.fft(eye, axis=0), axis=0).real
    return 0.5 * (D + D.T)


def boundary_laplacian_spectrum(curve: PlanarCurve, n_modes: int) -> Spectrum:
    """Lowest ``n_modes`` eigenvalues of the Laplace-Beltrami operator on the curve.

    A closed curve is isometric to a circle of the same length, so the
    eigenvalues are ``(2 pi m / |Gamma|)^2``, twice degenerate for ``m >= 1``.
    """
    if n_modes < 1:
        raise ParameterError("n_modes must be positive")
    m = (np.arange(n_modes) + 1) // 2
    vals = (2 * np.pi * m / curve.length) ** 2
    return Spectrum(vals, {"operator": "laplace_beltrami", "curve": curve.kind, "length": curve.length})


def boundary_operator_spectrum(curve, lap_coef, curv_coef, shift, n_modes, n_grid=None, tag="boundary"):
    """Lowest eigenvalues of ``lap_coef (-d^2/ds^2) - curv_coef kappa(s) + shift``."""
    if n_modes < 1:
        raise ParameterError("n_modes must be positive")
    n_grid = n_grid or max(64, 4 * n_modes)
    if n_grid < 2 * n_modes + 8:
        raise TruncationError(f"grid of {n_grid} points is too coarse for {n_modes} modes")
    s = curve.uniform_s(n_grid)
    kappa = curve.curvature(s)
    A = lap_coef * _second_derivative_matrix(n_grid, curve.length)
    A[np.diag_indices(n_grid)] += shift - curv_coef * kappa
    vals, vecs = la.eigh(A, subset_by_index=[0, n_modes - 1])
    res = np.linalg.norm(A @ vecs - vecs * vals, axis=0) / (1 + np.abs(vals))
    meta = {
        "operator": tag,
        "curve": curve.kind,
        "coefficients": {"laplacian": lap_coef, "curvature": curv_coef, "shift": shift},
        "n_grid": n_grid,
        "n_modes": n_modes,
        "max_residual": float(res.max()),
    }
    return Spectrum(vals, meta)


def effective_spectrum(curve: PlanarCurve, params: EffectiveParams) -> Spectrum:
    """Lowest ``params.n_modes`` eigenvalues of the chosen effective Hamiltonian."""
    a, c = params.coefficients()
    if a <= 0:
        raise ParameterError("C_minus is too large: the kinetic coefficient is not positive")
    return boundary_operator_spectrum(
        curve, a, params.h**1.5, c, params.n_modes, params.n_grid, tag=f"effective_{params.variant}"
    )


def _tie_tolerance(threshold):
    return COUNT_TIE_RTOL * abs(threshold)


def count_below(spectrum: Spectrum, threshold: float) -> int:
    """Number of eigenvalues ``<= threshold``, with multiplicity.

    Raises :class:`TruncationError` unless the computed spectrum reaches
    ``threshold + |threshold|`` (twice the threshold when it is positive),
    which guards against silently losing eigenvalues above the truncation.
    Values within a relative 1e-10 of the threshold count as below it.
    """
    margin = abs(threshold)
    if not (spectrum.largest >= threshold + margin and spectrum.largest > threshold):
        raise TruncationError(
            f"largest computed eigenvalue {spectrum.largest:.6g} does not clear the threshold {threshold:.6g}"
        )
    return int(np.count_nonzero(spectrum.eigenvalues <= threshold + _tie_tolerance(threshold)))


def count_operator(curve, lap_coef, curv_coef, shift, threshold, n_modes=32, max_modes=8192):
    """Count eigenvalues of a boundary operator below ``threshold``.

    The truncation grows until :func:`count_below` accepts it.
    """
    while n_modes <= max_modes:
        spec = boundary_operator_spectrum(curve, lap_coef, curv_coef, shift, n_modes)
        try:
            return count_below(spec, threshold)
        except TruncationError:
            n_modes *= 2
    raise TruncationError(f"no admissible truncation up to {max_modes} modes")


def laplacian_lattice_count(curve: PlanarCurve, h: float, level: float = 1.0) -> int:
    """``N(h L, level)`` in closed form: ``1 + 2 floor(sqrt(level/h) |Gamma| / 2 pi)``."""
    x = math.sqrt(level / h) * curve.length / (2 * np.pi)
    return 1 + 2 * int(math.floor(x * (1 + COUNT_TIE_RTOL)))


def phase_space_volume(curve: PlanarCurve, E: float, include_curvature: bool = True) -> float:
    """Area of ``{(s, sigma): sigma^2 - kappa(s) <= E}`` in the cotangent bundle.

    In one boundary dimension the fibre over ``s`` is an interval of length
    ``2 sqrt(E + kappa(s))`` (zero where the radicand is negative).
    """
    if not include_curvature:
        return 2.0 * curve.length * math.sqrt(max(E, 0.0))
    derivs = curve._derivs

    def integrand(th):
        d = derivs(th)
        speed = math.hypot(d[2], d[3])
        kappa = (d[2] * d[5] - d[3] * d[4]) / speed**3
        return 2.0 * math.sqrt(max(E + kappa, 0.0)) * speed

    val, _ = quad(integrand, 0.0, 2 * np.pi, epsabs=1e-10, epsrel=1e-10, limit=500)
    return float(val)


def weyl_prediction(curve: PlanarCurve, h: float, E: float = 0.0, mode: str = "low_lying") -> float:
    """Semiclassical eigenvalue count predicted by the phase-space volume."""
    if not 0 < h < 1:
        raise ParameterError("h must lie in (0, 1)")
    if mode == "low_lying":
        return phase_space_volume(curve, E, True) / (2 * np.pi * h**0.25)
    if mode == "nonpositive":
        return phase_space_volume(curve, 1.0, False) / (2 * np.pi * math.sqrt(h))
    raise ParameterError("mode must be 'low_lying' or 'nonpositive'")


def effective_counting_table(curve: PlanarCurve, h_values, E: float = 0.0, mode: str = "low_lying"):
    """Rows of effective counts and Weyl predictions over ``h_values``.

    ``low_lying`` counts ``h^{1/2} L - kappa <= E``; ``nonpositive`` counts
    ``h L <= 1``.
    """
    rows = []
    for h in h_values:
        if mode == "low_lying":
            n = count_operator(curve, math.sqrt(h), 1.0, 0.0, E)
        else:
            n = count_operator(curve, h, 0.0, 0.0, 1.0)
        w = weyl_prediction(curve, h, E, mode)
        rows.append({"curve": curve.kind, "h": h, "E": E, "N_effective": n, "weyl_prediction": w, "ratio": n / w if w > 0 else float("nan")})
    return rows


def write_counting_csv(rows, path):
    fields = ["curve", "h", "E", "N_effective", "weyl_prediction", "ratio"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(float(row[k])) if isinstance(row[k], float) else row[k]) for k in fields})
