"""Localization and projection diagnostics for computed eigenfunctions."""

from __future__ import annotations

import math

import numpy as np

from .._fem1d import IntervalFEM
from ..errors import ParameterError, SolverError
from ..geometry import PlanarCurve
from ..oned_models import OneDParams, weighted_spectrum
from .tube import TubeResult, tube_norm

NORMALIZATION_TOL = 1e-8


def normal_mass_profile(u, curve: PlanarCurve, t, n_s: int = 512):
    """``M(t) = int |u(Phi(s, t))|^2 (1 - t kappa(s)) ds`` for a callable ``u(x, y)``."""
    s = curve.uniform_s(n_s)
    gamma = curve.position(s)
    nrm = curve.inward_normal(s)
    kappa = curve.curvature(s)
    ds = curve.length / n_s
    out = np.empty(len(t))
    for j, tj in enumerate(t):
        p = gamma + tj * nrm
        out[j] = ds * np.sum(np.abs(u(p[:, 0], p[:, 1])) ** 2 * (1 - tj * kappa))
    return out


def agmon_profile(u, curve: PlanarCurve, h: float, eigenvalue: float, eps0: float = 0.9, window=None, grid=None, n_t: int = 64):
    """Fitted normal decay rate ``alpha`` of an eigenfunction, in units of ``h^{-1/2}``.

    ``log M(t)`` is fitted by ``c - 2 alpha t / h^{1/2}`` over ``window``
    (default ``[h^{1/2}, 8 h^{1/2}]`` clipped to the tube). ``u`` is a callable
    ``u(x, y)``, or an array on the tube grid when ``grid`` is a
    :class:`~robinweyl.geometry.TubeGrid`.

    Raises
    ------
    ParameterError
        If ``eigenvalue > -eps0 h`` or the window is too short.
    """
    if not 0 < eps0 < 1:
        raise ParameterError("eps0 must lie in (0, 1)")
    if eigenvalue > -eps0 * h:
        raise ParameterError(f"eigenvalue {eigenvalue:.4g} is not below -eps0 h = {-eps0 * h:.4g}")
    rh = math.sqrt(h)
    limit = 0.9 * (grid.delta if grid is not None else curve.tube_halfwidth)
    lo, hi = window if window is not None else (rh, min(8 * rh, limit))
    hi = min(hi, limit)
    if hi - lo < 2 * rh:
        raise ParameterError("decay window shorter than 2 h^(1/2)")
    if grid is None:
        t = np.linspace(lo, hi, n_t)
        mass = normal_mass_profile(u, curve, t)
    else:
        sel = (grid.t >= lo) & (grid.t <= hi)
        t = grid.t[sel]
        ds = curve.length / grid.n_s
        mass = ds * np.sum(np.abs(u[:, sel]) ** 2 * grid.weight[:, sel], axis=0)
    if len(t) < 3 or np.any(mass <= 0):
        raise ParameterError("insufficient decay window")
    slope = np.polyfit(t / rh, np.log(mass), 1)[0]
    return float(-slope / 2)


def _ground_state_nodes(T, B, n_grid, cache):
    key = (round(T, 14), B, n_grid)
    if key not in cache:
        res = weighted_spectrum(OneDParams(T, B, n_grid))
        if res.ground_state[0] <= 0:
            raise SolverError("transverse ground state is not sign-normalized")
        cache[key] = res.ground_state
    return cache[key]


def feshbach_diagnostics(result: TubeResult, index: int = 0):
    """Projection of a tube eigenfunction onto the transverse ground states.

    With ``tau = t / h^{1/2}``, ``T = delta / h^{1/2}`` and
    ``B = h^{1/2} kappa(sigma)``, returns ``f(sigma)``, the weighted inner
    product of the rescaled eigenfunction with the positive ground state of
    the weighted 1D operator, and ``orth_mass = 1 - int |f|^2 dsigma``.
    """
    if result.vectors is None:
        raise ParameterError("tube result carries no eigenvectors (use keep_vectors=True)")
    grid, h = result.grid, result.h
    psi = result.vectors[index]
    norm = tube_norm(result, psi)
    if abs(norm - 1) > NORMALIZATION_TOL:
        raise SolverError(f"eigenfunction norm {norm:.12g} deviates from 1")
    rh = math.sqrt(h)
    T = grid.delta / rh
    if grid.delta * np.max(np.abs(grid.kappa)) >= 1.0 / 3.0:
        raise ParameterError("|B| T = delta |kappa| must stay below 1/3")
    fem = IntervalFEM(T, grid.n_t)
    cache = {}
    f = np.empty(grid.n_s)
    for i, kap in enumerate(grid.kappa):
        B = rh * kap
        v = _ground_state_nodes(T, B, grid.n_t, cache)
        M = fem.mass(lambda x, B=B: 1.0 - B * x)
        f[i] = h**0.25 * (psi[i] @ (M @ v))
    ds = grid.curve.length / grid.n_s
    proj = float(ds * np.sum(f**2))
    return {"sigma": grid.s.copy(), "f": f, "orth_mass": 1.0 - proj, "norm": norm}


def born_oppenheimer_correction(curve: PlanarCurve, sigma: float, hbar: float, step: float = 1e-4, n_grid: int | None = None) -> float:
    """``R(sigma) = || d/dsigma v_{kappa(sigma), hbar} ||^2`` in the weighted norm.

    ``v`` is the positive ground state of the weighted operator with
    ``T = 1/hbar`` and ``B = hbar^2 kappa(sigma)``. By the chain rule
    ``d v / d sigma = hbar^2 kappa'(sigma) d v / d B``; the B-derivative is a
    central difference. Where ``kappa'`` vanishes (everywhere on a circle) the
    result is exactly zero.
    """
    if not 0 < hbar < 1:
        raise ParameterError("hbar must lie in (0, 1)")
    T = 1.0 / hbar
    kappa = float(curve.curvature(np.array([sigma]))[0])
    B = hbar**2 * kappa
    if not abs(B) * T < 1.0 / 3.0:
        raise ParameterError(f"|B| T = {abs(B) * T:.4g} is not below 1/3 at this sigma")
    dkappa = 0.0 if curve.constant_curvature else float(curve.curvature_derivative(np.array([sigma]))[0])
    if dkappa == 0.0:
        return 0.0
    while (abs(B) + step) * T >= 1.0 / 3.0:
        step /= 10
        if step < 1e-10:
            raise SolverError("difference step underflow near the edge of the |B| T < 1/3 window")
    rp = weighted_spectrum(OneDParams(T, B + step, n_grid))
    rm = weighted_spectrum(OneDParams(T, B - step, n_grid))
    if rp.ground_state[0] <= 0 or rm.ground_state[0] <= 0:
        raise SolverError("gauge ambiguity: ground state not positive at tau = 0")
    dv = (rp.ground_state - rm.ground_state) / (2 * step)
    fem = IntervalFEM(T, (len(rp.tau) - 1) // 3)
    dv_norm2 = fem.quadratic_forms(dv, lambda x: 1.0 - B * x)[1]
    return float((hbar**2 * dkappa) ** 2 * dv_norm2)
