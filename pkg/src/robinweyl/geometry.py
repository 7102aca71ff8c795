"""Closed planar boundary curves and tubular coordinates.

A :class:`PlanarCurve` wraps an analytic periodic parametrization
``theta -> (x, y)`` traversed counterclockwise. Everything downstream works in
arclength ``s`` with the *inward* unit normal ``n(s)`` and signed curvature
``kappa(s)`` (positive on convex pieces), so that the tubular map

    Phi(s, t) = gamma(s) + t n(s)

has Jacobian determinant ``1 - t kappa(s)``.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import ParameterError


def _circle_derivs(R):
    def derivs(th):
        c, s = np.cos(th), np.sin(th)
        return (R * c, R * s, -R * s, R * c, -R * c, -R * s, R * s, -R * c)

    return derivs


def _ellipse_derivs(a, b):
    def derivs(th):
        c, s = np.cos(th), np.sin(th)
        return (a * c, b * s, -a * s, b * c, -a * c, -b * s, a * s, -b * c)

    return derivs


def _star_derivs(R, eps, k):
    def derivs(th):
        c, s = np.cos(th), np.sin(th)
        ck, sk = np.cos(k * th), np.sin(k * th)
        r = R * (1 + eps * ck)
        r1 = -R * eps * k * sk
        r2 = -R * eps * k * k * ck
        r3 = R * eps * k**3 * sk
        x = r * c
        y = r * s
        x1 = r1 * c - r * s
        y1 = r1 * s + r * c
        x2 = r2 * c - 2 * r1 * s - r * c
        y2 = r2 * s + 2 * r1 * c - r * s
        x3 = r3 * c - 3 * r2 * s - 3 * r1 * c + r * s
        y3 = r3 * s + 3 * r2 * c - 3 * r1 * s - r * c
        return (x, y, x1, y1, x2, y2, x3, y3)

    return derivs


def _segments_intersect(p):
    """Count proper intersections between non-adjacent edges of a closed polygon."""
    n = len(p)
    a = p
    b = np.roll(p, -1, axis=0)
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]

    def orient(u, v, w):
        return (v[:, 0] - u[:, 0]) * (w[:, 1] - u[:, 1]) - (v[:, 1] - u[:, 1]) * (w[:, 0] - u[:, 0])

    d1 = orient(a[i], b[i], a[j])
    d2 = orient(a[i], b[i], b[j])
    d3 = orient(a[j], b[j], a[i])
    d4 = orient(a[j], b[j], b[i])
    return int(np.count_nonzero((d1 * d2 < 0) & (d3 * d4 < 0)))


class PlanarCurve:
    """Closed C^3 curve given by an analytic parametrization.

    Parameters
    ----------
    kind : str
        Preset name, kept for serialization.
    params : dict
        Preset parameters.
    derivs : callable
        ``theta -> (x, y, x', y', x'', y'', x''', y''')``, vectorized.
    n_samples : int
        Size of the dense theta grid used for sampling and tables.
    tube_halfwidth : float, optional
        Override for the injectivity width of the tubular map.
    """

    def __init__(self, kind, params, derivs, n_samples=4096, tube_halfwidth=None):
        self.kind = kind
        self.params = dict(params)
        self._derivs = derivs
        self.n_samples = int(n_samples)
        theta = np.linspace(0.0, 2 * np.pi, self.n_samples, endpoint=False)
        d = derivs(theta)
        speed = np.hypot(d[2], d[3])
        if np.any(speed <= 0):
            raise ParameterError("parametrization is singular")
        area = 0.5 * np.mean(d[0] * d[3] - d[1] * d[2]) * 2 * np.pi
        if area <= 0:
            raise ParameterError("curve must be traversed counterclockwise")

        # s(theta) from the Fourier series of the speed: spectral for analytic curves
        c = np.fft.rfft(speed) / self.n_samples
        c[1:] *= 2.0
        self.length = float(2 * np.pi * c[0].real)
        significant = np.nonzero(np.abs(c) > 1e-16 * abs(c[0]))[0]
        kmax = int(significant.max()) if significant.size else 0
        self._speed_coef = c[1 : kmax + 1]
        self._wavenumbers = np.arange(1, kmax + 1)

        self.theta_samples = theta
        self.s_samples = self.s_of_theta(theta)
        self.xy_samples = np.column_stack([d[0], d[1]])
        self.kappa_samples = self._kappa_theta(theta)
        self.kappa_max = float(self.kappa_samples.max())
        self.kappa_min = float(self.kappa_samples.min())
        self.kappa_abs_max = float(np.abs(self.kappa_samples).max())

        total = float(np.mean(self.kappa_samples * speed) * 2 * np.pi)
        if abs(total - 2 * np.pi) > 1e-6:
            raise ParameterError(f"total curvature {total:.8f} differs from 2 pi: curve is not simple")
        stride = max(1, self.n_samples // 1024)
        poly = self.xy_samples[::stride]
        if _segments_intersect(poly):
            raise ParameterError("curve self-intersects")
        self.waist = self._waist(poly, theta[::stride])
        if tube_halfwidth is None:
            bound = 0.999 / self.kappa_abs_max if self.kappa_abs_max > 0 else math.inf
            tube_halfwidth = min(bound, 0.5 * self.waist)
        self.tube_halfwidth = float(tube_halfwidth)

    # -- parametrization -------------------------------------------------

    def _kappa_theta(self, theta):
        _, _, x1, y1, x2, y2, _, _ = self._derivs(theta)
        return (x1 * y2 - y1 * x2) / np.hypot(x1, y1) ** 3

    def s_of_theta(self, theta):
        """Arclength from theta = 0, for any real theta."""
        theta = np.asarray(theta, dtype=float)
        if self._wavenumbers.size == 0:
            return self.length * theta / (2 * np.pi)
        ph = np.multiply.outer(theta, self._wavenumbers)
        a, b = self._speed_coef.real, self._speed_coef.imag
        # integral of a cos(k th) - b sin(k th) from 0 to theta
        periodic = (np.sin(ph) * a + (np.cos(ph) - 1.0) * b) / self._wavenumbers
        return self.length * theta / (2 * np.pi) + periodic.sum(axis=-1)

    def theta_of_s(self, s):
        """Invert the arclength map by Newton's method (s taken modulo the length)."""
        s = np.asarray(s, dtype=float)
        turns = np.floor(s / self.length)
        r = s - turns * self.length
        th = np.interp(r, np.append(self.s_samples, self.length), np.append(self.theta_samples, 2 * np.pi))
        for _ in range(30):
            d = self._derivs(th)
            step = (self.s_of_theta(th) - r) / np.hypot(d[2], d[3])
            th = th - step
            if np.max(np.abs(step), initial=0.0) < 1e-13:
                break
        return th + 2 * np.pi * turns

    # -- arclength quantities --------------------------------------------

    def position(self, s):
        x, y, *_ = self._derivs(self.theta_of_s(s))
        return np.stack([x, y], axis=-1)

    def tangent(self, s):
        _, _, x1, y1, *_ = self._derivs(self.theta_of_s(s))
        v = np.hypot(x1, y1)
        return np.stack([x1 / v, y1 / v], axis=-1)

    def inward_normal(self, s):
        t = self.tangent(s)
        return np.stack([-t[..., 1], t[..., 0]], axis=-1)

    def curvature(self, s):
        return self._kappa_theta(self.theta_of_s(s))

    def curvature_derivative(self, s):
        """d kappa / d s from the analytic third derivatives."""
        _, _, x1, y1, x2, y2, x3, y3 = self._derivs(self.theta_of_s(s))
        v = np.hypot(x1, y1)
        num = x1 * y2 - y1 * x2
        dnum = x1 * y3 - y1 * x3
        dv = (x1 * x2 + y1 * y2) / v
        return (dnum / v**3 - 3 * num * dv / v**4) / v

    def uniform_s(self, n):
        return self.length * np.arange(n) / n

    @property
    def constant_curvature(self):
        return self.kappa_max - self.kappa_min <= 1e-12 * max(1.0, self.kappa_abs_max)

    # -- checks ------------------------------------------------------------

    def _waist(self, poly, theta):
        """Shortest inward normal chord: distance from each sample to the first
        polygon edge hit along its inward normal."""
        d = self._derivs(theta)
        v = np.hypot(d[2], d[3])
        nrm = np.column_stack([-d[3] / v, d[2] / v])
        a = poly
        e = np.roll(poly, -1, axis=0) - poly
        m = len(poly)
        best = np.inf
        for start in range(0, m, 256):
            idx = np.arange(start, min(start + 256, m))
            p = poly[idx][:, None, :]
            n_ = nrm[idx][:, None, :]
            w = a[None, :, :] - p
            den = n_[..., 0] * e[None, :, 1] - n_[..., 1] * e[None, :, 0]
            with np.errstate(divide="ignore", invalid="ignore"):
                tt = (w[..., 0] * e[None, :, 1] - w[..., 1] * e[None, :, 0]) / den
                uu = (w[..., 0] * n_[..., 1] - w[..., 1] * n_[..., 0]) / den
            gap = np.abs((np.arange(m)[None, :] - idx[:, None] + m // 2) % m - m // 2)
            ok = (gap > 2) & (uu >= 0) & (uu <= 1) & (tt > 0) & np.isfinite(tt)
            if np.any(ok):
                best = min(best, float(np.min(tt[ok])))
        return best

    def total_curvature(self):
        """Integral of kappa ds; 2 pi for a simple counterclockwise curve."""
        d = self._derivs(self.theta_samples)
        return float(np.mean(self.kappa_samples * np.hypot(d[2], d[3])) * 2 * np.pi)

    def to_dict(self, n=256):
        theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        x, y, *_ = self._derivs(theta)
        return {
            "kind": self.kind,
            "params": self.params,
            "length": self.length,
            "samples": {
                "theta": theta.tolist(),
                "x": x.tolist(),
                "y": y.tolist(),
                "kappa": self._kappa_theta(theta).tolist(),
            },
        }

    def to_json(self, n=256, **kwargs):
        return json.dumps(self.to_dict(n), **kwargs)

    def __repr__(self):
        return f"PlanarCurve({self.kind}, {self.params}, length={self.length:.6g})"


def make_circle(R: float = 1.0, n_samples: int = 4096) -> PlanarCurve:
    if R <= 0:
        raise ParameterError("radius must be positive")
    return PlanarCurve("circle", {"R": R}, _circle_derivs(R), n_samples, tube_halfwidth=R * (1 - 1e-6))


def make_ellipse(a: float, b: float, n_samples: int = 4096) -> PlanarCurve:
    if not a >= b > 0:
        raise ParameterError("need a >= b > 0")
    return PlanarCurve("ellipse", {"a": a, "b": b}, _ellipse_derivs(a, b), n_samples)


def make_star(R: float, eps: float, k: int, n_samples: int = 4096) -> PlanarCurve:
    """Polar curve ``r(theta) = R (1 + eps cos(k theta))``."""
    if R <= 0 or k < 2 or int(k) != k:
        raise ParameterError("need R > 0 and an integer k >= 2")
    if not abs(eps) < 1:
        raise ParameterError("|eps| must be below 1 for r(theta) to stay positive")
    return PlanarCurve("star", {"R": R, "eps": eps, "k": int(k)}, _star_derivs(R, eps, int(k)), n_samples)


def make_curve(kind: str, **params) -> PlanarCurve:
    """Build a preset curve by name: ``circle``, ``ellipse`` or ``star``."""
    makers = {"circle": make_circle, "ellipse": make_ellipse, "star": make_star}
    if kind not in makers:
        raise ParameterError(f"unknown curve kind {kind!r}")
    return makers[kind](**params)


def tubular_map(curve: PlanarCurve, s, t):
    """Point ``gamma(s) + t n(s)`` at depth ``t`` along the inward normal."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t >= curve.tube_halfwidth):
        raise ParameterError(f"t must lie in [0, {curve.tube_halfwidth:.6g})")
    s = np.asarray(s, dtype=float)
    return curve.position(s) + t[..., None] * curve.inward_normal(s)


def tubular_jacobian(curve: PlanarCurve, s, t, step=1e-5):
    """Central-difference Jacobian determinant of the tubular map.

    A diagnostic: it should agree with ``1 - t kappa(s)``.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    ds = (curve.position(s + step) - curve.position(s - step)) / (2 * step)
    ds = ds + t[..., None] * (curve.inward_normal(s + step) - curve.inward_normal(s - step)) / (2 * step)
    dt = curve.inward_normal(s)
    # orientation (s, t) -> (tangent, inward normal) is positive
    return ds[..., 0] * dt[..., 1] - ds[..., 1] * dt[..., 0]


def check_injective(curve: PlanarCurve, delta: float, n_s=256, n_t=16):
    """Nearest-neighbour test of the tubular map on a ``n_s x n_t`` grid.

    Returns the smallest distance between mapped points divided by the
    smallest expected local spacing; a value below 0.5 means two distinct
    grid points landed too close together.
    """
    from scipy.spatial import cKDTree

    s = curve.uniform_s(n_s)
    t = np.linspace(0.0, delta, n_t, endpoint=False)
    S, Tt = np.meshgrid(s, t, indexing="ij")
    pts = tubular_map(curve, S, Tt).reshape(-1, 2)
    dist, _ = cKDTree(pts).query(pts, k=2)
    wmin = 1.0 - delta * max(curve.kappa_max, 0.0)
    spacing = min(delta / n_t, curve.length / n_s * wmin)
    return float(dist[:, 1].min() / spacing)


class TubeGrid:
    """Tensor grid on ``Gamma x [0, delta]`` carrying the weight ``1 - t kappa(s)``.

    ``s`` is periodic with ``n_s`` points; ``t`` holds the ``3 n_t + 1`` nodes
    of ``n_t`` cubic elements, the first row on the boundary and the last row
    the Dirichlet row.
    """

    def __init__(self, curve: PlanarCurve, delta: float, n_s: int, n_t: int):
        if not 0 < delta <= curve.tube_halfwidth:
            raise ParameterError(f"delta must lie in (0, {curve.tube_halfwidth:.6g}]")
        if delta * curve.kappa_max >= 1:
            raise ParameterError("weight 1 - t kappa degenerates inside the tube")
        self.curve = curve
        self.delta = float(delta)
        self.n_s = int(n_s)
        self.n_t = int(n_t)
        self.s = curve.uniform_s(self.n_s)
        self.kappa = curve.curvature(self.s)
        self.t = np.linspace(0.0, self.delta, 3 * self.n_t + 1)
        self.weight = 1.0 - np.outer(self.kappa, self.t)
        if np.any(self.weight <= 0):
            raise ParameterError("weight 1 - t kappa is not positive on the grid")
