"""The Robin Laplacian restricted to a boundary tube, in tubular coordinates.

On ``Gamma x (0, delta)`` with weight ``a(s, t) = 1 - t kappa(s)`` the form is

    h^2 int (a^{-1} |d_s u|^2 + a |d_t u|^2) ds dt - h^{3/2} int |u(s, 0)|^2 ds

against the mass ``int |u|^2 a ds dt``, with a Dirichlet condition at
``t = delta``. The normal direction uses the cubic elements of the 1D model
operators. Along the boundary a circle separates exactly into Fourier modes;
other curves use sixth-order staggered periodic differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .._fem1d import IntervalFEM
from .._linalg import lowest_eigenpairs, residuals
from ..errors import MeshError, ParameterError
from ..geometry import PlanarCurve, TubeGrid
from ..spectrum import Spectrum

#: Nodes required across one boundary-layer length h^{1/2}.
MIN_LAYER_NODES = 12
# sixth-order staggered first difference, nodes -> midpoints s_{i+1/2};
# unlike the centred stencil it does not annihilate the alternating grid mode
_STAG6 = {-2: -3 / 640, -1: 25 / 384, 0: -75 / 64, 1: 75 / 64, 2: -25 / 384, 3: 3 / 640}


def default_delta(h: float) -> float:
    """``6 h^{1/2} |log h|``, where the tube error is below any power of h."""
    return 6.0 * math.sqrt(h) * abs(math.log(h))


def _resolve(curve, h, delta, n_t, n_s):
    if not 0 < h < 1:
        raise ParameterError("h must lie in (0, 1)")
    if delta is None:
        delta = min(default_delta(h), 0.95 * curve.tube_halfwidth)
    if delta * curve.kappa_max >= 1:
        raise ParameterError("delta * max kappa must stay below 1 (weight degenerates)")
    rh = math.sqrt(h)
    if n_t is None:
        n_t = max(8, int(math.ceil(16 * delta / rh)))
    if 3 * n_t * rh / delta < MIN_LAYER_NODES:
        raise MeshError(f"normal grid too coarse: fewer than {MIN_LAYER_NODES} nodes per h^(1/2)")
    if n_s is None:
        # tangential structure lives on the scale h^{1/4}
        n_s = max(64, 2 * int(math.ceil(curve.length / (0.25 * rh**0.5))))
    return delta, int(n_t), int(n_s)


@dataclass(frozen=True)
class TubeResult:
    """Spectrum plus the grid needed to interpret its eigenvectors.

    Eigenvectors are stored as arrays of shape ``(n_s, 3 n_t + 1)`` (Dirichlet
    row included), normalized in the weighted tube norm.
    """

    spectrum: Spectrum
    grid: TubeGrid
    h: float
    vectors: list | None = None


def _fd_matrix(n, length):
    """Periodic derivative from the nodes ``s_i`` to the midpoints ``s_{i+1/2}``."""
    ds = length / n
    rows = np.repeat(np.arange(n), len(_STAG6))
    cols = (rows + np.tile(list(_STAG6), n)) % n
    vals = np.tile(list(_STAG6.values()), n) / ds
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _circle_modes(grid, h, n_eigs, fem):
    """Per-mode problems on a circle; returns (values, mode index) pairs."""
    R = grid.curve.params["R"]
    kappa = 1.0 / R
    a = lambda t: 1.0 - kappa * t  # noqa: E731
    inv_a = lambda t: 1.0 / (1.0 - kappa * t)  # noqa: E731
    Kt = fem.stiffness(a)[:-1, :-1].tolil()
    Kt[0, 0] -= h**-0.5
    Kt = (h * h) * Kt.tocsr()
    Mt = fem.mass(a)[:-1, :-1]
    Ms = (h * h) * fem.mass(inv_a)[:-1, :-1]
    vals, modes, vecs = [], [], []
    m = 0
    while True:
        A = Kt + (m / R) ** 2 * Ms
        k = min(n_eigs, A.shape[0] - 2)
        lam, v = lowest_eigenpairs(A, Mt, k, sigma=-2.0 * h)
        if m > 0 and len(vals) >= n_eigs and lam[0] > np.sort(vals)[n_eigs - 1]:
            break
        for j in range(k):
            mult = 1 if m == 0 else 2
            vals.extend([lam[j]] * mult)
            modes.extend([(m, j, "cos"), (m, j, "sin")][:mult])
            vecs.extend([v[:, j]] * mult)
        m += 1
    order = np.argsort(vals, kind="stable")[:n_eigs]
    return np.array(vals)[order], [modes[i] for i in order], [vecs[i] for i in order], (Kt, Ms, Mt)


def _general_problem(grid, h, fem):
    n_s = grid.n_s
    ds = grid.curve.length / n_s
    blocks_k, blocks_ms, blocks_m = [], [], []
    for kap in grid.kappa:
        a = lambda t, kap=kap: 1.0 - kap * t  # noqa: E731
        Kt = fem.stiffness(a)[:-1, :-1].tolil()
        Kt[0, 0] -= h**-0.5
        blocks_k.append((h * h * ds) * Kt.tocsr())
        blocks_m.append(ds * fem.mass(a)[:-1, :-1])
    # the metric factor of the tangential term sits at the midpoints
    for kap in grid.curve.curvature(grid.s + 0.5 * ds):
        blocks_ms.append((h * h * ds) * fem.mass(lambda t, kap=kap: 1.0 / (1.0 - kap * t))[:-1, :-1])
    nt = fem.n_nodes - 1
    Ds = sp.kron(_fd_matrix(n_s, grid.curve.length), sp.identity(nt), format="csr")
    A = sp.block_diag(blocks_k, format="csr") + (Ds.T @ sp.block_diag(blocks_ms, format="csr") @ Ds)
    M = sp.block_diag(blocks_m, format="csr")
    return A.tocsr(), M


def tube_problem(curve: PlanarCurve, h: float, delta: float | None = None, n_t: int | None = None, n_s: int | None = None):
    """Resolved grid and 1D element space used by :func:`tube_spectrum`."""
    delta, n_t, n_s = _resolve(curve, h, delta, n_t, n_s)
    grid = TubeGrid(curve, delta, n_s, n_t)
    return grid, IntervalFEM(delta, n_t)


def tube_solve(curve, h, delta=None, n_eigs=5, n_t=None, n_s=None, keep_vectors=False) -> TubeResult:
    """Like :func:`tube_spectrum` but also returns the grid and eigenvectors."""
    if n_eigs < 1:
        raise ParameterError("n_eigs must be positive")
    grid, fem = tube_problem(curve, h, delta, n_t, n_s)
    nt = fem.n_nodes - 1
    meta = {"operator": "robin_tube", "curve": curve.kind, "h": h, "delta": grid.delta, "n_s": grid.n_s, "n_t": grid.n_t}
    vectors = None
    if curve.kind == "circle":
        vals, modes, vecs, (Kt, Ms, Mt) = _circle_modes(grid, h, n_eigs, fem)
        R = curve.params["R"]
        res = [residuals(Kt + (m / R) ** 2 * Ms, Mt, np.array([lam]), v[:, None])[0] for lam, (m, _, _), v in zip(vals, modes, vecs)]
        meta.update(method="fourier_modes", modes=[m for m, _, _ in modes])
        if keep_vectors:
            vectors = []
            L = curve.length
            for (m, _, phase), v in zip(modes, vecs):
                ang = np.cos(2 * np.pi * m * grid.s / L) if phase == "cos" else np.sin(2 * np.pi * m * grid.s / L)
                ang = ang / math.sqrt(np.sum(ang**2) * L / grid.n_s)
                vectors.append(np.outer(ang, np.append(v, 0.0)))
    else:
        A, M = _general_problem(grid, h, fem)
        vals, vecs = lowest_eigenpairs(A, M, n_eigs, sigma=-2.0 * h)
        res = residuals(A, M, vals, vecs)
        meta.update(method="finite_differences")
        if keep_vectors:
            vectors = [np.hstack([v.reshape(grid.n_s, nt), np.zeros((grid.n_s, 1))]) for v in vecs.T]
    meta["max_residual"] = float(np.max(res))
    return TubeResult(Spectrum(vals, meta), grid, h, vectors)


def tube_spectrum(curve: PlanarCurve, h: float, delta: float | None = None, n_eigs: int = 5, n_t: int | None = None, n_s: int | None = None) -> Spectrum:
    """Lowest ``n_eigs`` eigenvalues of the Robin Laplacian on the boundary tube of width ``delta``.

    Defaults: ``delta = 6 h^{1/2} |log h|`` (capped inside the tube width),
    ``16`` cubic elements per ``h^{1/2}`` across the tube.
    """
    return tube_solve(curve, h, delta, n_eigs, n_t, n_s).spectrum


def tube_norm(result: TubeResult, psi) -> float:
    """Weighted tube norm ``(int |psi|^2 (1 - t kappa) ds dt)^{1/2}`` of a grid array."""
    grid = result.grid
    fem = IntervalFEM(grid.delta, grid.n_t)
    ds = grid.curve.length / grid.n_s
    total = 0.0
    for i, kap in enumerate(grid.kappa):
        total += ds * fem.quadratic_forms(psi[i], lambda t, kap=kap: 1.0 - kap * t)[1]
    return math.sqrt(total)
