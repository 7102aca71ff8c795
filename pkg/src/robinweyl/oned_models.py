"""One-dimensional Robin model operators in the normal variable.

Three operators are covered, all with the attractive Robin condition
``u'(0) = -u(0)``:

* the half-line operator ``-d^2/dtau^2`` on (0, inf), spectrum {-1} U [0, inf);
* the interval operator on (0, T) with a Dirichlet condition at ``T``, whose
  eigenvalues solve transcendental equations;
* the weighted operator ``-(1 - B tau)^{-1} d/dtau (1 - B tau) d/dtau`` on
  ``L^2((0, T), (1 - B tau) dtau)``, the transverse part of the Laplacian in
  boundary coordinates near a boundary of curvature ``B / sqrt(h)``.

The weighted operator is discretized through its quadratic form
``int |u'|^2 (1 - B tau) dtau - |u(0)|^2`` with cubic finite elements, so the
Robin condition is natural and never imposed on nodes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._fem1d import IntervalFEM
from ._linalg import lowest_eigenpairs
from .errors import ParameterError, SolverError

#: Essential spectrum of the half-line operator, reported as metadata only.
HALFLINE_ESSENTIAL_SPECTRUM = (0.0, math.inf)

DEFAULT_N_GRID = 2048
_BRANCH_MARGIN = 1e-9


def default_n_grid(T: float) -> int:
    """2048 cells up to T = 40, then proportionally more."""
    return DEFAULT_N_GRID if T <= 40 else int(math.ceil(DEFAULT_N_GRID * T / 40.0))


@dataclass(frozen=True)
class OneDParams:
    """Interval length ``T``, weight slope ``B`` and number of cells ``n_grid``.

    ``n_grid`` counts finite elements; with cubic elements the sampled grid
    has ``3 * n_grid + 1`` equispaced points.
    """

    T: float
    B: float = 0.0
    n_grid: int | None = None

    def __post_init__(self):
        if not self.T > 1:
            raise ParameterError(f"T must exceed 1, got {self.T}")
        if not abs(self.B) * self.T < 1.0 / 3.0:
            raise ParameterError(f"|B| T must stay below 1/3, got {abs(self.B) * self.T:.4g}")
        if self.n_grid is None:
            object.__setattr__(self, "n_grid", default_n_grid(self.T))
        if self.n_grid < 16:
            raise ParameterError(f"n_grid must be at least 16, got {self.n_grid}")


@dataclass(frozen=True)
class OneDModelResult:
    params: OneDParams
    eigenvalues: np.ndarray
    tau: np.ndarray
    ground_state: np.ndarray
    method: str  # "transcendental" or "discretized"
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "params": {"T": self.params.T, "B": self.params.B, "n_grid": self.params.n_grid},
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "ground_state": {"tau": self.tau.tolist(), "values": self.ground_state.tolist()},
            "method": self.method,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def halfline_ground():
    """Ground energy and normalized ground state of the half-line operator."""
    return -1.0, lambda tau: math.sqrt(2.0) * np.exp(-np.asarray(tau, dtype=float))


def _bisect(g, lo, hi):
    """Bisection for a sign change of ``g`` on [lo, hi], run to float resolution.

    The interval shrinks until its midpoint coincides with an endpoint, which
    is far below the 1e-14 tolerance required of the transcendental roots.
    """
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return lo
    if ghi == 0:
        return hi
    if np.sign(glo) == np.sign(ghi):
        raise SolverError(f"no sign change on [{lo!r}, {hi!r}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        if gm == 0:
            return mid
        if np.sign(gm) == np.sign(glo):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _check_T(T):
    if not T > 1:
        raise ParameterError(f"T must exceed 1 for the fixed-point argument, got {T}")


def interval_ground_w(T: float) -> float:
    """Root ``w`` in (0, 1) of ``w = tanh(w T)``; the ground energy is ``-w**2``."""
    _check_T(T)
    # w - tanh(wT) < 0 near 0+ since T > 1, and >= 0 at w = 1
    return _bisect(lambda w: w - math.tanh(w * T), 1e-300, 1.0)


def interval_ground(T: float) -> float:
    """Lowest eigenvalue of the Robin-Dirichlet interval operator on (0, T).

    The eigenfunction is ``sinh(w (T - tau))``; the Robin condition at 0
    turns into ``w = tanh(w T)``.
    """
    w = interval_ground_w(T)
    return -w * w


def positive_branch(T: float, n: int):
    """Open interval of ``w`` containing the root of ``tan(w T) = w`` for ``lambda_n``.

    A positive root needs ``tan(w T) > 0``, i.e. ``w T`` in ``(k pi, k pi + pi/2)``;
    ``lambda_n`` (n >= 2) takes ``k = n - 1``.
    """
    return (n - 1) * math.pi / T, (2 * n - 1) * math.pi / (2 * T)


def interval_positive_eigenvalues(T: float, n_max: int) -> list[float]:
    """Eigenvalues ``lambda_2, ..., lambda_{n_max}`` of the interval operator.

    Each ``lambda_n = w**2`` with ``w`` the root of ``tan(w T) = w`` on its
    branch; the bracket end at the tangent pole is pulled in by a relative
    margin of 1e-9.
    """
    _check_T(T)
    if n_max < 2:
        raise ParameterError("n_max must be at least 2")
    out = []
    for n in range(2, n_max + 1):
        lo, hi = positive_branch(T, n)
        hi = hi * (1.0 - _BRANCH_MARGIN)
        if not hi > lo:
            raise SolverError(f"degenerate bracket for n={n}, T={T}")
        # tan(wT) - w is -w < 0 at the left end and +inf at the pole
        w = _bisect(lambda x: math.tan(x * T) - x, lo, hi)
        out.append(w * w)
    return out


def interval_spectrum(T: float, n_eigs: int = 1, n_samples: int = 2049) -> OneDModelResult:
    """Closed-form counterpart of :func:`weighted_spectrum` for ``B = 0``."""
    params = OneDParams(T=T, B=0.0, n_grid=max(16, (n_samples - 1) // 3))
    w = interval_ground_w(T)
    vals = [-w * w]
    if n_eigs > 1:
        vals += interval_positive_eigenvalues(T, n_eigs)
    tau = np.linspace(0.0, T, n_samples)
    u = np.sinh(w * (T - tau))
    # int_0^T sinh^2(w(T - x)) dx = sinh(2wT)/(4w) - T/2
    u /= math.sqrt(math.sinh(2 * w * T) / (4 * w) - T / 2)
    return OneDModelResult(params, np.array(vals), tau, u, "transcendental")


def _weighted_problem(params: OneDParams):
    fem = IntervalFEM(params.T, params.n_grid)
    B = params.B
    weight = lambda x: 1.0 - B * x  # noqa: E731
    K = fem.stiffness(weight).tolil()
    K[0, 0] -= 1.0
    K = K.tocsr()[:-1, :-1]  # Dirichlet at tau = T
    M = fem.mass(weight)[:-1, :-1]
    return fem, K, M


def _polished(fem, B, vecs):
    """Rayleigh quotients of the computed vectors, free of assembly cancellation."""
    grad, mass = fem.quadratic_forms(vecs, lambda x: 1.0 - B * x)
    return np.sort((grad - vecs[0] ** 2) / mass)


def weighted_spectrum(params: OneDParams, n_eigs: int = 1) -> OneDModelResult:
    """Lowest eigenpairs of the weighted operator with parameters ``(T, B)``.

    Solves the generalized problem ``K u = lam M u`` for the form
    ``int |u'|^2 (1 - B tau) - |u(0)|^2`` against the mass
    ``int |u|^2 (1 - B tau)``. The ground state is returned positive at
    ``tau = 0``, sampled on the element nodes and normalized in the weighted
    norm.
    """
    if n_eigs < 1:
        raise ParameterError("n_eigs must be positive")
    fem, K, M = _weighted_problem(params)
    # With weight in [2/3, 4/3] the form is bounded below by -27/8 times the mass
    vals, vecs = lowest_eigenpairs(K, M, n_eigs, sigma=-4.0)
    vecs = np.vstack([vecs, np.zeros((1, n_eigs))])
    vals = _polished(fem, params.B, vecs)
    u = vecs[:, 0]
    if u[0] < 0:
        u = -u
    # entries below roundoff (deep in the tail for large T) carry no sign
    floor = 1e-13 * np.max(np.abs(u))
    if np.any(u[1:-1] < -floor):
        raise SolverError("discrete ground state changes sign")
    u = np.abs(u)
    u /= math.sqrt(fem.quadratic_forms(u, lambda x: 1.0 - params.B * x)[1])
    return OneDModelResult(
        params,
        vals,
        fem.nodes.copy(),
        u,
        "discretized",
        meta={"n_nodes": fem.n_nodes, "element_degree": 3},
    )


def weighted_norm(result: OneDModelResult, values=None) -> float:
    """Weighted L^2 norm of nodal ``values`` (default: the ground state)."""
    values = result.ground_state if values is None else np.asarray(values)
    B = result.params.B
    fem = IntervalFEM(result.params.T, (len(result.tau) - 1) // 3)
    M = fem.mass(lambda x: 1.0 - B * x)
    return float(math.sqrt(values @ (M @ values)))


def _check_window(T, B0, step):
    if step <= 0:
        raise ParameterError("step must be positive")
    if not (abs(B0) + step) * T < 1.0 / 3.0:
        raise ParameterError(f"B0 +/- step leaves the window |B| T < 1/3 (T={T})")


def ground_energy_slope(T: float, B0: float = 0.0, step: float = 1e-4, n_grid: int | None = None) -> float:
    """Central difference of the ground energy of the weighted operator in ``B``."""
    _check_window(T, B0, step)
    lp = weighted_spectrum(OneDParams(T, B0 + step, n_grid)).eigenvalues[0]
    lm = weighted_spectrum(OneDParams(T, B0 - step, n_grid)).eigenvalues[0]
    return (lp - lm) / (2 * step)


def ground_state_slope_norm(T: float, B0: float = 0.0, step: float = 1e-4, n_grid: int | None = None) -> float:
    """L^2(dtau) norm of the B-derivative of ``(1 - B tau)^{1/2} u_B``.

    ``u_B`` is the positive normalized ground state; the derivative is a
    central difference on a common grid.
    """
    _check_window(T, B0, step)
    rp = weighted_spectrum(OneDParams(T, B0 + step, n_grid))
    rm = weighted_spectrum(OneDParams(T, B0 - step, n_grid))
    tau = rp.tau
    up = np.sqrt(1 - (B0 + step) * tau) * rp.ground_state
    um = np.sqrt(1 - (B0 - step) * tau) * rm.ground_state
    d = (up - um) / (2 * step)
    fem = IntervalFEM(T, (len(tau) - 1) // 3)
    return float(math.sqrt(d @ (fem.mass() @ d)))


def decay_rate(result: OneDModelResult) -> float:
    """Exponential decay rate of the ground state away from the Robin end.

    Least-squares fit of ``log u`` against ``-alpha tau`` over [1, T - 1].
    """
    T = result.params.T
    if T <= 2:
        raise ParameterError("decay window [1, T-1] is empty for T <= 2")
    tau, u = result.tau, result.ground_state
    sel = (tau >= 1.0) & (tau <= T - 1.0) & (u > 0)
    if sel.sum() < 3:
        raise ParameterError("too few samples in the decay window")
    slope = np.polyfit(tau[sel], np.log(u[sel]), 1)[0]
    return float(-slope)
