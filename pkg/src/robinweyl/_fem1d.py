"""Cubic Lagrange finite elements on a uniform interval mesh.

Shared by the transverse model operators and the tube solver so that both
discretize the normal direction with the same space. Nodes are equispaced
(three interior nodes per element are at 1/3 and 2/3), so nodal vectors are
samples on a uniform grid.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

DEGREE = 3
_REF_NODES = np.linspace(0.0, 1.0, DEGREE + 1)
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(8)
_GAUSS_X = 0.5 * (_GAUSS_X + 1.0)
_GAUSS_W = 0.5 * _GAUSS_W


def _reference_basis(x):
    """Values and derivatives of the reference basis at points ``x`` in [0, 1].

    Returns arrays of shape (len(x), DEGREE + 1). Product form rather than an
    inverted Vandermonde matrix: the derivatives must sum to zero to full
    precision, otherwise the stiffness matrix picks up a spurious shift of
    order eps / cell**2.
    """
    x = np.asarray(x, dtype=float)
    nodes = _REF_NODES
    m = DEGREE + 1
    phi = np.ones((len(x), m))
    dphi = np.zeros((len(x), m))
    for k in range(m):
        others = [j for j in range(m) if j != k]
        denom = np.prod([nodes[k] - nodes[j] for j in others])
        for j in others:
            phi[:, k] *= x - nodes[j]
            term = np.ones_like(x)
            for i in others:
                if i != j:
                    term *= x - nodes[i]
            dphi[:, k] += term
        phi[:, k] /= denom
        dphi[:, k] /= denom
    dphi -= dphi.mean(axis=1, keepdims=True)
    return phi, dphi


_PHI_Q, _DPHI_Q = _reference_basis(_GAUSS_X)


class IntervalFEM:
    """Cubic elements on ``[0, length]`` with ``n_elements`` equal cells."""

    def __init__(self, length: float, n_elements: int):
        if length <= 0 or n_elements < 1:
            raise ValueError("need a positive length and at least one element")
        self.length = float(length)
        self.n_elements = int(n_elements)
        self.cell = self.length / self.n_elements
        self.n_nodes = DEGREE * self.n_elements + 1
        self.nodes = np.linspace(0.0, self.length, self.n_nodes)
        self._dofs = DEGREE * np.arange(self.n_elements)[:, None] + np.arange(DEGREE + 1)[None, :]
        left = self.cell * np.arange(self.n_elements)
        self.quad_points = left[:, None] + self.cell * _GAUSS_X[None, :]

    def _assemble(self, local):
        rows = np.repeat(self._dofs, DEGREE + 1, axis=1).ravel()
        cols = np.tile(self._dofs, (1, DEGREE + 1)).ravel()
        return sp.csr_matrix((local.ravel(), (rows, cols)), shape=(self.n_nodes, self.n_nodes))

    def _weights_at_quad(self, weight):
        if weight is None:
            return np.ones_like(self.quad_points)
        return np.broadcast_to(np.asarray(weight(self.quad_points), dtype=float), self.quad_points.shape)

    def mass(self, weight=None):
        """Matrix of ``int w(x) phi_i phi_j dx``; ``weight`` is a vectorized callable."""
        w = self._weights_at_quad(weight) * (self.cell * _GAUSS_W)[None, :]
        local = np.einsum("eq,qi,qj->eij", w, _PHI_Q, _PHI_Q)
        return self._assemble(local)

    def stiffness(self, weight=None):
        """Matrix of ``int w(x) phi_i' phi_j' dx``."""
        w = self._weights_at_quad(weight) * (_GAUSS_W / self.cell)[None, :]
        local = np.einsum("eq,qi,qj->eij", w, _DPHI_Q, _DPHI_Q)
        # constants lie in the kernel exactly
        idx = np.arange(DEGREE + 1)
        local[:, idx, idx] -= local.sum(axis=2)
        return self._assemble(local)

    def quadratic_forms(self, values, weight=None):
        """Return ``(int w |u'|^2, int w |u|^2)`` for each column of nodal ``values``.

        Evaluated as weighted sums of squares at the quadrature points, which
        keeps full relative precision where ``v @ K @ v`` would lose it to
        cancellation on fine meshes.
        """
        v = np.asarray(values, dtype=float)
        single = v.ndim == 1
        v = v.reshape(self.n_nodes, -1)
        local = v[self._dofs]
        du = np.einsum("qi,eik->eqk", _DPHI_Q, local) / self.cell
        u = np.einsum("qi,eik->eqk", _PHI_Q, local)
        w = self._weights_at_quad(weight) * (self.cell * _GAUSS_W)[None, :]
        grad = np.einsum("eq,eqk->k", w, du**2)
        mass = np.einsum("eq,eqk->k", w, u**2)
        if single:
            return grad[0], mass[0]
        return grad, mass

    def evaluate(self, values, x):
        """Evaluate the piecewise cubic interpolant of nodal ``values`` at ``x``."""
        x = np.clip(np.asarray(x, dtype=float), 0.0, self.length)
        elem = np.minimum((x / self.cell).astype(int), self.n_elements - 1)
        xi = x / self.cell - elem
        phi, _ = _reference_basis(xi.ravel())
        local = np.asarray(values)[self._dofs[elem.ravel()]]
        return np.sum(phi * local, axis=1).reshape(x.shape)
