"""P1 finite elements for the Robin Laplacian on a planar domain.

The form ``h^2 int |grad u|^2 - h^{3/2} int_Gamma |u|^2`` is assembled
against the L^2 mass matrix; the Robin condition is natural.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .._linalg import lowest_eigenpairs, residuals
from ..errors import MeshError, ParameterError
from ..geometry import PlanarCurve, make_circle
from ..spectrum import Spectrum
from .mesh import TriMesh, generate_mesh, load_mesh_json, refine


@dataclass(frozen=True)
class RobinProblem:
    """Robin eigenproblem on the interior of ``curve`` (use :meth:`disk` for a disk).

    ``target`` is ``"negative_only"`` or a float ``lam``: only eigenvalues
    ``<= 0`` (resp. ``<= lam``) are kept. ``mesh_size`` is the boundary and
    core spacing, ``first_layer`` the thickness of the boundary row;
    ``refinements`` uniform red refinements follow generation. A mesh file
    (triangle list JSON) may replace the generated mesh.
    """

    curve: PlanarCurve
    h: float
    target: str | float = "negative_only"
    mesh_size: float | None = None
    first_layer: float | None = None
    refinements: int = 0
    mesh_file: str | None = None

    def __post_init__(self):
        if not 0 < self.h < 1:
            raise ParameterError("h must lie in (0, 1)")
        if self.refinements < 0:
            raise ParameterError("refinements must be nonnegative")
        if not (self.target == "negative_only" or isinstance(self.target, (int, float))):
            raise ParameterError("target must be 'negative_only' or a number")

    @classmethod
    def disk(cls, R, h, **kwargs):
        return cls(make_circle(R), h, **kwargs)

    @property
    def resolved_sizes(self):
        """Default spacing: h^{1/2}/14 along the boundary, h^{1/2}/30 across it."""
        rh = math.sqrt(self.h)
        size = self.mesh_size or min(rh / 14, self.curve.length / 48)
        first = self.first_layer or min(rh / 30, size)
        return size, first

    def build_mesh(self) -> TriMesh:
        if self.mesh_file:
            mesh = load_mesh_json(self.mesh_file)
        else:
            mesh = generate_mesh(self.curve, *self.resolved_sizes)
        for _ in range(self.refinements):
            mesh = refine(mesh)
        return mesh


def assemble(mesh: TriMesh):
    """Stiffness ``K``, mass ``M`` and boundary mass ``Mb`` (all CSR)."""
    p = mesh.nodes[mesh.triangles]
    area = mesh.areas()
    # gradients of barycentric coordinates
    rot = np.stack([p[:, 1] - p[:, 2], p[:, 2] - p[:, 0], p[:, 0] - p[:, 1]], axis=1)
    grad = np.stack([-rot[..., 1], rot[..., 0]], axis=-1) / (2 * area)[:, None, None]
    Kloc = np.einsum("eid,ejd->eij", grad, grad) * area[:, None, None]
    Mloc = (np.ones((3, 3)) + np.eye(3))[None] * (area / 12)[:, None, None]
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = mesh.n_nodes
    K = sp.csr_matrix((Kloc.ravel(), (rows, cols)), shape=(n, n))
    M = sp.csr_matrix((Mloc.ravel(), (rows, cols)), shape=(n, n))
    be = mesh.boundary_edges
    ln = np.linalg.norm(mesh.nodes[be[:, 1]] - mesh.nodes[be[:, 0]], axis=1)
    Bloc = (np.ones((2, 2)) + np.eye(2))[None] * (ln / 6)[:, None, None]
    Mb = sp.csr_matrix((Bloc.ravel(), (np.repeat(be, 2, axis=1).ravel(), np.tile(be, (1, 2)).ravel())), shape=(n, n))
    return K, M, Mb


def fem_spectrum(problem: RobinProblem, n_eigs: int = 5, mesh: TriMesh | None = None, keep_vectors: bool = False) -> Spectrum:
    """Lowest ``n_eigs`` eigenvalues of the Robin Laplacian by P1 elements.

    Raises :class:`MeshError` when boundary triangles are thicker than
    ``h^{1/2}/8`` across the boundary.
    """
    if n_eigs < 1:
        raise ParameterError("n_eigs must be positive")
    h = problem.h
    mesh = mesh or problem.build_mesh()
    normal = mesh.boundary_normal_size()
    if normal > math.sqrt(h) / 8:
        raise MeshError(f"boundary layer under-resolved: normal size {normal:.3g} > h^(1/2)/8 = {math.sqrt(h) / 8:.3g}")
    K, M, Mb = assemble(mesh)
    A = (h * h) * K - h**1.5 * Mb
    vals, vecs = lowest_eigenpairs(A.tocsr(), M, n_eigs, sigma=-2.0 * h)
    res = residuals(A, M, vals, vecs)
    ceiling = 0.0 if problem.target == "negative_only" else float(problem.target)
    keep = vals <= ceiling
    meta = {
        "operator": "robin_fem_p1",
        "curve": problem.curve.kind,
        "h": h,
        "n_nodes": mesh.n_nodes,
        "n_triangles": len(mesh.triangles),
        "boundary_normal_size": normal,
        "refinements": problem.refinements,
        "max_residual": float(np.max(res)),
        "truncated": bool(np.all(keep)),
    }
    return Spectrum(vals[keep], meta, vecs[:, keep] if keep_vectors else None)


def write_eigenfunction_csv(mesh: TriMesh, values, path):
    """Nodal samples as ``x,y,value`` rows."""
    values = np.asarray(values, dtype=float)
    if values.shape != (mesh.n_nodes,):
        raise ParameterError("one value per mesh node is required")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "value"])
        for (x, y), v in zip(mesh.nodes, values):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(v))])


def fem_count_below(problem: RobinProblem, threshold: float, n_eigs: int = 16, max_eigs: int = 1024) -> int:
    """Number of FEM eigenvalues ``<= threshold``, growing ``n_eigs`` until one lies above it."""
    mesh = problem.build_mesh()
    while n_eigs <= max_eigs:
        vals = fem_spectrum(RobinProblem(problem.curve, problem.h, float("inf")), n_eigs, mesh=mesh).eigenvalues
        if vals[-1] > threshold:
            return int(np.count_nonzero(vals <= threshold))
        n_eigs *= 2
    raise MeshError(f"more than {max_eigs} eigenvalues below the threshold")
