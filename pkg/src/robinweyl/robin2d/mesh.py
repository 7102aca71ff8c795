"""Triangular meshes of the region enclosed by a curve, graded toward the boundary.

The mesh has two parts. A structured layer follows the tubular coordinates:
rows ``t_0 = 0 < t_1 < ...`` of geometrically growing thickness, each row
sampled at the same arclengths, with every quadrilateral split in two. The
remaining core is a Delaunay triangulation of a triangular lattice clipped
to the innermost row. Boundary nodes remember their arclength so refinement
can put new boundary nodes on the curve itself.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from matplotlib.path import Path
from scipy.spatial import Delaunay, cKDTree

from ..errors import MeshError, ParameterError
from ..geometry import PlanarCurve

MIN_ANGLE_DEG = 5.0


@dataclass
class TriMesh:
    """Nodes ``(N, 2)``, counterclockwise triangles ``(M, 3)`` and boundary edges ``(B, 2)``.

    ``boundary_s`` holds the arclength of each boundary node (NaN elsewhere);
    it is only set for meshes generated from a curve.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_s: np.ndarray | None = None
    curve: PlanarCurve | None = None

    @property
    def n_nodes(self):
        return len(self.nodes)

    def areas(self):
        p = self.nodes[self.triangles]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def min_angle(self):
        """Smallest interior angle over all triangles, in degrees."""
        p = self.nodes[self.triangles]
        worst = np.inf
        for i in range(3):
            a = p[:, (i + 1) % 3] - p[:, i]
            b = p[:, (i + 2) % 3] - p[:, i]
            cosang = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            worst = min(worst, float(np.degrees(np.arccos(np.clip(cosang, -1, 1))).min()))
        return worst

    def boundary_normal_size(self):
        """Largest height, over the boundary edge, of a triangle touching the boundary."""
        edge_len = np.linalg.norm(self.nodes[self.boundary_edges[:, 1]] - self.nodes[self.boundary_edges[:, 0]], axis=1)
        owner = _edge_owner(self.triangles, self.boundary_edges)
        return float(np.max(2 * np.abs(self.areas()[owner]) / edge_len))

    def check(self):
        if np.any(self.areas() <= 0):
            raise MeshError("mesh has inverted or degenerate triangles")
        if self.min_angle() < MIN_ANGLE_DEG:
            raise MeshError(f"mesh quality failure: minimum angle {self.min_angle():.2f} deg")

    def to_dict(self):
        return {"nodes": self.nodes.tolist(), "triangles": self.triangles.tolist(), "boundary_edges": self.boundary_edges.tolist()}

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _edge_owner(triangles, edges):
    """Index of the triangle containing each (undirected) edge."""
    lookup = {}
    for k, tri in enumerate(triangles):
        for i in range(3):
            a, b = tri[i], tri[(i + 1) % 3]
            lookup[(min(a, b), max(a, b))] = k
    return np.array([lookup[(min(a, b), max(a, b))] for a, b in edges])


def boundary_edges_of(triangles):
    """Edges that belong to exactly one triangle, oriented as in that triangle."""
    e = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    key = np.sort(e, axis=1)
    _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    return e[counts[inv.ravel()] == 1]


def mesh_from_triangles(nodes, triangles) -> TriMesh:
    """Wrap a user-supplied triangle list; orientation is fixed to counterclockwise."""
    nodes = np.asarray(nodes, dtype=float)
    tri = np.asarray(triangles, dtype=int)
    if nodes.ndim != 2 or nodes.shape[1] != 2 or tri.ndim != 2 or tri.shape[1] != 3:
        raise MeshError("nodes must be (N, 2) and triangles (M, 3)")
    if tri.min() < 0 or tri.max() >= len(nodes):
        raise MeshError("triangle indices out of range")
    mesh = TriMesh(nodes, tri.copy(), np.zeros((0, 2), dtype=int))
    flip = mesh.areas() < 0
    mesh.triangles[flip] = mesh.triangles[flip][:, [0, 2, 1]]
    mesh.boundary_edges = boundary_edges_of(mesh.triangles)
    mesh.check()
    return mesh


def load_mesh_json(path) -> TriMesh:
    """Read ``{"nodes": [[x, y], ...], "triangles": [[i, j, k], ...]}``."""
    with open(path) as fh:
        data = json.load(fh)
    unknown = set(data) - {"nodes", "triangles", "boundary_edges"}
    if unknown:
        raise MeshError(f"unknown keys in mesh file: {sorted(unknown)}")
    return mesh_from_triangles(data["nodes"], data["triangles"])


def layer_rows(first: float, size: float, depth: float, growth: float = 1.12):
    """Row depths starting at 0 with spacing ``first`` growing to ``size``, reaching ``depth``."""
    t = [0.0]
    dt = first
    while t[-1] < depth - 1e-12:
        t.append(t[-1] + dt)
        dt = min(dt * growth, size)
    return np.array(t)


def generate_mesh(curve: PlanarCurve, size: float, first: float, depth: float | None = None, growth: float = 1.12) -> TriMesh:
    """Graded mesh of the interior of ``curve``.

    Parameters
    ----------
    size : float
        Spacing along the boundary and in the core.
    first : float
        Thickness of the row touching the boundary.
    depth : float, optional
        Thickness of the structured layer; default is where the spacing
        has grown to ``size`` plus two rows, capped at half the tube width.
    """
    if not 0 < first <= size:
        raise ParameterError("need 0 < first <= size")
    n_s = max(16, int(math.ceil(curve.length / size)))
    s = curve.uniform_s(n_s)
    if depth is None:
        rows = 0
        dt, depth = first, 0.0
        while dt < size or rows < 2:
            depth += dt
            if dt >= size:
                rows += 1
            dt = min(dt * growth, size)
    depth = min(depth, 0.5 * curve.tube_halfwidth)
    t = layer_rows(first, size, depth, growth)
    t[-1] = min(t[-1], 0.6 * curve.tube_halfwidth)
    n_t = len(t)

    gamma = curve.position(s)
    normal = curve.inward_normal(s)
    layer = gamma[None, :, :] + t[:, None, None] * normal[None, :, :]
    nodes = [layer.reshape(-1, 2)]
    idx = np.arange(n_t * n_s).reshape(n_t, n_s)
    tris = []
    for j in range(n_t - 1):
        a = idx[j]
        b = np.roll(idx[j], -1)
        c = np.roll(idx[j + 1], -1)
        d = idx[j + 1]
        # alternate the diagonal so the layer has no preferred direction
        even = (np.arange(n_s) + j) % 2 == 0
        tris.append(np.where(even[:, None], np.column_stack([a, b, c]), np.column_stack([a, b, d])))
        tris.append(np.where(even[:, None], np.column_stack([a, c, d]), np.column_stack([b, c, d])))

    inner = layer[-1]
    inner_path = Path(inner)
    h_core = float(np.median(np.linalg.norm(np.roll(inner, -1, axis=0) - inner, axis=1)))
    h_core = max(h_core, t[-1] - t[-2])
    lo, hi = inner.min(axis=0), inner.max(axis=0)
    ny = int(math.ceil((hi[1] - lo[1]) / (h_core * math.sqrt(3) / 2))) + 1
    nx = int(math.ceil((hi[0] - lo[0]) / h_core)) + 2
    gx, gy = np.meshgrid(np.arange(nx) * h_core, np.arange(ny) * h_core * math.sqrt(3) / 2)
    gx = gx + 0.5 * h_core * (np.arange(ny)[:, None] % 2)
    lattice = np.column_stack([gx.ravel() + lo[0] - 0.5 * h_core, gy.ravel() + lo[1]])
    keep = inner_path.contains_points(lattice)
    lattice = lattice[keep]
    if len(lattice):
        dist, _ = cKDTree(inner).query(lattice)
        lattice = lattice[dist >= 0.7 * h_core]
    core_pts = np.vstack([inner, lattice])
    dela = Delaunay(core_pts)
    simp = dela.simplices
    cent = core_pts[simp].mean(axis=1)
    simp = simp[inner_path.contains_points(cent)]
    # map core indices to global ones: inner curve points are the last layer row
    glob = np.concatenate([idx[-1], n_t * n_s + np.arange(len(lattice))])
    core_tris = glob[simp]
    nodes.append(lattice)
    tris.append(core_tris)

    mesh_nodes = np.vstack(nodes)
    triangles = np.vstack(tris).astype(int)
    mesh = TriMesh(mesh_nodes, triangles, np.zeros((0, 2), dtype=int))
    flip = mesh.areas() < 0
    mesh.triangles[flip] = mesh.triangles[flip][:, [0, 2, 1]]
    bnd = np.column_stack([idx[0], np.roll(idx[0], -1)])
    mesh.boundary_edges = bnd
    bs = np.full(len(mesh_nodes), np.nan)
    bs[idx[0]] = s
    mesh.boundary_s = bs
    mesh.curve = curve

    # the inner row must survive as edges of the core triangulation
    if len(boundary_edges_of(mesh.triangles)) != n_s:
        raise MeshError("core triangulation does not conform to the boundary layer")
    mesh.check()
    return mesh


def refine(mesh: TriMesh) -> TriMesh:
    """Red refinement: each triangle splits into four through its edge midpoints.

    Midpoints of boundary edges are placed on the curve (at the mean
    arclength of the edge end points) when the mesh knows its curve.
    """
    tri = mesh.triangles
    edges = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    key = np.sort(edges, axis=1)
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.ravel()
    n0 = len(mesh.nodes)
    mids = 0.5 * (mesh.nodes[uniq[:, 0]] + mesh.nodes[uniq[:, 1]])
    new_s = None
    if mesh.curve is not None and mesh.boundary_s is not None:
        curve = mesh.curve
        L = curve.length
        bkey = np.sort(mesh.boundary_edges, axis=1)
        pos = {tuple(e): k for k, e in enumerate(uniq)}
        bidx = np.array([pos[tuple(e)] for e in bkey])
        sa = mesh.boundary_s[mesh.boundary_edges[:, 0]]
        sb = mesh.boundary_s[mesh.boundary_edges[:, 1]]
        sb = np.where(sb < sa, sb + L, sb)
        smid = np.mod(0.5 * (sa + sb), L)
        mids[bidx] = curve.position(smid)
        new_s = np.full(len(uniq), np.nan)
        new_s[bidx] = smid
    m = len(tri)
    e01, e12, e20 = (n0 + inv[:m], n0 + inv[m : 2 * m], n0 + inv[2 * m :])
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    new_tri = np.vstack(
        [
            np.column_stack([a, e01, e20]),
            np.column_stack([e01, b, e12]),
            np.column_stack([e20, e12, c]),
            np.column_stack([e01, e12, e20]),
        ]
    )
    # boundary edges split in two, orientation kept
    bkey = np.sort(mesh.boundary_edges, axis=1)
    pos = {tuple(e): k for k, e in enumerate(uniq)}
    bm = n0 + np.array([pos[tuple(e)] for e in bkey])
    new_b = np.vstack([np.column_stack([mesh.boundary_edges[:, 0], bm]), np.column_stack([bm, mesh.boundary_edges[:, 1]])])
    bs = None
    if new_s is not None:
        bs = np.concatenate([mesh.boundary_s, new_s])
    out = TriMesh(np.vstack([mesh.nodes, mids]), new_tri, new_b, bs, mesh.curve)
    out.check()
    return out
