import csv
import json
import math

import numpy as np
import pytest

from robinweyl.errors import MeshError, ParameterError
from robinweyl.robin2d import (
    RobinProblem,
    disk_negative_spectrum,
    fem_count_below,
    fem_spectrum,
    generate_mesh,
    refine,
    write_eigenfunction_csv,
)
from robinweyl.robin2d.fem import assemble
from robinweyl.robin2d.mesh import layer_rows, load_mesh_json, mesh_from_triangles


@pytest.fixture(scope="module")
def disk_mesh(circle):
    return generate_mesh(circle, 0.08, 0.02)


def test_layer_rows():
    t = layer_rows(0.01, 0.05, 0.3)
    assert t[0] == 0.0 and t[1] == pytest.approx(0.01)
    assert np.all(np.diff(t) <= 0.05 + 1e-15)
    assert t[-1] >= 0.3 - 1e-12


def test_generated_mesh_quality(disk_mesh):
    disk_mesh.check()
    assert np.all(disk_mesh.areas() > 0)
    assert disk_mesh.min_angle() >= 5.0
    assert disk_mesh.boundary_normal_size() <= 0.02 * 1.01
    b = np.unique(disk_mesh.boundary_edges)
    assert np.allclose(np.linalg.norm(disk_mesh.nodes[b], axis=1), 1.0, atol=1e-12)


def test_assembly_identities(disk_mesh):
    K, M, Mb = assemble(disk_mesh)
    one = np.ones(disk_mesh.n_nodes)
    assert np.max(np.abs(K @ one)) < 1e-10
    # the mesh fills the inscribed regular polygon
    n = len(disk_mesh.boundary_edges)
    assert one @ (M @ one) == pytest.approx(0.5 * n * math.sin(2 * math.pi / n), rel=1e-12)
    assert one @ (Mb @ one) == pytest.approx(2 * n * math.sin(math.pi / n), rel=1e-12)
    assert abs(K - K.T).max() < 1e-12


def test_refine_projects_boundary(disk_mesh):
    fine = refine(disk_mesh)
    assert len(fine.triangles) == 4 * len(disk_mesh.triangles)
    b = np.unique(fine.boundary_edges)
    assert np.allclose(np.linalg.norm(fine.nodes[b], axis=1), 1.0, atol=1e-12)
    area_err = lambda m: abs(m.areas().sum() - math.pi)  # noqa: E731
    assert area_err(fine) < area_err(disk_mesh) / 3


def test_ellipse_mesh(ellipse):
    mesh = generate_mesh(ellipse, 0.1, 0.03)
    mesh.check()
    assert mesh.areas().sum() == pytest.approx(2 * math.pi, rel=2e-3)


def test_generate_mesh_rejects_bad_sizes(circle):
    with pytest.raises(ParameterError):
        generate_mesh(circle, 0.05, 0.1)


def test_disk_fem_matches_bessel_default_mesh():
    h = 0.1
    exact = disk_negative_spectrum(1.0, h).eigenvalues[:3]
    fem = fem_spectrum(RobinProblem.disk(1.0, h), 3)
    assert np.max(np.abs(fem.eigenvalues - exact) / np.abs(exact)) < 1e-3
    assert fem.meta["max_residual"] < 1e-8
    assert np.all(fem.eigenvalues >= exact - 1e-12)  # conforming elements bound from above


def test_fem_count_matches_disk():
    h = 0.1
    problem = RobinProblem.disk(1.0, h)
    assert fem_count_below(problem, 0.0) == len(disk_negative_spectrum(1.0, h))
    assert fem_count_below(problem, -0.9 * h) == len(disk_negative_spectrum(1.0, h, ceiling=-0.9 * h))


def test_target_filters_eigenvalues():
    h = 0.1
    spec = fem_spectrum(RobinProblem.disk(1.0, h, target=-0.11), 5)
    assert np.all(spec.eigenvalues <= -0.11)
    assert len(spec) == 3


def test_ellipse_max_curvature_heuristic(ellipse):
    # (mu + h) / h^{3/2} lies between -max kappa and -min kappa and drifts towards -max kappa
    ratios = []
    for h in (0.1, 0.05):
        mu = fem_spectrum(RobinProblem(ellipse, h), 1).eigenvalues[0]
        ratios.append((mu + h) / h**1.5)
    assert all(-ellipse.kappa_max < r < -ellipse.kappa_min for r in ratios)
    assert ratios[1] < ratios[0]


def test_under_resolved_mesh_rejected(disk_mesh):
    with pytest.raises(MeshError):
        fem_spectrum(RobinProblem.disk(1.0, 0.01), 1, mesh=disk_mesh)


def test_problem_validation(circle):
    with pytest.raises(ParameterError):
        RobinProblem(circle, 0.0)
    with pytest.raises(ParameterError):
        RobinProblem(circle, 0.1, target="everything")
    with pytest.raises(ParameterError):
        RobinProblem(circle, 0.1, refinements=-1)


def test_mesh_json_roundtrip(tmp_path, disk_mesh):
    path = tmp_path / "mesh.json"
    path.write_text(disk_mesh.to_json())
    loaded = load_mesh_json(path)
    assert np.array_equal(loaded.triangles, disk_mesh.triangles)
    h = 0.1
    a = fem_spectrum(RobinProblem.disk(1.0, h, mesh_file=str(path)), 2).eigenvalues
    b = fem_spectrum(RobinProblem.disk(1.0, h), 2, mesh=disk_mesh).eigenvalues
    assert np.allclose(a, b, rtol=1e-12)


def test_mesh_json_strict(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"nodes": [[0, 0], [1, 0], [0, 1]], "triangles": [[0, 1, 2]], "color": "red"}))
    with pytest.raises(MeshError):
        load_mesh_json(path)


def test_user_mesh_orientation_and_quality():
    mesh = mesh_from_triangles([[0, 0], [1, 0], [0, 1], [1, 1]], [[0, 2, 1], [1, 2, 3]])
    assert np.all(mesh.areas() > 0)
    assert len(mesh.boundary_edges) == 4
    with pytest.raises(MeshError):
        mesh_from_triangles([[0, 0], [1, 0], [0.5, 1e-4]], [[0, 1, 2]])
    with pytest.raises(MeshError):
        mesh_from_triangles([[0, 0], [1, 0]], [[0, 1, 2]])


def test_eigenfunction_csv(tmp_path):
    h = 0.1
    problem = RobinProblem.disk(1.0, h)
    mesh = problem.build_mesh()
    spec = fem_spectrum(problem, 1, mesh=mesh, keep_vectors=True)
    path = tmp_path / "u.csv"
    write_eigenfunction_csv(mesh, spec.eigenvectors[:, 0], path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "y", "value"]
    assert len(rows) == mesh.n_nodes + 1
    with pytest.raises(ParameterError):
        write_eigenfunction_csv(mesh, np.ones(3), path)
