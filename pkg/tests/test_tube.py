import math

import numpy as np
import pytest

from robinweyl.errors import MeshError, ParameterError
from robinweyl.geometry import make_circle, make_ellipse
from robinweyl.oned_models import interval_ground
from robinweyl.robin2d import default_delta, disk_negative_spectrum, tube_solve, tube_spectrum
from robinweyl.robin2d.tube import tube_norm

H = 0.05


@pytest.fixture(scope="module")
def disk_values():
    return disk_negative_spectrum(1.0, H, ceiling=-0.9 * H).eigenvalues


@pytest.mark.parametrize("delta", [0.3, 0.5, 0.8, 0.95])
def test_tube_dominates_disk(circle, disk_values, delta):
    n = len(disk_values)
    tube = tube_spectrum(circle, H, delta, n).eigenvalues
    assert np.all(disk_values <= tube)


def test_excess_decays_with_delta(circle, disk_values):
    n = len(disk_values)
    excess = [np.max(tube_spectrum(circle, H, d, n).eigenvalues - disk_values) for d in (0.3, 0.5, 0.8, 0.95)]
    assert all(b < a for a, b in zip(excess, excess[1:]))
    assert excess[-1] < 1e-3 * abs(disk_values[0])


def test_monotone_in_delta(ellipse):
    vals = [tube_spectrum(ellipse, H, d, 3).eigenvalues for d in (0.3, 0.4, 0.45)]
    assert np.all(vals[1] <= vals[0]) and np.all(vals[2] <= vals[1])


def test_flat_limit_matches_interval_model():
    # at R = 1000 the curvature is negligible: separation of variables
    delta = 0.5
    mu = tube_spectrum(make_circle(1000.0), H, delta, 1).eigenvalues[0]
    assert mu / H == pytest.approx(interval_ground(delta / math.sqrt(H)), abs=5e-4)


def test_general_path_matches_fourier_path(circle):
    # a = b = 1 ellipse goes through the finite-difference path
    fd = tube_spectrum(make_ellipse(1.0, 1.0), H, 0.5, 7).eigenvalues
    fourier = tube_spectrum(circle, H, 0.5, 7).eigenvalues
    assert np.allclose(fd, fourier, rtol=1e-9)
    assert fd[1] - fd[0] > 1e-3  # no spurious duplicate of the ground state


def test_tangential_convergence(ellipse):
    a = tube_spectrum(ellipse, H, 0.4, 3).eigenvalues
    b = tube_spectrum(ellipse, H, 0.4, 3, n_s=512).eigenvalues
    assert np.allclose(a, b, rtol=1e-8)


def test_normal_convergence(circle):
    a = tube_spectrum(circle, H, 0.5, 3).eigenvalues
    b = tube_spectrum(circle, H, 0.5, 3, n_t=80).eigenvalues
    assert np.allclose(a, b, rtol=1e-9)


def test_eigenvectors_normalized(ellipse, circle):
    for curve in (ellipse, circle):
        res = tube_solve(curve, H, 0.4, 3, keep_vectors=True)
        assert len(res.vectors) == 3
        assert res.vectors[0].shape == (res.grid.n_s, 3 * res.grid.n_t + 1)
        assert np.allclose(res.vectors[0][:, -1], 0.0)
        for v in res.vectors:
            assert tube_norm(res, v) == pytest.approx(1.0, abs=1e-10)
        assert res.spectrum.meta["max_residual"] < 1e-8


def test_default_delta():
    assert default_delta(0.01) == pytest.approx(6 * 0.1 * math.log(100))
    res = tube_solve(make_circle(1.0), 0.01, n_eigs=1)
    assert res.grid.delta == pytest.approx(0.95 * make_circle(1.0).tube_halfwidth)


def test_rejections(circle, ellipse):
    with pytest.raises(ParameterError):
        tube_spectrum(ellipse, H, 0.5, 1)  # delta * max kappa = 1
    with pytest.raises(MeshError):
        tube_spectrum(circle, H, 0.5, 1, n_t=4)
    with pytest.raises(ParameterError):
        tube_spectrum(circle, 2.0, 0.5, 1)
    with pytest.raises(ParameterError):
        tube_spectrum(circle, H, 0.5, 0)
