import json
import math

import numpy as np
import pytest
from scipy.integrate import quad

from robinweyl.errors import ParameterError
from robinweyl.geometry import (
    PlanarCurve,
    TubeGrid,
    _star_derivs,
    check_injective,
    make_circle,
    make_curve,
    make_ellipse,
    make_star,
    tubular_jacobian,
    tubular_map,
)

ELLIPSE_2_1_LENGTH = 9.688448220547677  # scipy.integrate.quad of the speed


def test_circle_basics(circle):
    assert circle.length == pytest.approx(2 * math.pi, abs=1e-13)
    s = np.linspace(0, circle.length, 37)
    assert np.allclose(circle.curvature(s), 1.0, atol=1e-13)
    assert circle.constant_curvature
    assert circle.tube_halfwidth == pytest.approx(1 - 1e-6)


def test_circle_gauss_bonnet_R2():
    assert make_circle(2.0).total_curvature() == pytest.approx(2 * math.pi, abs=1e-6)


def test_circle_tubular_offsets(circle):
    s = np.linspace(0, circle.length, 11)
    assert np.allclose(np.linalg.norm(tubular_map(circle, s, np.zeros_like(s)), axis=1), 1.0)
    assert np.allclose(np.linalg.norm(tubular_map(circle, s, np.full_like(s, 0.3)), axis=1), 0.7)
    assert np.allclose(np.linalg.norm(tubular_map(circle, s, np.full_like(s, 0.5)), axis=1), 0.5)


def test_degenerate_ellipse_is_circle(circle):
    e = make_ellipse(1.0, 1.0)
    assert e.length == pytest.approx(circle.length, abs=1e-10)
    s = np.linspace(0, e.length, 50)
    assert np.allclose(e.position(s), circle.position(s), atol=1e-10)
    assert np.allclose(e.curvature(s), 1.0, atol=1e-10)


def test_ellipse_curvature_extrema(ellipse):
    assert ellipse.kappa_max == pytest.approx(2.0, abs=1e-10)
    assert ellipse.kappa_min == pytest.approx(0.25, abs=1e-10)


def test_ellipse_length_oracle(ellipse):
    oracle = quad(lambda th: math.hypot(2 * math.sin(th), math.cos(th)), 0, 2 * math.pi, epsabs=1e-13, epsrel=1e-13)[0]
    assert oracle == pytest.approx(ELLIPSE_2_1_LENGTH, abs=1e-12)
    assert ellipse.length == pytest.approx(oracle, abs=1e-10)


def test_ellipse_normal_offset_distance(ellipse):
    p = tubular_map(ellipse, np.array(0.0), np.array(0.1))
    th = np.linspace(0, 2 * math.pi, 400001)
    dense = np.column_stack([2 * np.cos(th), np.sin(th)])
    assert np.min(np.linalg.norm(dense - p, axis=1)) == pytest.approx(0.1, abs=1e-8)


def test_star_gauss_bonnet_and_curvature(star):
    assert star.total_curvature() == pytest.approx(2 * math.pi, abs=1e-6)
    th = np.linspace(0, 2 * math.pi, 100000, endpoint=False)
    x, y, x1, y1, x2, y2, *_ = _star_derivs(1.0, 0.1, 3)(th)
    brute = np.max(np.abs(x1 * y2 - y1 * x2) / np.hypot(x1, y1) ** 3)
    assert star.kappa_abs_max == pytest.approx(brute, rel=1e-6)


def test_star_eps0_is_circle():
    c = make_star(1.5, 0.0, 4)
    assert c.length == pytest.approx(3 * math.pi, abs=1e-12)
    assert c.constant_curvature


def test_star_rejects_bad_parameters():
    for kwargs in ({"R": 1, "eps": 1.0, "k": 3}, {"R": 1, "eps": 0.1, "k": 1}, {"R": -1, "eps": 0.1, "k": 3}):
        with pytest.raises(ParameterError):
            make_star(**kwargs)


def test_self_intersecting_curve_rejected():
    # limacon with an inner loop
    with pytest.raises(ParameterError):
        PlanarCurve("limacon", {}, _star_derivs(1.0, 2.0, 1))


def test_make_curve_dispatch():
    assert make_curve("ellipse", a=2, b=1).kind == "ellipse"
    with pytest.raises(ParameterError):
        make_curve("square")
    with pytest.raises(ParameterError):
        make_ellipse(1, 2)


@pytest.mark.parametrize("name", ["circle", "ellipse", "star"])
def test_jacobian_matches_weight(name, request):
    curve = request.getfixturevalue(name)
    rng = np.random.default_rng(7)
    s = rng.uniform(0, curve.length, 100)
    t = rng.uniform(0, 0.9 * curve.tube_halfwidth, 100)
    assert np.max(np.abs(tubular_jacobian(curve, s, t) - (1 - t * curve.curvature(s)))) <= 1e-6


@pytest.mark.parametrize("name", ["ellipse", "star"])
def test_reparametrization_invariance(name, request):
    curve = request.getfixturevalue(name)
    n = 2048
    s = curve.uniform_s(n)
    ds = curve.length / n
    p = curve.position(s)
    # five-point stencils on the resampled arclength parametrization
    d1 = (-np.roll(p, -2, 0) + 8 * np.roll(p, -1, 0) - 8 * np.roll(p, 1, 0) + np.roll(p, 2, 0)) / (12 * ds)
    d2 = (-np.roll(p, -2, 0) + 16 * np.roll(p, -1, 0) - 30 * p + 16 * np.roll(p, 1, 0) - np.roll(p, 2, 0)) / (12 * ds**2)
    kappa_fd = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    assert np.max(np.abs(kappa_fd - curve.curvature(s))) <= 1e-6


def test_arclength_roundtrip(ellipse):
    th = np.linspace(0, 2 * math.pi, 97, endpoint=False)
    assert np.allclose(ellipse.theta_of_s(ellipse.s_of_theta(th)), th, atol=1e-12)


def test_curvature_derivative(ellipse):
    s = np.linspace(0.1, 9.0, 25)
    step = 1e-5
    fd = (ellipse.curvature(s + step) - ellipse.curvature(s - step)) / (2 * step)
    assert np.allclose(ellipse.curvature_derivative(s), fd, atol=1e-7)


@pytest.mark.parametrize("name", ["circle", "ellipse", "star"])
def test_injectivity(name, request):
    curve = request.getfixturevalue(name)
    assert curve.tube_halfwidth <= 1 / curve.kappa_abs_max
    assert check_injective(curve, 0.99 * curve.tube_halfwidth) >= 0.5


def test_tubular_map_range(circle):
    with pytest.raises(ParameterError):
        tubular_map(circle, 0.0, 1.0)
    with pytest.raises(ParameterError):
        tubular_map(circle, 0.0, -0.1)


def test_tube_grid(ellipse):
    g = TubeGrid(ellipse, 0.4, 64, 8)
    assert g.weight.shape == (64, 25)
    assert np.all(g.weight > 0)
    assert g.t[0] == 0.0 and g.t[-1] == pytest.approx(0.4)
    with pytest.raises(ParameterError):
        TubeGrid(ellipse, 0.5, 64, 8)


def test_curve_json(ellipse):
    d = json.loads(ellipse.to_json(n=32))
    assert set(d) == {"kind", "params", "length", "samples"}
    assert set(d["samples"]) == {"theta", "x", "y", "kappa"}
    assert len(d["samples"]["kappa"]) == 32
