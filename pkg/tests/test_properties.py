import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from robinweyl._bessel import bessel_i_ratio
from robinweyl.effective_ops import EffectiveParams, count_below, effective_spectrum, laplacian_lattice_count
from robinweyl.geometry import make_circle, make_ellipse
from robinweyl.oned_models import interval_ground_w, interval_positive_eigenvalues
from robinweyl.spectrum import Spectrum

fast = settings(max_examples=40, deadline=None)


@fast
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30))
def test_spectrum_sorted(values):
    spec = Spectrum(values)
    assert np.all(np.diff(spec.eigenvalues) >= 0)
    assert sum(spec.multiplicities()[1]) == len(values)


@fast
@given(st.lists(st.floats(-10, 10), min_size=2, max_size=30), st.floats(-5, 5), st.floats(0, 5))
def test_count_monotone_in_threshold(values, t, dt):
    spec = Spectrum(values + [100.0])
    assert count_below(spec, t) <= count_below(spec, t + dt)


@fast
@given(st.integers(1, 300), st.floats(1e-3, 1e3))
def test_bessel_ratio_recurrence(m, x):
    # I_{m-1} - I_{m+1} = (2m / x) I_m
    r_prev, r = bessel_i_ratio(m - 1, x), bessel_i_ratio(m, x)
    assert 0 < r < 1
    assert math.isclose(r_prev, 1.0 / (2 * m / x + r), rel_tol=1e-12)


@fast
@given(st.floats(1.05, 60.0))
def test_interval_ground_fixed_point(T):
    w = interval_ground_w(T)
    assert math.isclose(w, math.tanh(w * T), rel_tol=1e-14)


@fast
@given(st.floats(1.05, 30.0))
def test_positive_eigenvalues_increasing(T):
    lam = interval_positive_eigenvalues(T, 6)
    assert np.all(np.diff(lam) > 0)
    for n, v in enumerate(lam, start=2):
        w = math.sqrt(v)
        assert (n - 1) * math.pi / T < w < (2 * n - 1) * math.pi / (2 * T)


@fast
@given(st.floats(1e-6, 0.5))
def test_lattice_count_brute_force(h):
    circle = make_circle(1.0)
    brute = sum(1 for m in range(-2000, 2001) if h * m * m <= 1 * (1 + 1e-10))
    assert laplacian_lattice_count(circle, h) == brute


_ellipse = make_ellipse(1.5, 1.0)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.005, 0.2), st.floats(0.0, 5.0))
def test_sandwich_ordering_random(h, C):
    C = min(C, 0.9 / math.sqrt(h))
    kw = dict(C_plus=C, C_minus=C, n_modes=8)
    lo = effective_spectrum(_ellipse, EffectiveParams(h, variant="minus", **kw)).eigenvalues
    mid = effective_spectrum(_ellipse, EffectiveParams(h, **kw)).eigenvalues
    hi = effective_spectrum(_ellipse, EffectiveParams(h, variant="plus", **kw)).eigenvalues
    tol = 1e-12 * h
    assert np.all(lo <= mid + tol) and np.all(mid <= hi + tol)


@fast
@given(st.floats(-50, 50))
def test_arclength_roundtrip(theta):
    s = _ellipse.s_of_theta(np.array([theta]))
    assert math.isclose(_ellipse.theta_of_s(s)[0], theta, abs_tol=1e-10)
