import json
import math

import numpy as np
import pytest
from scipy.integrate import quad

from robinweyl.errors import ParameterError
from robinweyl.oned_models import (
    HALFLINE_ESSENTIAL_SPECTRUM,
    OneDParams,
    decay_rate,
    default_n_grid,
    ground_energy_slope,
    ground_state_slope_norm,
    halfline_ground,
    interval_ground,
    interval_ground_w,
    interval_positive_eigenvalues,
    interval_spectrum,
    positive_branch,
    weighted_norm,
    weighted_spectrum,
)


def _scan_root(T, lo, hi, n=20001):
    """Independent oracle: dense sign scan of tan(wT) - w, then scipy's brentq."""
    from scipy.optimize import brentq

    w = np.linspace(lo, hi, n)[1:-1]
    g = np.tan(w * T) - w
    k = np.nonzero((g[:-1] < 0) & (g[1:] > 0))[0][0]
    return brentq(lambda x: math.tan(x * T) - x, w[k], w[k + 1], xtol=1e-15)


# -- half-line ---------------------------------------------------------------


def test_halfline_ground_state():
    lam, u0 = halfline_ground()
    assert lam == -1.0
    assert u0(0.0) == pytest.approx(math.sqrt(2))
    assert u0(0.0) ** 2 == pytest.approx(2.0)
    assert quad(lambda t: u0(t) ** 2, 0, 40)[0] == pytest.approx(1.0, abs=1e-12)
    assert HALFLINE_ESSENTIAL_SPECTRUM == (0.0, math.inf)


# -- interval operator -------------------------------------------------------


def test_interval_ground_T10_matches_asymptotics():
    assert abs(interval_ground(10) - (-1 + 4 * math.exp(-20))) <= 1e-12


def test_interval_ground_T5_in_window():
    lam = interval_ground(5)
    assert -1 < lam < -1 + 4 * 1.01 * math.exp(-10)


def test_interval_ground_halfline_limit():
    assert abs(interval_ground(100) + 1) <= 1e-15


def test_interval_ground_solves_fixed_point():
    for T in (1.5, 3.0, 7.0):
        w = interval_ground_w(T)
        assert 0 < w < 1
        assert abs(w - math.tanh(w * T)) < 1e-15


@pytest.mark.parametrize("T", [1.0, 0.5, -2.0])
def test_interval_ground_rejects_short_interval(T):
    with pytest.raises(ParameterError):
        interval_ground(T)


@pytest.mark.parametrize("T", [2.0, 5.0, 10.0])
def test_positive_eigenvalues_match_scan_oracle(T):
    vals = interval_positive_eigenvalues(T, 10)
    for n, lam in zip(range(2, 11), vals):
        lo, hi = positive_branch(T, n)
        w = _scan_root(T, lo, hi)
        assert abs(math.sqrt(lam) - w) < 1e-12


def test_positive_eigenvalue_T5_n2_value():
    lam2 = interval_positive_eigenvalues(5, 2)[0]
    w = _scan_root(5, math.pi / 5, 3 * math.pi / 10)
    assert lam2 == pytest.approx(w * w, abs=1e-12)
    # the root sits on the branch (pi/T, 3pi/2T), beyond (pi/5)^2
    assert (math.pi / 5) ** 2 < lam2 < (3 * math.pi / 10) ** 2


@pytest.mark.parametrize("T", [2.0, 5.0, 10.0])
def test_positive_eigenvalues_bracket_and_gap(T):
    vals = interval_positive_eigenvalues(T, 10)
    assert vals[0] >= 0
    for n, lam in zip(range(2, 11), vals):
        lo, hi = positive_branch(T, n)
        assert lo**2 < lam < hi**2
    assert np.all(np.diff(vals) > 0)


def test_positive_eigenvalues_needs_two():
    with pytest.raises(ParameterError):
        interval_positive_eigenvalues(5, 1)


# -- weighted operator -------------------------------------------------------


def test_params_validation():
    with pytest.raises(ParameterError):
        OneDParams(T=1.0)
    with pytest.raises(ParameterError):
        OneDParams(T=10, B=0.04)
    with pytest.raises(ParameterError):
        OneDParams(T=10, n_grid=8)
    assert OneDParams(T=10).n_grid == 2048
    assert default_n_grid(80) == 4096


def test_weighted_B0_matches_transcendental():
    r = weighted_spectrum(OneDParams(10, 0.0), 1)
    assert abs(r.eigenvalues[0] - interval_ground(10)) <= 1e-8


def test_weighted_B0_positive_eigenvalues():
    exact = interval_spectrum(5, 6).eigenvalues
    coarse = weighted_spectrum(OneDParams(5, 0.0, 64), 6).eigenvalues
    fine = weighted_spectrum(OneDParams(5, 0.0, 128), 6).eigenvalues
    # cubic elements: eigenvalue error ~ cell^6, Richardson with factor 64
    extrap = (64 * fine - coarse) / 63
    assert np.max(np.abs(extrap - exact)) <= 1e-8
    assert np.max(np.abs(weighted_spectrum(OneDParams(5, 0.0), 6).eigenvalues - exact)) <= 1e-8


def test_weighted_grid_convergence():
    a = weighted_spectrum(OneDParams(20, 0.01, 2048)).eigenvalues[0]
    b = weighted_spectrum(OneDParams(20, 0.01, 4096)).eigenvalues[0]
    assert abs(a - b) <= 1e-8


def test_weighted_ground_state_invariants():
    r = weighted_spectrum(OneDParams(20, -0.01), 3)
    assert np.all(np.diff(r.eigenvalues) > 0)
    assert np.all(r.ground_state[:-1] > 0)
    assert r.ground_state[-1] == 0.0
    assert abs(weighted_norm(r) - 1) <= 1e-10
    assert np.allclose(np.diff(r.tau), r.tau[1])


def test_quadratic_perturbation_B001():
    lam = weighted_spectrum(OneDParams(20, 0.01)).eigenvalues[0]
    assert abs(lam - (-1 - 0.01)) <= 5 * 1e-4


def test_second_eigenvalue_perturbation():
    B, T = 0.01, 20
    l2 = weighted_spectrum(OneDParams(T, B), 2).eigenvalues[1]
    l2_0 = interval_spectrum(T, 2).eigenvalues[1]
    assert abs(l2 - l2_0) <= 5 * abs(B) * T * (abs(l2_0) + 1)


def test_quadratic_residual_bounded():
    ratios = [abs(weighted_spectrum(OneDParams(20, B)).eigenvalues[0] + 1 + B) / B**2 for B in (1e-3, -1e-3, 3e-3, -3e-3, 1e-2, -1e-2)]
    assert max(ratios) <= 5
    # the second-order coefficient is close to -1/2
    assert max(ratios) == pytest.approx(0.5, abs=0.05)


def test_ground_energy_slope():
    assert abs(ground_energy_slope(20, 0.0, 1e-4) + 1) <= 1e-3
    assert abs(ground_energy_slope(20, 0.01, 1e-4)) <= 2
    assert abs(ground_energy_slope(10, 0.0) - ground_energy_slope(40, 0.0)) <= 1e-3


def test_ground_energy_slope_window():
    with pytest.raises(ParameterError):
        ground_energy_slope(20, 0.016, 1e-3)
    with pytest.raises(ParameterError):
        ground_energy_slope(20, 0.0, 0.0)


def test_ground_state_slope_norm_bounded():
    norms = [ground_state_slope_norm(T, 0.0) for T in (10, 20)]
    assert max(norms) < 1.0
    assert norms[0] == pytest.approx(norms[1], rel=1e-3)


@pytest.mark.parametrize("B, lower", [(0.0, 0.98), (0.01, 0.9), (-0.01, 0.9)])
def test_decay_rate(B, lower):
    alpha = decay_rate(weighted_spectrum(OneDParams(20, B)))
    assert alpha >= lower
    if B == 0.0:
        assert abs(alpha - 1) <= 0.02


def test_decay_rate_needs_window():
    r = weighted_spectrum(OneDParams(1.5, 0.0, 64))
    with pytest.raises(ParameterError):
        decay_rate(r)


def test_result_json_roundtrip():
    r = interval_spectrum(5, 3, n_samples=65)
    d = json.loads(r.to_json())
    assert set(d) == {"params", "eigenvalues", "ground_state", "method"}
    assert d["method"] == "transcendental"
    assert len(d["ground_state"]["tau"]) == len(d["ground_state"]["values"]) == 65
    assert d["params"]["T"] == 5
