import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from rydgate.model import OMEGA_MAX, ParameterError
from rydgate.pulses import (
    InfeasiblePulseError,
    area_factor,
    make_pi2pipi,
    shape_a,
    shape_b,
    solve_duration,
)


def _area(spec):
    return quad(spec.eval, 0.0, spec.T, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def test_shape_constants():
    assert shape_a(0.0) == pytest.approx(1 / 3)
    assert shape_b(0.0) == pytest.approx(2 / 3)


@given(st.floats(0.1, 40.0))
def test_endpoint_identity(x):
    assert shape_b(x) / shape_a(x) == pytest.approx(1 + math.exp(-x * x / 2), rel=1e-14)


def test_frozen_duration():
    # T = pi / (Omega_max * area_factor(0.05)), frozen from the closed form
    assert area_factor(0.05) == pytest.approx(0.87466858626845, rel=1e-13)
    assert solve_duration(np.pi).T == pytest.approx(0.05716450868929936, rel=1e-13)


@pytest.mark.parametrize("theta", [np.pi, 2 * np.pi])
def test_area_matches_quadrature(theta):
    spec = solve_duration(theta, OMEGA_MAX, 0.05)
    assert abs(_area(spec) - theta) < 1e-6


@settings(max_examples=25, deadline=None)
@given(theta=st.floats(0.1, 10.0), ratio=st.floats(0.02, 0.3))
def test_area_for_any_valid_ratio(theta, ratio):
    spec = solve_duration(theta, 3.0, ratio)
    assert _area(spec) == pytest.approx(theta, rel=1e-8)


def test_endpoints_and_midpoint():
    spec = solve_duration(np.pi)
    assert spec.eval(0.0) == 0.0
    assert spec.eval(spec.T) == 0.0
    assert abs(spec.eval(spec.T / 2) - OMEGA_MAX) < 1e-12


def test_time_reversal_and_bounds():
    spec = solve_duration(np.pi, OMEGA_MAX, 0.1)
    t = np.linspace(0, spec.T, 101)
    v = spec.eval(t)
    assert np.allclose(v, spec.eval(spec.T - t), atol=1e-12)
    assert np.all(v >= 0) and np.all(v <= OMEGA_MAX * shape_b(10.0) + 1e-12)


def test_large_ratio_undershoot_preserved():
    spec = solve_duration(1.0, 3.0, 0.3)
    assert spec.eval(spec.T * 0.004) < 0


def test_square_limit_and_linearity():
    assert solve_duration(1.0, 2.0, 1e-3).T == pytest.approx(0.5, rel=1e-2)
    t1 = solve_duration(np.pi).T
    assert solve_duration(2 * np.pi).T == pytest.approx(2 * t1, rel=1e-14)


def test_invalid_inputs():
    with pytest.raises(ParameterError):
        solve_duration(-1.0)
    with pytest.raises(ParameterError):
        solve_duration(1.0, 0.0)
    with pytest.raises(ParameterError):
        solve_duration(1.0, 1.0, 0.6)
    with pytest.raises(ParameterError):
        solve_duration(np.pi).eval(1.0)


def test_infeasible_ratio():
    # the closed-form denominator turns negative near sigma/T ~ 0.45
    ratios = np.linspace(0.3, 0.499, 200)
    bad = [r for r in ratios if area_factor(r) <= 0]
    if bad:
        with pytest.raises(InfeasiblePulseError):
            solve_duration(1.0, 1.0, bad[0])
    else:
        assert all(area_factor(r) > 0 for r in ratios)


def test_schedule_structure():
    s = make_pi2pipi()
    st1, st2, st3 = s.stages
    assert (st1.atom, st2.atom, st3.atom) == ("C", "T", "C")
    assert st2.start == st1.stop and st3.start == st2.stop
    assert s.T == pytest.approx(2 * st1.pulse.T + st2.pulse.T)
    assert s.default_bins() % 4 == 0
    assert s.T / s.default_bins() * s.omega_peak <= 0.02


def test_schedule_sampling_areas():
    s = make_pi2pipi()
    g = s.to_grid(3000)
    n1 = 750
    dt = g.dt
    assert abs(g.omega_C[:n1].sum() * dt - np.pi) < 1e-4
    assert abs(g.omega_T[n1 : 3 * n1].sum() * dt - 2 * np.pi) < 1e-4
    assert abs(g.omega_C[3 * n1 :].sum() * dt - np.pi) < 1e-4
    # one atom at a time
    assert np.all(g.omega_C * g.omega_T == 0)


def test_schedule_misaligned_bins():
    with pytest.raises(ParameterError):
        make_pi2pipi().to_grid(730)


def test_slowdown():
    s = make_pi2pipi(slowdown=3.0)
    assert s.T == pytest.approx(3 * make_pi2pipi().T)
    assert s.omega_peak == pytest.approx(OMEGA_MAX / 3)
    with pytest.raises(ParameterError):
        make_pi2pipi(slowdown=0.5)
