import math

import numpy as np
import pytest
from scipy import integrate

from squeezed_echo import (
    IntegratorConfig,
    IntegratorError,
    OscillatorParams,
    PhasePoint,
    PulsePair,
    PulseProfile,
    SecondMoments,
    TimeGrid,
    classical_trajectory,
    integrate_moments,
    integrate_trajectory,
    pulse_pair_profiles,
    variance_single_pulse,
    variance_two_pulse,
)
from squeezed_echo.oracle import moment_states, random_cross_check, trajectory_states

FIG1 = dict(
    params=OscillatorParams(7.5), init=PhasePoint(25.0, 10.0), pulses=PulsePair(5.0, 2.5, 10.0)
)
PERIOD = 2 * math.pi / 7.5


def rel_max(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def test_gaussian_profile_has_requested_area():
    prof = PulseProfile("gaussian", 3.0, 2.5, 0.01)
    area, _ = integrate.quad(prof.g, 3.0 - 0.08, 3.0 + 0.08, epsabs=1e-13, epsrel=1e-13, limit=200)
    assert area == pytest.approx(2.5, abs=1e-12)


def test_profile_validation():
    with pytest.raises(ValueError):
        PulseProfile("gaussian", 0.0, 1.0)
    with pytest.raises(ValueError):
        PulseProfile("square", 0.0, 1.0)
    with pytest.raises(ValueError):
        PulseProfile("exact-kick", 0.0, 1.0).g(0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(step=0.0)


def test_free_oscillator():
    grid = TimeGrid(0.0, 20.0, 2001)
    q = integrate_trajectory(
        OscillatorParams(1.0), PhasePoint(1.0, 0.0), [], grid, IntegratorConfig(step=1e-3)
    )
    assert np.max(np.abs(q.values - np.cos(grid.times))) < 1e-10


def test_exact_kick_trajectory_matches_closed_form():
    grid = TimeGrid(0.0, 30.0, 3001)
    profiles = pulse_pair_profiles(5.0, 2.5, 10.0)
    ref = classical_trajectory(FIG1["params"], FIG1["init"], FIG1["pulses"], grid.times)
    fine = IntegratorConfig(step=PERIOD / 8000)
    q = integrate_trajectory(FIG1["params"], FIG1["init"], profiles, grid, fine)
    assert rel_max(q.values, ref) < 1e-12
    # default step trades a little accuracy for speed
    q = integrate_trajectory(FIG1["params"], FIG1["init"], profiles, grid)
    assert rel_max(q.values, ref) < 1e-9


def test_kick_applied_before_output_at_kick_instant():
    grid = TimeGrid(0.0, 10.0, 11)
    s = trajectory_states(
        OscillatorParams(1.0), PhasePoint(1.0, 0.0), pulse_pair_profiles(0.5, 0.0, 10.0), grid
    )
    assert s[0, 1] == pytest.approx(1.0)  # P jumped by 2 mu Q at t = 0


def test_negative_grid_times_use_backward_free_flow():
    grid = TimeGrid(-2.0, 2.0, 401)
    q = integrate_trajectory(
        OscillatorParams(1.3), PhasePoint(1.0, 0.5), [PulseProfile("exact-kick", 0.0, 0.8)], grid
    )
    before = grid.times < 0
    ref = np.cos(1.3 * grid.times) + 0.5 / 1.3 * np.sin(1.3 * grid.times)
    assert np.max(np.abs(q.values[before] - ref[before])) < 1e-10


def test_vacuum_is_stationary():
    vac = SecondMoments.vacuum(7.5)
    m = integrate_moments(OscillatorParams(7.5), vac, [], TimeGrid(0, 30, 301))
    assert np.max(np.abs(m.values - vac.qq)) / vac.qq < 1e-10


def test_one_kick_moments_match_closed_form():
    params, vac = OscillatorParams(7.5), SecondMoments.vacuum(7.5)
    grid = TimeGrid(0.0, 5.0, 1001)
    m = integrate_moments(params, vac, [PulseProfile("exact-kick", 0.0, 5.0)], grid)
    assert rel_max(m.values / vac.qq, variance_single_pulse(params, 5.0, grid.times)) < 1e-10


def test_two_kick_moments_and_determinant():
    params, vac = OscillatorParams(7.5), SecondMoments.vacuum(7.5)
    grid = TimeGrid(0.0, 30.0, 3001)
    s = moment_states(params, vac, pulse_pair_profiles(5.0, 2.5, 10.0), grid)
    ref = variance_two_pulse(params, FIG1["pulses"], grid.times)
    assert rel_max(s[:, 0] / vac.qq, ref) < 1e-10
    det = s[:, 0] * s[:, 2] - s[:, 1] ** 2
    assert np.max(np.abs(det / vac.determinant - 1)) < 1e-9


def test_energy_drift_per_hundred_periods():
    grid = TimeGrid(0.0, 100 * PERIOD, 101)
    s = trajectory_states(FIG1["params"], FIG1["init"], [], grid)
    energy = 0.5 * s[:, 1] ** 2 + 0.5 * 7.5**2 * s[:, 0] ** 2
    assert np.max(np.abs(energy / energy[0] - 1)) < 1e-9


def test_gaussian_width_convergence():
    grid = TimeGrid(0.0, 30.0, 3001)
    ref = classical_trajectory(FIG1["params"], FIG1["init"], FIG1["pulses"], grid.times)
    widths = (0.01, 0.005, 0.0025)
    dev = []
    for w in widths:
        q = integrate_trajectory(
            FIG1["params"], FIG1["init"], pulse_pair_profiles(5.0, 2.5, 10.0, w), grid
        )
        dev.append(rel_max(q.values, ref))
    assert dev[0] > dev[1] > dev[2]
    # dev(w) = a + b w + c w^2 through the three widths; a is the zero-width limit
    a = np.polyfit(widths, dev, 2)[-1]
    assert abs(a) < 1e-4


def test_integrator_rejections():
    grid = TimeGrid(0.0, 5.0, 11)
    params, init = OscillatorParams(1.0), PhasePoint(1.0, 0.0)
    with pytest.raises(IntegratorError):
        integrate_trajectory(params, init, [], grid, IntegratorConfig(step=2 * math.pi / 100))
    with pytest.raises(IntegratorError):
        integrate_trajectory(
            params, init, pulse_pair_profiles(1, 1, 2, 0.01), grid, IntegratorConfig(step=0.001)
        )
    with pytest.raises(IntegratorError):
        integrate_trajectory(params, init, pulse_pair_profiles(1.0, 1.0, 0.1, width=0.01), grid)
    with pytest.raises(IntegratorError):
        integrate_trajectory(params, init, list(reversed(pulse_pair_profiles(1.0, 1.0, 2.0))), grid)
    with pytest.raises(IntegratorError):
        integrate_trajectory(params, init, [PulseProfile("exact-kick", -1.0, 1.0)], grid)
    assert issubclass(IntegratorError, ValueError)


def test_random_cross_check_small_batch():
    worst = random_cross_check(n_draws=5, seed=3, n_points=300)
    assert set(worst) == {"trajectory", "variance", "determinant"}
    assert all(v < 1e-9 for v in worst.values())
