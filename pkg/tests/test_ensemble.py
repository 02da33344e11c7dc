import math

import numpy as np
import pytest
from scipy import integrate

from squeezed_echo import (
    EnsembleConfig,
    LinearPulsePair,
    LorentzianSpec,
    OscillatorParams,
    PhasePoint,
    PulsePair,
    TimeGrid,
    classical_trajectory,
    classical_trajectory_linear,
    detect_echo,
    displacement_variance,
    envelope,
    mean_displacement,
    mean_displacement_linear,
    mean_quantum_variance,
    quadrature_rule,
    sample_frequencies,
    snapshot,
    variance_two_pulse,
)
from squeezed_echo.ensemble import ensemble_average

SPEC = LorentzianSpec(7.5, 0.5)
NARROW = LorentzianSpec(7.5, 7.5e-9)
FIG1_INIT, FIG1_PULSES = PhasePoint(25.0, 10.0), PulsePair(5.0, 2.5, 10.0)


def quad_cfg(spec=SPEC, order=2048):
    return EnsembleConfig(spec, mode="quadrature", quadrature_order=order)


# ---------------------------------------------------------------- distribution


def test_spec_validation_and_support():
    assert SPEC.support == (0.075, 17.5)
    assert LorentzianSpec(7.5, 0.5, 10.0).support == (2.5, 12.5)
    with pytest.raises(ValueError):
        LorentzianSpec(-1.0, 0.5)
    with pytest.raises(ValueError):
        LorentzianSpec(7.5, 0.0)
    with pytest.raises(ValueError):
        LorentzianSpec(7.5, 0.5, min_frequency=8.0)
    with pytest.raises(ValueError):
        EnsembleConfig(SPEC, n_members=1)
    with pytest.raises(ValueError):
        EnsembleConfig(SPEC, mode="quadrature", quadrature_order=8)
    with pytest.raises(ValueError):
        EnsembleConfig(SPEC, mode="bootstrap")


def test_pdf_normalized_on_support():
    lo, hi = SPEC.support
    total, _ = integrate.quad(SPEC.pdf, lo, hi, points=[7.5], limit=400)
    assert total == pytest.approx(1.0, abs=1e-10)
    assert SPEC.pdf(hi + 1.0) == 0.0 and SPEC.pdf(lo / 2) == 0.0


def test_degenerate_samples():
    omega = sample_frequencies(EnsembleConfig(NARROW, n_members=1000))
    assert np.all(np.abs(omega - 7.5) < 1e-6)


def test_sample_quartiles():
    omega = sample_frequencies(EnsembleConfig(SPEC, n_members=100_000, seed=123))
    q1, med, q3 = np.percentile(omega, [25, 50, 75])
    assert abs(med - 7.5) < 0.02
    assert 0.45 <= q3 - q1 <= 0.55
    lo, hi = SPEC.support
    assert omega.min() >= lo and omega.max() <= hi


def test_sampling_is_deterministic():
    a = sample_frequencies(EnsembleConfig(SPEC, seed=9))
    b = sample_frequencies(EnsembleConfig(SPEC, seed=9))
    c = sample_frequencies(EnsembleConfig(SPEC, seed=10))
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    with pytest.raises(ValueError):
        sample_frequencies(quad_cfg())


# ---------------------------------------------------------------- quadrature


def test_quadrature_normalization_and_symmetry():
    nodes, weights = quadrature_rule(SPEC, 2048)
    assert nodes.size == 2048
    assert abs(weights.sum() - 1.0) < 1e-14
    sym = LorentzianSpec(7.5, 0.5, 10.0)
    nodes, weights = quadrature_rule(sym, 2048)
    assert abs(np.sum(weights * (nodes - 7.5))) < 1e-12


def _truncated_expectation(spec, f):
    lo, hi = spec.support
    edges = np.linspace(lo, hi, 401)
    return sum(
        integrate.quad(lambda x: spec.pdf(x) * f(x), a, b, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
        for a, b in zip(edges[:-1], edges[1:])
    )


def test_quadrature_fourier_transform():
    nodes, weights = quadrature_rule(SPEC, 2048)
    got = np.sum(weights * np.cos(5.0 * nodes))
    # independent integral of the same truncated law
    assert got == pytest.approx(_truncated_expectation(SPEC, lambda x: np.cos(5.0 * x)), abs=1e-10)
    # untruncated closed form, off by at most the discarded probability mass
    lo, hi = SPEC.support
    kept = (math.atan((hi - 7.5) / 0.25) - math.atan((lo - 7.5) / 0.25)) / math.pi
    m = 1.0 - kept
    assert abs(got - math.exp(-1.25) * math.cos(37.5)) <= 2 * m / (1 - m)


def test_quadrature_order_doubling():
    t = 40.0
    a = quadrature_rule(SPEC, 2048)
    b = quadrature_rule(SPEC, 4096)
    for f in (np.cos, np.sin):
        ia = np.sum(a[1] * f(t * a[0]))
        ib = np.sum(b[1] * f(t * b[0]))
        assert abs(ia - ib) < 1e-8


# ---------------------------------------------------------------- averages


def test_ensemble_average_validation():
    cfg = quad_cfg(order=64)
    with pytest.raises(ValueError):
        ensemble_average(cfg, lambda w, t: (w * t,), np.array([1.0, 0.5]))
    with pytest.raises(ValueError):
        ensemble_average(cfg, lambda w, t: (w * t,), np.array([0.0, 1.0]), stderr=True)


def test_degenerate_ensemble_matches_single_oscillator():
    grid = TimeGrid(0.0, 30.0, 3001)
    params = OscillatorParams(7.5)
    cfg = EnsembleConfig(NARROW, n_members=50)
    q = mean_displacement(cfg, FIG1_INIT, FIG1_PULSES, grid)
    ref = classical_trajectory(params, FIG1_INIT, FIG1_PULSES, grid.times)
    assert np.max(np.abs(q.values - ref)) < 1e-6
    lin = LinearPulsePair(1.0, -100.0, 10.0)
    q = mean_displacement_linear(cfg, PhasePoint(25.0, 1.0), lin, grid)
    ref = classical_trajectory_linear(params, PhasePoint(25.0, 1.0), lin, grid.times)
    assert np.max(np.abs(q.values - ref)) < 1e-6
    v = mean_quantum_variance(cfg, FIG1_PULSES, grid)
    ref = params.vacuum_variance * variance_two_pulse(params, FIG1_PULSES, grid.times)
    assert np.max(np.abs(v.values - ref)) < 1e-6
    spread = displacement_variance(cfg, FIG1_INIT, FIG1_PULSES, grid)
    assert np.max(spread.values) < 1e-6


def test_pre_pulse_region_is_free_rotation():
    grid = TimeGrid(-1.0, 1.0, 201)
    cfg = EnsembleConfig(NARROW, n_members=10)
    q = mean_displacement(cfg, FIG1_INIT, FIG1_PULSES, grid)
    t = grid.times[grid.times < 0]
    ref = 25.0 * np.cos(7.5 * t) + 10.0 / 7.5 * np.sin(7.5 * t)
    assert np.max(np.abs(q.values[: t.size] - ref)) < 1e-6
    v = mean_quantum_variance(cfg, FIG1_PULSES, grid)
    assert np.allclose(v.values[: t.size], 1 / 15, rtol=1e-8)


def test_second_kick_off_reduces_to_single_pulse():
    grid = TimeGrid(0.0, 30.0, 1500)
    cfg = quad_cfg(order=512)
    a = mean_displacement(cfg, FIG1_INIT, PulsePair(5.0, 0.0, 10.0), grid)
    b = mean_displacement(cfg, FIG1_INIT, PulsePair(5.0, 0.0, 3.0), grid)
    assert np.array_equal(a.values, b.values)
    assert not detect_echo(a, 10.0, 7.5).detected


def test_single_linear_impulse_envelope_decays():
    grid = TimeGrid(0.0, 30.0, 6000)
    cfg = quad_cfg(LorentzianSpec(10.0, 0.5, 10.0), order=1024)
    q = mean_displacement_linear(cfg, PhasePoint(25.0, 1.0), LinearPulsePair(1.0, 0.0, 10.0), grid)
    env = envelope(q, 10.0).values
    # below ~0.3% of the peak the hard truncation edges leave a small ripple
    tail = env[(grid.times > 1.0) & (env > 0.01 * env.max())]
    assert np.all(np.diff(tail) < 0)
    assert env[-1] < 0.01 * env.max()


def test_undisturbed_vacua():
    grid = TimeGrid(0.0, 30.0, 301)
    cfg = quad_cfg(order=512)
    v = mean_quantum_variance(cfg, PulsePair(0.0, 0.0, 10.0), grid)
    nodes, weights = cfg.members()
    assert np.allclose(v.values, np.sum(weights / (2 * nodes)), rtol=1e-13)


def test_displacement_variance_nonnegative_on_random_draws():
    rng = np.random.default_rng(5)
    for _ in range(100):
        spec = LorentzianSpec(rng.uniform(2, 10), rng.uniform(0.05, 1.0), 10.0)
        cfg = EnsembleConfig(spec, n_members=200, seed=int(rng.integers(1 << 32)))
        pulses = PulsePair(*rng.uniform(-5, 5, 2), rng.uniform(2, 10))
        init = PhasePoint(*rng.uniform(-25, 25, 2))
        v = displacement_variance(cfg, init, pulses, TimeGrid(0.0, 3 * pulses.delta, 200))
        assert np.all(v.values >= 0)


def test_monte_carlo_matches_quadrature_within_four_standard_errors():
    grid = TimeGrid(-1.0, 30.0, 1000)
    spec = LorentzianSpec(7.5, 0.5, 10.0)
    mc = EnsembleConfig(spec, n_members=100_000, seed=2024)
    qd = EnsembleConfig(spec, mode="quadrature")
    init, pulses = FIG1_INIT, FIG1_PULSES
    fn = lambda w, t: (classical_trajectory(OscillatorParams(w), init, pulses, np.maximum(t, 0.0)),)
    t = grid.times[grid.times >= 0]
    (mean,), (se,) = ensemble_average(mc, fn, t, stderr=True)
    (ref,) = ensemble_average(qd, fn, t)
    assert np.all(np.abs(mean - ref) <= 4 * se)

    from squeezed_echo.ensemble import _quantum_variance

    fn = lambda w, t: (_quantum_variance(w, t, pulses),)
    (mean,), (se,) = ensemble_average(mc, fn, t, stderr=True)
    (ref,) = ensemble_average(qd, fn, t)
    assert np.all(np.abs(mean - ref) <= 4 * se)


def test_bitwise_determinism_across_thread_counts(monkeypatch):
    grid = TimeGrid(-1.0, 30.0, 4000)
    cfg = EnsembleConfig(SPEC, n_members=3000, seed=77)
    monkeypatch.setenv("SQUEEZED_ECHO_THREADS", "1")
    a = mean_displacement(cfg, FIG1_INIT, FIG1_PULSES, grid).values
    monkeypatch.setenv("SQUEEZED_ECHO_THREADS", "4")
    b = mean_displacement(
        EnsembleConfig(SPEC, n_members=3000, seed=77), FIG1_INIT, FIG1_PULSES, grid
    ).values
    assert a.tobytes() == b.tobytes()
    monkeypatch.setenv("SQUEEZED_ECHO_THREADS", "lots")
    with pytest.raises(ValueError):
        mean_displacement(cfg, FIG1_INIT, FIG1_PULSES, grid)


def test_echo_timing_on_random_parameters():
    rng = np.random.default_rng(11)
    for _ in range(20):
        w0 = rng.uniform(3, 10)
        gamma = rng.uniform(0.02, 0.1) * w0
        # delay long enough for the free decay to finish before the second kick
        delta = rng.uniform(4, 8) / gamma
        mu1, mu2 = rng.uniform(0.3, 1.0, 2) * w0 * rng.choice([-1, 1], 2)
        init = PhasePoint(*rng.uniform(-25, 25, 2))
        cfg = quad_cfg(LorentzianSpec(w0, gamma, 10.0), order=1024)
        grid = TimeGrid(0.0, 3 * delta, int(3 * delta * w0 / (2 * math.pi) * 40) + 100)
        q = mean_displacement(cfg, init, PulsePair(mu1, mu2, delta), grid)
        report = detect_echo(q, delta, w0)
        assert abs(report.center - 2 * delta) <= 0.05 * delta


def test_classical_variance_has_baseband_dip_at_twice_delay():
    # The dip near 2 delta shows in the one-period running mean, not in the
    # 2-omega envelope that the echo detector demodulates.
    cfg = quad_cfg(LorentzianSpec(7.5, 0.5, 10.0), order=1024)
    grid = TimeGrid(-1.0, 30.0, 12_000)
    v = displacement_variance(cfg, PhasePoint(25.0, 100.0), PulsePair(2.0, 5.0, 10.0), grid).values
    k = int(round(2 * math.pi / 7.5 / grid.spacing))
    smooth = np.convolve(v, np.ones(k) / k, mode="same")
    t = grid.times
    near = (t >= 18) & (t <= 22)
    lowest = t[near][np.argmin(smooth[near])]
    assert abs(lowest - 20.0) < 0.5
    for lo, hi in ((14, 17), (23, 26)):
        side = np.median(smooth[(t >= lo) & (t <= hi)])
        assert smooth[near].min() < 0.9 * side


# ---------------------------------------------------------------- snapshots


def test_snapshot_before_first_kick():
    cfg = EnsembleConfig(SPEC, n_members=10_000)
    pts = snapshot(cfg, FIG1_INIT, FIG1_PULSES, 0.0, before_kick=True)
    assert np.all(pts.q == 25.0) and np.all(pts.p == 10.0)
    pts = snapshot(cfg, FIG1_INIT, FIG1_PULSES, 0.0)
    assert np.all(pts.p == 260.0)


def test_snapshot_energy_conserved_between_kicks():
    cfg = EnsembleConfig(SPEC, n_members=10_000)
    omega, _ = cfg.members()
    start = snapshot(cfg, FIG1_INIT, FIG1_PULSES, 0.0)
    end = snapshot(cfg, FIG1_INIT, FIG1_PULSES, 10.0, before_kick=True)
    core = np.abs(omega - 7.5) < 0.5
    e0, e1 = start.energy(omega), end.energy(omega)
    ok = np.abs(e1 / e0 - 1) < 1e-9
    assert ok[core].mean() >= 0.95


def test_snapshot_order_and_mode():
    cfg = EnsembleConfig(SPEC, n_members=500, seed=4)
    a = snapshot(cfg, FIG1_INIT, FIG1_PULSES, 20.0)
    omega = sample_frequencies(cfg)
    ref = [
        classical_trajectory(OscillatorParams(w), FIG1_INIT, FIG1_PULSES, 20.0) for w in omega[:20]
    ]
    assert np.allclose(a.q[:20], ref, rtol=1e-12, atol=1e-9)
    with pytest.raises(ValueError):
        snapshot(quad_cfg(), FIG1_INIT, FIG1_PULSES, 1.0)
