"""Brute-force numerical integration of the oscillator and its second moments.

This is the independent check on the closed forms in :mod:`squeezed_echo.core`.
Equations of motion are integrated with fixed-step fourth-order Runge-Kutta.
Pulses are either exact delta kicks (applied between integration segments)
or area-preserving Gaussians of finite width integrated straight through.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numba
import numpy as np

from .core import (
    OscillatorParams,
    PhasePoint,
    PulsePair,
    SecondMoments,
    classical_trajectory,
    moment_kick,
    parametric_kick,
    variance_two_pulse,
)
from .timeseries import TimeGrid, TimeSeries

# Gaussian pulses are treated as switched off beyond this many widths.
PULSE_SUPPORT_WIDTHS = 8.0


class IntegratorError(ValueError):
    """Raised for integrator configurations that cannot give a trustworthy result."""


@dataclass(frozen=True)
class PulseProfile:
    kind: Literal["exact-kick", "gaussian"]
    center: float
    area: float
    width: float | None = None

    def __post_init__(self):
        if self.kind not in ("exact-kick", "gaussian"):
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if not (math.isfinite(self.center) and math.isfinite(self.area)):
            raise ValueError("pulse center and area must be finite")
        if self.kind == "gaussian" and not (self.width is not None and self.width > 0):
            raise ValueError("gaussian pulses need a positive width")

    def g(self, t):
        """Drive g(t) for a gaussian profile; exact kicks have no pointwise value."""
        if self.kind != "gaussian":
            raise ValueError("exact kicks are not sampled pointwise")
        z = (np.asarray(t, dtype=float) - self.center) / self.width
        return self.area / (self.width * math.sqrt(2.0 * math.pi)) * np.exp(-0.5 * z * z)


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings.

    ``step=None`` picks a step from the oscillator period (and the narrowest
    gaussian pulse, if any) that keeps the global error near 1e-10 relative
    over a few hundred periods (period/2000 for trajectories, period/16000
    for the faster 2-omega moment dynamics).
    """

    step: float | None = None
    method: Literal["rk4"] = "rk4"

    def __post_init__(self):
        if self.method != "rk4":
            raise ValueError("only fixed-step 'rk4' is supported")
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")


def pulse_pair_profiles(mu1, mu2, delta, width=None) -> list[PulseProfile]:
    """The two-pulse drive as a pair of profiles; ``width`` switches to gaussians."""
    if width is None:
        return [PulseProfile("exact-kick", 0.0, mu1), PulseProfile("exact-kick", delta, mu2)]
    return [PulseProfile("gaussian", 0.0, mu1, width), PulseProfile("gaussian", delta, mu2, width)]


@numba.njit(cache=True)
def _drive(t, centers, areas, widths):
    g = 0.0
    for k in range(centers.shape[0]):
        z = (t - centers[k]) / widths[k]
        if abs(z) < 40.0:
            g += areas[k] / (widths[k] * 2.5066282746310002) * math.exp(-0.5 * z * z)
    return g


@numba.njit(cache=True)
def _kahan_add(total, comp, x):
    y = x - comp
    s = total + y
    return s, (s - total) - y


@numba.njit(cache=True)
def _rk4_trajectory(q, p, w2, t0, t1, n, centers, areas, widths):
    h = (t1 - t0) / n
    eq = ep = 0.0
    for i in range(n):
        t = t0 + i * h
        f1 = w2 - 2.0 * _drive(t, centers, areas, widths)
        fm = w2 - 2.0 * _drive(t + 0.5 * h, centers, areas, widths)
        f2 = w2 - 2.0 * _drive(t + h, centers, areas, widths)
        k1q, k1p = p, -f1 * q
        k2q, k2p = p + 0.5 * h * k1p, -fm * (q + 0.5 * h * k1q)
        k3q, k3p = p + 0.5 * h * k2p, -fm * (q + 0.5 * h * k2q)
        k4q, k4p = p + h * k3p, -f2 * (q + h * k3q)
        q, eq = _kahan_add(q, eq, h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q))
        p, ep = _kahan_add(p, ep, h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p))
    return q, p


@numba.njit(cache=True)
def _moment_rhs(qq, qp, pp, f):
    return 2.0 * qp, pp - f * qq, -2.0 * f * qp


@numba.njit(cache=True)
def _rk4_moments(qq, qp, pp, w2, t0, t1, n, centers, areas, widths):
    # Compensated (Kahan) state updates: after strong kicks qq*pp is many
    # orders above the conserved determinant, so plain roundoff would drift it.
    h = (t1 - t0) / n
    eq = eqp = ep = 0.0
    for i in range(n):
        t = t0 + i * h
        f1 = w2 - 2.0 * _drive(t, centers, areas, widths)
        fm = w2 - 2.0 * _drive(t + 0.5 * h, centers, areas, widths)
        f2 = w2 - 2.0 * _drive(t + h, centers, areas, widths)
        a1, b1, c1 = _moment_rhs(qq, qp, pp, f1)
        a2, b2, c2 = _moment_rhs(qq + 0.5 * h * a1, qp + 0.5 * h * b1, pp + 0.5 * h * c1, fm)
        a3, b3, c3 = _moment_rhs(qq + 0.5 * h * a2, qp + 0.5 * h * b2, pp + 0.5 * h * c2, fm)
        a4, b4, c4 = _moment_rhs(qq + h * a3, qp + h * b3, pp + h * c3, f2)
        qq, eq = _kahan_add(qq, eq, h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4))
        qp, eqp = _kahan_add(qp, eqp, h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4))
        pp, ep = _kahan_add(pp, ep, h / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4))
    return qq, qp, pp


def _resolve_step(omega, profiles, icfg, periods_per_step):
    period = 2.0 * math.pi / omega
    widths = [p.width for p in profiles if p.kind == "gaussian"]
    limit = min(widths) / 20.0 if widths else period / 200.0
    if icfg.step is None:
        return min(period / periods_per_step, limit)
    if icfg.step > limit * (1 + 1e-12):
        raise IntegratorError(f"step {icfg.step} exceeds the stability limit {limit}")
    return icfg.step


def _check_profiles(profiles):
    centers = [p.center for p in profiles]
    if any(c < 0 for c in centers):
        raise IntegratorError("pulses must sit at t >= 0; the initial state is given at t = 0")
    if centers != sorted(centers):
        raise IntegratorError("pulse profiles must be time-ordered")
    gauss = [p for p in profiles if p.kind == "gaussian"]
    for a, b in zip(gauss, gauss[1:]):
        if b.center - a.center < PULSE_SUPPORT_WIDTHS * (a.width + b.width):
            raise IntegratorError(f"gaussian pulses at {a.center} and {b.center} overlap")


def _integrate(kernel, kick, state, omega, profiles, grid, icfg, periods_per_step):
    if isinstance(omega, np.ndarray):
        raise TypeError("the oracle integrates one oscillator at a time")
    profiles = list(profiles)
    _check_profiles(profiles)
    h = _resolve_step(omega, profiles, icfg, periods_per_step)
    gauss = [p for p in profiles if p.kind == "gaussian"]
    centers = np.array([p.center for p in gauss], dtype=float)
    areas = np.array([p.area for p in gauss], dtype=float)
    widths = np.array([p.width for p in gauss], dtype=float)
    none = np.zeros(0)
    kicks = [(p.center, p.area) for p in profiles if p.kind == "exact-kick"]
    w2 = float(omega) ** 2

    def advance(y, t0, t1, with_pulses=True):
        if t1 == t0:
            return y
        n = max(1, math.ceil(abs(t1 - t0) / h - 1e-9))
        args = (centers, areas, widths) if with_pulses else (none, none, none)
        return kernel(*y, w2, t0, t1, n, *args)

    times = grid.times
    # ``state`` is given at t = 0 just before any kick there; gaussian tails
    # and negative grid times start earlier, reached by free backward flow.
    starts = [0.0, times[0]] + [p.center - PULSE_SUPPORT_WIDTHS * p.width for p in gauss]
    t_begin = min(starts)
    y = advance(tuple(float(v) for v in state), 0.0, t_begin, with_pulses=False)
    t = t_begin

    events = sorted({float(x) for x in times} | {c for c, _ in kicks if c >= t_begin})
    pending = sorted(kicks)
    out = {}
    for te in events:
        y = advance(y, t, te)
        t = te
        while pending and pending[0][0] <= t:
            y = kick(y, pending.pop(0)[1])
        out[te] = y
    return np.array([out[float(x)] for x in times])


def _kick_point(y, mu):
    k = parametric_kick(PhasePoint(*y), mu)
    return float(k.q), float(k.p)


def _kick_moments(y, mu):
    k = moment_kick(SecondMoments(*y), mu)
    return float(k.qq), float(k.qp), float(k.pp)


def trajectory_states(params, init, profiles, grid, icfg=IntegratorConfig()) -> np.ndarray:
    """(n_points, 2) array of (Q, P) along the grid."""
    return _integrate(
        _rk4_trajectory, _kick_point, (init.q, init.p), params.omega, profiles, grid, icfg, 2000
    )


def moment_states(params, init, profiles, grid, icfg=IntegratorConfig()) -> np.ndarray:
    """(n_points, 3) array of (qq, qp, pp) along the grid."""
    return _integrate(
        _rk4_moments,
        _kick_moments,
        (init.qq, init.qp, init.pp),
        params.omega,
        profiles,
        grid,
        icfg,
        16000,
    )


def integrate_trajectory(
    params: OscillatorParams,
    init: PhasePoint,
    profiles: Sequence[PulseProfile],
    grid: TimeGrid,
    icfg: IntegratorConfig = IntegratorConfig(),
) -> TimeSeries:
    """Integrate Q'' = -(omega^2 - 2 g(t)) Q and sample Q on ``grid``.

    ``init`` is the state at t = 0, before any kick located there. Exact
    kicks fire before the output at their own instant is recorded.
    """
    return TimeSeries(grid, trajectory_states(params, init, profiles, grid, icfg)[:, 0])


def integrate_moments(
    params: OscillatorParams,
    init: SecondMoments,
    profiles: Sequence[PulseProfile],
    grid: TimeGrid,
    icfg: IntegratorConfig = IntegratorConfig(),
) -> TimeSeries:
    """Integrate the closed second-moment system and sample <Q^2> on ``grid``."""
    return TimeSeries(grid, moment_states(params, init, profiles, grid, icfg)[:, 0])


def random_cross_check(
    n_draws: int = 50,
    seed: int = 0,
    n_points: int = 600,
    icfg: IntegratorConfig = IntegratorConfig(),
) -> dict[str, float]:
    """Largest oracle-vs-closed-form deviations over random parameter draws.

    Draws omega in [1, 10], mu1 and mu2 in [-5, 5], delta in [2, 15] and
    Q0, P0 in [-25, 25], and compares on t in [0, 3 delta]. Deviations are
    max-norm relative; the determinant entry is the largest relative drift
    of qq*pp - qp^2 along the moment trajectories. ``icfg`` applies to
    both integrations.
    """
    rng = np.random.default_rng(seed)
    worst = {"trajectory": 0.0, "variance": 0.0, "determinant": 0.0}
    for _ in range(n_draws):
        omega = rng.uniform(1, 10)
        mu1, mu2 = rng.uniform(-5, 5, size=2)
        delta = rng.uniform(2, 15)
        q0, p0 = rng.uniform(-25, 25, size=2)
        params = OscillatorParams(omega)
        pulses = PulsePair(mu1, mu2, delta)
        profiles = pulse_pair_profiles(mu1, mu2, delta)
        grid = TimeGrid(0.0, 3 * delta, n_points)

        q_num = integrate_trajectory(params, PhasePoint(q0, p0), profiles, grid, icfg).values
        q_ref = classical_trajectory(params, PhasePoint(q0, p0), pulses, grid.times)
        worst["trajectory"] = max(
            worst["trajectory"], np.max(np.abs(q_num - q_ref)) / np.max(np.abs(q_ref))
        )

        vac = SecondMoments.vacuum(omega)
        m = moment_states(params, vac, profiles, grid, icfg)
        v_ref = vac.qq * variance_two_pulse(params, pulses, grid.times)
        worst["variance"] = max(
            worst["variance"], np.max(np.abs(m[:, 0] - v_ref)) / np.max(np.abs(v_ref))
        )
        det = m[:, 0] * m[:, 2] - m[:, 1] ** 2
        worst["determinant"] = max(
            worst["determinant"], np.max(np.abs(det - vac.determinant)) / vac.determinant
        )
    return worst
