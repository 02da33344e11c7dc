"""Echo detection, sinusoid decompositions and the squeezing duty cycle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import OscillatorParams, PhasePoint, PulsePair, _second_pulse_coefficients
from .timeseries import TimeSeries

DEFAULT_THRESHOLD = 3.0
BASELINE_WINDOW = (1.3, 1.7)
SEARCH_WINDOW = (1.8, 2.2)


@dataclass(frozen=True)
class EchoReport:
    center: float
    amplitude: float
    baseline: float
    contrast: float
    detected: bool


@dataclass(frozen=True)
class SinusoidComponent:
    """``amplitude * sin(carrier * (t - time_offset) + phase)``."""

    amplitude: float
    carrier: float
    phase: float
    time_offset: float

    def __post_init__(self):
        if self.amplitude < 0 or self.carrier <= 0:
            raise ValueError("amplitude must be >= 0 and carrier > 0")

    @classmethod
    def from_quadratures(cls, sin_coef, cos_coef, carrier, time_offset):
        """Build from ``sin_coef * sin(x) + cos_coef * cos(x)``."""
        phase = math.atan2(cos_coef, sin_coef)
        if phase <= -math.pi:
            phase += 2.0 * math.pi
        return cls(math.hypot(sin_coef, cos_coef), carrier, phase, time_offset)

    def __call__(self, t):
        return self.amplitude * np.sin(
            self.carrier * (np.asarray(t) - self.time_offset) + self.phase
        )


def _boxcar_one_period(n_per_period: float) -> np.ndarray:
    # Odd-length kernel spanning exactly one period; the outer taps take the
    # fractional remainder so the carrier's second harmonic cancels.
    k = int((n_per_period - 1.0) // 2)
    rem = 0.5 * (n_per_period - (2 * k + 1))
    kernel = np.ones(2 * k + 3)
    kernel[0] = kernel[-1] = rem
    return kernel / n_per_period


def envelope(series: TimeSeries, carrier: float) -> TimeSeries:
    """Amplitude envelope by complex demodulation at ``carrier``.

    The series is mixed down with ``2 exp(-i carrier t)``, smoothed with a
    moving average one carrier period long, and the magnitude is returned.
    Near the grid edges the average runs over the available samples only.
    """
    dt = series.grid.spacing
    n_per_period = 2.0 * math.pi / carrier / dt
    if n_per_period < 20:
        raise ValueError(
            f"grid resolves only {n_per_period:.1f} points per carrier period (need 20)"
        )
    t = series.times
    mixed = 2.0 * series.values * np.exp(-1j * carrier * t)
    kernel = _boxcar_one_period(n_per_period)
    smooth = np.convolve(mixed, kernel, mode="same")
    coverage = np.convolve(np.ones_like(t), kernel, mode="same")
    return TimeSeries(series.grid, np.abs(smooth / coverage))


def detect_echo(
    series: TimeSeries,
    delta: float,
    carrier: float,
    threshold: float = DEFAULT_THRESHOLD,
) -> EchoReport:
    """Look for an envelope burst near t = 2 delta.

    The baseline is the median envelope on [1.3, 1.7] delta and the echo is
    the envelope maximum on [1.8, 2.2] delta. For dips (an echo that lowers
    the signal) pass the negated, mean-detrended series.
    """
    if not threshold > 1:
        raise ValueError("threshold must exceed 1")
    grid = series.grid
    if grid.t_start > BASELINE_WINDOW[0] * delta or grid.t_end < SEARCH_WINDOW[1] * delta:
        raise ValueError("series does not cover the echo analysis windows")
    env = envelope(series, carrier).values
    base_mask = grid.window(BASELINE_WINDOW[0] * delta, BASELINE_WINDOW[1] * delta)
    search_mask = grid.window(SEARCH_WINDOW[0] * delta, SEARCH_WINDOW[1] * delta)
    baseline = max(float(np.median(env[base_mask])), np.finfo(float).tiny)
    idx = np.flatnonzero(search_mask)
    peak = idx[np.argmax(env[idx])]
    amplitude = float(env[peak])
    contrast = amplitude / baseline
    return EchoReport(float(grid.times[peak]), amplitude, baseline, contrast, contrast >= threshold)


def decompose_q_response(
    params: OscillatorParams, init: PhasePoint, pulses: PulsePair
) -> list[SinusoidComponent]:
    """Split Q(t), t >= delta, into sinusoids at the oscillator frequency.

    Returns the single-kick response U(t), the part of the second-kick term
    that keeps the phase of U (offset 0) and the echo term (offset 2 delta).
    No component is tied to t = delta itself.
    """
    w, q0 = params.omega, init.q
    v = (init.p + 2.0 * pulses.mu1 * q0) / w
    k = pulses.mu2 / w
    return [
        SinusoidComponent.from_quadratures(v, q0, w, 0.0),
        SinusoidComponent.from_quadratures(k * q0, -k * v, w, 0.0),
        SinusoidComponent.from_quadratures(k * q0, k * v, w, 2.0 * pulses.delta),
    ]


def decompose_variance_response(
    params: OscillatorParams, pulses: PulsePair
) -> tuple[float, list[SinusoidComponent]]:
    """Split the two-kick variance ratio (t >= delta) into a constant and 2w sinusoids.

    Returns ``(constant, [offset 0, offset delta, offset 2 delta])``. The
    offset-2-delta term is the echo; the offset-delta term is the fresh
    ringing started by the second kick on the mean squeezing level.
    """
    w, mu1, delta = params.omega, pulses.mu1, pulses.delta
    r1 = mu1 / w
    a, b, c = 1.0 + 2.0 * r1**2, 2.0 * r1, -2.0 * r1**2
    m = pulses.mu2 / w
    constant = float(_second_pulse_coefficients(w, pulses)[0])

    # Coefficients of sin/cos(2w(t - delta)) that depend on the phase 2w delta.
    a_sin, a_cos = -c + 2 * m * b, b + 2 * m * c
    b_sin, b_cos = b + 2 * m * c - 2 * m * m * b, c - 2 * m * b - 2 * m * m * c
    # Products of sin/cos(theta) with sin/cos(2w(t - delta)) split into
    # phases 2w t and 2w(t - 2 delta).
    start = SinusoidComponent.from_quadratures(
        0.5 * (a_cos + b_sin), 0.5 * (b_cos - a_sin), 2 * w, 0.0
    )
    ring = SinusoidComponent.from_quadratures(2 * m * a, -2 * m * m * a, 2 * w, delta)
    echo = SinusoidComponent.from_quadratures(m * m * b, -m * m * c, 2 * w, 2 * delta)
    return constant, [start, ring, echo]


def squeezing_duty_cycle(params: OscillatorParams, mu1: float) -> float:
    """Fraction of a 2w period during which the one-kick variance is below vacuum.

    The variance ratio minus one is ``2 r^2 + 2 r sin x - 2 r^2 cos x`` with
    ``r = mu1/omega`` and ``x = 2 omega t``; it has at most two roots per
    period, found in closed form.
    """
    if mu1 == 0:
        raise ValueError("duty cycle is undefined without a kick (variance is constant)")
    r = mu1 / params.omega
    # 2r^2 + R sin(x + phi) < 0 with R = 2|r| sqrt(1 + r^2)
    amp = 2.0 * abs(r) * math.sqrt(1.0 + r * r)
    phi = math.atan2(-2.0 * r * r, 2.0 * r)
    level = -2.0 * r * r / amp
    # roots of sin(y) = level, y = x + phi; below-level arc is (pi - y1, 2 pi + y1)
    y1 = math.asin(level)
    roots = sorted(((pi_ - phi) % (2.0 * math.pi)) for pi_ in (y1, math.pi - y1))
    below = (roots[1] - roots[0]) / (2.0 * math.pi)
    mid = 0.5 * (roots[0] + roots[1])
    if 2 * r * r + amp * math.sin(mid + phi) >= 0:
        below = 1.0 - below
    return below
