"""Closed-form dynamics of a single impulsively driven parametric oscillator.

Natural units throughout: hbar = k_B = 1 and unit mass, so the vacuum
position variance of an oscillator with angular frequency ``omega`` is
``1 / (2 omega)``.

All functions broadcast over numpy arrays. ``OscillatorParams.omega`` may be
an array (one entry per ensemble member), which is how the ensemble module
evaluates many oscillators at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike


def _finite(*values) -> bool:
    return all(np.all(np.isfinite(v)) for v in values)


@dataclass(frozen=True)
class OscillatorParams:
    omega: float | np.ndarray

    def __post_init__(self):
        if not (_finite(self.omega) and np.all(np.asarray(self.omega) > 0)):
            raise ValueError(f"omega must be positive and finite, got {self.omega!r}")

    @property
    def vacuum_variance(self):
        """Zero-point variance of Q, ``1 / (2 omega)``."""
        return 0.5 / self.omega


@dataclass(frozen=True)
class PhasePoint:
    """Classical state (Q, P); also used for coherent-state expectation values."""

    q: float | np.ndarray
    p: float | np.ndarray

    def __post_init__(self):
        if not _finite(self.q, self.p):
            raise ValueError("phase point must be finite")

    def energy(self, omega):
        """Oscillator energy P^2/2 + omega^2 Q^2/2 (conserved between kicks)."""
        return 0.5 * self.p**2 + 0.5 * omega**2 * self.q**2


@dataclass(frozen=True)
class PulsePair:
    """Two parametric delta kicks of strength ``mu1`` at t = 0 and ``mu2`` at t = delta."""

    mu1: float
    mu2: float
    delta: float

    def __post_init__(self):
        if not _finite(self.mu1, self.mu2, self.delta):
            raise ValueError("pulse parameters must be finite")
        if np.any(np.asarray(self.delta) <= 0):
            raise ValueError(f"delta must be positive, got {self.delta!r}")


@dataclass(frozen=True)
class LinearPulsePair:
    """Two additive momentum impulses ``pi1`` at t = 0 and ``pi2`` at t = delta."""

    pi1: float
    pi2: float
    delta: float

    def __post_init__(self):
        if not _finite(self.pi1, self.pi2, self.delta):
            raise ValueError("pulse parameters must be finite")
        if np.any(np.asarray(self.delta) <= 0):
            raise ValueError(f"delta must be positive, got {self.delta!r}")


@dataclass(frozen=True)
class SecondMoments:
    """Symmetrized second moments <Q^2>, <QP + PQ>/2 and <P^2>."""

    qq: float
    qp: float
    pp: float

    def __post_init__(self):
        if not _finite(self.qq, self.qp, self.pp):
            raise ValueError("moments must be finite")
        if np.any(np.asarray(self.qq) < 0) or np.any(np.asarray(self.pp) < 0):
            raise ValueError("qq and pp must be nonnegative")

    @classmethod
    def vacuum(cls, omega: float) -> SecondMoments:
        return cls(0.5 / omega, 0.0, 0.5 * omega)

    @property
    def determinant(self):
        return self.qq * self.pp - self.qp**2


@dataclass(frozen=True)
class ThermalParams:
    kT: float

    def __post_init__(self):
        kT = np.asarray(self.kT)
        if not np.all(np.isfinite(kT) & (kT > 0)):
            raise ValueError(f"kT must be positive, got {self.kT!r}")


def free_evolution(state: PhasePoint, params: OscillatorParams, t: ArrayLike) -> PhasePoint:
    """Rotate ``state`` in phase space by the free flow for time ``t`` (any sign)."""
    w = params.omega
    c, s = np.cos(w * t), np.sin(w * t)
    return PhasePoint(state.q * c + state.p / w * s, state.p * c - w * state.q * s)


def parametric_kick(state: PhasePoint, mu: float) -> PhasePoint:
    """Apply g = mu * delta(t): Q is untouched, P gains 2 mu Q."""
    return PhasePoint(state.q, state.p + 2.0 * mu * state.q)


def linear_kick(state: PhasePoint, pi: float) -> PhasePoint:
    return PhasePoint(state.q, state.p + pi)


def moment_kick(m: SecondMoments, mu: float) -> SecondMoments:
    """Conjugate the second moments by the kick P -> P + 2 mu Q."""
    return SecondMoments(
        m.qq,
        m.qp + 2.0 * mu * m.qq,
        m.pp + 4.0 * mu * m.qp + 4.0 * mu**2 * m.qq,
    )


def _check_nonnegative(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be >= 0; the first pulse defines t = 0")
    return t


def classical_trajectory(
    params: OscillatorParams, init: PhasePoint, pulses: PulsePair, t: ArrayLike
) -> np.ndarray:
    """Displacement Q(t) after two parametric kicks.

    ``init`` is the state just before the first kick. For t < delta the
    response is the single-kick solution U(t); from t = delta on (inclusive)
    the second kick adds ``2 mu2 U(delta) / omega * sin(omega (t - delta))``.
    """
    t = _check_nonnegative(t)
    w = params.omega
    v = (init.p + 2.0 * pulses.mu1 * init.q) / w
    wd = w * pulses.delta
    k = 2.0 * pulses.mu2 * (init.q * np.cos(wd) + v * np.sin(wd)) / w
    # sin(w(t - delta)) expanded so each element needs one sin and one cos
    on = t >= pulses.delta
    c, s = np.cos(w * t), np.sin(w * t)
    return c * (init.q - np.where(on, k * np.sin(wd), 0.0)) + s * (
        v + np.where(on, k * np.cos(wd), 0.0)
    )


def classical_trajectory_linear(
    params: OscillatorParams, init: PhasePoint, pulses: LinearPulsePair, t: ArrayLike
) -> np.ndarray:
    t = _check_nonnegative(t)
    w = params.omega
    v = (init.p + pulses.pi1) / w
    wd = w * pulses.delta
    k = pulses.pi2 / w
    on = t >= pulses.delta
    c, s = np.cos(w * t), np.sin(w * t)
    return c * (init.q - np.where(on, k * np.sin(wd), 0.0)) + s * (
        v + np.where(on, k * np.cos(wd), 0.0)
    )


def _single_pulse_coefficients(omega, mu1):
    # ratio = a + b sin(2 omega t) + c cos(2 omega t)
    r = mu1 / omega
    return 1.0 + 2.0 * r**2, 2.0 * r, -2.0 * r**2


def variance_single_pulse(params: OscillatorParams, mu1: float, t: ArrayLike) -> np.ndarray:
    """Position variance after one kick on the vacuum, in units of the vacuum variance."""
    a, b, c = _single_pulse_coefficients(params.omega, mu1)
    x = 2.0 * params.omega * np.asarray(t, dtype=float)
    return a + b * np.sin(x) + c * np.cos(x)


def _second_pulse_coefficients(omega, pulses):
    """Constant, sine and cosine coefficients of the ratio for t >= delta.

    The post-kick ratio is C + A sin 2w(t - delta) + B cos 2w(t - delta); the
    three coefficients follow from the jump conditions at t = delta, where the
    variance is continuous and its first two derivatives jump.
    """
    a, b, c = _single_pulse_coefficients(omega, pulses.mu1)
    x = 2.0 * omega * pulses.delta
    sig = a + b * np.sin(x) + c * np.cos(x)
    dsig = 2.0 * omega * (b * np.cos(x) - c * np.sin(x))
    ddsig = -4.0 * omega**2 * (sig - a)
    mu = pulses.mu2
    A = (dsig + 4.0 * mu * sig) / (2.0 * omega)
    B = -(ddsig + 4.0 * mu * dsig + 8.0 * mu**2 * sig) / (4.0 * omega**2)
    return sig - B, A, B


def variance_two_pulse(params: OscillatorParams, pulses: PulsePair, t: ArrayLike) -> np.ndarray:
    """Position variance of a vacuum-initialized oscillator after both kicks.

    Returned as a ratio to the vacuum variance ``1 / (2 omega)``.
    """
    t = _check_nonnegative(t)
    w = params.omega
    a, b, c = _single_pulse_coefficients(w, pulses.mu1)
    C, A, B = _second_pulse_coefficients(w, pulses)
    x0 = 2.0 * w * pulses.delta
    # rewrite C + A sin(x - x0) + B cos(x - x0) on the basis sin x, cos x
    on = t >= pulses.delta
    sin_coef = np.where(on, A * np.cos(x0) + B * np.sin(x0), b)
    cos_coef = np.where(on, B * np.cos(x0) - A * np.sin(x0), c)
    x = 2.0 * w * t
    return np.where(on, C, a) + sin_coef * np.sin(x) + cos_coef * np.cos(x)


def thermal_variance(
    params: OscillatorParams, mu1: float, thermal: ThermalParams, t: ArrayLike
) -> np.ndarray:
    """Thermal ensemble variance of Q after one kick (valid for 0 <= t < delta)."""
    w = params.omega
    r = mu1 / w
    x = 2.0 * w * np.asarray(t, dtype=float)
    return thermal.kT / w**2 * ((1.0 + 2.0 * r**2) + 2.0 * r * np.sin(x) - 2.0 * r**2 * np.cos(x))


def _echo_bracket(omega, pulses, t):
    x = 2.0 * omega * (np.asarray(t, dtype=float) - 2.0 * pulses.delta)
    return np.sin(x) + pulses.mu1 / omega * np.cos(x)


def thermal_echo(
    params: OscillatorParams, pulses: PulsePair, thermal: ThermalParams, t: ArrayLike
) -> np.ndarray:
    """Echo contribution to the thermal variance near t = 2 delta."""
    w = params.omega
    pref = 2.0 * pulses.mu1 * pulses.mu2**2 / w**5 * thermal.kT
    return pref * _echo_bracket(w, pulses, t)


def quantum_echo_term(params: OscillatorParams, pulses: PulsePair, t: ArrayLike) -> np.ndarray:
    """Echo contribution to the vacuum-initialized variance near t = 2 delta."""
    w = params.omega
    pref = 2.0 * pulses.mu1 * pulses.mu2**2 / w**3 * (0.5 / w)
    return pref * _echo_bracket(w, pulses, t)
