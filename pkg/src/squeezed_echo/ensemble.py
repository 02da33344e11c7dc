"""Inhomogeneous ensembles of oscillators with Lorentzian-distributed frequencies.

Averages are taken either over seeded Monte Carlo samples or over a
deterministic quadrature rule on the truncated Lorentzian. Both reduce to a
weighted sum over members, done per time point along a contiguous axis with
``np.sum`` (pairwise summation), so results do not depend on how time points
are split between worker threads.
"""

from __future__ import annotations

import math
import os
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .core import (
    LinearPulsePair,
    OscillatorParams,
    PhasePoint,
    PulsePair,
    classical_trajectory,
    classical_trajectory_linear,
    free_evolution,
    parametric_kick,
    variance_two_pulse,
)
from .timeseries import TimeGrid, TimeSeries

__all__ = [
    "EnsembleConfig",
    "LorentzianSpec",
    "TimeGrid",
    "TimeSeries",
    "displacement_variance",
    "ensemble_average",
    "mean_displacement",
    "mean_displacement_linear",
    "mean_quantum_variance",
    "quadrature_rule",
    "sample_frequencies",
    "snapshot",
]

# Upper bound on member x time elements held in memory per block.
_BLOCK_ELEMENTS = 2_000_000
_PANEL_NODES = 32


@dataclass(frozen=True)
class LorentzianSpec:
    """Lorentzian (Cauchy) frequency distribution truncated to a positive window.

    ``gamma`` is the full width at half maximum. The support is
    ``[max(min_frequency, omega0 - h*gamma), omega0 + h*gamma]`` with
    ``h = truncation_halfwidth``; ``min_frequency`` defaults to ``omega0/100``.
    """

    omega0: float
    gamma: float
    truncation_halfwidth: float = 20.0
    min_frequency: float | None = None

    def __post_init__(self):
        if not (self.omega0 > 0 and self.gamma > 0 and self.truncation_halfwidth > 0):
            raise ValueError("omega0, gamma and truncation_halfwidth must be positive")
        if self.min_frequency is None:
            object.__setattr__(self, "min_frequency", self.omega0 / 100.0)
        if not 0 < self.min_frequency < self.omega0:
            raise ValueError("min_frequency must lie in (0, omega0)")
        lo, hi = self.support
        if not lo < hi:
            raise ValueError(f"truncated support [{lo}, {hi}] is empty")

    @property
    def support(self) -> tuple[float, float]:
        half = self.truncation_halfwidth * self.gamma
        return max(self.min_frequency, self.omega0 - half), self.omega0 + half

    def _cauchy_cdf(self, x):
        return 0.5 + np.arctan(2.0 * (np.asarray(x) - self.omega0) / self.gamma) / np.pi

    @property
    def mass(self) -> float:
        """Probability of the untruncated Lorentzian inside the support."""
        lo, hi = self.support
        return float(self._cauchy_cdf(hi) - self._cauchy_cdf(lo))

    def pdf(self, x):
        """Density normalized on the truncated support (zero outside)."""
        x = np.asarray(x, dtype=float)
        hw = 0.5 * self.gamma
        lo, hi = self.support
        dens = hw / np.pi / ((x - self.omega0) ** 2 + hw**2) / self.mass
        return np.where((x >= lo) & (x <= hi), dens, 0.0)

    def ppf(self, u):
        """Inverse CDF of the truncated law, ``u`` in [0, 1]."""
        lo, hi = self.support
        c_lo, c_hi = self._cauchy_cdf(lo), self._cauchy_cdf(hi)
        c = c_lo + np.asarray(u, dtype=float) * (c_hi - c_lo)
        x = self.omega0 + 0.5 * self.gamma * np.tan(np.pi * (c - 0.5))
        return np.clip(x, lo, hi)


@dataclass(frozen=True)
class EnsembleConfig:
    spec: LorentzianSpec
    mode: Literal["monte-carlo", "quadrature"] = "monte-carlo"
    n_members: int = 10_000
    quadrature_order: int = 2048
    seed: int = 0
    _members: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.mode == "monte-carlo":
            if self.n_members < 2:
                raise ValueError("monte-carlo ensembles need at least 2 members")
        elif self.mode == "quadrature":
            if self.quadrature_order < 16:
                raise ValueError("quadrature_order must be at least 16")
        else:
            raise ValueError(f"unknown averaging mode {self.mode!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    def members(self) -> tuple[np.ndarray, np.ndarray]:
        """Member frequencies and their averaging weights (weights sum to 1)."""
        if self._members is None:
            if self.mode == "monte-carlo":
                omega = sample_frequencies(self)
                weights = np.full(omega.size, 1.0 / omega.size)
            else:
                omega, weights = quadrature_rule(self.spec, self.quadrature_order)
            object.__setattr__(self, "_members", (omega, weights))
        return self._members


def sample_frequencies(config: EnsembleConfig) -> np.ndarray:
    """Draw ``n_members`` frequencies from the truncated Lorentzian by inverse CDF."""
    if config.mode != "monte-carlo":
        raise ValueError("sampling requires monte-carlo mode")
    rng = np.random.default_rng(config.seed)
    return config.spec.ppf(rng.random(config.n_members))


def quadrature_rule(spec: LorentzianSpec, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes on the support, weighted by the density.

    The support is split into equal panels of about 32 nodes each. Weights
    are the Legendre weights times the Lorentzian density, renormalized to
    sum to one, so constants integrate exactly.
    """
    if order < 1:
        raise ValueError("order must be positive")
    lo, hi = spec.support
    per = min(_PANEL_NODES, order)
    n_panels = order // per
    sizes = np.full(n_panels, per)
    sizes[: order - n_panels * per] += 1
    edges = np.linspace(lo, hi, n_panels + 1)
    nodes, weights = [], []
    for a, b, n in zip(edges[:-1], edges[1:], sizes):
        x, w = np.polynomial.legendre.leggauss(int(n))
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights) * spec.pdf(nodes)
    return nodes, weights / np.sum(weights)


def _n_workers() -> int:
    raw = os.environ.get("SQUEEZED_ECHO_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"SQUEEZED_ECHO_THREADS must be an integer, got {raw!r}") from None
    return n if n > 0 else (os.cpu_count() or 1)


def ensemble_average(
    config: EnsembleConfig,
    member_fn: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, ...]],
    times: np.ndarray,
    stderr: bool = False,
):
    """Weighted member average of one or more observables at each time.

    ``member_fn(omega, t)`` gets ``omega`` with shape ``(1, n)`` and ``t`` with
    shape ``(m, 1)`` and returns a tuple of ``(m, n)`` arrays. Returns a tuple
    of length-``m`` averages; with ``stderr=True`` (monte-carlo only) also a
    tuple of standard errors of those averages.
    """
    omega, weights = config.members()
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    block = max(1, _BLOCK_ELEMENTS // omega.size)
    starts = range(0, times.size, block)

    def work(i):
        vals = member_fn(omega[None, :], times[i : i + block, None])
        means = [np.sum(v * weights, axis=1) for v in vals]
        errs = []
        if stderr:
            n = omega.size
            errs = [np.std(v, axis=1, ddof=1) / math.sqrt(n) for v in vals]
        return means, errs

    workers = min(_n_workers(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(i) for i in starts]
    n_obs = len(parts[0][0])
    means = tuple(np.concatenate([p[0][k] for p in parts]) for k in range(n_obs))
    if not stderr:
        return means
    if config.mode != "monte-carlo":
        raise ValueError("standard errors are only defined for monte-carlo ensembles")
    return means, tuple(np.concatenate([p[1][k] for p in parts]) for k in range(n_obs))


def _by_sign(t, before, after):
    # t is an ascending (m, 1) column; evaluate each branch only where it applies
    k = int(np.searchsorted(t[:, 0], 0.0))
    parts = []
    if k > 0:
        parts.append(before(t[:k]))
    if k < t.shape[0]:
        parts.append(after(t[k:]))
    return parts[0] if len(parts) == 1 else np.concatenate(parts)


def _displacement(omega, t, init, pulses):
    """Per-member Q(t); before the first kick members rotate freely."""
    params = OscillatorParams(omega)
    return _by_sign(
        t,
        lambda tt: free_evolution(init, params, tt).q,
        lambda tt: classical_trajectory(params, init, pulses, tt),
    )


def _displacement_linear(omega, t, init, pulses):
    params = OscillatorParams(omega)
    return _by_sign(
        t,
        lambda tt: free_evolution(init, params, tt).q,
        lambda tt: classical_trajectory_linear(params, init, pulses, tt),
    )


def mean_displacement(
    config: EnsembleConfig, init: PhasePoint, pulses: PulsePair, grid: TimeGrid
) -> TimeSeries:
    """Ensemble mean of Q(t) for members sharing the state ``init`` at t = 0."""
    (mean,) = ensemble_average(
        config, lambda w, t: (_displacement(w, t, init, pulses),), grid.times
    )
    return TimeSeries(grid, mean)


def mean_displacement_linear(
    config: EnsembleConfig, init: PhasePoint, pulses: LinearPulsePair, grid: TimeGrid
) -> TimeSeries:
    (mean,) = ensemble_average(
        config, lambda w, t: (_displacement_linear(w, t, init, pulses),), grid.times
    )
    return TimeSeries(grid, mean)


def displacement_variance(
    config: EnsembleConfig, init: PhasePoint, pulses: PulsePair, grid: TimeGrid
) -> TimeSeries:
    """Spread of Q across the ensemble, mean(Q^2) - mean(Q)^2."""

    def fn(w, t):
        q = _displacement(w, t, init, pulses)
        return q, q * q

    mean_q, mean_q2 = ensemble_average(config, fn, grid.times)
    return TimeSeries(grid, np.maximum(mean_q2 - mean_q**2, 0.0))


def _quantum_variance(omega, t, pulses):
    params = OscillatorParams(omega)
    return params.vacuum_variance * _by_sign(
        t,
        lambda tt: np.ones((tt.shape[0], omega.shape[-1])),
        lambda tt: variance_two_pulse(params, pulses, tt),
    )


def mean_quantum_variance(config: EnsembleConfig, pulses: PulsePair, grid: TimeGrid) -> TimeSeries:
    """Ensemble mean of <Q^2> for members that start in their own ground state."""
    (mean,) = ensemble_average(config, lambda w, t: (_quantum_variance(w, t, pulses),), grid.times)
    return TimeSeries(grid, mean)


def snapshot(
    config: EnsembleConfig,
    init: PhasePoint,
    pulses: PulsePair,
    t: float,
    before_kick: bool = False,
) -> PhasePoint:
    """Phase-space positions of every member at time ``t``.

    Members are propagated by composing free rotations with the exact kick
    maps. A kick that lands exactly on ``t`` is included unless
    ``before_kick`` is set, which gives the t-minus picture. The returned
    arrays follow the sampling order.
    """
    if config.mode != "monte-carlo":
        raise ValueError("snapshots need individual monte-carlo members")
    omega, _ = config.members()
    params = OscillatorParams(omega)
    state = PhasePoint(np.full(omega.shape, float(init.q)), np.full(omega.shape, float(init.p)))
    if t < 0 or (t == 0 and before_kick):
        return free_evolution(state, params, t)
    state = parametric_kick(state, pulses.mu1)
    if t < pulses.delta or (t == pulses.delta and before_kick):
        return free_evolution(state, params, t)
    state = parametric_kick(free_evolution(state, params, pulses.delta), pulses.mu2)
    return free_evolution(state, params, t - pulses.delta)
