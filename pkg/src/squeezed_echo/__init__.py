"""Echoes in inhomogeneous ensembles of impulsively squeezed harmonic oscillators."""

from .analysis import (
    EchoReport,
    SinusoidComponent,
    decompose_q_response,
    decompose_variance_response,
    detect_echo,
    envelope,
    squeezing_duty_cycle,
)
from .core import (
    LinearPulsePair,
    OscillatorParams,
    PhasePoint,
    PulsePair,
    SecondMoments,
    ThermalParams,
    classical_trajectory,
    classical_trajectory_linear,
    free_evolution,
    linear_kick,
    moment_kick,
    parametric_kick,
    quantum_echo_term,
    thermal_echo,
    thermal_variance,
    variance_single_pulse,
    variance_two_pulse,
)
from .ensemble import (
    EnsembleConfig,
    LorentzianSpec,
    displacement_variance,
    ensemble_average,
    mean_displacement,
    mean_displacement_linear,
    mean_quantum_variance,
    quadrature_rule,
    sample_frequencies,
    snapshot,
)
from .oracle import (
    IntegratorConfig,
    IntegratorError,
    PulseProfile,
    integrate_moments,
    integrate_trajectory,
    pulse_pair_profiles,
)
from .timeseries import TimeGrid, TimeSeries

__version__ = "0.1.0"

__all__ = [
    "EchoReport",
    "EnsembleConfig",
    "IntegratorConfig",
    "IntegratorError",
    "LinearPulsePair",
    "LorentzianSpec",
    "OscillatorParams",
    "PhasePoint",
    "PulsePair",
    "PulseProfile",
    "SecondMoments",
    "SinusoidComponent",
    "ThermalParams",
    "TimeGrid",
    "TimeSeries",
    "classical_trajectory",
    "classical_trajectory_linear",
    "decompose_q_response",
    "decompose_variance_response",
    "detect_echo",
    "displacement_variance",
    "ensemble_average",
    "envelope",
    "free_evolution",
    "integrate_moments",
    "integrate_trajectory",
    "linear_kick",
    "mean_displacement",
    "mean_displacement_linear",
    "mean_quantum_variance",
    "moment_kick",
    "parametric_kick",
    "pulse_pair_profiles",
    "quadrature_rule",
    "quantum_echo_term",
    "sample_frequencies",
    "snapshot",
    "squeezing_duty_cycle",
    "thermal_echo",
    "thermal_variance",
    "variance_single_pulse",
    "variance_two_pulse",
]
