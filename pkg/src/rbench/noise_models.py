"""
Noise channels and ensemble disorder.

All rates are SI (1/s) and detunings are angular (rad/s). Channels act on
Bloch vectors and are contractive.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .seeding import child_rng
from .spin_core import BlochState, PulseSpec

T2_MODELS = ("isotropic", "dephasing")


class ClampedDurationWarning(RuntimeWarning):
    """A negative effective pulse duration was clamped to zero."""


@dataclass(frozen=True)
class NoiseConfig:
    """Noise-model parameters for one simulated experiment.

    ``t2_model`` selects how the Markovian ``t2`` acts: ``"isotropic"``
    shrinks the whole Bloch vector at rate 1/t2, ``"dephasing"`` only its
    transverse part. ``gate_depolarization`` is an explicit depolarizing
    probability applied once per randomized computational gate.
    """

    t2: float = math.inf
    t2_model: str = "isotropic"
    static_detuning_sigma: float = 0.0
    systematic_detuning: float = 0.0
    duration_offset: float = 0.0
    amplitude_noise_sigma: float = 0.0
    amplitude_inhomogeneity: float = 0.0
    depolarizing_rate: float = 0.0
    gate_depolarization: float = 0.0
    spam_flip_prob: float = 0.0
    mapping_pulses: bool = True

    def __post_init__(self):
        if not self.t2 > 0:
            raise ValueError("t2 must be positive (use inf to disable)")
        if self.t2_model not in T2_MODELS:
            raise ValueError(f"t2_model must be one of {T2_MODELS}")
        for name in (
            "static_detuning_sigma",
            "amplitude_noise_sigma",
            "amplitude_inhomogeneity",
            "depolarizing_rate",
            "gate_depolarization",
            "spam_flip_prob",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.gate_depolarization > 1 or self.spam_flip_prob > 1:
            raise ValueError("probabilities must not exceed 1")

    @classmethod
    def noiseless(cls) -> "NoiseConfig":
        return cls(mapping_pulses=False)

    @classmethod
    def paper_defaults(cls) -> "NoiseConfig":
        """T2 = 0.28 s, T2* = 25 ms disorder, 0.9% readout flips."""
        return cls(
            t2=0.28,
            static_detuning_sigma=static_sigma_from_t2_star(25e-3),
            spam_flip_prob=0.009,
        )

    def replace(self, **changes) -> "NoiseConfig":
        return replace(self, **changes)

    @property
    def isotropic_rate(self) -> float:
        rate = self.depolarizing_rate
        if self.t2_model == "isotropic" and math.isfinite(self.t2):
            rate += 1.0 / self.t2
        return rate

    @property
    def dephasing_rate(self) -> float:
        if self.t2_model == "dephasing" and math.isfinite(self.t2):
            return 1.0 / self.t2
        return 0.0


def static_sigma_from_t2_star(t2_star: float) -> float:
    """Gaussian detuning spread giving Ramsey contrast ``exp(-t**2 / (2 t2_star**2))``."""
    return 1.0 / t2_star


@dataclass(frozen=True)
class AtomInstance:
    static_detuning: float = 0.0
    amplitude_factor: float = 1.0


def sample_atom(config: NoiseConfig, master_seed: int, atom_index: int) -> AtomInstance:
    rng = child_rng(master_seed, "atom", atom_index)
    z_detuning, z_amplitude = rng.standard_normal(2)
    return AtomInstance(
        static_detuning=config.static_detuning_sigma * z_detuning,
        amplitude_factor=1.0 + config.amplitude_inhomogeneity * z_amplitude,
    )


def sample_ensemble(config: NoiseConfig, master_seed: int, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Static detunings and amplitude factors for atoms ``0..size-1``."""
    atoms = [sample_atom(config, master_seed, i) for i in range(size)]
    detunings = np.array([a.static_detuning for a in atoms])
    amplitudes = np.array([a.amplitude_factor for a in atoms])
    return detunings, amplitudes


# -- channels -------------------------------------------------------------------

def dephase(state: BlochState, dt: float, t2: float) -> BlochState:
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if math.isinf(t2):
        return state
    f = math.exp(-dt / t2)
    return BlochState(state.bx * f, state.by * f, state.bz)


def depolarize(state: BlochState, p: float) -> BlochState:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return BlochState.from_array((1.0 - p) * state.as_array())


def isotropic_decay(state: BlochState, dt: float, t2: float) -> BlochState:
    """Shrink the Bloch vector by ``exp(-dt/t2)`` in every direction."""
    if math.isinf(t2):
        return state
    return depolarize(state, 1.0 - math.exp(-dt / t2))


def scattering_probability(rate: float, dt: float) -> float:
    return -math.expm1(-rate * dt)


def scattering_step(
    state: BlochState,
    dt: float,
    rate: float,
    rng: Optional[np.random.Generator] = None,
    mode: str = "channel",
) -> BlochState:
    """Depolarizing scattering over ``dt``.

    ``mode="channel"`` returns the ensemble mean; ``mode="trajectory"`` fully
    depolarizes this trajectory with the event probability.
    """
    p = scattering_probability(rate, dt)
    if mode == "channel":
        return depolarize(state, p)
    if mode == "trajectory":
        if rng is None:
            raise ValueError("trajectory mode needs an rng")
        return BlochState.mixed() if rng.random() < p else state
    raise ValueError(f"unknown scattering mode {mode!r}")


def effective_pulse(
    pulse: PulseSpec,
    atom: AtomInstance,
    config: NoiseConfig,
    rng: Optional[np.random.Generator] = None,
) -> PulseSpec:
    """Apply systematic and per-atom errors to a nominal pulse.

    The duration offset is defined per pi/2 pulse and scales with the nominal
    rotation angle, so pi pulses get twice the offset.
    """
    angle_units = pulse.nominal_angle / (math.pi / 2)
    duration = pulse.duration + config.duration_offset * angle_units
    if duration < 0:
        warnings.warn(f"effective duration {duration:g} s clamped to 0", ClampedDurationWarning)
        duration = 0.0
    jitter = 0.0
    if config.amplitude_noise_sigma > 0:
        if rng is None:
            raise ValueError("amplitude noise requires an rng")
        jitter = config.amplitude_noise_sigma * rng.standard_normal()
    rabi = pulse.rabi_rate * atom.amplitude_factor * (1.0 + jitter)
    return PulseSpec(
        rabi_rate=max(rabi, 0.0),
        phase=pulse.phase,
        duration=duration,
        detuning=pulse.detuning + config.systematic_detuning + atom.static_detuning,
    )


def transfer_probability(rabi_rate, duration, detuning):
    """Population moved by a square pulse starting in one basis state."""
    rabi_rate = np.asarray(rabi_rate, dtype=float)
    detuning = np.asarray(detuning, dtype=float)
    generalized = np.hypot(rabi_rate, detuning)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(generalized > 0, rabi_rate**2 / generalized**2, 0.0)
    return ratio * np.sin(0.5 * generalized * duration) ** 2


def readout_flip(p_expected, flip_prob: float):
    """Symmetric bit-flip on the measured outcome probability."""
    return flip_prob + (1.0 - 2.0 * flip_prob) * np.asarray(p_expected)
