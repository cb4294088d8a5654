"""
Exact single-qubit dynamics on the Bloch sphere.

Sign convention used throughout the package::

    H = (Omega/2) (cos(phi) sx + sin(phi) sy) - (delta/2) sz,   U = exp(-i H t)

with ``delta = omega_drive - omega_qubit``. On the Bloch sphere this is a
right-handed rotation about ``(Omega cos(phi), Omega sin(phi), -delta)`` by
the angle ``sqrt(Omega**2 + delta**2) * t``. ``bz = +1`` is qubit state |0>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]], dtype=np.complex128)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
IDENTITY_2 = np.eye(2, dtype=np.complex128)

_NORM_SLACK = 1e-12


@dataclass(frozen=True)
class BlochState:
    """Single-qubit state as a Bloch vector. Mixed states have length < 1."""

    bx: float
    by: float
    bz: float

    def __post_init__(self):
        if self.bx**2 + self.by**2 + self.bz**2 > 1.0 + _NORM_SLACK:
            raise ValueError(f"Bloch vector {self.as_array()} lies outside the unit ball")

    @classmethod
    def from_array(cls, vec) -> "BlochState":
        vec = np.asarray(vec, dtype=float)
        return cls(float(vec[0]), float(vec[1]), float(vec[2]))

    @classmethod
    def ground(cls) -> "BlochState":
        return cls(0.0, 0.0, 1.0)

    @classmethod
    def mixed(cls) -> "BlochState":
        return cls(0.0, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.bx, self.by, self.bz])

    @property
    def purity_radius(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def density_matrix(self) -> np.ndarray:
        return 0.5 * (IDENTITY_2 + self.bx * SIGMA_X + self.by * SIGMA_Y + self.bz * SIGMA_Z)


@dataclass(frozen=True)
class PulseSpec:
    """Square microwave pulse in the rotating frame.

    rabi_rate and detuning are angular frequencies (rad/s), duration is in
    seconds and phase is the equatorial drive-axis angle in radians.
    """

    rabi_rate: float
    phase: float
    duration: float
    detuning: float = 0.0

    def __post_init__(self):
        if self.rabi_rate < 0:
            raise ValueError("rabi_rate must be non-negative")
        if self.duration < 0:
            raise ValueError("duration must be non-negative")

    @property
    def nominal_angle(self) -> float:
        return self.rabi_rate * self.duration


@dataclass(frozen=True)
class AffineBlochMap:
    """Single-qubit channel acting as ``b -> linear @ b + offset``."""

    linear: np.ndarray
    offset: np.ndarray

    @classmethod
    def identity(cls) -> "AffineBlochMap":
        return cls(np.eye(3), np.zeros(3))

    def compose(self, first: "AffineBlochMap") -> "AffineBlochMap":
        """Return the map that applies ``first`` and then ``self``."""
        return AffineBlochMap(self.linear @ first.linear, self.linear @ first.offset + self.offset)

    def __matmul__(self, other: "AffineBlochMap") -> "AffineBlochMap":
        return self.compose(other)

    def is_orthogonal(self, atol: float = 1e-12) -> bool:
        m = self.linear
        return bool(
            np.linalg.norm(m.T @ m - np.eye(3)) < atol
            and abs(np.linalg.det(m) - 1.0) < atol
            and np.allclose(self.offset, 0.0)
        )


def axis_angle_matrix(axis, angle: float) -> np.ndarray:
    """Right-handed rotation matrix about a unit ``axis`` (Rodrigues formula)."""
    nx, ny, nz = axis
    c = np.cos(angle)
    s = np.sin(angle)
    t = 1.0 - c
    return np.array(
        [
            [c + nx * nx * t, nx * ny * t - nz * s, nx * nz * t + ny * s],
            [ny * nx * t + nz * s, c + ny * ny * t, ny * nz * t - nx * s],
            [nz * nx * t - ny * s, nz * ny * t + nx * s, c + nz * nz * t],
        ]
    )


def rotation_map(phase: float, angle: float) -> AffineBlochMap:
    """Resonant rotation by ``angle`` about the equatorial axis at ``phase``.

    Equivalent to conjugation by ``exp(-i angle/2 (cos(phase) sx + sin(phase) sy))``.
    """
    axis = (np.cos(phase), np.sin(phase), 0.0)
    return AffineBlochMap(axis_angle_matrix(axis, angle), np.zeros(3))


def detuned_rotation_map(pulse: PulseSpec) -> AffineBlochMap:
    """Generalized Rabi rotation of a square pulse with detuning."""
    omega = pulse.rabi_rate
    delta = pulse.detuning
    generalized = np.hypot(omega, delta)
    if generalized == 0.0 or pulse.duration == 0.0:
        return AffineBlochMap.identity()
    axis = (
        omega * np.cos(pulse.phase) / generalized,
        omega * np.sin(pulse.phase) / generalized,
        -delta / generalized,
    )
    return AffineBlochMap(axis_angle_matrix(axis, generalized * pulse.duration), np.zeros(3))


def free_precession_map(detuning: float, duration: float) -> AffineBlochMap:
    """Idle evolution in the rotating frame: z-rotation by ``-detuning * duration``."""
    return AffineBlochMap(axis_angle_matrix((0.0, 0.0, 1.0), -detuning * duration), np.zeros(3))


def apply(bloch_map: AffineBlochMap, state: BlochState) -> BlochState:
    return BlochState.from_array(bloch_map.linear @ state.as_array() + bloch_map.offset)


def z_populations(state: BlochState) -> tuple[float, float]:
    """Probabilities of reading out |0> and |1>."""
    p0 = 0.5 * (1.0 + state.bz)
    return p0, 1.0 - p0


def state_fidelity(state: BlochState, ideal: BlochState) -> float:
    """Overlap ``tr(rho_ideal rho)`` with a pure ideal state."""
    ideal_vec = ideal.as_array()
    if abs(np.linalg.norm(ideal_vec) - 1.0) > 1e-9:
        raise ValueError("ideal state must be pure (unit Bloch vector)")
    return float(0.5 * (1.0 + state.as_array() @ ideal_vec))


def unitary_to_bloch_matrix(unitary: np.ndarray) -> np.ndarray:
    """Linear Bloch map ``R_ij = tr(s_i U s_j U^dag) / 2`` of a 2x2 unitary."""
    paulis = (SIGMA_X, SIGMA_Y, SIGMA_Z)
    out = np.empty((3, 3))
    for i, si in enumerate(paulis):
        for j, sj in enumerate(paulis):
            out[i, j] = 0.5 * np.real(np.trace(si @ unitary @ sj @ unitary.conj().T))
    return out
