"""Bloch-sphere dynamics against matrix exponentials and direct ODE integration."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from rbench.spin_core import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    AffineBlochMap,
    BlochState,
    PulseSpec,
    apply,
    detuned_rotation_map,
    free_precession_map,
    rotation_map,
    state_fidelity,
    unitary_to_bloch_matrix,
    z_populations,
)


def hamiltonian(rabi, phase, detuning):
    return 0.5 * rabi * (math.cos(phase) * SIGMA_X + math.sin(phase) * SIGMA_Y) - 0.5 * detuning * SIGMA_Z


def bloch_of(psi):
    rho = np.outer(psi, psi.conj())
    return np.real([np.trace(rho @ s) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)])


def test_basis_conventions():
    assert z_populations(BlochState.ground()) == (1.0, 0.0)
    rho = BlochState(0.0, 0.0, 1.0).density_matrix()
    assert np.allclose(rho, [[1, 0], [0, 0]])


def test_x_half_pi_takes_ground_to_minus_y():
    out = apply(rotation_map(0.0, math.pi / 2), BlochState.ground())
    assert np.allclose(out.as_array(), [0.0, -1.0, 0.0], atol=1e-15)


def test_y_half_pi_takes_ground_to_plus_x():
    out = apply(rotation_map(math.pi / 2, math.pi / 2), BlochState.ground())
    assert np.allclose(out.as_array(), [1.0, 0.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("phase", [0.0, 0.3, math.pi / 2, 2.0, math.pi, 5.1])
@pytest.mark.parametrize("angle", [math.pi / 2, math.pi, 0.7])
def test_rotation_matches_unitary_oracle(phase, angle):
    u = expm(-1j * 0.5 * angle * (math.cos(phase) * SIGMA_X + math.sin(phase) * SIGMA_Y))
    assert np.allclose(rotation_map(phase, angle).linear, unitary_to_bloch_matrix(u), atol=1e-13)


@pytest.mark.parametrize(
    "rabi,phase,detuning,duration",
    [
        (2 * math.pi * 8e3, 0.0, 0.0, 31.05e-6),
        (2 * math.pi * 8e3, 1.1, 2 * math.pi * 150.0, 62.1e-6),
        (5e4, 4.0, -3e4, 1e-4),
        (0.0, 0.0, 2 * math.pi * 1e3, 1e-3),
    ],
)
def test_detuned_rotation_matches_ode(rabi, phase, detuning, duration):
    H = hamiltonian(rabi, phase, detuning)
    psi0 = np.array([0.6, 0.8j], dtype=complex)

    def rhs(t, y):
        psi = y[:2] + 1j * y[2:]
        d = -1j * (H @ psi)
        return np.concatenate([d.real, d.imag])

    sol = solve_ivp(rhs, (0.0, duration), np.concatenate([psi0.real, psi0.imag]),
                    method="DOP853", rtol=1e-13, atol=1e-13)
    psi_t = sol.y[:2, -1] + 1j * sol.y[2:, -1]
    pulse = PulseSpec(rabi, phase, duration, detuning)
    got = apply(detuned_rotation_map(pulse), BlochState.from_array(bloch_of(psi0)))
    assert np.allclose(got.as_array(), bloch_of(psi_t), atol=1e-9)


def test_detuned_rotation_matches_expm():
    pulse = PulseSpec(3e4, 0.4, 7e-5, -1.2e4)
    u = expm(-1j * hamiltonian(pulse.rabi_rate, pulse.phase, pulse.detuning) * pulse.duration)
    assert np.allclose(detuned_rotation_map(pulse).linear, unitary_to_bloch_matrix(u), atol=1e-12)


def test_free_precession_is_zero_rabi_pulse():
    det, t = 2 * math.pi * 1e3, 3.3e-4
    a = free_precession_map(det, t).linear
    b = detuned_rotation_map(PulseSpec(0.0, 0.0, t, det)).linear
    u = expm(-1j * hamiltonian(0.0, 0.0, det) * t)
    assert np.allclose(a, unitary_to_bloch_matrix(u), atol=1e-13)
    # an undriven pulse is free precession
    assert np.allclose(a, b, atol=1e-13)


def test_state_validation():
    with pytest.raises(ValueError):
        BlochState(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        PulseSpec(-1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        PulseSpec(1.0, 0.0, -1.0)
    with pytest.raises(ValueError):
        state_fidelity(BlochState.ground(), BlochState(0.0, 0.0, 0.5))


def test_fidelity_values():
    g = BlochState.ground()
    assert state_fidelity(g, g) == 1.0
    assert state_fidelity(BlochState(0.0, 0.0, -1.0), g) == 0.0
    assert state_fidelity(BlochState.mixed(), g) == 0.5


def test_composition_order():
    a = rotation_map(0.0, math.pi / 2)
    b = rotation_map(math.pi / 2, math.pi / 2)
    s = BlochState.ground()
    assert np.allclose(apply(b @ a, s).as_array(), apply(b, apply(a, s)).as_array())


angles = st.floats(-10.0, 10.0, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(phase=angles, angle=angles, detuning=st.floats(-1e5, 1e5), rabi=st.floats(0.0, 1e5))
def test_rotations_are_proper_orthogonal(phase, angle, detuning, rabi):
    assert rotation_map(phase, angle).is_orthogonal(1e-10)
    pulse = PulseSpec(rabi, phase, 1e-4, detuning)
    assert detuned_rotation_map(pulse).is_orthogonal(1e-10)


@settings(max_examples=60, deadline=None)
@given(phase=angles, a=angles, b=angles)
def test_same_axis_rotations_add(phase, a, b):
    lhs = rotation_map(phase, a) @ rotation_map(phase, b)
    assert np.allclose(lhs.linear, rotation_map(phase, a + b).linear, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(
    vec=st.tuples(*[st.floats(-1.0, 1.0)] * 3).filter(lambda v: sum(x * x for x in v) <= 1.0),
    phase=angles,
    angle=angles,
)
def test_rotation_preserves_length(vec, phase, angle):
    s = BlochState(*vec)
    out = apply(rotation_map(phase, angle), s)
    assert out.purity_radius == pytest.approx(s.purity_radius, abs=1e-12)


def test_identity_map():
    s = BlochState(0.1, -0.2, 0.3)
    assert apply(AffineBlochMap.identity(), s) == s
