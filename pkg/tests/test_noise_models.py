"""Decoherence channels, ensemble disorder and pulse error application."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbench.noise_models import (
    AtomInstance,
    ClampedDurationWarning,
    NoiseConfig,
    dephase,
    depolarize,
    effective_pulse,
    isotropic_decay,
    readout_flip,
    sample_atom,
    sample_ensemble,
    scattering_probability,
    scattering_step,
    static_sigma_from_t2_star,
    transfer_probability,
)
from rbench.seeding import child_rng
from rbench.spin_core import BlochState, PulseSpec, apply, detuned_rotation_map

ball = st.tuples(*[st.floats(-1.0, 1.0)] * 3).filter(lambda v: sum(x * x for x in v) <= 1.0)
times = st.floats(0.0, 2.0)


def test_dephase_values():
    s = dephase(BlochState(0.6, 0.0, 0.8), 0.1, 0.2)
    assert s.bx == pytest.approx(0.6 * math.exp(-0.5))
    assert s.bz == 0.8
    assert dephase(BlochState(0.6, 0.0, 0.8), 5.0, math.inf) == BlochState(0.6, 0.0, 0.8)


def test_isotropic_decay_values():
    s = isotropic_decay(BlochState(0.6, 0.0, 0.8), 0.28, 0.28)
    assert s.as_array() == pytest.approx(np.array([0.6, 0.0, 0.8]) / math.e)


def test_depolarize_bounds():
    assert depolarize(BlochState.ground(), 1.0) == BlochState.mixed()
    with pytest.raises(ValueError):
        depolarize(BlochState.ground(), 1.5)
    with pytest.raises(ValueError):
        dephase(BlochState.ground(), -1.0, 1.0)


@settings(max_examples=80, deadline=None)
@given(a=ball, b=ball, t=times, t2=st.floats(1e-3, 10.0), p=st.floats(0.0, 1.0))
def test_channels_are_contractive(a, b, t, t2, p):
    sa, sb = BlochState(*a), BlochState(*b)
    d0 = np.linalg.norm(sa.as_array() - sb.as_array())
    for ch in (
        lambda s: dephase(s, t, t2),
        lambda s: isotropic_decay(s, t, t2),
        lambda s: depolarize(s, p),
        lambda s: scattering_step(s, t, 1.0 / t2),
    ):
        ca, cb = ch(sa), ch(sb)
        assert ca.purity_radius <= sa.purity_radius + 1e-12
        assert np.linalg.norm(ca.as_array() - cb.as_array()) <= d0 + 1e-12


@settings(max_examples=60, deadline=None)
@given(a=ball, t1=times, t2=times, T2=st.floats(1e-3, 10.0))
def test_semigroup(a, t1, t2, T2):
    s = BlochState(*a)
    for ch in (dephase, isotropic_decay):
        once = ch(s, t1 + t2, T2).as_array()
        twice = ch(ch(s, t1, T2), t2, T2).as_array()
        assert np.allclose(once, twice, atol=1e-12)
    once = scattering_step(s, t1 + t2, 1.0 / T2).as_array()
    twice = scattering_step(scattering_step(s, t1, 1.0 / T2), t2, 1.0 / T2).as_array()
    assert np.allclose(once, twice, atol=1e-12)


def test_ramsey_gaussian_identity():
    """Averaging a precession phase over gaussian disorder gives a gaussian envelope."""
    t2_star = 25e-3
    cfg = NoiseConfig(static_detuning_sigma=static_sigma_from_t2_star(t2_star))
    det, _ = sample_ensemble(cfg, master_seed=3, size=40000)
    for t in (5e-3, 15e-3, 25e-3, 40e-3):
        got = np.cos(det * t).mean()
        want = math.exp(-(t**2) / (2 * t2_star**2))
        assert got == pytest.approx(want, abs=4.0 / math.sqrt(det.size))


def test_scattering_trajectory_matches_channel():
    s = BlochState(0.0, 0.6, 0.8)
    rate, dt = 0.2, 0.5
    rng = child_rng(0, "scatter")
    n = 20000
    mean = sum(scattering_step(s, dt, rate, rng, mode="trajectory").as_array() for _ in range(n)) / n
    chan = scattering_step(s, dt, rate).as_array()
    p = scattering_probability(rate, dt)
    tol = 4.0 * math.sqrt(p * (1 - p) / n)
    assert np.allclose(mean, chan, atol=tol)
    with pytest.raises(ValueError):
        scattering_step(s, dt, rate, mode="trajectory")
    with pytest.raises(ValueError):
        scattering_step(s, dt, rate, mode="bogus")


def test_scattering_probability_small_rate():
    assert scattering_probability(0.2, 94e-6) == pytest.approx(0.2 * 94e-6, rel=1e-4)


def test_effective_pulse_offsets():
    cfg = NoiseConfig(duration_offset=1e-6, systematic_detuning=50.0)
    atom = AtomInstance(static_detuning=3.0, amplitude_factor=1.01)
    half = PulseSpec(math.pi / 2 / 31.05e-6, 0.3, 31.05e-6)
    full = PulseSpec(half.rabi_rate, 0.3, 62.1e-6)
    assert effective_pulse(half, atom, cfg).duration == pytest.approx(32.05e-6)
    assert effective_pulse(full, atom, cfg).duration == pytest.approx(64.1e-6)
    eff = effective_pulse(half, atom, cfg)
    assert eff.detuning == 53.0
    assert eff.rabi_rate == pytest.approx(half.rabi_rate * 1.01)


def test_effective_pulse_clamps_negative_duration():
    cfg = NoiseConfig(duration_offset=-40e-6)
    half = PulseSpec(math.pi / 2 / 31.05e-6, 0.0, 31.05e-6)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = effective_pulse(half, AtomInstance(), cfg)
    assert out.duration == 0.0
    assert any(issubclass(w.category, ClampedDurationWarning) for w in caught)


def test_amplitude_noise_needs_rng():
    cfg = NoiseConfig(amplitude_noise_sigma=0.01)
    half = PulseSpec(1e4, 0.0, 1e-4)
    with pytest.raises(ValueError):
        effective_pulse(half, AtomInstance(), cfg)
    out = effective_pulse(half, AtomInstance(), cfg, rng=child_rng(0, "amp"))
    assert out.rabi_rate != half.rabi_rate


@pytest.mark.parametrize("detuning", [0.0, 2 * math.pi * 300.0, -2e4])
def test_transfer_probability_matches_rotation(detuning):
    rabi, t = math.pi / 62.1e-6, 62.1e-6
    bz = apply(detuned_rotation_map(PulseSpec(rabi, 0.0, t, detuning)), BlochState.ground()).bz
    assert transfer_probability(rabi, t, detuning) == pytest.approx(0.5 * (1 - bz), abs=1e-14)


def test_readout_flip():
    assert readout_flip(1.0, 0.009) == pytest.approx(0.991)
    assert readout_flip(0.0, 0.009) == pytest.approx(0.009)
    assert readout_flip(0.5, 0.3) == pytest.approx(0.5)


def test_atoms_are_keyed_by_index():
    cfg = NoiseConfig(static_detuning_sigma=40.0, amplitude_inhomogeneity=0.01)
    det_small, amp_small = sample_ensemble(cfg, 7, 10)
    det_big, amp_big = sample_ensemble(cfg, 7, 50)
    assert np.array_equal(det_small, det_big[:10])
    assert np.array_equal(amp_small, amp_big[:10])
    assert sample_atom(cfg, 7, 3) == AtomInstance(det_small[3], amp_small[3])


def test_noise_config_validation():
    with pytest.raises(ValueError):
        NoiseConfig(t2=0.0)
    with pytest.raises(ValueError):
        NoiseConfig(t2_model="amplitude")
    with pytest.raises(ValueError):
        NoiseConfig(spam_flip_prob=-0.1)
    with pytest.raises(ValueError):
        NoiseConfig(gate_depolarization=2.0)


def test_rates_follow_model():
    iso = NoiseConfig(t2=0.28, depolarizing_rate=0.2)
    assert iso.isotropic_rate == pytest.approx(1 / 0.28 + 0.2)
    assert iso.dephasing_rate == 0.0
    deph = iso.replace(t2_model="dephasing")
    assert deph.isotropic_rate == pytest.approx(0.2)
    assert deph.dephasing_rate == pytest.approx(1 / 0.28)


def test_preset_values():
    cfg = NoiseConfig.paper_defaults()
    assert cfg.t2 == 0.28
    assert cfg.static_detuning_sigma == pytest.approx(40.0)
    assert cfg.spam_flip_prob == 0.009
    assert not NoiseConfig.noiseless().mapping_pulses
