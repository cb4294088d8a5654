"""Fitting layer: round trips, error calibration and degenerate inputs."""

import math

import numpy as np
import pytest
from sklearn.base import clone

from rbench.analysis import (
    ExponentialDecayModel,
    GaussianPeakModel,
    RBDecayModel,
    bootstrap_ci,
    error_per_gate,
    fit_damped_sinusoid,
    fit_exponential,
    fit_gaussian,
    fit_rb_decay,
    fit_sinusoid,
    rb_decay_curve,
)
from rbench.rb_sequences import DEFAULT_TRUNCATIONS

L = np.array(DEFAULT_TRUNCATIONS, dtype=float)


def test_rb_round_trip_reference_values():
    y = rb_decay_curve(L, 1.8e-2, 2.7e-4)
    fit = fit_rb_decay(L, y)
    assert abs(fit.d_if - 1.8e-2) < 1e-10
    assert abs(fit.d - 2.7e-4) < 1e-10
    assert fit.e_g == pytest.approx(1.35e-4, abs=1e-10)


def test_rb_round_trip_random_parameters():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        d = 10 ** rng.uniform(-5, -2)
        d_if = rng.uniform(0.0, 0.1)
        fit = fit_rb_decay(L, rb_decay_curve(L, d_if, d))
        worst = max(worst, abs(fit.d - d), abs(fit.d_if - d_if))
        assert fit.e_g == fit.d / 2
    assert worst < 1e-10


def test_rb_constant_data():
    fit = fit_rb_decay(L, np.ones_like(L))
    assert fit.d == pytest.approx(0.0, abs=1e-9)
    assert fit.d_if == pytest.approx(0.0, abs=1e-9)


def test_rb_error_calibration():
    """Parameters land within 3 reported standard errors in >= 93 of 100 noisy repeats."""
    rng = np.random.default_rng(1)
    sigma = 0.005
    truth = rb_decay_curve(L, 1.8e-2, 2.7e-4)
    inside = 0
    for _ in range(100):
        y = truth + sigma * rng.standard_normal(L.size)
        fit = fit_rb_decay(L, np.clip(y, 0, 1), np.full(L.size, sigma))
        if abs(fit.d - 2.7e-4) < 3 * fit.d_err and abs(fit.d_if - 1.8e-2) < 3 * fit.d_if_err:
            inside += 1
    assert inside >= 93


def test_rb_weight_rescaling_invariance():
    rng = np.random.default_rng(2)
    y = rb_decay_curve(L, 0.02, 5e-4) + 0.003 * rng.standard_normal(L.size)
    sem = 0.002 + 0.002 * rng.random(L.size)
    a = fit_rb_decay(L, y, sem)
    b = fit_rb_decay(L, y, 37.0 * sem)
    assert a.d == pytest.approx(b.d, rel=1e-8)
    assert a.d_if == pytest.approx(b.d_if, rel=1e-8)
    # the covariance is rescaled by chi2/dof, so it is invariant too
    assert np.allclose(a.covariance, b.covariance, rtol=1e-6)


def test_unweighted_fit_ignores_errors():
    y = rb_decay_curve(L, 0.02, 5e-4) + 1e-3 * np.sin(L)
    a = fit_rb_decay(L, y, np.linspace(1e-3, 1e-2, L.size), weighted=False)
    b = fit_rb_decay(L, y)
    assert a.d == pytest.approx(b.d, rel=1e-10)


def test_rb_preconditions():
    with pytest.raises(ValueError):
        fit_rb_decay([1, 1, 2], [0.9, 0.9, 0.8])
    with pytest.raises(ValueError):
        fit_rb_decay([1, 2, 3], [0.9, 1.2, 0.8])


def test_error_per_gate():
    assert error_per_gate(2.7e-4) == pytest.approx(1.35e-4)
    assert f"{error_per_gate(2.7e-4):.1e}" == "1.4e-04"
    assert error_per_gate(0.0) == 0.0
    assert error_per_gate(1.0) == 0.5
    with pytest.raises(ValueError):
        error_per_gate(1.5)


def test_decay_fit_serializes():
    d = fit_rb_decay(L, rb_decay_curve(L, 0.02, 3e-4)).to_dict()
    assert set(d) >= {"model", "params", "param_errors", "covariance", "chi2", "dof", "n_points"}
    assert d["params"]["e_g"] == d["params"]["d"] / 2


# -- gaussian --------------------------------------------------------------------

def gaussian(x, c, a, x0, w):
    return c + a * np.exp(-((x - x0) ** 2) / (2 * w * w))


def test_gaussian_round_trip():
    x = np.linspace(-300, 300, 21)
    fit = fit_gaussian(x, gaussian(x, 0.45, 0.5, -10.0, 150.0))
    for k, v in dict(offset=0.45, amplitude=0.5, center=-10.0, width=150.0).items():
        assert fit[k] == pytest.approx(v, abs=1e-9 * max(1.0, abs(v)))


def test_gaussian_noisy_width():
    rng = np.random.default_rng(3)
    x = np.linspace(-400, 400, 25)
    y = gaussian(x, 0.5, 0.45, 0.0, 150.0) + 0.005 * rng.standard_normal(x.size)
    fit = fit_gaussian(x, y, np.full(x.size, 0.005))
    assert fit["width"] == pytest.approx(150.0, rel=0.05)


def test_gaussian_shift_equivariance():
    rng = np.random.default_rng(4)
    x = np.linspace(-2.5, 2.5, 21)
    y = gaussian(x, 0.5, 0.4, 0.1, 1.1) + 0.01 * rng.standard_normal(x.size)
    a = fit_gaussian(x, y)
    b = fit_gaussian(x + 7.25, y)
    assert b["center"] - a["center"] == pytest.approx(7.25, abs=1e-9)
    assert b["width"] == pytest.approx(a["width"], rel=1e-9)


def test_gaussian_flat_data_flagged():
    x = np.linspace(-1, 1, 11)
    fit = fit_gaussian(x, np.full(x.size, 0.7))
    assert abs(fit["amplitude"]) < 1e-6
    assert "width_unidentifiable" in fit.flags


def test_gaussian_needs_four_points():
    with pytest.raises(ValueError):
        fit_gaussian([0, 1, 2], [1, 2, 1])


# -- exponential and sinusoids ------------------------------------------------------

def test_exponential_round_trip():
    t = np.linspace(0, 1.0, 12)
    fit = fit_exponential(t, 0.48 * np.exp(-t / 0.28) + 0.01)
    assert fit["tau"] == pytest.approx(0.28, abs=1e-9)
    fixed = fit_exponential(t, 0.48 * np.exp(-t / 0.28) + 0.5, offset=0.5)
    assert fixed["tau"] == pytest.approx(0.28, abs=1e-9)
    assert "offset" not in fixed.params


def test_sinusoid_frequency_with_noise():
    rng = np.random.default_rng(5)
    t = np.arange(0, 13.5e-3, 1e-4)
    y = 0.5 + 0.45 * np.cos(2 * np.pi * 1000.0 * t + 0.3) + 0.01 * rng.standard_normal(t.size)
    fit = fit_sinusoid(t, y, np.full(t.size, 0.01))
    assert abs(fit["frequency"] - 1000.0) < 2.0
    assert fit.param_errors["frequency"] < 2.0
    assert fit.flags == []


def test_sinusoid_zero_amplitude_flagged():
    t = np.linspace(0, 1e-2, 40)
    fit = fit_sinusoid(t, np.full(t.size, 0.5))
    assert abs(fit["amplitude"]) < 1e-6
    assert "frequency_unidentifiable" in fit.flags


def test_sinusoid_undersampling_flagged():
    t = np.arange(0, 0.02, 1e-3)
    y = 0.5 + 0.4 * np.cos(2 * np.pi * 700.0 * t)
    assert "undersampled" in fit_sinusoid(t, y, frequency_guess=700.0).flags


@pytest.mark.parametrize("envelope", ["gaussian", "exponential"])
def test_damped_sinusoid_round_trip(envelope):
    t = np.arange(0, 40e-3, 1e-4)
    env = np.exp(-(t**2) / (2 * 0.025**2)) if envelope == "gaussian" else np.exp(-t / 0.025)
    y = 0.5 + 0.45 * env * np.cos(2 * np.pi * 1000.0 * t + 1.0)
    fit = fit_damped_sinusoid(t, y, envelope=envelope, frequency_guess=1000.0)
    assert fit["tau"] == pytest.approx(0.025, rel=1e-7)
    assert fit["frequency"] == pytest.approx(1000.0, rel=1e-9)


# -- estimator contract ------------------------------------------------------------

def test_estimators_follow_sklearn_contract():
    x = L.reshape(-1, 1)
    y = rb_decay_curve(L, 0.02, 4e-4)
    est = RBDecayModel()
    assert clone(est).get_params() == {"weighted": True}
    est.fit(x, y)
    assert est.score(x, y) == pytest.approx(1.0)
    assert np.allclose(est.predict(x), y, atol=1e-12)
    assert ExponentialDecayModel(offset=0.5).get_params()["offset"] == 0.5
    with pytest.raises(Exception):
        GaussianPeakModel().predict(x)


# -- bootstrap -----------------------------------------------------------------------

def _synthetic_rb(seed, n_seq=32, sigma=0.004):
    rng = np.random.default_rng(seed)
    truth = rb_decay_curve(L, 1.8e-2, 2.7e-4)
    lengths, fids, ids = [], [], []
    for s in range(n_seq):
        lengths.extend(L)
        fids.extend(np.clip(truth + sigma * rng.standard_normal(L.size), 0, 1))
        ids.extend([s] * L.size)
    return np.array(lengths), np.array(fids), ids


def test_bootstrap_deterministic_data_zero_width():
    lengths = np.tile(L, 4)
    fids = np.tile(rb_decay_curve(L, 0.02, 3e-4), 4)
    ids = np.repeat(np.arange(4), L.size)
    res = bootstrap_ci((lengths, fids, ids), n_resamples=100)
    lo, hi = res.intervals["d"]
    assert hi - lo < 1e-12


def test_bootstrap_matches_least_squares_error():
    lengths, fids, ids = _synthetic_rb(6)
    table = fids.reshape(32, L.size)
    mean = table.mean(axis=0)
    sem = table.std(axis=0, ddof=1) / math.sqrt(32)
    ls = fit_rb_decay(L, mean, sem)
    boot = bootstrap_ci((lengths, fids, ids), n_resamples=400, seed=1)
    assert boot.std["d"] == pytest.approx(ls.d_err, rel=0.5)


def test_bootstrap_converges():
    data = _synthetic_rb(7)
    a = bootstrap_ci(data, n_resamples=500, seed=2)
    b = bootstrap_ci(data, n_resamples=1000, seed=2)
    for end in (0, 1):
        assert b.intervals["d"][end] == pytest.approx(a.intervals["d"][end], rel=0.1)


def test_bootstrap_pairs_and_validation():
    rng = np.random.default_rng(8)
    t = np.linspace(0, 1, 15)
    y = 0.48 * np.exp(-t / 0.28) + 0.01 * rng.standard_normal(t.size)
    res = bootstrap_ci((t, y), kind="exponential", n_resamples=100, seed=3)
    lo, hi = res.intervals["tau"]
    assert lo < 0.28 < hi
    with pytest.raises(ValueError):
        bootstrap_ci((t, y), kind="exponential", n_resamples=50)
    with pytest.raises(ValueError):
        bootstrap_ci((t, y), kind="polynomial")
