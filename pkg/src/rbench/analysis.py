"""
Curve fitting for benchmarking decays and calibration scans.

Each model is a scikit-learn style regressor: ``fit(X, y, yerr=None)``
followed by ``predict(X)``; fitted parameters live in ``params_``. The
functional helpers (:func:`fit_rb_decay`, :func:`fit_gaussian`, ...) wrap the
estimators and return plain result records that serialize to JSON.

All models are solved with Levenberg-Marquardt on analytic Jacobians.
Parameters with a restricted range are optimized in a transformed space
(logit for probabilities, log for widths and decay times); covariances are
reported for the natural parameters and scaled by the reduced chi-square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, column_or_1d

_PROB_EPS = 1e-12


def _logit(p):
    p = np.clip(p, _PROB_EPS, 1.0 - _PROB_EPS)
    return math.log(p / (1.0 - p))


def _expit(u):
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


def _as_1d(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 2 and X.shape[1] == 1:
        X = X[:, 0]
    return column_or_1d(X)


def _weights(yerr, n):
    """Inverse-variance weights.

    All-zero errors give unit weights. Otherwise errors are floored at 1e-3 of
    the median positive error so a single exact point cannot dominate.
    """
    if yerr is None:
        return np.ones(n)
    yerr = np.abs(np.asarray(yerr, dtype=float))
    if yerr.shape != (n,):
        raise ValueError("yerr must match y in length")
    positive = yerr[yerr > 0]
    if positive.size == 0:
        return np.ones(n)
    yerr = np.maximum(yerr, 1e-3 * np.median(positive))
    return 1.0 / yerr**2


class LeastSquaresModel(RegressorMixin, BaseEstimator):
    """Base class: subclasses define the natural parameters and their transforms."""

    param_names: tuple[str, ...] = ()
    min_points = 3

    # -- subclass hooks ---------------------------------------------------------
    def _evaluate(self, x, theta):
        raise NotImplementedError

    def _jacobian(self, x, theta):
        raise NotImplementedError

    def _initial(self, x, y, w):
        raise NotImplementedError

    def _to_internal(self, theta):
        return np.asarray(theta, dtype=float)

    def _from_internal(self, u):
        return np.asarray(u, dtype=float)

    def _dtheta_du(self, u):
        return np.ones_like(u)

    def _finalize(self, theta, cov):
        return theta, cov

    def _flags(self, x, y):
        return []

    # -- estimator API ----------------------------------------------------------
    def fit(self, X, y, yerr=None):
        X, y = check_X_y(X, y, ensure_2d=False, y_numeric=True)
        x = _as_1d(X)
        if x.size < self.min_points:
            raise ValueError(f"{type(self).__name__} needs at least {self.min_points} points")
        w = _weights(yerr, x.size) if getattr(self, "weighted", True) else np.ones(x.size)
        sw = np.sqrt(w)
        theta0 = np.asarray(self._initial(x, y, w), dtype=float)
        u0 = self._to_internal(theta0)

        def residual(u):
            return sw * (self._evaluate(x, self._from_internal(u)) - y)

        def jac(u):
            return sw[:, None] * self._jacobian(x, self._from_internal(u)) * self._dtheta_du(u)[None, :]

        n_params = u0.size
        if x.size >= n_params:
            result = least_squares(residual, u0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000 * n_params)
            u = result.x
            converged = bool(result.success) and bool(np.all(np.isfinite(u)))
            message = result.message
        else:
            u, converged, message = u0, False, "fewer points than parameters"

        theta = self._from_internal(u)
        resid = residual(u)
        chi2 = float(resid @ resid)
        dof = x.size - n_params
        jt = sw[:, None] * self._jacobian(x, theta)
        with np.errstate(all="ignore"):
            cov = np.linalg.pinv(jt.T @ jt)
            if dof > 0:
                cov = cov * (chi2 / dof)
            norms = np.linalg.norm(jt, axis=0)
            singular = bool(np.any(norms == 0)) or np.linalg.matrix_rank(jt / np.where(norms > 0, norms, 1.0)) < n_params
        if singular:
            cov = np.full((n_params, n_params), np.inf)
        theta, cov = self._finalize(theta, cov)

        self.theta_ = theta
        self.params_ = dict(zip(self.param_names, (float(t) for t in theta)))
        self.covariance_ = cov
        self.param_errors_ = dict(zip(self.param_names, (float(s) for s in np.sqrt(np.abs(np.diag(cov))))))
        self.chi2_ = chi2
        self.dof_ = dof
        self.n_points_ = int(x.size)
        self.converged_ = converged
        self.message_ = message
        self.flags_ = list(self._flags(x, y))
        if singular and "singular_jacobian" not in self.flags_:
            self.flags_.append("singular_jacobian")
        return self

    def predict(self, X):
        check_is_fitted(self, "theta_")
        return self._evaluate(_as_1d(X), self.theta_)


# -- randomized benchmarking decay -------------------------------------------------

def rb_decay_curve(lengths, d_if, d):
    """Average fidelity ``1/2 + (1/2)(1 - d_if)(1 - d)**l``."""
    lengths = np.asarray(lengths, dtype=float)
    return 0.5 + 0.5 * (1.0 - d_if) * (1.0 - d) ** lengths


class RBDecayModel(LeastSquaresModel):
    """Average sequence fidelity versus number of randomized gates."""

    param_names = ("d_if", "d")

    def __init__(self, weighted=True):
        self.weighted = weighted

    def _evaluate(self, x, theta):
        return rb_decay_curve(x, theta[0], theta[1])

    def _jacobian(self, x, theta):
        d_if, d = theta
        base = (1.0 - d) ** x
        with np.errstate(invalid="ignore", divide="ignore"):
            dd = np.where(x > 0, -0.5 * (1.0 - d_if) * x * (1.0 - d) ** np.maximum(x - 1.0, 0.0), 0.0)
        return np.column_stack([-0.5 * base, dd])

    def _to_internal(self, theta):
        return np.array([_logit(theta[0]), _logit(theta[1])])

    def _from_internal(self, u):
        return np.array([_expit(u[0]), _expit(u[1])])

    def _dtheta_du(self, u):
        p = self._from_internal(u)
        return p * (1.0 - p)

    def _initial(self, x, y, w):
        z = 2.0 * y - 1.0
        ok = z > 1e-9
        if np.count_nonzero(ok) >= 2 and np.ptp(x[ok]) > 0:
            slope, intercept = np.polyfit(x[ok], np.log(z[ok]), 1, w=np.sqrt(w[ok]) * z[ok])
            d0 = -math.expm1(min(slope, 0.0))
            a0 = -math.expm1(min(intercept, 0.0))
        else:
            d0, a0 = 1e-3, 1e-2
        return np.clip([a0, d0], _PROB_EPS, 1.0 - 1e-6)


@dataclass
class DecayFit:
    d_if: float
    d: float
    covariance: np.ndarray
    chi2: float
    dof: int
    n_points: int
    converged: bool = True
    message: str = ""

    @property
    def e_g(self) -> float:
        return error_per_gate(self.d)

    @property
    def d_if_err(self) -> float:
        return float(math.sqrt(abs(self.covariance[0, 0])))

    @property
    def d_err(self) -> float:
        return float(math.sqrt(abs(self.covariance[1, 1])))

    @property
    def e_g_err(self) -> float:
        return 0.5 * self.d_err

    def to_dict(self) -> dict:
        return {
            "model": "rb",
            "params": {"d_if": self.d_if, "d": self.d, "e_g": self.e_g},
            "param_errors": {"d_if": self.d_if_err, "d": self.d_err, "e_g": self.e_g_err},
            "covariance": _json_matrix(self.covariance),
            "chi2": self.chi2,
            "dof": self.dof,
            "n_points": self.n_points,
            "converged": self.converged,
        }


def error_per_gate(d: float) -> float:
    """Average error per randomized computational gate from its depolarization."""
    if not 0.0 <= d <= 1.0:
        raise ValueError("d must lie in [0, 1]")
    return d / 2.0


def fit_rb_decay(lengths, fidelities, sem=None, weighted: bool = True) -> DecayFit:
    lengths = np.asarray(lengths, dtype=float)
    fidelities = np.asarray(fidelities, dtype=float)
    if np.unique(lengths).size < 3:
        raise ValueError("need at least three distinct sequence lengths")
    if np.any(fidelities < -1e-12) or np.any(fidelities > 1 + 1e-12):
        raise ValueError("fidelities must lie in [0, 1]")
    model = RBDecayModel(weighted=weighted).fit(lengths, fidelities, yerr=sem)
    return DecayFit(
        d_if=model.params_["d_if"],
        d=model.params_["d"],
        covariance=model.covariance_,
        chi2=model.chi2_,
        dof=model.dof_,
        n_points=model.n_points_,
        converged=model.converged_,
        message=str(model.message_),
    )


# -- calibration scan models ----------------------------------------------------------

class GaussianPeakModel(LeastSquaresModel):
    """``offset + amplitude * exp(-(x - center)**2 / (2 width**2))``."""

    param_names = ("offset", "amplitude", "center", "width")
    min_points = 4

    def _evaluate(self, x, theta):
        c, a, x0, w = theta
        return c + a * np.exp(-((x - x0) ** 2) / (2.0 * w * w))

    def _jacobian(self, x, theta):
        c, a, x0, w = theta
        dx = x - x0
        g = np.exp(-(dx**2) / (2.0 * w * w))
        return np.column_stack([np.ones_like(x), g, a * g * dx / w**2, a * g * dx**2 / w**3])

    def _to_internal(self, theta):
        return np.array([theta[0], theta[1], theta[2], math.log(theta[3])])

    def _from_internal(self, u):
        return np.array([u[0], u[1], u[2], math.exp(u[3])])

    def _dtheta_du(self, u):
        return np.array([1.0, 1.0, 1.0, math.exp(u[3])])

    def _initial(self, x, y, w):
        span = np.ptp(x) if np.ptp(x) > 0 else 1.0
        median = np.median(y)
        if y.max() - median >= median - y.min():
            base, k = y.min(), int(np.argmax(y))
        else:
            base, k = y.max(), int(np.argmin(y))
        amp = y[k] - base
        x0 = x[k]
        height = np.abs(y - base)
        if amp != 0 and height.sum() > 0:
            width = math.sqrt(float(np.sum(height * (x - x0) ** 2) / height.sum()))
        else:
            width = span / 4
        width = min(max(width, span / (4 * x.size)), span)
        return np.array([base, amp, x0, width])

    def _flags(self, x, y):
        a = self.params_["amplitude"]
        err = self.param_errors_["amplitude"]
        scale = max(np.ptp(y), abs(np.mean(y)), 1e-300)
        if abs(a) <= 1e-9 * scale or not np.isfinite(err) or abs(a) < 2 * err:
            return ["width_unidentifiable"]
        return []


class ExponentialDecayModel(LeastSquaresModel):
    """``amplitude * exp(-t / tau) + offset``; pass ``offset`` to hold the floor fixed."""

    min_points = 3

    def __init__(self, offset=None):
        self.offset = offset

    @property
    def param_names(self):
        return ("amplitude", "tau") if self.offset is not None else ("amplitude", "tau", "offset")

    def _evaluate(self, x, theta):
        c = self.offset if self.offset is not None else theta[2]
        return theta[0] * np.exp(-x / theta[1]) + c

    def _jacobian(self, x, theta):
        a, tau = theta[0], theta[1]
        e = np.exp(-x / tau)
        cols = [e, a * e * x / tau**2]
        if self.offset is None:
            cols.append(np.ones_like(x))
        return np.column_stack(cols)

    def _to_internal(self, theta):
        u = np.array(theta, dtype=float)
        u[1] = math.log(theta[1])
        return u

    def _from_internal(self, u):
        theta = np.array(u, dtype=float)
        theta[1] = math.exp(u[1])
        return theta

    def _dtheta_du(self, u):
        d = np.ones_like(u)
        d[1] = math.exp(u[1])
        return d

    def _initial(self, x, y, w):
        span = np.ptp(x) if np.ptp(x) > 0 else 1.0
        best = None
        for tau in np.geomspace(span / 200, span * 200, 241):
            e = np.exp(-x / tau)
            if self.offset is None:
                design = np.column_stack([e, np.ones_like(x)])
                target = y
            else:
                design = e[:, None]
                target = y - self.offset
            sw = np.sqrt(w)
            coef, *_ = np.linalg.lstsq(design * sw[:, None], target * sw, rcond=None)
            cost = float(np.sum(w * (design @ coef - target) ** 2))
            if best is None or cost < best[0]:
                best = (cost, tau, coef)
        _, tau, coef = best
        if self.offset is None:
            return np.array([coef[0], tau, coef[1]])
        return np.array([coef[0], tau])


def _periodogram_frequency(x, y, w, fmin, fmax, n=None):
    n = n or max(400, 20 * x.size)
    freqs = np.linspace(fmin, fmax, n)
    sw = np.sqrt(w)
    best = None
    for f in freqs:
        phase = 2 * np.pi * f * x
        design = np.column_stack([np.ones_like(x), np.cos(phase), np.sin(phase)]) * sw[:, None]
        coef, *_ = np.linalg.lstsq(design, y * sw, rcond=None)
        cost = float(np.sum((design @ coef - y * sw) ** 2))
        if best is None or cost < best[0]:
            best = (cost, f, coef)
    _, f, (c, a, b) = best
    return f, c, math.hypot(a, b), math.atan2(-b, a)


def _frequency_window(x, guess):
    xs = np.sort(x)
    span = xs[-1] - xs[0] if xs.size > 1 else 1.0
    steps = np.diff(xs)
    steps = steps[steps > 0]
    nyquist = 0.5 / steps.min() if steps.size else 1.0 / span
    if guess is not None:
        # an explicit guess may lie above Nyquist; the undersampled flag reports it
        return max(0.5 * guess, 0.25 / span), 1.5 * guess
    return 0.25 / span, nyquist


def _wrap(phi):
    return (phi + math.pi) % (2 * math.pi) - math.pi


class SinusoidModel(LeastSquaresModel):
    """``offset + amplitude * cos(2 pi frequency t + phase)``."""

    param_names = ("offset", "amplitude", "frequency", "phase")
    min_points = 5

    def __init__(self, frequency_guess=None):
        self.frequency_guess = frequency_guess

    def _evaluate(self, x, theta):
        c, a, f, phi = theta
        return c + a * np.cos(2 * np.pi * f * x + phi)

    def _jacobian(self, x, theta):
        c, a, f, phi = theta
        psi = 2 * np.pi * f * x + phi
        s = np.sin(psi)
        return np.column_stack([np.ones_like(x), np.cos(psi), -a * s * 2 * np.pi * x, -a * s])

    def _initial(self, x, y, w):
        fmin, fmax = _frequency_window(x, self.frequency_guess)
        f, c, a, phi = _periodogram_frequency(x, y, w, fmin, fmax)
        return np.array([c, a, f, phi])

    def _finalize(self, theta, cov):
        return _canonical_amplitude(theta, cov, amp_index=1, phase_index=3)

    def _flags(self, x, y):
        return _oscillation_flags(self, x, y)


class DampedSinusoidModel(LeastSquaresModel):
    """``offset + amplitude * envelope(t / tau) * cos(2 pi frequency t + phase)``.

    ``envelope`` is ``"exponential"`` (``exp(-t/tau)``) or ``"gaussian"``
    (``exp(-t**2 / (2 tau**2))``).
    """

    param_names = ("offset", "amplitude", "tau", "frequency", "phase")
    min_points = 6

    def __init__(self, envelope="exponential", frequency_guess=None):
        self.envelope = envelope
        self.frequency_guess = frequency_guess

    def _env(self, x, tau):
        if self.envelope == "gaussian":
            return np.exp(-(x**2) / (2 * tau * tau))
        if self.envelope == "exponential":
            return np.exp(-x / tau)
        raise ValueError(f"unknown envelope {self.envelope!r}")

    def _evaluate(self, x, theta):
        c, a, tau, f, phi = theta
        return c + a * self._env(x, tau) * np.cos(2 * np.pi * f * x + phi)

    def _jacobian(self, x, theta):
        c, a, tau, f, phi = theta
        env = self._env(x, tau)
        psi = 2 * np.pi * f * x + phi
        cos, sin = np.cos(psi), np.sin(psi)
        if self.envelope == "gaussian":
            d_env = env * x**2 / tau**3
        else:
            d_env = env * x / tau**2
        return np.column_stack(
            [np.ones_like(x), env * cos, a * d_env * cos, -a * env * sin * 2 * np.pi * x, -a * env * sin]
        )

    def _to_internal(self, theta):
        u = np.array(theta, dtype=float)
        u[2] = math.log(theta[2])
        return u

    def _from_internal(self, u):
        theta = np.array(u, dtype=float)
        theta[2] = math.exp(u[2])
        return theta

    def _dtheta_du(self, u):
        d = np.ones_like(u)
        d[2] = math.exp(u[2])
        return d

    def _initial(self, x, y, w):
        fmin, fmax = _frequency_window(x, self.frequency_guess)
        f, c, a, phi = _periodogram_frequency(x, y, w, fmin, fmax)
        span = np.ptp(x) if np.ptp(x) > 0 else 1.0
        best = None
        sw = np.sqrt(w)
        carrier = np.cos(2 * np.pi * f * x + phi)
        for tau in np.geomspace(span / 50, span * 500, 181):
            design = np.column_stack([np.ones_like(x), self._env(x, tau) * carrier]) * sw[:, None]
            coef, *_ = np.linalg.lstsq(design, y * sw, rcond=None)
            cost = float(np.sum((design @ coef - y * sw) ** 2))
            if best is None or cost < best[0]:
                best = (cost, tau, coef)
        _, tau, (c0, a0) = best
        return np.array([c0, a0, tau, f, phi])

    def _finalize(self, theta, cov):
        return _canonical_amplitude(theta, cov, amp_index=1, phase_index=4)

    def _flags(self, x, y):
        return _oscillation_flags(self, x, y)


def _canonical_amplitude(theta, cov, amp_index, phase_index):
    theta = np.array(theta, dtype=float)
    if theta[amp_index] < 0:
        theta[amp_index] = -theta[amp_index]
        theta[phase_index] += math.pi
        signs = np.ones(theta.size)
        signs[amp_index] = -1.0
        with np.errstate(invalid="ignore"):
            cov = cov * np.outer(signs, signs)
    theta[phase_index] = _wrap(theta[phase_index])
    return theta, cov


def _oscillation_flags(model, x, y):
    flags = []
    a = model.params_["amplitude"]
    err = model.param_errors_["amplitude"]
    scale = max(np.ptp(y), abs(np.mean(y)), 1e-300)
    if abs(a) <= 1e-9 * scale or not np.isfinite(err) or abs(a) < 2 * err:
        flags.append("frequency_unidentifiable")
    xs = np.sort(x)
    steps = np.diff(xs)
    steps = steps[steps > 0]
    if steps.size and 2.0 * model.params_["frequency"] * steps.max() >= 1.0:
        flags.append("undersampled")
    return flags


@dataclass
class SweepFit:
    model: str
    params: dict
    param_errors: dict
    covariance: np.ndarray
    chi2: float
    dof: int
    n_points: int
    converged: bool = True
    flags: list = field(default_factory=list)

    def __getitem__(self, name):
        return self.params[name]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": dict(self.params),
            "param_errors": dict(self.param_errors),
            "covariance": _json_matrix(self.covariance),
            "chi2": self.chi2,
            "dof": self.dof,
            "n_points": self.n_points,
            "converged": self.converged,
            "flags": list(self.flags),
        }


def _sweep_fit(kind: str, model: LeastSquaresModel, x, y, yerr) -> SweepFit:
    model.fit(np.asarray(x, dtype=float), np.asarray(y, dtype=float), yerr=yerr)
    return SweepFit(
        model=kind,
        params=model.params_,
        param_errors=model.param_errors_,
        covariance=model.covariance_,
        chi2=model.chi2_,
        dof=model.dof_,
        n_points=model.n_points_,
        converged=model.converged_,
        flags=model.flags_,
    )


def fit_gaussian(x, y, yerr=None) -> SweepFit:
    return _sweep_fit("gaussian", GaussianPeakModel(), x, y, yerr)


def fit_exponential(x, y, yerr=None, offset: Optional[float] = None) -> SweepFit:
    return _sweep_fit("exponential", ExponentialDecayModel(offset=offset), x, y, yerr)


def fit_sinusoid(x, y, yerr=None, frequency_guess: Optional[float] = None) -> SweepFit:
    return _sweep_fit("sinusoid", SinusoidModel(frequency_guess=frequency_guess), x, y, yerr)


def fit_damped_sinusoid(x, y, yerr=None, envelope="exponential", frequency_guess=None) -> SweepFit:
    return _sweep_fit("damped-sinusoid", DampedSinusoidModel(envelope, frequency_guess), x, y, yerr)


# -- bootstrap ------------------------------------------------------------------------

@dataclass
class BootstrapResult:
    intervals: dict
    std: dict
    samples: np.ndarray
    param_names: tuple

    def to_dict(self) -> dict:
        return {
            "intervals": {k: list(v) for k, v in self.intervals.items()},
            "std": dict(self.std),
            "n_resamples": int(self.samples.shape[0]),
        }


def _sequence_table(lengths, fidelities, groups):
    """Pivot per-sequence fidelities into a (sequences x lengths) matrix."""
    lengths = np.asarray(lengths, dtype=float)
    uniq_l = np.unique(lengths)
    keys = [tuple(g) if np.ndim(g) else g for g in groups]
    index_g = {g: i for i, g in enumerate(dict.fromkeys(keys))}
    table = np.full((len(index_g), uniq_l.size), np.nan)
    col = np.searchsorted(uniq_l, lengths)
    for k, c, f in zip(keys, col, np.asarray(fidelities, dtype=float)):
        table[index_g[k], c] = f
    if np.isnan(table).any():
        raise ValueError("every sequence must be measured at every length")
    return uniq_l, table


def _mean_sem(table):
    n = table.shape[0]
    mean = table.mean(axis=0)
    sem = table.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(table.shape[1])
    return mean, sem


def bootstrap_ci(
    data,
    kind: str = "rb",
    n_resamples: int = 1000,
    seed: int = 0,
    confidence: float = 0.95,
    **fit_kwargs,
) -> BootstrapResult:
    """Percentile confidence intervals from resampling.

    For ``kind="rb"``, ``data`` is ``(lengths, fidelities, sequence_ids)``
    with one row per (sequence, length); whole sequences are resampled. For
    other kinds, ``data`` is ``(x, y)`` or ``(x, y, yerr)`` and points are
    resampled in pairs.
    """
    if n_resamples < 100:
        raise ValueError("n_resamples must be at least 100")
    from .seeding import child_rng

    rng = child_rng(seed, f"bootstrap-{kind}")
    alpha = (1.0 - confidence) / 2.0
    if kind == "rb":
        lengths, fidelities, groups = data
        uniq_l, table = _sequence_table(lengths, fidelities, groups)
        names = ("d_if", "d", "e_g")

        def one(rows):
            mean, sem = _mean_sem(table[rows])
            fit = fit_rb_decay(uniq_l, np.clip(mean, 0, 1), sem, **fit_kwargs)
            return [fit.d_if, fit.d, fit.e_g]

        n = table.shape[0]
    else:
        fitters = {
            "gaussian": fit_gaussian,
            "exponential": fit_exponential,
            "sinusoid": fit_sinusoid,
            "damped-sinusoid": fit_damped_sinusoid,
        }
        if kind not in fitters:
            raise ValueError(f"unknown fit kind {kind!r}")
        x, y, *rest = (np.asarray(a, dtype=float) for a in data)
        yerr = rest[0] if rest else None
        fitter = fitters[kind]
        names = tuple(fitter(x, y, yerr, **fit_kwargs).params)

        def one(rows):
            fit = fitter(x[rows], y[rows], None if yerr is None else yerr[rows], **fit_kwargs)
            return [fit.params[k] for k in names]

        n = x.size

    samples = np.array([one(rng.integers(0, n, size=n)) for _ in range(n_resamples)])
    lo = np.quantile(samples, alpha, axis=0)
    hi = np.quantile(samples, 1.0 - alpha, axis=0)
    sd = samples.std(axis=0, ddof=1)
    return BootstrapResult(
        intervals={k: (float(a), float(b)) for k, a, b in zip(names, lo, hi)},
        std={k: float(s) for k, s in zip(names, sd)},
        samples=samples,
        param_names=names,
    )


def _json_matrix(m) -> list:
    m = np.asarray(m, dtype=float)
    return [[float(v) if np.isfinite(v) else None for v in row] for row in m]


__all__ = [
    "BootstrapResult",
    "DampedSinusoidModel",
    "DecayFit",
    "ExponentialDecayModel",
    "GaussianPeakModel",
    "RBDecayModel",
    "SinusoidModel",
    "SweepFit",
    "bootstrap_ci",
    "error_per_gate",
    "fit_damped_sinusoid",
    "fit_exponential",
    "fit_gaussian",
    "fit_rb_decay",
    "fit_sinusoid",
    "rb_decay_curve",
]
