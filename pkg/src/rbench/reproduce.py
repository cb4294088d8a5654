"""
Reproduction targets.

Each target runs one simulated measurement at the reference settings and
compares the result with a reference value and an acceptance band. Used by
``rbench paper-suite``.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .experiments import (
    ExperimentConfig,
    fit_ramsey,
    run_detuning_sweep,
    run_duration_sweep,
    run_hold_time,
    run_ramsey,
    run_refocusing_study,
    run_rb,
    run_spin_echo,
)
from .analysis import fit_gaussian
from .noise_models import NoiseConfig, static_sigma_from_t2_star
from .rb_sequences import TimingConfig

TWO_PI = 2.0 * math.pi
T2 = 0.28
T2_STAR = 25e-3
FLIP = 0.009


@dataclass
class Target:
    name: str
    value: float
    reference: Optional[float]
    low: float
    high: float
    unit: str = ""
    note: str = ""
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.low <= self.value <= self.high)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _cfg(seed: int, workers: int, noise: NoiseConfig, **kw) -> ExperimentConfig:
    return ExperimentConfig(timing=TimingConfig(), noise=noise, master_seed=seed, workers=workers, **kw)


def _realistic(flip: float = FLIP) -> NoiseConfig:
    return NoiseConfig(t2=T2, static_detuning_sigma=static_sigma_from_t2_star(T2_STAR), spam_flip_prob=flip)


def noiseless_identity(seed: int, workers: int) -> list[Target]:
    data = run_rb(_cfg(seed, workers, NoiseConfig.noiseless()))
    dev = float(np.max(np.abs(1.0 - data.fidelity)))
    return [Target("noiseless max |1 - F|", dev, 0.0, 0.0, 1e-9)]


def depolarization_self_test(seed: int, workers: int, p: float = 2.7e-4) -> list[Target]:
    noise = NoiseConfig(gate_depolarization=p, mapping_pulses=False)
    fit = run_rb(_cfg(seed, workers, noise, ensemble_size=1)).fit()
    return [Target("injected depolarization d/p", fit.d / p, 1.0, 0.9, 1.1, note=f"p = {p:g}")]


def t2_limited(seed: int, workers: int) -> list[Target]:
    fit = run_rb(_cfg(seed, workers, _realistic())).fit()
    return [
        Target("E_g (T2-limited)", fit.e_g, 1.4e-4, 1.0e-4, 1.9e-4),
        Target("d_if (0.9% readout flips)", fit.d_if, 1.8e-2, 1.8e-2 * 0.75, 1.8e-2 * 1.25),
    ]


def detuning_sweep(seed: int, workers: int, systematic_hz: float = 10.0) -> list[Target]:
    noise = NoiseConfig(systematic_detuning=TWO_PI * systematic_hz, mapping_pulses=False)
    grid = np.linspace(-300.0, 300.0, 21)
    scan = run_detuning_sweep(grid, _cfg(seed, workers, noise, ensemble_size=1))
    fit = fit_gaussian(scan.column("detuning_hz"), scan.column("fidelity"), scan.column("sem"))
    return [
        Target("detuning sweep peak offset", fit["center"] + systematic_hz, 0.0, -10.0, 10.0, "Hz"),
        Target("detuning sweep width", fit["width"], 150.0, 75.0, 300.0, "Hz"),
    ]


def duration_sweep(seed: int, workers: int) -> list[Target]:
    noise = NoiseConfig(mapping_pulses=False)
    grid = np.linspace(-2.5e-6, 2.5e-6, 21)
    scan = run_duration_sweep(grid, _cfg(seed, workers, noise, ensemble_size=1))
    fit = fit_gaussian(scan.column("duration_offset_us"), scan.column("fidelity"), scan.column("sem"))
    return [
        Target("duration sweep peak", fit["center"], 0.0, -0.1, 0.1, "us"),
        Target("duration sweep width", fit["width"], 1.1, 0.55, 2.2, "us"),
    ]


def ramsey(seed: int, workers: int) -> list[Target]:
    noise = NoiseConfig(static_detuning_sigma=static_sigma_from_t2_star(T2_STAR), mapping_pulses=False)
    cfg = _cfg(seed, workers, noise, ensemble_size=4000)
    delays = np.arange(0.0, 13.5e-3 + 1e-9, 1e-4)
    fit = fit_ramsey(run_ramsey(TWO_PI * 1000.0, delays, cfg), frequency_guess=1000.0)
    return [
        Target("Ramsey T2*", fit.decay_time, T2_STAR, 0.9 * T2_STAR, 1.1 * T2_STAR, "s"),
        Target("Ramsey fringe frequency", fit.frequency_hz, 1000.0, 998.0, 1002.0, "Hz"),
    ]


def spin_echo(seed: int, workers: int) -> list[Target]:
    cfg = _cfg(seed, workers, _realistic(0.0), ensemble_size=200)
    res = run_spin_echo(
        [0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0], np.linspace(0.0, 1.5e-3, 31), TWO_PI * 1000.0, cfg
    )
    return [Target("echo T2", res.decay_time, T2, 0.85 * T2, 1.15 * T2, "s")]


def hold_time(seed: int, workers: int) -> list[Target]:
    cfg = _cfg(seed, workers, NoiseConfig(t2=T2, mapping_pulses=False), ensemble_size=1)
    res = run_hold_time(np.linspace(0.0, 300e-6, 7), cfg)
    return [Target("hold-time decay constant", res.decay_constant, 0.31, 0.22, 0.36, "s")]


def refocusing(seed: int, workers: int) -> list[Target]:
    noise = NoiseConfig(static_detuning_sigma=static_sigma_from_t2_star(T2_STAR))
    res = run_refocusing_study(_cfg(seed, workers, noise))
    return [Target("E_g from static disorder", res.e_g, 1e-5, 0.0, 2e-5)]


def scattering(seed: int, workers: int, rate: float = 0.2) -> list[Target]:
    noise = NoiseConfig(depolarizing_rate=rate, mapping_pulses=False)
    fit = run_rb(_cfg(seed, workers, noise, ensemble_size=1)).fit()
    return [Target("E_g from scattering", fit.e_g, 1e-5, 0.5e-5, 1.5e-5)]


TARGETS: dict[str, Callable[[int, int], list[Target]]] = {
    "noiseless": noiseless_identity,
    "depolarization": depolarization_self_test,
    "t2-limited": t2_limited,
    "detuning-sweep": detuning_sweep,
    "duration-sweep": duration_sweep,
    "ramsey": ramsey,
    "echo": spin_echo,
    "hold-time": hold_time,
    "refocusing": refocusing,
    "scattering": scattering,
}


def run_suite(seed: int = 0, workers: int = 1, only=None, progress=None) -> list[Target]:
    rows = []
    for key, fn in TARGETS.items():
        if only and key not in only:
            continue
        t0 = time.perf_counter()
        out = fn(seed, workers)
        dt = time.perf_counter() - t0
        for t in out:
            t.seconds = dt
            rows.append(t)
            if progress:
                progress(t)
    return rows


def format_table(rows: list[Target]) -> str:
    head = f"{'target':32s} {'value':>12s} {'reference':>10s} {'band':>25s}  result"
    lines = [head, "-" * len(head)]
    for t in rows:
        ref = "" if t.reference is None else f"{t.reference:.4g}"
        band = f"[{t.low:.4g}, {t.high:.4g}] {t.unit}".rstrip()
        lines.append(f"{t.name:32s} {t.value:12.5g} {ref:>10s} {band:>25s}  {'PASS' if t.passed else 'FAIL'}")
    return "\n".join(lines)
