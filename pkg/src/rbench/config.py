"""
Run configuration files.

Configurations are JSON objects whose keys carry their units
(``t2_s``, ``detuning_hz``, ``t_half_pi_us``). Unknown keys are rejected and
every error names the offending line. ``paper_defaults`` and ``noiseless``
are built-in presets; a run's metadata sidecar is also accepted as a
configuration and reproduces that run.
"""

from __future__ import annotations

import copy
import json
import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from .experiments import ExperimentConfig
from .noise_models import NoiseConfig, T2_MODELS
from .rb_sequences import DEFAULT_TRUNCATIONS, TimingConfig

TWO_PI = 2.0 * math.pi

DEFAULTS: dict[str, Any] = {
    "experiment": "rb",
    "seed": 0,
    "output_dir": "results",
    "timing": {
        "t_half_pi_us": 31.05,
        "hold_time_us": 0.0,
        "prep_pulse_us": None,
        "readout_pulse_us": None,
    },
    "noise": {
        "t2_s": 0.28,
        "t2_model": "isotropic",
        "t2_star_s": 0.025,
        "static_detuning_sigma_hz": None,
        "systematic_detuning_hz": 0.0,
        "duration_offset_us": 0.0,
        "amplitude_noise_frac": 0.0,
        "amplitude_inhomogeneity_frac": 0.0,
        "depolarizing_rate_per_s": 0.0,
        "gate_depolarization_prob": 0.0,
        "spam_flip_prob": 0.009,
        "mapping_pulses": True,
    },
    "ensemble": {"size": 200, "workers": None, "substeps": 1, "shots": None},
    "rb": {"n_cg": 4, "n_pr": 8, "truncations": list(DEFAULT_TRUNCATIONS)},
    # ramsey.ensemble_size overrides ensemble.size; null falls back to it
    "ramsey": {"detuning_hz": 1000.0, "max_delay_ms": 13.5, "step_us": 100.0, "ensemble_size": 4000},
    "echo": {
        "detuning_hz": 1000.0,
        "echo_times_s": [0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0],
        "delta_t_span_ms": 1.5,
        "delta_t_points": 31,
    },
    "sweep_detuning": {"grid_hz": [-300.0 + 30.0 * k for k in range(21)], "truncation": 500, "n_cg": 4, "n_pr": 4},
    "sweep_duration": {"grid_us": [-2.5 + 0.25 * k for k in range(21)], "truncation": 500, "n_cg": 4, "n_pr": 4},
    "hold_time": {"grid_us": [0.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0], "truncation": 500, "n_cg": 4, "n_pr": 4},
}

NOISELESS_NOISE = {
    "t2_s": None,
    "t2_star_s": None,
    "spam_flip_prob": 0.0,
    "mapping_pulses": False,
}

EXPERIMENTS = ("rb", "ramsey", "echo", "sweep-detuning", "sweep-duration", "hold-time", "refocus")

_SIDECAR_KEYS = {"config", "command", "code_version", "seed", "files"}


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is the 1-based line of the problem, if known."""

    def __init__(self, message: str, line: Optional[int] = None, source: str = "<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line else f"{source}: "
        super().__init__(where + message)


def _line_of(text: str, key: str) -> Optional[int]:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _merge(base: dict, override: dict, text: str, source: str, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        full = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown key {full!r}", _line_of(text, key), source)
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{full!r} must be an object", _line_of(text, key), source)
            out[key] = _merge(base[key], value, text, source, full + ".")
        else:
            out[key] = _check_value(full, base[key], value, text, key, source)
    return out


def _check_value(full, default, value, text, key, source):
    line = _line_of(text, key)
    if value is None:
        return None
    is_number = isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{full!r} must be true or false", line, source)
    elif isinstance(default, (int, float)) or default is None:
        if not is_number:
            raise ConfigError(f"{full!r} must be a number", line, source)
    elif isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{full!r} must be a string", line, source)
    elif isinstance(default, list):
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{full!r} must be a list of numbers", line, source)
        if not value:
            raise ConfigError(f"{full!r} must not be empty", line, source)
    return value


@dataclass
class RunConfig:
    data: dict
    source: str = "<defaults>"

    # -- builders ---------------------------------------------------------------
    def timing(self) -> TimingConfig:
        t = self.data["timing"]
        us = lambda v: None if v is None else v * 1e-6
        return TimingConfig(
            t_half_pi=t["t_half_pi_us"] * 1e-6,
            hold_time=t["hold_time_us"] * 1e-6,
            prep_duration=us(t["prep_pulse_us"]),
            readout_duration=us(t["readout_pulse_us"]),
        )

    def noise(self) -> NoiseConfig:
        n = self.data["noise"]
        if n["t2_star_s"] is not None and n["static_detuning_sigma_hz"] is not None:
            raise ConfigError("set only one of noise.t2_star_s and noise.static_detuning_sigma_hz", source=self.source)
        sigma = 0.0
        if n["t2_star_s"] is not None:
            sigma = 1.0 / n["t2_star_s"]
        elif n["static_detuning_sigma_hz"] is not None:
            sigma = TWO_PI * n["static_detuning_sigma_hz"]
        if n["t2_model"] not in T2_MODELS:
            raise ConfigError(f"noise.t2_model must be one of {T2_MODELS}", source=self.source)
        try:
            return NoiseConfig(
                t2=math.inf if n["t2_s"] is None else n["t2_s"],
                t2_model=n["t2_model"],
                static_detuning_sigma=sigma,
                systematic_detuning=TWO_PI * n["systematic_detuning_hz"],
                duration_offset=n["duration_offset_us"] * 1e-6,
                amplitude_noise_sigma=n["amplitude_noise_frac"],
                amplitude_inhomogeneity=n["amplitude_inhomogeneity_frac"],
                depolarizing_rate=n["depolarizing_rate_per_s"],
                gate_depolarization=n["gate_depolarization_prob"],
                spam_flip_prob=n["spam_flip_prob"],
                mapping_pulses=n["mapping_pulses"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc), source=self.source) from exc

    def experiment(self, ensemble_size: Optional[int] = None) -> ExperimentConfig:
        e, rb = self.data["ensemble"], self.data["rb"]
        try:
            return ExperimentConfig(
                timing=self.timing(),
                noise=self.noise(),
                ensemble_size=int(ensemble_size or e["size"]),
                n_cg=int(rb["n_cg"]),
                n_pr=int(rb["n_pr"]),
                truncations=tuple(int(l) for l in rb["truncations"]),
                master_seed=int(self.data["seed"]),
                workers=int(e["workers"] or os.cpu_count() or 1),
                substeps=int(e["substeps"]),
                shots=None if e["shots"] is None else int(e["shots"]),
            )
        except ValueError as exc:
            raise ConfigError(str(exc), source=self.source) from exc

    def with_overrides(self, seed=None, ensemble=None, workers=None, output_dir=None) -> "RunConfig":
        data = copy.deepcopy(self.data)
        if seed is not None:
            data["seed"] = int(seed)
        if ensemble is not None:
            data["ensemble"]["size"] = int(ensemble)
            data["ramsey"]["ensemble_size"] = None
        if workers is not None:
            data["ensemble"]["workers"] = int(workers)
        if output_dir is not None:
            data["output_dir"] = str(output_dir)
        return RunConfig(data, self.source)

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True)


def preset(name: str) -> RunConfig:
    data = copy.deepcopy(DEFAULTS)
    if name == "paper_defaults":
        return RunConfig(data, name)
    if name == "noiseless":
        data["noise"].update(NOISELESS_NOISE)
        return RunConfig(data, name)
    raise KeyError(name)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno, source) from exc
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object", 1, source)
    if "config" in raw and set(raw) <= _SIDECAR_KEYS:
        raw = raw["config"]
    data = _merge(DEFAULTS, raw, text, source)
    if data["experiment"] not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}", _line_of(text, "experiment"), source)
    if data["noise"]["t2_model"] not in T2_MODELS:
        raise ConfigError(f"noise.t2_model must be one of {T2_MODELS}", _line_of(text, "t2_model"), source)
    cfg = RunConfig(data, source)
    # build once so value errors surface at load time
    cfg.experiment()
    return cfg


def load_config(name_or_path: Optional[str]) -> RunConfig:
    """Load a preset name or a JSON file path (default: ``paper_defaults``)."""
    if name_or_path is None:
        return preset("paper_defaults")
    path = Path(name_or_path)
    if not path.exists():
        try:
            return preset(name_or_path)
        except KeyError:
            raise ConfigError("no such file or preset", source=name_or_path) from None
    return parse_config(path.read_text(encoding="utf-8"), str(path))
