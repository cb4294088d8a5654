"""
End-to-end simulated experiments: benchmarking decays, Ramsey and spin-echo
scans, calibration sweeps at a fixed truncation, hold-time runs and the
static-disorder refocusing study.

Every atom starts from a preparation mapping pulse and ends with a readout
mapping pulse. An imperfect mapping pulse leaves a fraction of atoms
unpolarized with respect to the qubit, so their transfer efficiencies scale
the measured contrast. A readout bit-flip comes last.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .analysis import DecayFit, SweepFit, fit_exponential, fit_rb_decay, fit_sinusoid, fit_damped_sinusoid
from .engine import run_slots, slot_arrays
from .noise_models import NoiseConfig, readout_flip, sample_ensemble, transfer_probability
from .rb_sequences import (
    DEFAULT_TRUNCATIONS,
    RbSequenceSet,
    Slot,
    TimingConfig,
    build_sequence_set,
    compile_gates,
    compile_recovery,
    compile_schedule,
    job_recovery,
)
from .seeding import child_rng

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ExperimentConfig:
    timing: TimingConfig = TimingConfig()
    noise: NoiseConfig = NoiseConfig()
    ensemble_size: int = 200
    n_cg: int = 4
    n_pr: int = 8
    truncations: tuple = DEFAULT_TRUNCATIONS
    master_seed: int = 0
    workers: int = 1
    substeps: int = 1
    shots: Optional[int] = None

    def __post_init__(self):
        if self.ensemble_size < 1:
            raise ValueError("ensemble_size must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be positive")
        object.__setattr__(self, "truncations", tuple(int(l) for l in self.truncations))

    def replace(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


# -- datasets -------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_csv(columns: Sequence[str], rows, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


@dataclass
class RbDataset:
    """One row per (cg_id, pr_id, truncation): ensemble-mean fidelity and its SEM."""

    cg_id: np.ndarray
    pr_id: np.ndarray
    truncation: np.ndarray
    fidelity: np.ndarray
    sem: np.ndarray
    metadata: dict = field(default_factory=dict)

    columns = ("cg_id", "pr_id", "truncation", "fidelity", "sem")

    def __len__(self):
        return len(self.truncation)

    def rows(self):
        return zip(self.cg_id, self.pr_id, self.truncation, self.fidelity, self.sem)

    def sequence_ids(self) -> list:
        return list(zip(self.cg_id.tolist(), self.pr_id.tolist()))

    def average(self):
        """Mean fidelity per truncation over sequences and its standard error."""
        lengths = np.unique(self.truncation)
        means, sems = [], []
        for l in lengths:
            vals = self.fidelity[self.truncation == l]
            means.append(vals.mean())
            sems.append(vals.std(ddof=1) / math.sqrt(vals.size) if vals.size > 1 else 0.0)
        return lengths, np.array(means), np.array(sems)

    def fit(self, weighted: bool = True) -> DecayFit:
        lengths, mean, sem = self.average()
        return fit_rb_decay(lengths, np.clip(mean, 0.0, 1.0), sem, weighted=weighted)

    def to_csv(self, path=None) -> str:
        return _write_csv(self.columns, self.rows(), path)


@dataclass
class ScanDataset:
    """Generic scan table; ``columns[0]`` is the scanned quantity."""

    columns: tuple
    data: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def to_csv(self, path=None) -> str:
        return _write_csv(self.columns, self.data.tolist(), path)


# -- ensemble plumbing ---------------------------------------------------------------

@dataclass(frozen=True)
class _Ensemble:
    detunings: np.ndarray
    amplitudes: np.ndarray


def _ensemble(config: ExperimentConfig, noise: Optional[NoiseConfig] = None, size: Optional[int] = None) -> _Ensemble:
    noise = noise or config.noise
    det, amp = sample_ensemble(noise, config.master_seed, size or config.ensemble_size)
    return _Ensemble(det, amp)


def _jitter(noise: NoiseConfig, seed: int, tag: str, shape, *key) -> Optional[np.ndarray]:
    if noise.amplitude_noise_sigma <= 0 or shape[1] == 0:
        return None
    return noise.amplitude_noise_sigma * child_rng(seed, tag, *key).standard_normal(shape)


def mapping_efficiency(
    noise: NoiseConfig, timing: TimingConfig, ens: _Ensemble, duration: float, jitter=None
) -> np.ndarray:
    """Transfer efficiency of a prep/readout pi pulse for every atom.

    Mapping pulses see the atoms' static detuning and amplitude errors but
    not the qubit drive's systematic detuning or duration offset.
    """
    if not noise.mapping_pulses:
        return np.ones_like(ens.detunings)
    rabi = (math.pi / duration) * ens.amplitudes
    if jitter is not None:
        rabi = rabi * (1.0 + jitter)
    return transfer_probability(np.maximum(rabi, 0.0), duration, ens.detunings)


def _spam(noise, timing, ens, seed, tag, *key):
    """(prep, readout) efficiencies for one job."""
    n = ens.detunings.size
    jit = _jitter(noise, seed, f"{tag}-spam", (n, 2), *key)
    prep = mapping_efficiency(noise, timing, ens, timing.prep_time, None if jit is None else jit[:, 0])
    readout = mapping_efficiency(noise, timing, ens, timing.readout_time, None if jit is None else jit[:, 1])
    return prep, readout


def _initial_states(prep_eff: np.ndarray) -> np.ndarray:
    init = np.zeros((prep_eff.size, 3))
    init[:, 2] = prep_eff
    return init


def _expected_probability(states: np.ndarray, expected: int, readout_eff: np.ndarray, flip: float) -> np.ndarray:
    sign = 1.0 if expected == 0 else -1.0
    p = 0.5 * (1.0 + sign * readout_eff * states[:, 2])
    return readout_flip(p, flip)


def _frames(pr_stream, lmax: int) -> np.ndarray:
    """Virtual-Z frame after each number of gates, 0..lmax."""
    z = np.array([op.pauli == "Z" for op in pr_stream[:lmax]], dtype=int)
    return np.concatenate([[0.0], (np.cumsum(z) % 2) * math.pi])


def simulate_pair(
    sequences: RbSequenceSet,
    cg_id: int,
    pr_id: int,
    config: ExperimentConfig,
    ens: _Ensemble,
    noise: Optional[NoiseConfig] = None,
    timing: Optional[TimingConfig] = None,
    truncations: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Per-atom fidelities (truncations x atoms) for one CG/PR stream pair.

    The gate prefix is propagated once with snapshots at every truncation;
    each truncation then gets its own recovery block and readout.
    """
    noise = noise or config.noise
    timing = timing or config.timing
    truncations = tuple(truncations or sequences.truncations)
    seed = sequences.master_seed
    tag = sequences.tag
    cg = sequences.cg_streams[cg_id]
    pr = sequences.pr_streams[pr_id]
    lmax = max(truncations)
    n = ens.detunings.size
    det = ens.detunings + noise.systematic_detuning
    rabi = timing.rabi_rate

    gates, _ = compile_gates(cg, pr, lmax, timing)
    prefix = slot_arrays(gates, timing.t_half_pi, hold=timing.hold_time, trailing_hold=True)
    jit = _jitter(noise, seed, f"{tag}-amplitude", (n, len(prefix)), cg_id, pr_id)
    prep, _ = _spam(noise, timing, ens, seed, f"{tag}-prep", cg_id, pr_id)
    snaps = run_slots(
        prefix, rabi, noise, det, ens.amplitudes, _initial_states(prep),
        jitter=jit, snap_after=[2 * l for l in truncations], substeps=config.substeps,
    )
    frames = _frames(pr, lmax)
    out = np.empty((len(truncations), n))
    for j, l in enumerate(truncations):
        recovery = job_recovery(sequences, cg_id, pr_id, l)
        tail, _ = compile_recovery(recovery, frames[l], timing)
        arrays = slot_arrays(tail, timing.t_half_pi, hold=timing.hold_time)
        rjit = _jitter(noise, seed, f"{tag}-amplitude-recovery", (n, 3), cg_id, pr_id, l)
        final = run_slots(arrays, rabi, noise, det, ens.amplitudes, snaps[j], jitter=rjit, substeps=config.substeps)
        _, readout = _spam(noise, timing, ens, seed, f"{tag}-readout", cg_id, pr_id, l)
        out[j] = _expected_probability(final, recovery.expected_outcome, readout, noise.spam_flip_prob)
    return out


def simulate_job(
    sequences: RbSequenceSet,
    cg_id: int,
    pr_id: int,
    l: int,
    config: ExperimentConfig,
    ens: _Ensemble,
) -> np.ndarray:
    """Per-atom fidelities for one job via its full compiled schedule (no prefix reuse)."""
    noise, timing = config.noise, config.timing
    seed, tag = sequences.master_seed, sequences.tag
    n = ens.detunings.size
    recovery = job_recovery(sequences, cg_id, pr_id, l)
    schedule = compile_schedule(sequences.cg_streams[cg_id], sequences.pr_streams[pr_id], l, recovery, timing)
    arrays = slot_arrays(schedule.slots, timing.t_half_pi, hold=timing.hold_time)
    jit = None
    if noise.amplitude_noise_sigma > 0:
        lmax = max(sequences.truncations)
        pre = _jitter(noise, seed, f"{tag}-amplitude", (n, 2 * lmax), cg_id, pr_id)[:, : 2 * l]
        post = _jitter(noise, seed, f"{tag}-amplitude-recovery", (n, 3), cg_id, pr_id, l)
        jit = np.hstack([pre, post])
    prep, _ = _spam(noise, timing, ens, seed, f"{tag}-prep", cg_id, pr_id)
    _, readout = _spam(noise, timing, ens, seed, f"{tag}-readout", cg_id, pr_id, l)
    final = run_slots(
        arrays, timing.rabi_rate, noise, ens.detunings + noise.systematic_detuning, ens.amplitudes,
        _initial_states(prep), jitter=jit, substeps=config.substeps,
    )
    return _expected_probability(final, recovery.expected_outcome, readout, noise.spam_flip_prob)


def _mean_sem(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    mean = float(values.mean())
    sem = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, sem


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _all_pairs(sequences: RbSequenceSet, config, ens, noise=None, timing=None, truncations=None):
    pairs = [(c, p) for c in range(sequences.n_cg) for p in range(sequences.n_pr)]
    results = _map(
        lambda cp: simulate_pair(sequences, cp[0], cp[1], config, ens, noise, timing, truncations),
        pairs,
        config.workers,
    )
    return pairs, results


# -- benchmarking ----------------------------------------------------------------------

def run_rb(config: ExperimentConfig, sequences: Optional[RbSequenceSet] = None) -> RbDataset:
    """Simulate every (CG stream, PR stream, truncation) job of a benchmarking run."""
    if sequences is None:
        sequences = build_sequence_set(config.n_cg, config.n_pr, config.truncations, config.master_seed)
    ens = _ensemble(config)
    pairs, results = _all_pairs(sequences, config, ens)
    cols = {k: [] for k in RbDataset.columns}
    for (c, p), per_atom in zip(pairs, results):
        for l, values in zip(sequences.truncations, per_atom):
            mean, sem = _mean_sem(values)
            if config.shots is not None:
                rng = child_rng(config.master_seed, f"{sequences.tag}-shots", c, p, l)
                mean = rng.binomial(config.shots, min(max(mean, 0.0), 1.0)) / config.shots
                sem = math.sqrt(mean * (1.0 - mean) / config.shots)
            cols["cg_id"].append(c)
            cols["pr_id"].append(p)
            cols["truncation"].append(l)
            cols["fidelity"].append(min(max(mean, 0.0), 1.0))
            cols["sem"].append(sem)
    return RbDataset(
        cg_id=np.array(cols["cg_id"]),
        pr_id=np.array(cols["pr_id"]),
        truncation=np.array(cols["truncation"]),
        fidelity=np.array(cols["fidelity"]),
        sem=np.array(cols["sem"]),
        metadata={"master_seed": config.master_seed, "ensemble_size": config.ensemble_size},
    )


def fixed_length_fidelity(
    config: ExperimentConfig,
    truncation: int = 500,
    n_cg: int = 4,
    n_pr: int = 4,
    noise: Optional[NoiseConfig] = None,
    timing: Optional[TimingConfig] = None,
    tag: str = "sweep",
    ens: Optional[_Ensemble] = None,
) -> tuple[float, float, np.ndarray]:
    """Mean fidelity over ``n_cg x n_pr`` sequences at one truncation.

    Returns (mean, standard error over sequences, per-sequence means).
    """
    noise = noise or config.noise
    sequences = build_sequence_set(n_cg, n_pr, (truncation,), config.master_seed, tag=tag)
    ens = ens or _ensemble(config, noise)
    _, results = _all_pairs(sequences, config, ens, noise, timing)
    per_sequence = np.array([r[0].mean() for r in results])
    mean, sem = _mean_sem(per_sequence)
    return mean, sem, per_sequence


def run_detuning_sweep(
    grid_hz: Sequence[float], config: ExperimentConfig, truncation: int = 500, n_cg: int = 4, n_pr: int = 4
) -> ScanDataset:
    """Fidelity at a fixed truncation versus an added drive detuning (Hz).

    The scanned detuning adds to ``noise.systematic_detuning``, so the peak
    sits at minus the systematic offset.
    """
    grid_hz = np.asarray(grid_hz, dtype=float)
    _check_grid(grid_hz)
    ens = _ensemble(config)
    rows = []
    for g in grid_hz:
        noise = config.noise.replace(systematic_detuning=config.noise.systematic_detuning + TWO_PI * g)
        mean, sem, _ = fixed_length_fidelity(config, truncation, n_cg, n_pr, noise=noise, ens=ens)
        rows.append((g, mean, sem))
    return ScanDataset(("detuning_hz", "fidelity", "sem"), np.array(rows), {"truncation": truncation})


def run_duration_sweep(
    grid_s: Sequence[float], config: ExperimentConfig, truncation: int = 500, n_cg: int = 4, n_pr: int = 4
) -> ScanDataset:
    """Fidelity versus an added pi/2-pulse duration offset (pi pulses get twice it)."""
    grid_s = np.asarray(grid_s, dtype=float)
    _check_grid(grid_s)
    ens = _ensemble(config)
    rows = []
    for g in grid_s:
        noise = config.noise.replace(duration_offset=config.noise.duration_offset + g)
        mean, sem, _ = fixed_length_fidelity(config, truncation, n_cg, n_pr, noise=noise, ens=ens)
        rows.append((g * 1e6, mean, sem))
    return ScanDataset(("duration_offset_us", "fidelity", "sem"), np.array(rows), {"truncation": truncation})


def _try_fit(fn, *args, **kwargs) -> Optional[SweepFit]:
    try:
        return fn(*args, **kwargs)
    except (ValueError, np.linalg.LinAlgError):
        return None


@dataclass
class HoldTimeResult:
    """``fit`` is None when the exponential fit could not be performed."""

    scan: ScanDataset
    fit: Optional[SweepFit]

    @property
    def decay_constant(self) -> float:
        return self.fit.params["tau"] if self.fit is not None else math.nan


def sequence_duration(timing: TimingConfig, truncation: int) -> float:
    """Length of a compiled sequence with holds between all ``2 l + 3`` slots."""
    n_slots = 2 * truncation + 3
    body = truncation * timing.gate_time + 2 * timing.t_pi + timing.t_half_pi
    return body + (n_slots - 1) * timing.hold_time


def run_hold_time(
    grid_s: Sequence[float], config: ExperimentConfig, truncation: int = 500, n_cg: int = 4, n_pr: int = 4
) -> HoldTimeResult:
    """Fidelity versus the idle time inserted between consecutive slots.

    The decay constant comes from an exponential fit of fidelity against the
    total sequence time with the floor held at the fully mixed value 1/2.
    """
    grid_s = np.asarray(grid_s, dtype=float)
    _check_grid(grid_s)
    if np.any(grid_s < 0):
        raise ValueError("hold times must be non-negative")
    ens = _ensemble(config)
    rows = []
    for g in grid_s:
        timing = replace(config.timing, hold_time=float(g))
        mean, sem, _ = fixed_length_fidelity(config, truncation, n_cg, n_pr, timing=timing, ens=ens, tag="hold")
        rows.append((g, sequence_duration(timing, truncation), mean, sem))
    data = np.array(rows)
    scan = ScanDataset(("hold_time_s", "total_time_s", "fidelity", "sem"), data, {"truncation": truncation})
    fit = _try_fit(fit_exponential, data[:, 1], data[:, 2], data[:, 3], offset=0.5)
    return HoldTimeResult(scan, fit)


# -- Ramsey and echo ----------------------------------------------------------------------

def _half_pi(timing: TimingConfig, phase: float = 0.0) -> Slot:
    return Slot("pulse", phase, math.pi / 2, timing.t_half_pi, role="cg")


def _delay(t: float) -> Slot:
    return Slot("idle", 0.0, 0.0, t, role="delay")


def _measure_p0(
    slots, config: ExperimentConfig, ens: _Ensemble, detuning: float, spam_key: tuple
) -> np.ndarray:
    noise, timing = config.noise, config.timing
    prep, readout = _spam(noise, timing, ens, config.master_seed, *spam_key)
    arrays = slot_arrays(slots, timing.t_half_pi)
    n = ens.detunings.size
    jit = _jitter(noise, config.master_seed, f"{spam_key[0]}-amplitude", (n, len(arrays)), *spam_key[1:])
    final = run_slots(
        arrays, timing.rabi_rate, noise, ens.detunings + noise.systematic_detuning + detuning,
        ens.amplitudes, _initial_states(prep), jitter=jit, substeps=config.substeps,
    )
    return _expected_probability(final, 0, readout, noise.spam_flip_prob)


def run_ramsey(detuning: float, delays_s: Sequence[float], config: ExperimentConfig) -> ScanDataset:
    """Two pi/2 pulses separated by a variable delay; ``detuning`` in rad/s."""
    delays_s = np.asarray(delays_s, dtype=float)
    _check_grid(delays_s)
    ens = _ensemble(config)
    rows = []
    for k, t in enumerate(delays_s):
        slots = [_half_pi(config.timing), _delay(t), _half_pi(config.timing)]
        p0 = _measure_p0(slots, config, ens, detuning, ("ramsey", k))
        rows.append((t, *_mean_sem(p0)))
    return ScanDataset(("delay_s", "p0", "sem"), np.array(rows), {"detuning_hz": detuning / TWO_PI})


@dataclass
class RamseyFit:
    fit: SweepFit

    @property
    def frequency_hz(self) -> float:
        return self.fit.params["frequency"]

    @property
    def decay_time(self) -> float:
        return self.fit.params["tau"]


def fit_ramsey(scan: ScanDataset, envelope: str = "gaussian", frequency_guess=None) -> RamseyFit:
    x, y, e = scan.column("delay_s"), scan.column("p0"), scan.column("sem")
    return RamseyFit(fit_damped_sinusoid(x, y, e, envelope=envelope, frequency_guess=frequency_guess))


@dataclass
class EchoResult:
    scans: ScanDataset
    amplitudes: ScanDataset
    fit: Optional[SweepFit]

    @property
    def decay_time(self) -> float:
        return self.fit.params["tau"] if self.fit is not None else math.nan


def run_spin_echo(
    echo_times_s: Sequence[float],
    offsets_s: Sequence[float],
    detuning: float,
    config: ExperimentConfig,
) -> EchoResult:
    """Detuned spin echo: pi/2, T/2, pi, T/2 + dt, pi/2.

    For each total echo time ``T`` the fringe over ``dt`` is fit to a
    sinusoid and its amplitude recorded; the amplitudes are then fit to an
    exponential in ``T``.
    """
    echo_times_s = np.asarray(echo_times_s, dtype=float)
    offsets_s = np.asarray(offsets_s, dtype=float)
    _check_grid(echo_times_s)
    _check_grid(offsets_s)
    ens = _ensemble(config)
    timing = config.timing
    scan_rows, amp_rows = [], []
    for i, T in enumerate(echo_times_s):
        p0s, sems = [], []
        for k, dt in enumerate(offsets_s):
            slots = [
                _half_pi(timing),
                _delay(T / 2),
                Slot("pulse", 0.0, math.pi, timing.t_pi, role="pr"),
                _delay(T / 2 + dt),
                _half_pi(timing),
            ]
            mean, sem = _mean_sem(_measure_p0(slots, config, ens, detuning, ("echo", i, k)))
            p0s.append(mean)
            sems.append(sem)
            scan_rows.append((T, dt, mean, sem))
        amplitude, err, ok = 0.0, 0.0, False
        try:
            fit = fit_sinusoid(offsets_s, np.array(p0s), np.array(sems), frequency_guess=abs(detuning) / TWO_PI or None)
            if fit.converged and "frequency_unidentifiable" not in fit.flags:
                amplitude, err, ok = fit.params["amplitude"], fit.param_errors["amplitude"], True
        except (ValueError, np.linalg.LinAlgError):
            pass
        amp_rows.append((T, amplitude, err, ok))
    scans = ScanDataset(("echo_time_s", "delta_t_s", "p0", "sem"), np.array(scan_rows))
    amps = ScanDataset(("echo_time_s", "amplitude", "amplitude_err", "fit_ok"), np.array(amp_rows, dtype=float))
    good = amps.column("fit_ok") > 0
    fit = _try_fit(fit_exponential, amps.column("echo_time_s")[good], amps.column("amplitude")[good])
    return EchoResult(scans, amps, fit)


# -- refocusing study ------------------------------------------------------------------

@dataclass
class RefocusResult:
    dataset: RbDataset
    fit: DecayFit
    short_fidelity: float

    @property
    def e_g(self) -> float:
        return self.fit.e_g


def run_refocusing_study(config: ExperimentConfig) -> RefocusResult:
    """Benchmarking with static detuning disorder as the only error source."""
    noise = NoiseConfig(static_detuning_sigma=config.noise.static_detuning_sigma, mapping_pulses=False)
    cfg = config.replace(noise=noise)
    data = run_rb(cfg)
    lengths, mean, _ = data.average()
    return RefocusResult(data, data.fit(), float(mean[0]))


def _check_grid(grid: np.ndarray):
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("scan grid must be a non-empty 1-D sequence")
    if grid.size > 1 and not (np.all(np.diff(grid) > 0) or np.all(np.diff(grid) < 0)):
        raise ValueError("scan grid must be strictly monotone")
