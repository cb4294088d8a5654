"""
Command-line interface.

Each experiment command writes a dataset CSV, a fit JSON, a plot-ready CSV
with ``x,y,yerr`` columns and a ``<name>_meta.json`` sidecar holding the
resolved configuration. Passing that sidecar back as ``--config`` repeats the
run exactly.

Exit codes: 0 success, 1 reproduction target failed, 2 bad configuration or
input CSV, 3 fit did not converge (data files are still written).
"""

from __future__ import annotations

import csv
import json
import math
import subprocess
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np

from . import __version__
from .analysis import fit_exponential, fit_gaussian, fit_rb_decay, fit_sinusoid
from .config import EXPERIMENTS, ConfigError, RunConfig, load_config
from .experiments import (
    RbDataset,
    _write_csv,
    fit_ramsey,
    run_detuning_sweep,
    run_duration_sweep,
    run_hold_time,
    run_ramsey,
    run_rb,
    run_refocusing_study,
    run_spin_echo,
)

TWO_PI = 2.0 * math.pi

EXIT_TARGET_FAILED = 1
EXIT_INPUT = 2
EXIT_FIT = 3

PLOT_COLUMNS = ("x", "y", "yerr")


def code_version() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj).__name__)


def _write_json(path: Path, payload: dict):
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default, allow_nan=True)
    path.write_text(text + "\n", encoding="utf-8")


class _Run:
    """Bookkeeping for one experiment command."""

    def __init__(self, name: str, cfg: RunConfig):
        self.name = name
        self.cfg = cfg
        self.out = Path(cfg.data["output_dir"])
        self.out.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        self.converged = True

    def csv(self, filename: str, text_or_dataset) -> None:
        path = self.out / filename
        if isinstance(text_or_dataset, str):
            path.write_text(text_or_dataset, encoding="utf-8", newline="")
        else:
            text_or_dataset.to_csv(path)
        self.files.append(filename)

    def plot(self, filename: str, x, y, yerr) -> None:
        self.csv(filename, _write_csv(PLOT_COLUMNS, zip(x, y, yerr)))

    def fit(self, filename: str, payload: dict) -> None:
        self.converged = self.converged and bool(payload.get("converged", False))
        _write_json(self.out / filename, payload)
        self.files.append(filename)

    def finish(self) -> None:
        meta = {
            "command": self.name,
            "seed": self.cfg.data["seed"],
            "code_version": code_version(),
            "files": self.files + [f"{self.name}_meta.json"],
            "config": self.cfg.data,
        }
        _write_json(self.out / f"{self.name}_meta.json", meta)
        for f in self.files:
            click.echo(str(self.out / f))
        if not self.converged:
            click.echo("error: fit did not converge; data files were written", err=True)
            sys.exit(EXIT_FIT)


def _safe_fit(fn, *args, **kwargs):
    """Run a fit; failures become a non-converged fit payload instead of a crash."""
    try:
        return fn(*args, **kwargs), None
    except (ValueError, np.linalg.LinAlgError) as exc:
        return None, str(exc)


def _fit_payload(fit, error: Optional[str], **extra) -> dict:
    if fit is None:
        extra = {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in extra.items()}
        return {"converged": False, "error": error, **extra}
    payload = fit.to_dict()
    payload.update(extra)
    return payload


# -- experiment implementations ------------------------------------------------------

def _do_rb(cfg: RunConfig):
    run = _Run("rb", cfg)
    data = run_rb(cfg.experiment())
    run.csv("rb_results.csv", data)
    lengths, mean, sem = data.average()
    run.plot("rb_plot.csv", lengths, mean, sem)
    fit, err = _safe_fit(data.fit)
    run.fit("rb_fit.json", _fit_payload(fit, err, e_g=None if fit is None else fit.e_g))
    run.finish()


def _do_refocus(cfg: RunConfig):
    run = _Run("refocus", cfg)
    res = run_refocusing_study(cfg.experiment())
    run.csv("refocus_results.csv", res.dataset)
    lengths, mean, sem = res.dataset.average()
    run.plot("refocus_plot.csv", lengths, mean, sem)
    run.fit("refocus_fit.json", _fit_payload(res.fit, None, e_g=res.e_g, short_fidelity=res.short_fidelity))
    run.finish()


def _do_ramsey(cfg: RunConfig):
    run = _Run("ramsey", cfg)
    r = cfg.data["ramsey"]
    exp = cfg.experiment(ensemble_size=r["ensemble_size"])
    delays = np.arange(0.0, r["max_delay_ms"] * 1e-3 + 1e-12, r["step_us"] * 1e-6)
    scan = run_ramsey(TWO_PI * r["detuning_hz"], delays, exp)
    run.csv("ramsey_scan.csv", scan)
    run.plot("ramsey_plot.csv", scan.column("delay_s"), scan.column("p0"), scan.column("sem"))
    fit, err = _safe_fit(fit_ramsey, scan, frequency_guess=abs(r["detuning_hz"]) or None)
    extra = {} if fit is None else {"t2_star_s": fit.decay_time, "frequency_hz": fit.frequency_hz}
    run.fit("ramsey_fit.json", _fit_payload(None if fit is None else fit.fit, err, **extra))
    run.finish()


def _do_echo(cfg: RunConfig):
    run = _Run("echo", cfg)
    e = cfg.data["echo"]
    offsets = np.linspace(0.0, e["delta_t_span_ms"] * 1e-3, int(e["delta_t_points"]))
    res = run_spin_echo(e["echo_times_s"], offsets, TWO_PI * e["detuning_hz"], cfg.experiment())
    run.csv("echo_scans.csv", res.scans)
    run.csv("echo_amplitudes.csv", res.amplitudes)
    amps = res.amplitudes
    run.plot("echo_plot.csv", amps.column("echo_time_s"), amps.column("amplitude"), amps.column("amplitude_err"))
    run.fit("echo_fit.json", _fit_payload(res.fit, "exponential fit failed", tau_s=res.decay_time))
    run.finish()


def _do_sweep(cfg: RunConfig, kind: str):
    name = f"sweep_{kind}"
    run = _Run(name, cfg)
    s = cfg.data[name]
    exp = cfg.experiment()
    kw = dict(truncation=int(s["truncation"]), n_cg=int(s["n_cg"]), n_pr=int(s["n_pr"]))
    if kind == "detuning":
        scan = run_detuning_sweep(s["grid_hz"], exp, **kw)
    else:
        scan = run_duration_sweep(np.asarray(s["grid_us"]) * 1e-6, exp, **kw)
    x = scan.data[:, 0]
    run.csv(f"{name}.csv", scan)
    run.plot(f"{name}_plot.csv", x, scan.column("fidelity"), scan.column("sem"))
    fit, err = _safe_fit(fit_gaussian, x, scan.column("fidelity"), scan.column("sem"))
    run.fit(f"{name}_fit.json", _fit_payload(fit, err, x_column=scan.columns[0]))
    run.finish()


def _do_hold(cfg: RunConfig):
    run = _Run("hold_time", cfg)
    h = cfg.data["hold_time"]
    kw = dict(truncation=int(h["truncation"]), n_cg=int(h["n_cg"]), n_pr=int(h["n_pr"]))
    res = run_hold_time(np.asarray(h["grid_us"]) * 1e-6, cfg.experiment(), **kw)
    scan = res.scan
    run.csv("hold_time.csv", scan)
    run.plot("hold_time_plot.csv", scan.column("total_time_s"), scan.column("fidelity"), scan.column("sem"))
    run.fit("hold_time_fit.json", _fit_payload(res.fit, "exponential fit failed", tau_s=res.decay_constant))
    run.finish()


_DISPATCH = {
    "rb": _do_rb,
    "refocus": _do_refocus,
    "ramsey": _do_ramsey,
    "echo": _do_echo,
    "sweep-detuning": lambda c: _do_sweep(c, "detuning"),
    "sweep-duration": lambda c: _do_sweep(c, "duration"),
    "hold-time": _do_hold,
}


def _execute(experiment: str, config: Optional[str], out, seed, ensemble, workers):
    try:
        cfg = load_config(config).with_overrides(seed=seed, ensemble=ensemble, workers=workers, output_dir=out)
        cfg.data["experiment"] = experiment
        cfg.experiment()
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    try:
        _DISPATCH[experiment](cfg)
    except ValueError as exc:
        # scan grids and similar values are only checked by the experiment
        click.echo(f"config error: {cfg.source}: {exc}", err=True)
        sys.exit(EXIT_INPUT)


# -- click wiring --------------------------------------------------------------------

def _common(fn):
    fn = click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker threads (default: all cores).")(fn)
    fn = click.option("--ensemble", type=click.IntRange(min=1), default=None, help="Atoms per job.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Master seed.")(fn)
    fn = click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")(fn)
    fn = click.option(
        "--config", "config", default=None, metavar="PATH",
        help="JSON config file, run sidecar, or preset name (paper_defaults, noiseless).",
    )(fn)
    return fn


@click.group()
@click.version_option(__version__, prog_name="rbench")
def main():
    """Simulated single-qubit randomized benchmarking."""


def _make_command(experiment: str):
    @_common
    def command(config, out, seed, ensemble, workers):
        _execute(experiment, config, out, seed, ensemble, workers)

    command.__doc__ = {
        "rb": "Randomized benchmarking decay and fit.",
        "ramsey": "Detuned Ramsey fringe and its decay.",
        "echo": "Detuned spin echo amplitudes versus echo time.",
        "sweep-detuning": "Fixed-length fidelity versus drive detuning.",
        "sweep-duration": "Fixed-length fidelity versus pulse-duration offset.",
        "hold-time": "Fixed-length fidelity versus idle time between pulses.",
        "refocus": "Benchmarking with static detuning disorder only.",
    }[experiment]
    return main.command(experiment)(command)


for _name in EXPERIMENTS:
    _make_command(_name)


@main.command("run")
@_common
def run_cmd(config, out, seed, ensemble, workers):
    """Run the experiment named by the config's ``experiment`` key."""
    try:
        experiment = load_config(config).data["experiment"]
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    _execute(experiment, config, out, seed, ensemble, workers)


# -- fit command ---------------------------------------------------------------------

class CsvError(ValueError):
    pass


_RB_COLUMNS = ("truncation", "fidelity")


def read_fit_csv(path: Path, model: str):
    """Read ``x,y[,yerr]`` (or, for ``rb``, benchmarking results) from a CSV file."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise CsvError(f"{path}: {exc}") from exc
    rows = [r for r in rows if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise CsvError(f"{path}: empty file (expected a header row)")
    header = [h.strip() for h in rows[0]]
    if model == "rb" and all(c in header for c in _RB_COLUMNS):
        xcol, ycol = "truncation", "fidelity"
        ecol = "sem" if "sem" in header else None
    elif "x" in header and "y" in header:
        xcol, ycol = "x", "y"
        ecol = "yerr" if "yerr" in header else None
    else:
        expected = "x,y[,yerr] or truncation,fidelity[,sem]" if model == "rb" else "x,y[,yerr]"
        raise CsvError(f"{path}:1: header {','.join(header)!r} does not match {expected}")
    body = rows[1:]
    if not body:
        raise CsvError(f"{path}: no data rows")
    wanted = [c for c in (xcol, ycol, ecol) if c]
    idx = [header.index(c) for c in wanted]
    values = np.empty((len(body), len(wanted)))
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise CsvError(f"{path}:{r}: expected {len(header)} columns, found {len(row)}")
        for j, (c, i) in enumerate(zip(wanted, idx)):
            try:
                values[r - 2, j] = float(row[i])
            except ValueError:
                raise CsvError(f"{path}:{r}: column {c!r}: {row[i]!r} is not a number") from None
            if not math.isfinite(values[r - 2, j]):
                raise CsvError(f"{path}:{r}: column {c!r}: value is not finite")
    x, y = values[:, 0], values[:, 1]
    yerr = values[:, 2] if ecol else None
    if model == "rb" and "cg_id" in header and ecol == "sem":
        # per-sequence results: average over sequences first
        ds = RbDataset(np.zeros(len(x), int), np.zeros(len(x), int), x.astype(int), y, yerr)
        x, y, yerr = ds.average()
    return x, y, yerr


def fit_from_csv(model: str, x, y, yerr) -> dict:
    if model == "rb":
        fit = fit_rb_decay(x, y, yerr)
        payload = fit.to_dict()
        payload["e_g"] = fit.e_g
        return payload
    fn = {"gaussian": fit_gaussian, "exponential": fit_exponential, "sinusoid": fit_sinusoid}[model]
    payload = fn(x, y, yerr).to_dict()
    if model == "exponential":
        payload["tau_s"] = payload["params"]["tau"]
    return payload


@main.command("fit")
@click.option("--model", type=click.Choice(["rb", "gaussian", "exponential", "sinusoid"]), required=True)
@click.option("--in", "in_path", type=click.Path(dir_okay=False, path_type=Path), required=True, help="Input CSV.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Output JSON (default: stdout).")
def fit_cmd(model, in_path, out_path):
    """Fit a model to an external CSV file.

    The header must be ``x,y[,yerr]``; ``rb`` also accepts the
    ``rb_results.csv`` layout, whose rows are averaged per truncation.
    """
    try:
        x, y, yerr = read_fit_csv(in_path, model)
        payload = fit_from_csv(model, x, y, yerr)
    except (CsvError, ValueError) as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    payload["input"] = str(in_path)
    if out_path is None:
        click.echo(json.dumps(payload, indent=2, sort_keys=True, default=_json_default))
    else:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        _write_json(out_path, payload)
    if not payload.get("converged", False):
        click.echo("error: fit did not converge", err=True)
        sys.exit(EXIT_FIT)


# -- reproduction suite --------------------------------------------------------------

@main.command("paper-suite")
@click.option("--out", type=click.Path(file_okay=False), default="suite", help="Output directory.")
@click.option("--seed", type=int, default=0)
@click.option("--workers", type=click.IntRange(min=1), default=None)
@click.option("--only", multiple=True, help="Run only the named target group (repeatable).")
def paper_suite(out, seed, workers, only):
    """Run every reproduction target and compare against reference values."""
    import os

    from .reproduce import TARGETS, format_table, run_suite

    unknown = [o for o in only if o not in TARGETS]
    if unknown:
        click.echo(f"unknown target(s): {', '.join(unknown)}; choose from {', '.join(TARGETS)}", err=True)
        sys.exit(EXIT_INPUT)
    workers = workers or os.cpu_count() or 1
    rows = run_suite(seed=seed, workers=workers, only=set(only) or None,
                     progress=lambda t: click.echo(f"  {t.name}: {t.value:.5g}", err=True))
    table = format_table(rows)
    click.echo(table)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    failed = [t.name for t in rows if not t.passed]
    _write_json(outdir / "summary.json", {
        "seed": seed,
        "code_version": code_version(),
        "targets": [t.to_dict() for t in rows],
        "failed": failed,
    })
    (outdir / "summary.txt").write_text(table + "\n", encoding="utf-8")
    if failed:
        click.echo("failed: " + ", ".join(failed), err=True)
        sys.exit(EXIT_TARGET_FAILED)


if __name__ == "__main__":
    main()
