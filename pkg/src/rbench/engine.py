"""
Compiled ensemble propagator.

Runs a slot schedule over many atoms at once. Each atom carries its own
static detuning, amplitude factor and per-slot amplitude jitter; decoherence
is applied as a deterministic channel. The reference path built from
:mod:`rbench.spin_core` maps must agree with this to rounding error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numba
import numpy as np

from .noise_models import NoiseConfig
from .rb_sequences import Slot

PULSE = 1
IDLE = 0

# roles whose durations do not follow the pulse-duration offset
_FIXED_ROLES = frozenset({"delay"})


@dataclass(frozen=True)
class SlotArrays:
    kinds: np.ndarray
    phases: np.ndarray
    durations: np.ndarray
    offset_scale: np.ndarray
    gate_end: np.ndarray
    hold_after: np.ndarray

    def __len__(self):
        return len(self.kinds)


def slot_arrays(slots: Iterable[Slot], t_half_pi: float, hold: float = 0.0, trailing_hold: bool = False) -> SlotArrays:
    """Pack slots into flat arrays for the kernel.

    ``hold`` separates consecutive slots; ``trailing_hold`` also adds it after
    the last slot (used when more slots follow in a second kernel call).
    """
    slots = list(slots)
    n = len(slots)
    kinds = np.empty(n, dtype=np.int8)
    phases = np.empty(n)
    durations = np.empty(n)
    scale = np.empty(n)
    gate_end = np.zeros(n, dtype=np.bool_)
    hold_after = np.full(n, float(hold))
    for i, s in enumerate(slots):
        kinds[i] = PULSE if s.kind == "pulse" else IDLE
        phases[i] = s.phase
        durations[i] = s.duration
        scale[i] = 0.0 if s.role in _FIXED_ROLES else s.duration / t_half_pi
        gate_end[i] = s.role == "cg"
    if n and not trailing_hold:
        hold_after[-1] = 0.0
    return SlotArrays(kinds, phases, durations, scale, gate_end, hold_after)


@numba.njit(cache=True, nogil=True)
def _decohere(bx, by, bz, dt, g_iso, g_deph):
    if dt <= 0.0:
        return bx, by, bz
    f_iso = math.exp(-g_iso * dt) if g_iso > 0.0 else 1.0
    f_t = f_iso * (math.exp(-g_deph * dt) if g_deph > 0.0 else 1.0)
    return bx * f_t, by * f_t, bz * f_iso


@numba.njit(cache=True, nogil=True)
def _rotate(bx, by, bz, nx, ny, nz, angle):
    c = math.cos(angle)
    s = math.sin(angle)
    dot = (nx * bx + ny * by + nz * bz) * (1.0 - c)
    cx = ny * bz - nz * by
    cy = nz * bx - nx * bz
    cz = nx * by - ny * bx
    return (
        bx * c + cx * s + nx * dot,
        by * c + cy * s + ny * dot,
        bz * c + cz * s + nz * dot,
    )


@numba.njit(cache=True, nogil=True)
def _precess(bx, by, bz, detuning, dt):
    # rotating-frame free evolution: z rotation by -detuning * dt
    a = -detuning * dt
    c = math.cos(a)
    s = math.sin(a)
    return bx * c - by * s, bx * s + by * c, bz


@numba.njit(cache=True, nogil=True)
def propagate(
    kinds,
    phases,
    durations,
    offset_scale,
    gate_end,
    hold_after,
    rabi,
    detunings,
    amplitudes,
    jitter,
    duration_offset,
    g_iso,
    g_deph,
    gate_depol,
    substeps,
    init,
    snap_after,
):
    """Propagate every atom; returns states after the slot counts in ``snap_after``."""
    n_atoms = init.shape[0]
    n_slots = kinds.shape[0]
    n_snap = snap_after.shape[0]
    has_jitter = jitter.shape[1] > 0
    out = np.empty((n_snap, n_atoms, 3))
    for i in range(n_atoms):
        bx = init[i, 0]
        by = init[i, 1]
        bz = init[i, 2]
        det = detunings[i]
        ptr = 0
        while ptr < n_snap and snap_after[ptr] == 0:
            out[ptr, i, 0] = bx
            out[ptr, i, 1] = by
            out[ptr, i, 2] = bz
            ptr += 1
        for s in range(n_slots):
            dur = durations[s] + duration_offset * offset_scale[s]
            if dur < 0.0:
                dur = 0.0
            if kinds[s] == 1:
                om = rabi * amplitudes[i]
                if has_jitter:
                    om *= 1.0 + jitter[i, s]
                gen = math.sqrt(om * om + det * det)
                if gen > 0.0:
                    nx = om * math.cos(phases[s]) / gen
                    ny = om * math.sin(phases[s]) / gen
                    nz = -det / gen
                    h = dur / substeps
                    for _ in range(substeps):
                        bx, by, bz = _decohere(bx, by, bz, 0.5 * h, g_iso, g_deph)
                        bx, by, bz = _rotate(bx, by, bz, nx, ny, nz, gen * h)
                        bx, by, bz = _decohere(bx, by, bz, 0.5 * h, g_iso, g_deph)
                else:
                    bx, by, bz = _decohere(bx, by, bz, dur, g_iso, g_deph)
            else:
                bx, by, bz = _precess(bx, by, bz, det, dur)
                bx, by, bz = _decohere(bx, by, bz, dur, g_iso, g_deph)
            if gate_end[s] and gate_depol > 0.0:
                f = 1.0 - gate_depol
                bx *= f
                by *= f
                bz *= f
            h_t = hold_after[s]
            if h_t > 0.0:
                bx, by, bz = _precess(bx, by, bz, det, h_t)
                bx, by, bz = _decohere(bx, by, bz, h_t, g_iso, g_deph)
            while ptr < n_snap and snap_after[ptr] == s + 1:
                out[ptr, i, 0] = bx
                out[ptr, i, 1] = by
                out[ptr, i, 2] = bz
                ptr += 1
    return out


def run_slots(
    arrays: SlotArrays,
    rabi: float,
    noise: NoiseConfig,
    detunings: np.ndarray,
    amplitudes: np.ndarray,
    init: np.ndarray,
    jitter: Optional[np.ndarray] = None,
    snap_after: Optional[Iterable[int]] = None,
    substeps: int = 1,
    duration_offset: Optional[float] = None,
) -> np.ndarray:
    """Propagate ``init`` (atoms x 3) through ``arrays``.

    ``detunings`` must already include the systematic and programmed parts.
    Returns an array (n_snap, atoms, 3), or (atoms, 3) when ``snap_after`` is
    omitted.
    """
    n_atoms = init.shape[0]
    if jitter is None:
        jitter = np.zeros((n_atoms, 0))
    single = snap_after is None
    snaps = np.array([len(arrays)] if single else list(snap_after), dtype=np.int64)
    if np.any(np.diff(snaps) < 0) or (len(snaps) and (snaps[0] < 0 or snaps[-1] > len(arrays))):
        raise ValueError("snapshot indices must be ascending and within the schedule")
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    out = propagate(
        arrays.kinds,
        arrays.phases,
        arrays.durations,
        arrays.offset_scale,
        arrays.gate_end,
        arrays.hold_after,
        float(rabi),
        np.ascontiguousarray(detunings, dtype=np.float64),
        np.ascontiguousarray(amplitudes, dtype=np.float64),
        np.ascontiguousarray(jitter, dtype=np.float64),
        float(noise.duration_offset if duration_offset is None else duration_offset),
        float(noise.isotropic_rate),
        float(noise.dephasing_rate),
        float(noise.gate_depolarization),
        int(substeps),
        np.ascontiguousarray(init, dtype=np.float64),
        snaps,
    )
    return out[0] if single else out
