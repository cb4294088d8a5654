"""
Randomized gate programs: Pauli randomizations (PR), computational gates (CG),
calculated recovery blocks, and compilation to timed pulse schedules with
virtual-Z frame tracking.

A randomized computational gate is a PR (``exp(+-i s_p pi/2)``, p in I,X,Y,Z)
followed by a CG (``exp(+-i s_c pi/4)``, c in X,Y). A positive sign is a
right-handed rotation about the axis; a negative sign is realized by adding
pi to the drive phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .spin_core import AffineBlochMap, BlochState, axis_angle_matrix, rotation_map

PAULI_LABELS = ("I", "X", "Y", "Z")
CG_AXES = ("X", "Y")
AXIS_PHASE = {"X": 0.0, "Y": math.pi / 2}

DEFAULT_TRUNCATIONS = (1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 145, 235, 380, 615, 995)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PrOp:
    pauli: str
    sign: int = 1

    def __post_init__(self):
        if self.pauli not in PAULI_LABELS:
            raise ValueError(f"unknown Pauli label {self.pauli!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def ideal_map(self) -> AffineBlochMap:
        if self.pauli == "I":
            return AffineBlochMap.identity()
        if self.pauli == "Z":
            # a pi rotation about z looks the same for either sign
            return AffineBlochMap(axis_angle_matrix((0.0, 0.0, 1.0), math.pi), np.zeros(3))
        return rotation_map(signed_phase(self.pauli, self.sign), math.pi)

    def __str__(self):
        return f"{'+' if self.sign > 0 else '-'}{self.pauli}"


@dataclass(frozen=True)
class CgOp:
    axis: str
    sign: int = 1

    def __post_init__(self):
        if self.axis not in CG_AXES:
            raise ValueError(f"computational gates act about X or Y, got {self.axis!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def ideal_map(self) -> AffineBlochMap:
        return rotation_map(signed_phase(self.axis, self.sign), math.pi / 2)

    def __str__(self):
        return f"{'+' if self.sign > 0 else '-'}{self.axis}"


def signed_phase(axis: str, sign: int) -> float:
    return AXIS_PHASE[axis] + (0.0 if sign > 0 else math.pi)


@dataclass(frozen=True)
class RecoveryBlock:
    """Final PR, pi/2 pulse (``axis=None`` means no drive), PR."""

    pre_pr: PrOp
    axis: Optional[str]
    sign: int
    post_pr: PrOp
    expected_outcome: int

    def ideal_maps(self) -> list[AffineBlochMap]:
        pulse = AffineBlochMap.identity() if self.axis is None else CgOp(self.axis, self.sign).ideal_map()
        return [self.pre_pr.ideal_map(), pulse, self.post_pr.ideal_map()]


@dataclass(frozen=True)
class TimingConfig:
    """Pulse timing in seconds. ``t_pi`` is always twice ``t_half_pi``."""

    t_half_pi: float = 31.05e-6
    hold_time: float = 0.0
    prep_duration: Optional[float] = None
    readout_duration: Optional[float] = None

    def __post_init__(self):
        if self.t_half_pi <= 0:
            raise ValueError("t_half_pi must be positive")
        if self.hold_time < 0:
            raise ValueError("hold_time must be non-negative")

    @property
    def t_pi(self) -> float:
        return 2.0 * self.t_half_pi

    @property
    def rabi_rate(self) -> float:
        return (math.pi / 2) / self.t_half_pi

    @property
    def prep_time(self) -> float:
        return self.t_pi if self.prep_duration is None else self.prep_duration

    @property
    def readout_time(self) -> float:
        return self.t_pi if self.readout_duration is None else self.readout_duration

    @property
    def gate_time(self) -> float:
        """Duration of one randomized computational gate (PR + CG), no holds."""
        return self.t_pi + self.t_half_pi


@dataclass(frozen=True)
class Slot:
    """One timed element of a compiled schedule.

    ``kind`` is ``"pulse"`` (driven rotation) or ``"idle"`` (I/Z PR or a
    frame-only recovery slot). ``angle`` is the nominal rotation angle and
    ``phase`` already includes the accumulated frame.
    """

    kind: str
    phase: float
    angle: float
    duration: float
    role: str = "pr"


@dataclass(frozen=True)
class CompiledSchedule:
    slots: tuple[Slot, ...]
    hold_time: float
    expected_outcome: int
    final_frame: float = 0.0

    def __len__(self):
        return len(self.slots)

    @property
    def total_duration(self) -> float:
        holds = self.hold_time * max(len(self.slots) - 1, 0)
        return math.fsum(s.duration for s in self.slots) + holds

    @property
    def n_pulses(self) -> int:
        return len(self.slots)

    def to_text(self) -> str:
        lines = [
            f"# expected_outcome={self.expected_outcome}",
            f"# hold_time={self.hold_time!r}",
            "# kind\tphase\tangle\tduration",
        ]
        lines += [f"{s.kind}\t{s.phase!r}\t{s.angle!r}\t{s.duration!r}" for s in self.slots]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CompiledSchedule":
        expected = 0
        hold = 0.0
        slots = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("expected_outcome="):
                    expected = int(body.split("=", 1)[1])
                elif body.startswith("hold_time="):
                    hold = float(body.split("=", 1)[1])
                continue
            kind, phase, angle, duration = line.split("\t")
            slots.append(Slot(kind, float(phase), float(angle), float(duration), role="?"))
        return cls(tuple(slots), hold, expected)


@dataclass(frozen=True)
class RbSequenceSet:
    cg_streams: tuple[tuple[CgOp, ...], ...]
    pr_streams: tuple[tuple[PrOp, ...], ...]
    truncations: tuple[int, ...]
    master_seed: int
    tag: str = "rb"

    @property
    def n_cg(self) -> int:
        return len(self.cg_streams)

    @property
    def n_pr(self) -> int:
        return len(self.pr_streams)

    def jobs(self) -> list[tuple[int, int, int]]:
        """All (cg_id, pr_id, l) combinations in canonical order."""
        return [
            (c, p, l)
            for c in range(self.n_cg)
            for p in range(self.n_pr)
            for l in self.truncations
        ]


# -- random draws -------------------------------------------------------------

def sample_pr(rng: np.random.Generator) -> PrOp:
    k = int(rng.integers(8))
    return PrOp(PAULI_LABELS[k >> 1], 1 if k & 1 == 0 else -1)


def sample_cg(rng: np.random.Generator) -> CgOp:
    k = int(rng.integers(4))
    return CgOp(CG_AXES[k >> 1], 1 if k & 1 == 0 else -1)


def _sample_sign(rng: np.random.Generator) -> int:
    return 1 if int(rng.integers(2)) == 0 else -1


def build_sequence_set(
    n_cg: int = 4,
    n_pr: int = 8,
    truncations: Sequence[int] = DEFAULT_TRUNCATIONS,
    master_seed: int = 0,
    tag: str = "rb",
) -> RbSequenceSet:
    """Draw independent CG and PR streams long enough for every truncation."""
    from .seeding import child_rng

    truncations = tuple(int(l) for l in truncations)
    if not truncations:
        raise ValueError("truncations must not be empty")
    if n_cg < 1 or n_pr < 1:
        raise ValueError("n_cg and n_pr must be at least 1")
    if any(l < 1 for l in truncations):
        raise ValueError("truncation lengths must be positive")
    if any(b <= a for a, b in zip(truncations, truncations[1:])):
        raise ValueError("truncations must be strictly ascending")
    length = truncations[-1]
    cg_streams = []
    for c in range(n_cg):
        rng = child_rng(master_seed, f"{tag}-cg", c)
        cg_streams.append(tuple(sample_cg(rng) for _ in range(length)))
    pr_streams = []
    for p in range(n_pr):
        rng = child_rng(master_seed, f"{tag}-pr", p)
        pr_streams.append(tuple(sample_pr(rng) for _ in range(length)))
    return RbSequenceSet(tuple(cg_streams), tuple(pr_streams), truncations, master_seed, tag)


# -- ideal evolution ------------------------------------------------------------

def ideal_trace(cg_stream: Sequence[CgOp], pr_stream: Sequence[PrOp], l: int) -> BlochState:
    """Noise-free state after the first ``l`` (PR, CG) pairs, starting from |0>."""
    if l > len(cg_stream) or l > len(pr_stream):
        raise ValueError("truncation exceeds stream length")
    b = np.array([0.0, 0.0, 1.0])
    for k in range(l):
        b = pr_stream[k].ideal_map().linear @ b
        b = cg_stream[k].ideal_map().linear @ b
        # states stay on signed coordinate axes; snap away rounding drift
        b = np.round(b)
    return BlochState.from_array(b)


def _pauli_axis(vec: np.ndarray) -> int:
    """Index of the coordinate axis a Pauli eigenstate lies on."""
    vec = np.asarray(vec, dtype=float)
    k = int(np.argmax(np.abs(vec)))
    if abs(abs(vec[k]) - 1.0) > 1e-9 or np.linalg.norm(np.delete(vec, k)) > 1e-9:
        raise ValueError(f"{vec} is not a Pauli eigenstate")
    return k


def compute_recovery(
    ideal_pre: BlochState,
    rng: np.random.Generator,
    pre_pr: Optional[PrOp] = None,
    sign: Optional[int] = None,
    post_pr: Optional[PrOp] = None,
) -> RecoveryBlock:
    """Choose the recovery block that ends on a z eigenstate.

    Random draws are consumed in the order pre PR, pulse sign, post PR; any
    element passed explicitly still consumes its draw so the stream stays
    aligned.
    """
    vec = ideal_pre.as_array()
    _pauli_axis(vec)
    drawn_pre = sample_pr(rng)
    drawn_sign = _sample_sign(rng)
    drawn_post = sample_pr(rng)
    pre_pr = drawn_pre if pre_pr is None else pre_pr
    sign = drawn_sign if sign is None else sign
    post_pr = drawn_post if post_pr is None else post_pr

    b = np.round(pre_pr.ideal_map().linear @ vec)
    k = _pauli_axis(b)
    if k == 2:
        axis = None
    else:
        # rotating about the perpendicular equatorial axis moves b to a pole
        axis = "Y" if k == 0 else "X"
        b = np.round(CgOp(axis, sign).ideal_map().linear @ b)
    b = np.round(post_pr.ideal_map().linear @ b)
    if _pauli_axis(b) != 2:
        raise AssertionError("recovery failed to reach a z eigenstate")
    expected = 0 if b[2] > 0 else 1
    return RecoveryBlock(pre_pr, axis, sign, post_pr, expected)


# -- compilation ----------------------------------------------------------------

def _pr_slot(op: PrOp, frame: float, timing: TimingConfig, role: str) -> tuple[Slot, float]:
    if op.pauli in ("X", "Y"):
        phase = (signed_phase(op.pauli, op.sign) + frame) % TWO_PI
        return Slot("pulse", phase, math.pi, timing.t_pi, role), frame
    if op.pauli == "Z":
        frame = (frame + math.pi) % TWO_PI
    return Slot("idle", 0.0, 0.0, timing.t_pi, role), frame


def _half_pi_slot(axis: Optional[str], sign: int, frame: float, timing: TimingConfig, role: str) -> Slot:
    if axis is None:
        return Slot("idle", 0.0, 0.0, timing.t_half_pi, role)
    phase = (signed_phase(axis, sign) + frame) % TWO_PI
    return Slot("pulse", phase, math.pi / 2, timing.t_half_pi, role)


def compile_gates(
    cg_stream: Sequence[CgOp], pr_stream: Sequence[PrOp], l: int, timing: TimingConfig, frame: float = 0.0
) -> tuple[list[Slot], float]:
    """Compile the first ``l`` gate pairs; returns the slots and the final frame."""
    slots = []
    for k in range(l):
        slot, frame = _pr_slot(pr_stream[k], frame, timing, "pr")
        slots.append(slot)
        slots.append(_half_pi_slot(cg_stream[k].axis, cg_stream[k].sign, frame, timing, "cg"))
    return slots, frame


def compile_recovery(recovery: RecoveryBlock, frame: float, timing: TimingConfig) -> tuple[list[Slot], float]:
    pre, frame = _pr_slot(recovery.pre_pr, frame, timing, "recovery_pr")
    pulse = _half_pi_slot(recovery.axis, recovery.sign, frame, timing, "recovery")
    post, frame = _pr_slot(recovery.post_pr, frame, timing, "recovery_pr")
    return [pre, pulse, post], frame


def compile_schedule(
    cg_stream: Sequence[CgOp],
    pr_stream: Sequence[PrOp],
    l: int,
    recovery: RecoveryBlock,
    timing: TimingConfig = TimingConfig(),
) -> CompiledSchedule:
    """Compile a truncated sequence plus recovery into ``2 l + 3`` timed slots.

    Z Pauli randomizations become idles and shift the drive phase of every
    later pulse by pi. ``timing.hold_time`` separates consecutive slots.
    """
    gates, frame = compile_gates(cg_stream, pr_stream, l, timing)
    tail, frame = compile_recovery(recovery, frame, timing)
    return CompiledSchedule(tuple(gates + tail), timing.hold_time, recovery.expected_outcome, frame)


def schedule_ideal_map(schedule: CompiledSchedule) -> AffineBlochMap:
    """Noise-free map of a compiled schedule (virtual Z leaves a z-rotation residue)."""
    total = AffineBlochMap.identity()
    for slot in schedule.slots:
        if slot.kind == "pulse":
            total = rotation_map(slot.phase, slot.angle) @ total
    return total


# convenience used by tests and the experiments layer
def job_schedule(
    sequences: RbSequenceSet, cg_id: int, pr_id: int, l: int, timing: TimingConfig = TimingConfig()
) -> CompiledSchedule:
    recovery = job_recovery(sequences, cg_id, pr_id, l)
    return compile_schedule(sequences.cg_streams[cg_id], sequences.pr_streams[pr_id], l, recovery, timing)


def job_recovery(sequences: RbSequenceSet, cg_id: int, pr_id: int, l: int) -> RecoveryBlock:
    from .seeding import child_rng

    cg = sequences.cg_streams[cg_id]
    pr = sequences.pr_streams[pr_id]
    rng = child_rng(sequences.master_seed, f"{sequences.tag}-recovery", cg_id, pr_id, l)
    return compute_recovery(ideal_trace(cg, pr, l), rng)


__all__ = [
    "DEFAULT_TRUNCATIONS",
    "CgOp",
    "CompiledSchedule",
    "PrOp",
    "RbSequenceSet",
    "RecoveryBlock",
    "Slot",
    "TimingConfig",
    "build_sequence_set",
    "compile_schedule",
    "compute_recovery",
    "ideal_trace",
    "job_schedule",
    "sample_cg",
    "sample_pr",
]
