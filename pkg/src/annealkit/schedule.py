"""Annealing schedules.

A :class:`Schedule` pairs envelope functions of the anneal parameter ``s``
(driver strength ``A``, problem strength ``B``, field gain ``C`` and an
optional catalyst envelope ``g``) with a piecewise-linear path ``s(t)``.
Time and energy units are abstract (hbar = 1).
"""

from __future__ import annotations

import bisect
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import FormatError, ParameterError, ValidationError

__all__ = [
    "Envelope",
    "SPath",
    "CatalystTerm",
    "Schedule",
    "ScheduleValue",
    "ScheduleWarning",
    "linear_forward",
    "reverse_path",
    "with_pause",
    "evaluate",
    "loads_schedule",
    "dumps_schedule",
]

CATALYST_TOL = 1e-12


class ScheduleWarning(UserWarning):
    """Envelopes do not start driver-dominated or end problem-dominated."""


@dataclass(frozen=True)
class Envelope:
    """Piecewise-linear function on ``[0, 1]`` given by strictly increasing knots."""

    knots: tuple
    kind: str = field(default="tabulated", compare=False)

    def __post_init__(self):
        knots = tuple((float(s), float(v)) for s, v in self.knots)
        if len(knots) < 2:
            raise ValidationError("an envelope needs at least two knots")
        s = [k[0] for k in knots]
        if s[0] != 0.0 or s[-1] != 1.0:
            raise ValidationError("envelope knots must start at s=0 and end at s=1")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ValidationError("envelope knots must be strictly increasing in s")
        if not all(math.isfinite(v) for _, v in knots):
            raise ValidationError("envelope values must be finite")
        object.__setattr__(self, "knots", knots)

    @classmethod
    def ramp_down(cls) -> "Envelope":
        return cls(((0.0, 1.0), (1.0, 0.0)), "linear")

    @classmethod
    def ramp_up(cls) -> "Envelope":
        return cls(((0.0, 0.0), (1.0, 1.0)), "linear")

    @classmethod
    def constant(cls, value: float) -> "Envelope":
        return cls(((0.0, value), (1.0, value)), "constant")

    @classmethod
    def tabulated(cls, knots: Sequence[Sequence[float]]) -> "Envelope":
        return cls(tuple(tuple(k) for k in knots), "tabulated")

    def __call__(self, s: float) -> float:
        xs, ys = zip(*self.knots)
        return float(np.interp(s, xs, ys))

    def derivative(self, s: float) -> float:
        """Slope of the segment containing ``s`` (right segment at interior knots)."""
        xs = [k[0] for k in self.knots]
        i = min(max(bisect.bisect_right(xs, s) - 1, 0), len(xs) - 2)
        (s0, v0), (s1, v1) = self.knots[i], self.knots[i + 1]
        return (v1 - v0) / (s1 - s0)


@dataclass(frozen=True)
class SPath:
    """Segments ``(duration, s_start, s_end)`` joined continuously."""

    segments: tuple

    def __post_init__(self):
        segs = tuple((float(d), float(a), float(b)) for d, a, b in self.segments)
        if not segs:
            raise ValidationError("a path needs at least one segment")
        for d, a, b in segs:
            if not d > 0 or not math.isfinite(d):
                raise ValidationError(f"segment duration must be positive, got {d}")
            if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
                raise ValidationError("anneal parameter must stay in [0, 1]")
        for (_, _, end), (_, start, _) in zip(segs, segs[1:]):
            if end != start:
                raise ValidationError(f"path discontinuous: {end} -> {start}")
        object.__setattr__(self, "segments", segs)
        starts = [0.0]
        for d, _, _ in segs:
            starts.append(starts[-1] + d)
        object.__setattr__(self, "_starts", tuple(starts))

    @property
    def duration(self) -> float:
        return self._starts[-1]

    def s_at(self, t: float) -> float:
        k = min(bisect.bisect_right(self._starts, t) - 1, len(self.segments) - 1)
        k = max(k, 0)
        d, a, b = self.segments[k]
        frac = (t - self._starts[k]) / d
        frac = min(max(frac, 0.0), 1.0)
        return a + (b - a) * frac

    def joint_jumps(self) -> list[float]:
        return [abs(end - start) for (_, _, end), (_, start, _) in zip(self.segments, self.segments[1:])]


@dataclass(frozen=True)
class CatalystTerm:
    """``g(s) * sum w_ij X_i X_j`` with ``g`` vanishing at both ends."""

    pairs: tuple
    g: Envelope

    def __post_init__(self):
        pairs = []
        for i, j, w in self.pairs:
            i, j = int(i), int(j)
            if i == j:
                raise ValidationError("catalyst pair must join distinct qubits")
            pairs.append((min(i, j), max(i, j), float(w)))
        object.__setattr__(self, "pairs", tuple(pairs))
        if abs(self.g(0.0)) > CATALYST_TOL or abs(self.g(1.0)) > CATALYST_TOL:
            raise ValidationError("catalyst envelope must vanish at s=0 and s=1")


@dataclass(frozen=True)
class Schedule:
    A: Envelope
    B: Envelope
    path: SPath
    C: Envelope = field(default_factory=lambda: Envelope.constant(1.0))
    catalyst: CatalystTerm | None = None

    def __post_init__(self):
        if not self.A(0.0) > self.B(0.0) or not self.A(1.0) < self.B(1.0):
            warnings.warn(
                "schedule does not satisfy A(0) > B(0) and A(1) < B(1)", ScheduleWarning, stacklevel=3
            )

    @property
    def duration(self) -> float:
        return self.path.duration

    def with_path(self, path: SPath) -> "Schedule":
        return Schedule(self.A, self.B, path, self.C, self.catalyst)


class ScheduleValue(NamedTuple):
    s: float
    A: float
    B: float
    C: float
    g: float


def linear_forward(tau: float) -> Schedule:
    """``A = 1 - s``, ``B = s``, ``s`` from 0 to 1 over ``tau``."""
    if not tau > 0:
        raise ParameterError("tau must be positive")
    return Schedule(Envelope.ramp_down(), Envelope.ramp_up(), SPath(((tau, 0.0, 1.0),)))


def reverse_path(
    s_target: float,
    ramp_down: float,
    hold: float,
    ramp_up: float,
    A: Envelope | None = None,
    B: Envelope | None = None,
) -> Schedule:
    """``s``: 1 -> ``s_target``, hold, -> 1. A zero hold gives a V-shaped path."""
    if not 0 < s_target < 1:
        raise ParameterError(f"s_target must lie in (0, 1), got {s_target}")
    if not (ramp_down > 0 and ramp_up > 0 and hold >= 0):
        raise ParameterError("ramps must be positive and hold nonnegative")
    segs = [(ramp_down, 1.0, s_target)]
    if hold > 0:
        segs.append((hold, s_target, s_target))
    segs.append((ramp_up, s_target, 1.0))
    return Schedule(A or Envelope.ramp_down(), B or Envelope.ramp_up(), SPath(tuple(segs)))


def with_pause(base: Schedule, s_pause: float, pause_duration: float) -> Schedule:
    """Insert a constant-``s`` segment where the path first reaches ``s_pause``."""
    if not pause_duration > 0:
        raise ParameterError("pause_duration must be positive")
    segs = list(base.path.segments)
    for k, (d, a, b) in enumerate(segs):
        if min(a, b) <= s_pause <= max(a, b):
            if a == b:
                split = [(d, a, b)]
                at = 0
            else:
                frac = (s_pause - a) / (b - a)
                split = [part for part in ((d * frac, a, s_pause), (d * (1 - frac), s_pause, b)) if part[0] > 0]
                at = 1 if frac > 0 else 0
            split.insert(at, (pause_duration, s_pause, s_pause))
            new = segs[:k] + split + segs[k + 1 :]
            return base.with_path(SPath(tuple(new)))
    raise ParameterError(f"path never reaches s={s_pause}")


def evaluate(sch: Schedule, t: float) -> ScheduleValue:
    tau = sch.path.duration
    if not -1e-12 * tau <= t <= tau * (1 + 1e-12):
        raise ParameterError(f"t={t} outside [0, {tau}]")
    s = sch.path.s_at(t)
    g = sch.catalyst.g(s) if sch.catalyst is not None else 0.0
    return ScheduleValue(s, sch.A(s), sch.B(s), sch.C(s), g)


_DEFAULT_LINEAR = {"A": Envelope.ramp_down, "B": Envelope.ramp_up, "C": lambda: Envelope.constant(1.0)}


def _envelope_from_json(obj, role: str) -> Envelope:
    if "knots" in obj:
        return Envelope.tabulated(obj["knots"])
    kind = obj.get("kind")
    if kind == "linear" and role in _DEFAULT_LINEAR:
        return _DEFAULT_LINEAR[role]()
    raise FormatError(f"envelope {role}: expected 'knots' or kind 'linear'")


def _envelope_to_json(env: Envelope, role: str) -> dict:
    if env.kind == "linear" and role in ("A", "B") and env == _DEFAULT_LINEAR[role]():
        return {"kind": "linear"}
    return {"knots": [list(k) for k in env.knots]}


def loads_schedule(text: str) -> Schedule:
    try:
        obj = json.loads(text)
        A = _envelope_from_json(obj.get("A", {"kind": "linear"}), "A")
        B = _envelope_from_json(obj.get("B", {"kind": "linear"}), "B")
        C = _envelope_from_json(obj.get("C", {"kind": "linear"}), "C")
        catalyst = None
        if obj.get("catalyst_pairs"):
            if "g" not in obj:
                raise FormatError("catalyst_pairs given without envelope g")
            catalyst = CatalystTerm(tuple(tuple(p) for p in obj["catalyst_pairs"]), _envelope_from_json(obj["g"], "g"))
        path = SPath(tuple(tuple(seg) for seg in obj["path"]))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise FormatError(f"malformed schedule: {exc}") from exc
    return Schedule(A, B, path, C, catalyst)


def dumps_schedule(sch: Schedule) -> str:
    obj = {
        "A": _envelope_to_json(sch.A, "A"),
        "B": _envelope_to_json(sch.B, "B"),
        "C": _envelope_to_json(sch.C, "C"),
    }
    if sch.catalyst is not None:
        obj["g"] = _envelope_to_json(sch.catalyst.g, "g")
        obj["catalyst_pairs"] = [list(p) for p in sch.catalyst.pairs]
    obj["path"] = [list(seg) for seg in sch.path.segments]
    return json.dumps(obj)
