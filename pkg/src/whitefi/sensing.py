"""Sensing types, per-AC sensing strategy, timed channel assessment and handoff.

Four assessment classes trade duration for accuracy:

========== ==================== ====================
type       duration S_d         tells PU from SU
========== ==================== ====================
Coarse     S_d <= 1 ms          no
Moderate   1 < S_d <= 5 ms      no
Fine       5 < S_d <= 50 ms     yes
ExtraFine  S_d > 50 ms          yes
========== ==================== ====================
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .channel import Channel
from .engine import MS, Engine, EventKind
from .frames import AccessCategory


class SensingType(enum.Enum):
    COARSE = "Coarse"
    MODERATE = "Moderate"
    FINE = "Fine"
    EXTRA_FINE = "ExtraFine"

    @property
    def distinguishes_pu(self) -> bool:
        return self in (SensingType.FINE, SensingType.EXTRA_FINE)

    @property
    def duration_range(self) -> tuple[int, float]:
        """Half-open ``(low, high]`` bounds in ns."""
        return _RANGES[self]


_RANGES = {
    SensingType.COARSE: (0, 1 * MS),
    SensingType.MODERATE: (1 * MS, 5 * MS),
    SensingType.FINE: (5 * MS, 50 * MS),
    SensingType.EXTRA_FINE: (50 * MS, math.inf),
}


class SensingOutcome(enum.Enum):
    IDLE = "Idle"
    BUSY_SU = "BusySU"
    BUSY_PU = "BusyPU"
    BUSY_UNKNOWN = "BusyUnknown"


class Action(enum.Enum):
    TRANSMIT = "Transmit"
    DEFER_BACKOFF = "DeferBackoff"
    HANDOFF = "Handoff"
    ESCALATE_FINE = "EscalateFine"


def classify_type(duration: int) -> SensingType:
    if duration <= 0:
        raise ValueError("sensing duration must be positive to have a type")
    if duration <= 1 * MS:
        return SensingType.COARSE
    if duration <= 5 * MS:
        return SensingType.MODERATE
    if duration <= 50 * MS:
        return SensingType.FINE
    return SensingType.EXTRA_FINE


@dataclass(frozen=True)
class SensingSpec:
    stype: SensingType
    duration: int

    def __post_init__(self) -> None:
        low, high = self.stype.duration_range
        if not low < self.duration <= high:
            raise ValueError(f"{self.duration} ns is outside the {self.stype.value} range")


DEFAULT_ADAPTIVE_MS = {
    AccessCategory.AC_VO: 1.0,
    AccessCategory.AC_VI: 5.0,
    AccessCategory.AC_BE: 50.0,
    AccessCategory.AC_BK: 100.0,
}


@dataclass(frozen=True)
class SensingStrategy:
    """Either one fixed duration for every AC or a per-AC duration map.

    A duration of 0 disables the sensing phase (the no-sensing baseline).
    """

    mode: str = "fixed"  # "fixed" | "adaptive"
    fixed: int = 0
    by_ac: tuple[tuple[AccessCategory, int], ...] = ()

    @classmethod
    def fixed_ms(cls, ms: float) -> "SensingStrategy":
        return cls("fixed", int(round(ms * MS)))

    @classmethod
    def adaptive(cls, durations_ms: dict[AccessCategory, float] | None = None) -> "SensingStrategy":
        durations_ms = DEFAULT_ADAPTIVE_MS if durations_ms is None else durations_ms
        return cls("adaptive", 0, tuple((ac, int(round(durations_ms[ac] * MS))) for ac in AccessCategory))

    def __post_init__(self) -> None:
        if self.mode not in ("fixed", "adaptive"):
            raise ValueError(f"unknown sensing strategy mode {self.mode!r}")
        if self.mode == "fixed" and self.fixed < 0:
            raise ValueError("fixed sensing duration must be >= 0")
        if self.mode == "adaptive":
            if {ac for ac, _ in self.by_ac} != set(AccessCategory):
                raise ValueError("adaptive strategy needs a duration for every access category")
            if any(d < 0 for _, d in self.by_ac):
                raise ValueError("sensing durations must be >= 0")

    def duration_for(self, ac: AccessCategory) -> int:
        if self.mode == "fixed":
            return self.fixed
        return dict(self.by_ac)[ac]

    def max_duration(self) -> int:
        if self.mode == "fixed":
            return self.fixed
        return max(d for _, d in self.by_ac)

    def label(self) -> str:
        if self.mode == "fixed":
            return f"fixed:{self.fixed / MS:g}"
        return "adaptive:" + ",".join(f"{d / MS:g}" for _, d in self.by_ac)


def spec_for(ac: AccessCategory, strategy: SensingStrategy) -> SensingSpec | None:
    """Sensing phase for a frame of ``ac``; ``None`` when sensing is disabled."""
    d = strategy.duration_for(ac)
    if d == 0:
        return None
    return SensingSpec(classify_type(d), d)


@dataclass(frozen=True)
class RocModel:
    """False-alarm and missed-detection probabilities per sensing type."""

    rates: tuple[tuple[SensingType, float, float], ...] = (
        (SensingType.COARSE, 0.10, 0.10),
        (SensingType.MODERATE, 0.05, 0.05),
        (SensingType.FINE, 0.01, 0.01),
        (SensingType.EXTRA_FINE, 0.001, 0.001),
    )
    low_snr_penalty: float = 0.15
    penalized: tuple[SensingType, ...] = (SensingType.COARSE, SensingType.MODERATE)

    @classmethod
    def perfect(cls) -> "RocModel":
        return cls(tuple((t, 0.0, 0.0) for t in SensingType), 0.0)

    def __post_init__(self) -> None:
        if {t for t, _, _ in self.rates} != set(SensingType):
            raise ValueError("ROC needs rates for every sensing type")
        for t, pf, pmd in self.rates:
            if not (0.0 <= pf <= 1.0 and 0.0 <= pmd <= 1.0):
                raise ValueError(f"ROC probabilities for {t.value} must lie in [0, 1]")
        perfect = all(pf == 0.0 and pmd == 0.0 for _, pf, pmd in self.rates) and self.low_snr_penalty == 0.0
        object.__setattr__(self, "_perfect", perfect)

    def probabilities(self, stype: SensingType, low_snr: bool = False) -> tuple[float, float]:
        for t, pf, pmd in self.rates:
            if t is stype:
                break
        if low_snr and stype in self.penalized:
            pf = min(1.0, pf + self.low_snr_penalty)
            pmd = min(1.0, pmd + self.low_snr_penalty)
        return pf, pmd

    @property
    def is_perfect(self) -> bool:
        """Error-free at every SNR."""
        return self._perfect


def sense(channel: Channel, spec: SensingSpec, start: int, rng, roc: RocModel, *,
          node: int | None = None, low_snr: bool = False,
          su_detection: str = "end") -> SensingOutcome:
    """Classify the channel after sensing ``[start, start + spec.duration)``.

    Must be called once the window has elapsed. PU presence is judged over
    the whole window. SU presence is judged either over the whole window
    (``su_detection="window"``) or at the decision instant, counting the
    medium reservation of any exchange already under way (``"end"``).
    Transmissions by ``node`` itself are ignored.
    """
    end = start + spec.duration
    pu = channel.pu_active_in(start, end + 1) if channel.pu_intervals else False
    if su_detection == "window":
        su = channel.su_active_in(start, end, exclude=node)
    else:
        su = channel.su_reserved_at(end, exclude=node)
    if roc.is_perfect:
        return classify_truth(spec.stype, pu, su)
    pf, pmd = roc.probabilities(spec.stype, low_snr)
    fine = spec.stype.distinguishes_pu
    if pu:
        if pmd == 0.0 or rng.random() >= pmd:
            return SensingOutcome.BUSY_PU if fine else SensingOutcome.BUSY_UNKNOWN
        pu = False
    if su:
        return SensingOutcome.BUSY_SU if fine else SensingOutcome.BUSY_UNKNOWN
    if pf > 0.0 and rng.random() < pf:
        return SensingOutcome.BUSY_PU if fine else SensingOutcome.BUSY_UNKNOWN
    return SensingOutcome.IDLE


def classify_truth(stype: SensingType, pu: bool, su: bool) -> SensingOutcome:
    """Outcome of an error-free assessment."""
    if pu:
        return SensingOutcome.BUSY_PU if stype.distinguishes_pu else SensingOutcome.BUSY_UNKNOWN
    if su:
        return SensingOutcome.BUSY_SU if stype.distinguishes_pu else SensingOutcome.BUSY_UNKNOWN
    return SensingOutcome.IDLE


def post_sensing_action(outcome: SensingOutcome, stype: SensingType, streak: int,
                        k: float = 5) -> Action:
    """Decide what to do with a sensing result.

    ``streak`` counts consecutive BusyUnknown outcomes including this one.
    """
    if outcome is SensingOutcome.IDLE:
        return Action.TRANSMIT
    if outcome is SensingOutcome.BUSY_PU:
        return Action.HANDOFF
    if outcome is SensingOutcome.BUSY_SU:
        return Action.DEFER_BACKOFF
    if streak >= k:
        return Action.ESCALATE_FINE
    return Action.DEFER_BACKOFF


@dataclass
class HandoffResult:
    switched_to: int | None
    started_at: int
    finished_at: int
    visited: list[int] = field(default_factory=list)

    @property
    def switched(self) -> bool:
        return self.switched_to is not None


class HandoffScan:
    """Visit candidate channels in order, one Fine assessment per visit.

    The first channel that is idle or only shared with other secondary users
    is adopted. ``on_done`` receives a :class:`HandoffResult`; its
    ``switched_to`` is ``None`` when every candidate was PU-occupied.
    """

    def __init__(self, engine: Engine, channels: Sequence[Channel], current: int,
                 scan_duration: int, assess: Callable[[Channel, SensingSpec, int], SensingOutcome],
                 on_done: Callable[[HandoffResult], None], node: int | None = None) -> None:
        self.engine = engine
        self.candidates = [ch for ch in channels if ch.index != current]
        self.spec = SensingSpec(classify_type(scan_duration), scan_duration)
        if not self.spec.stype.distinguishes_pu:
            raise ValueError("handoff scans need a PU-distinguishing sensing duration")
        self.assess = assess
        self.on_done = on_done
        self.node = node
        self.result = HandoffResult(None, engine.now, engine.now)
        self._i = 0

    def start(self) -> None:
        self._visit()

    def _visit(self) -> None:
        if self._i >= len(self.candidates):
            self._finish()
            return
        start = self.engine.now
        self.engine.schedule(start + self.spec.duration, self._step, start,
                             target=("node", self.node), kind=EventKind.SCAN_STEP)

    def _step(self, start: int) -> None:
        ch = self.candidates[self._i]
        self.result.visited.append(ch.index)
        outcome = self.assess(ch, self.spec, start)
        if outcome in (SensingOutcome.IDLE, SensingOutcome.BUSY_SU):
            self.result.switched_to = ch.index
            self._finish()
            return
        self._i += 1
        self._visit()

    def _finish(self) -> None:
        self.result.finished_at = self.engine.now
        self.on_done(self.result)
