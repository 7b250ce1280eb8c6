"""Application traffic: voice, video conferencing and heavy email sources.

Application messages larger than the maximum transmitter frame size are
split into full-size fragments plus a remainder; each fragment becomes an
independent MAC frame stamped with the message arrival time.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterator

from .engine import MS, S
from .frames import MAX_TX_FRAME_BYTES, AccessCategory, Frame

MODELS = ("VoiceCBR", "VideoConf", "EmailHeavy", "Poisson", "Saturated")

DEFAULT_AC = {
    "VoiceCBR": AccessCategory.AC_VO,
    "VideoConf": AccessCategory.AC_VI,
    "EmailHeavy": AccessCategory.AC_BE,
    "Poisson": AccessCategory.AC_BE,
    "Saturated": AccessCategory.AC_BE,
}


@dataclass(frozen=True)
class ArrivalProcess:
    """Message size and timing.

    ``period`` drives deterministic sources, ``mean_interval`` drives
    exponential ones; ``depth`` is the backlog a saturated source keeps.
    """

    message_bytes: int
    period: int = 0
    mean_interval: int = 0
    depth: int = 0

    @property
    def deterministic(self) -> bool:
        return self.period > 0

    def nominal_bps(self) -> float:
        if self.period:
            return self.message_bytes * 8 * S / self.period
        if self.mean_interval:
            return self.message_bytes * 8 * S / self.mean_interval
        return float("inf")


DEFAULT_PROCESS = {
    "VoiceCBR": ArrivalProcess(160, period=20 * MS),
    "VideoConf": ArrivalProcess(12000, period=S // 30),
    "EmailHeavy": ArrivalProcess(100_000, mean_interval=2 * S),
    "Poisson": ArrivalProcess(1500, mean_interval=1 * MS),
    "Saturated": ArrivalProcess(1500, depth=1),
}


@dataclass(frozen=True)
class FlowSpec:
    src: int
    dst: int
    model: str
    ac: AccessCategory | None = None
    start: int = 0
    stop: int | None = None
    relay: int | None = None
    process: ArrivalProcess | None = None

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown traffic model {self.model!r}; expected one of {MODELS}")
        if self.ac is None:
            object.__setattr__(self, "ac", DEFAULT_AC[self.model])
        if self.process is None:
            object.__setattr__(self, "process", DEFAULT_PROCESS[self.model])
        if self.stop is not None and self.start >= self.stop:
            raise ValueError("flow start must precede stop")

    def with_process(self, **changes) -> "FlowSpec":
        return replace(self, process=replace(self.process, **changes))


def fragment(message_bytes: int, max_bytes: int = MAX_TX_FRAME_BYTES) -> list[int]:
    full, rest = divmod(message_bytes, max_bytes)
    return [max_bytes] * full + ([rest] if rest else [])


def arrivals(flow: FlowSpec, rng, stop: int) -> Iterator[int]:
    """Message arrival instants in ``(start, min(stop, flow.stop))``."""
    proc = flow.process
    end = stop if flow.stop is None else min(stop, flow.stop)
    t = flow.start
    if proc.period:
        while True:
            t += proc.period
            if t >= end:
                return
            yield t
    elif proc.mean_interval:
        rate = 1.0 / proc.mean_interval
        while True:
            t += max(1, round(rng.expovariate(rate)))
            if t >= end:
                return
            yield t


@dataclass
class FrameFactory:
    ids: Iterator[int] = field(default_factory=lambda: itertools.count(1))
    msgs: Iterator[int] = field(default_factory=lambda: itertools.count(1))

    def message(self, flow: FlowSpec, flow_index: int, t: int) -> list[Frame]:
        first_hop = flow.relay if flow.relay is not None else flow.dst
        msg = next(self.msgs)
        return [Frame(next(self.ids), flow.src, first_hop, flow.ac, size * 8, t,
                      final_dst=flow.dst, flow=flow_index, msg=msg)
                for size in fragment(flow.process.message_bytes)]


def generate(flow: FlowSpec, rng, stop: int, factory: FrameFactory | None = None,
             flow_index: int = 0) -> Iterator[tuple[int, Frame]]:
    """Yield ``(arrival_time, frame)`` pairs; fragments share an arrival time."""
    factory = factory or FrameFactory()
    for t in arrivals(flow, rng, stop):
        for f in factory.message(flow, flow_index, t):
            yield t, f
