"""Discrete-event core: integer-nanosecond clock, event queue, seeded streams."""

from __future__ import annotations

import enum
import hashlib
import heapq
import random
from typing import Any, Callable

NS = 1
US = 1_000
MS = 1_000_000
S = 1_000_000_000


def from_seconds(value: float) -> int:
    return int(round(value * S))


def to_seconds(ticks: int) -> float:
    return ticks / S


class EventKind(enum.Enum):
    ARRIVAL = "arrival"
    AIFS_EXPIRY = "aifs-expiry"
    BACKOFF_SLOT = "backoff-slot"
    SENSING_COMPLETE = "sensing-complete"
    TX_END = "tx-end"
    ACK_TIMEOUT = "ack-timeout"
    PU_STATE_CHANGE = "pu-state-change"
    SCAN_STEP = "scan-step"
    MEDIUM_IDLE = "medium-idle"
    RESUME = "resume"


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled before the current clock."""


class Event:
    __slots__ = ("id", "fire_at", "target", "kind", "callback", "args", "state")

    PENDING, FIRED, CANCELLED = 0, 1, 2

    def __init__(self, id: int, fire_at: int, target: Any, kind: EventKind,
                 callback: Callable[..., None], args: tuple) -> None:
        self.id = id
        self.fire_at = fire_at
        self.target = target
        self.kind = kind
        self.callback = callback
        self.args = args
        self.state = Event.PENDING

    def __repr__(self) -> str:
        return f"Event(id={self.id}, fire_at={self.fire_at}, target={self.target!r}, kind={self.kind.value})"


def derive_seed(master_seed: int, name: str) -> int:
    """Stable 64-bit seed for a named substream."""
    digest = hashlib.blake2b(f"{master_seed}:{name}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


class RngStream(random.Random):
    """A Mersenne Twister stream seeded from ``(master_seed, name)``."""

    def __new__(cls, master_seed: int, name: str):
        return super().__new__(cls)

    def __init__(self, master_seed: int, name: str) -> None:
        self.name = name
        self.stream_seed = derive_seed(master_seed, name)
        super().__init__(self.stream_seed)


class Engine:
    """Single-threaded event scheduler.

    Events firing at the same instant are dispatched in ascending id order,
    which is insertion order.
    """

    def __init__(self, master_seed: int = 0) -> None:
        self.now = 0
        self.master_seed = master_seed
        self._heap: list[tuple[int, int, Event]] = []
        self._next_id = 1
        self._streams: dict[str, RngStream] = {}
        self.scheduled = 0
        self.fired = 0
        self.cancelled = 0

    def schedule(self, at: int, callback: Callable[..., None], *args: Any,
                 target: Any = None, kind: EventKind = EventKind.RESUME) -> Event:
        if at < self.now:
            raise SchedulingError(
                f"cannot schedule {kind.value} for {target!r} at {at} ns; clock is {self.now} ns")
        ev = Event(self._next_id, at, target, kind, callback, args)
        self._next_id += 1
        heapq.heappush(self._heap, (at, ev.id, ev))
        self.scheduled += 1
        return ev

    def cancel(self, ev: Event | None) -> bool:
        if ev is None or ev.state != Event.PENDING:
            return False
        ev.state = Event.CANCELLED
        self.cancelled += 1
        return True

    def pending(self) -> int:
        return self.scheduled - self.fired - self.cancelled

    def run_until(self, t_end: int) -> int:
        if t_end < self.now:
            raise SchedulingError(f"run_until({t_end}) is before clock {self.now}")
        heap = self._heap
        processed = 0
        while heap and heap[0][0] <= t_end:
            at, _, ev = heapq.heappop(heap)
            if ev.state != Event.PENDING:
                continue
            self.now = at
            ev.state = Event.FIRED
            self.fired += 1
            processed += 1
            ev.callback(*ev.args)
        self.now = t_end
        return processed

    def rng_stream(self, name: str) -> RngStream:
        stream = self._streams.get(name)
        if stream is None:
            stream = self._streams[name] = RngStream(self.master_seed, name)
        return stream
