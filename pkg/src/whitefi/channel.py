"""Shared-medium ground truth for each channel.

Every node tuned to a channel hears every other node (single collision
domain, zero propagation delay). Primary-user activity is an alternating
on/off renewal process generated up front for the whole run.
"""

from __future__ import annotations

import bisect
import enum
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Protocol

from .engine import Engine, EventKind


class GroundTruth(enum.Enum):
    IDLE = "Idle"
    PU_ACTIVE = "PuActive"
    SU_TRANSMITTING = "SuTransmitting"
    PU_AND_SU = "PuAndSu"


@dataclass(frozen=True)
class PuSchedule:
    mode: str = "off"  # "off" | "alternating"
    mean_on: int = 0
    mean_off: int = 0
    distribution: str = "exponential"

    def __post_init__(self) -> None:
        if self.mode not in ("off", "alternating"):
            raise ValueError(f"unknown PU schedule mode {self.mode!r}")
        if self.distribution != "exponential":
            raise ValueError("only exponential on/off times are supported")
        if self.mode == "alternating" and (self.mean_on <= 0 or self.mean_off <= 0):
            raise ValueError("alternating PU schedule needs positive mean_on and mean_off")

    def intervals(self, horizon: int, rng) -> list[tuple[int, int]]:
        """PU-on intervals ``[start, end)`` covering ``[0, horizon)``.

        The process starts in the off state.
        """
        if self.mode == "off":
            return []
        out = []
        t = 0
        while t < horizon:
            t += max(1, round(rng.expovariate(1.0 / self.mean_off)))
            if t >= horizon:
                break
            on = max(1, round(rng.expovariate(1.0 / self.mean_on)))
            out.append((t, t + on))
            t += on
        return out


class MediumListener(Protocol):
    def medium_busy(self, now: int) -> None: ...
    def medium_idle(self, now: int) -> None: ...


class Transmission:
    __slots__ = ("source", "payload", "channel", "start", "end", "reserve_end",
                 "collided", "pu_hit", "on_end")

    def __init__(self, source: int, payload: Any, channel: int, start: int, end: int,
                 reserve_end: int, on_end: Callable[["Transmission"], None] | None) -> None:
        self.source = source
        self.payload = payload
        self.channel = channel
        self.start = start
        self.end = end
        # NAV: the medium stays reserved until the response frame is over
        self.reserve_end = reserve_end
        self.collided = False
        self.pu_hit = False
        self.on_end = on_end

    def __repr__(self) -> str:
        return (f"Transmission(src={self.source}, ch={self.channel}, [{self.start}, {self.end}), "
                f"collided={self.collided}, pu_hit={self.pu_hit})")


class Channel:
    def __init__(self, engine: Engine, index: int, pu_intervals: list[tuple[int, int]] = (),
                 history: int = 0) -> None:
        self.engine = engine
        self.index = index
        self.pu_intervals = list(pu_intervals)
        self._pu_starts = [a for a, _ in self.pu_intervals]
        self.active: list[Transmission] = []
        # kept for window queries and ground-truth lookups in the past
        self.recent: deque[Transmission] = deque()
        self.history = history
        self._max_air = 0
        self._max_span = 0
        self._reserve_until = 0
        self._busy = False
        self.listeners: list[MediumListener] = []
        self.log: list[Transmission] | None = None
        for start, end in self.pu_intervals:
            engine.schedule(start, self._on_pu_change, target=("channel", index),
                            kind=EventKind.PU_STATE_CHANGE)
            engine.schedule(end, self._on_pu_change, target=("channel", index),
                            kind=EventKind.PU_STATE_CHANGE)

    # ---- primary user -------------------------------------------------

    def pu_on(self, t: int) -> bool:
        i = bisect.bisect_right(self._pu_starts, t) - 1
        return i >= 0 and t < self.pu_intervals[i][1]

    def pu_active_in(self, t0: int, t1: int) -> bool:
        """True iff the PU is on at any instant of ``[t0, t1)``."""
        if t1 <= t0:
            raise ValueError("pu_active_in needs t1 > t0")
        i = bisect.bisect_right(self._pu_starts, t0) - 1
        if i >= 0 and t0 < self.pu_intervals[i][1]:
            return True
        return i + 1 < len(self._pu_starts) and self._pu_starts[i + 1] < t1

    # ---- secondary users ----------------------------------------------

    def begin_transmission(self, node: int, payload: Any, duration: int, now: int,
                           reserve: int = 0,
                           on_end: Callable[[Transmission], None] | None = None) -> Transmission:
        """Put a frame on the air for ``[now, now + duration)``.

        ``reserve`` extends the virtual-carrier reservation past the end of
        the frame (SIFS + ACK for data frames).
        """
        if duration <= 0:
            raise ValueError("transmission duration must be positive")
        end = now + duration
        tx = Transmission(node, payload, self.index, now, end, end + reserve, on_end)
        for other in self.active:
            if other.end > now:
                other.collided = True
                tx.collided = True
        if self.pu_intervals:
            tx.pu_hit = self.pu_active_in(now, end)
        self.active.append(tx)
        self.recent.append(tx)
        if self.log is not None:
            self.log.append(tx)
        if duration > self._max_air:
            self._max_air = duration
        if tx.reserve_end - now > self._max_span:
            self._max_span = tx.reserve_end - now
        horizon = now - self.history - self._max_span
        recent = self.recent
        while recent and recent[0].reserve_end < horizon:
            recent.popleft()
        if tx.reserve_end > self._reserve_until:
            self._reserve_until = tx.reserve_end
            self.engine.schedule(tx.reserve_end, self._check_idle, target=("channel", self.index),
                                 kind=EventKind.MEDIUM_IDLE)
        self.engine.schedule(end, self._end_transmission, tx, target=("channel", self.index),
                             kind=EventKind.TX_END)
        self._update(now)
        return tx

    def _end_transmission(self, tx: Transmission) -> None:
        self.active.remove(tx)
        if tx.on_end is not None:
            tx.on_end(tx)

    def transmissions_at(self, t: int) -> list[Transmission]:
        return [tx for tx in self.recent if tx.start <= t < tx.end]

    def su_active_in(self, t0: int, t1: int, exclude: int | None = None) -> bool:
        """Any other node's frame on the air during ``[t0, t1)``."""
        limit = t0 - self._max_air
        for tx in reversed(self.recent):
            if tx.start < limit:
                break
            if tx.source != exclude and tx.start < t1 and tx.end > t0:
                return True
        return False

    def su_reserved_at(self, t: int, exclude: int | None = None) -> bool:
        """Medium held by another node's exchange at ``t`` (frame or NAV).

        Exchanges that begin exactly at ``t`` are not yet detectable.
        """
        if t >= self._reserve_until:
            return False
        limit = t - self._max_span
        for tx in reversed(self.recent):
            if tx.start < limit:
                break
            if tx.source != exclude and tx.start < t < tx.reserve_end:
                return True
        return False

    # ---- medium state -------------------------------------------------

    def ground_truth(self, t: int) -> GroundTruth:
        pu = self.pu_on(t)
        su = any(tx.start <= t < tx.end for tx in self.recent)
        if pu and su:
            return GroundTruth.PU_AND_SU
        if pu:
            return GroundTruth.PU_ACTIVE
        if su:
            return GroundTruth.SU_TRANSMITTING
        return GroundTruth.IDLE

    def carrier_busy(self, t: int) -> bool:
        return self.ground_truth(t) is not GroundTruth.IDLE

    def medium_busy(self, now: int) -> bool:
        """Physical or virtual carrier busy as seen by a MAC at ``now``."""
        if now < self._reserve_until:
            return True
        return bool(self.pu_intervals) and self.pu_on(now)

    @property
    def busy(self) -> bool:
        return self._busy

    def _check_idle(self) -> None:
        self._update(self.engine.now)

    def _on_pu_change(self) -> None:
        self._update(self.engine.now)

    def _update(self, now: int) -> None:
        busy = self.medium_busy(now)
        if busy == self._busy:
            return
        self._busy = busy
        for listener in list(self.listeners):
            if busy:
                listener.medium_busy(now)
            else:
                listener.medium_idle(now)

    def attach(self, listener: MediumListener) -> None:
        self.listeners.append(listener)

    def detach(self, listener: MediumListener) -> None:
        self.listeners.remove(listener)
