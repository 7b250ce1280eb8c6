"""Per-node IEEE 802.11e EDCA MAC with a pre-transmission sensing phase.

Each station keeps four AC queues that contend in parallel. An AC waits for
the medium to stay idle for AIFS[ac], then counts down its backoff one slot
at a time, freezing whenever the medium turns busy. Countdown is tracked
lazily: a station holds a single pending event for the earliest AC to reach
zero, and counters are settled only when the medium turns busy or the
station leaves the idle state.

The AC that wins runs its sensing phase (if the strategy gives it one),
then acts on the outcome: transmit, redraw backoff, or hand off to another
channel. With ``sense_point="pre_contention"`` the sensing phase runs
before the countdown instead, and a cleared AC transmits as soon as its
backoff expires. ACK frames are sent SIFS after a data frame with no sensing.
"""

from __future__ import annotations

import enum
from typing import TYPE_CHECKING, Callable, Iterable

from .engine import EventKind
from .frames import AccessCategory, EnqueueResult, Frame, MAX_RX_FRAME_BYTES, TxQueue, aifs
from .sensing import (Action, HandoffResult, HandoffScan, SensingOutcome, SensingSpec,
                      SensingType, classify_type, post_sensing_action, sense, spec_for)

if TYPE_CHECKING:
    from .network import Network

ACS = tuple(AccessCategory)


class TxResult(enum.Enum):
    SUCCESS = "Success"
    COLLISION = "Collision"
    PU_HIT = "PuHit"
    ACK_TIMEOUT = "AckTimeout"


class TxOutcome(enum.Enum):
    DONE = "Done"
    RETRY = "Retry"
    DROPPED = "Dropped"


def draw_backoff(cw: int, rng) -> int:
    """Uniform integer in ``[0, cw]``."""
    if cw < 0:
        raise ValueError("contention window must be >= 0")
    return int(rng.random() * (cw + 1))


def escalate_cw(cw: int, cw_max: int) -> int:
    return min(2 * (cw + 1) - 1, cw_max)


def resolve_internal_contention(ready: Iterable[AccessCategory]) -> tuple[AccessCategory, set[AccessCategory]]:
    """Highest-priority AC wins a same-slot tie; the rest are losers."""
    ready = set(ready)
    if not ready:
        raise ValueError("internal contention needs at least one ready AC")
    winner = min(ready)
    return winner, ready - {winner}


class AcStats:
    __slots__ = ("enqueued", "delivered", "dropped", "overflow", "rejected", "attempts",
                 "collisions", "pu_hits", "ack_timeouts", "internal_collisions")

    def __init__(self) -> None:
        for name in self.__slots__:
            setattr(self, name, 0)

    def as_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in self.__slots__}


class Station:
    """EDCA MAC state of one node."""

    IDLE, SENSING, TX, HANDOFF, SUSPENDED = "idle", "sensing", "tx", "handoff", "suspended"

    def __init__(self, net: "Network", node_id: int, channel: int = 0) -> None:
        self.net = net
        self.id = node_id
        self.engine = net.engine
        phy = self.phy = net.phy
        self.slot = phy.slot_time
        self.params = [phy.edca(ac) for ac in ACS]
        self.aifs = [aifs(ac, phy) for ac in ACS]
        self.specs = [spec_for(ac, net.strategy) for ac in ACS]
        self.queues = [TxQueue(ac) for ac in ACS]
        self.cw = [p.cw_min for p in self.params]
        self.counter: list[int | None] = [None] * 4
        self.ref = [0] * 4
        self.stats = [AcStats() for _ in ACS]
        self.rng = self.engine.rng_stream(f"backoff.node{node_id}")
        self.sense_rng = self.engine.rng_stream(f"sensing.roc.node{node_id}")
        self.on_departure: list[Callable[[AccessCategory, int], None] | None] = [None] * 4

        self.state = Station.IDLE
        self.channel = net.channels[channel]
        self.channel.attach(self)
        self.idle_since: int | None = None if self.channel.busy else 0
        self._contend_ev = None
        self._ack_ev = None
        self._tx = None
        self.streak = 0
        self.pre = net.sense_point == "pre_contention"
        self.cleared = [False] * 4
        self.outcomes: dict[tuple[SensingType, SensingOutcome], int] = {}

    # ---- queueing -----------------------------------------------------

    def enqueue(self, f: Frame, now: int) -> EnqueueResult:
        q = self.queues[f.ac]
        was_empty = not q.frames
        res = q.offer(f, now)
        st = self.stats[f.ac]
        if res is EnqueueResult.ACCEPTED:
            st.enqueued += 1
            if was_empty:
                self._new_head(f.ac, now)
        elif res is EnqueueResult.DROPPED_OVERFLOW:
            st.overflow += 1
        else:
            st.rejected += 1
        return res

    def _new_head(self, ac: int, now: int) -> None:
        self.counter[ac] = draw_backoff(self.cw[ac], self.rng)
        if self.state == Station.IDLE and self._presense(now):
            return
        if self.state == Station.IDLE and self.idle_since is not None:
            # AIFS is timed from the arrival of the new head
            self.ref[ac] = now
            self._arm()

    # ---- medium notifications -----------------------------------------

    def medium_busy(self, now: int) -> None:
        self.idle_since = None
        if self.state != Station.IDLE:
            return
        ev = self._contend_ev
        if ev is not None and ev.fire_at == now and ev.state == ev.PENDING:
            # decided in this slot already: transmits into the same slot
            return
        self.engine.cancel(ev)
        self._contend_ev = None
        self._settle(now)

    def medium_idle(self, now: int) -> None:
        self.idle_since = now
        if self.state == Station.IDLE:
            self._resume(now)

    # ---- contention ---------------------------------------------------

    def _settle(self, now: int) -> None:
        """Apply the slots counted since the last reference point."""
        slot = self.slot
        for ac in ACS:
            c = self.counter[ac]
            if c:
                elapsed = (now - self.ref[ac] - self.aifs[ac]) // slot
                if elapsed > 0:
                    self.counter[ac] = c - elapsed if elapsed < c else 0

    def _resume(self, now: int) -> None:
        for ac in ACS:
            self.ref[ac] = now
        self._arm()

    def _arm(self) -> None:
        best = None
        slot = self.slot
        for ac in ACS:
            c = self.counter[ac]
            if c is not None and self.queues[ac].frames:
                t = self.ref[ac] + self.aifs[ac] + c * slot
                if best is None or t < best:
                    best = t
        ev = self._contend_ev
        if ev is not None and ev.state == ev.PENDING:
            if best is not None and ev.fire_at == best:
                return
            self.engine.cancel(ev)
        self._contend_ev = None
        if best is not None:
            self._contend_ev = self.engine.schedule(best, self._on_backoff_zero, target=self.id,
                                                    kind=EventKind.BACKOFF_SLOT)

    def _on_backoff_zero(self) -> None:
        now = self.engine.now
        self._contend_ev = None
        slot = self.slot
        zero = []
        for ac in ACS:
            c = self.counter[ac]
            if c is not None and self.queues[ac].frames:
                if self.ref[ac] + self.aifs[ac] + c * slot == now:
                    zero.append(ac)
        self._settle(now)
        winner, losers = resolve_internal_contention(zero)
        # virtual collision: losers back off as after an external collision
        for ac in losers:
            self.stats[ac].internal_collisions += 1
            self.cw[ac] = escalate_cw(self.cw[ac], self.params[ac].cw_max)
            self.counter[ac] = draw_backoff(self.cw[ac], self.rng)
        self._access(winner, now)

    # ---- sensing ------------------------------------------------------

    def _presense(self, now: int) -> bool:
        """Start a pre-contention sensing phase for the best uncleared AC, if any."""
        if not self.pre:
            return False
        for ac in ACS:
            if self.queues[ac].frames and self.specs[ac] is not None and not self.cleared[ac]:
                self._settle(now)
                self.engine.cancel(self._contend_ev)
                self._contend_ev = None
                self._start_sensing(ac, self.specs[ac], now, escalated=False)
                return True
        return False

    def _access(self, ac: AccessCategory, now: int) -> None:
        spec = self.specs[ac]
        if spec is None or self.cleared[ac]:
            self._transmit(ac, now)
            return
        self._start_sensing(ac, spec, now, escalated=False)

    def _start_sensing(self, ac: AccessCategory, spec: SensingSpec, now: int, escalated: bool) -> None:
        self.state = Station.SENSING
        self.engine.schedule(now + spec.duration, self._on_sensing_complete, ac, spec, now, escalated,
                             target=self.id, kind=EventKind.SENSING_COMPLETE)

    def assess(self, channel, spec: SensingSpec, start: int) -> SensingOutcome:
        net = self.net
        outcome = sense(channel, spec, start, self.sense_rng, net.roc, node=self.id,
                        low_snr=net.low_snr, su_detection=net.su_detection)
        key = (spec.stype, outcome)
        self.outcomes[key] = self.outcomes.get(key, 0) + 1
        return outcome

    def _on_sensing_complete(self, ac: AccessCategory, spec: SensingSpec, start: int,
                             escalated: bool) -> None:
        now = self.engine.now
        outcome = self.assess(self.channel, spec, start)
        if outcome is SensingOutcome.BUSY_UNKNOWN:
            self.streak += 1
        else:
            self.streak = 0
        action = post_sensing_action(outcome, spec.stype, self.streak, self.net.escalation_k)
        if action is Action.TRANSMIT and self.pre and not self.cleared[ac]:
            self.cleared[ac] = True
            self._go_idle(now)
        elif action is Action.TRANSMIT:
            self._transmit(ac, now)
        elif action is Action.DEFER_BACKOFF:
            self.counter[ac] = draw_backoff(self.cw[ac], self.rng)
            self._go_idle(now)
        elif action is Action.HANDOFF:
            self.counter[ac] = draw_backoff(self.cw[ac], self.rng)
            self._start_handoff(now)
        else:
            self.streak = 0
            d = self.net.fine_duration
            self._start_sensing(ac, SensingSpec(classify_type(d), d), now, escalated=True)

    # ---- transmission -------------------------------------------------

    def _transmit(self, ac: AccessCategory, now: int) -> None:
        f = self.queues[ac].frames[0]
        if f.first_phy_tx_at is None:
            f.first_phy_tx_at = now
            self.net.metrics.record_media_access_delay(f, self.id)
        self.state = Station.TX
        self.cleared[ac] = False
        self.stats[ac].attempts += 1
        phy = self.phy
        self._tx = self.channel.begin_transmission(
            self.id, f, phy.data_airtime(f.payload_bits), now,
            reserve=phy.sifs + phy.ack_airtime(), on_end=self._on_data_end)

    def _on_data_end(self, tx) -> None:
        now = self.engine.now
        self._ack_ev = self.engine.schedule(now + self.phy.ack_timeout(), self._on_ack_timeout, tx,
                                            target=self.id, kind=EventKind.ACK_TIMEOUT)
        self.net.on_data_end(self, tx)

    def on_ack(self, ack_tx) -> None:
        if ack_tx.collided or ack_tx.pu_hit:
            return
        if self.engine.cancel(self._ack_ev):
            self._ack_ev = None
            self.on_tx_result(self._tx.payload, TxResult.SUCCESS)

    def _on_ack_timeout(self, tx) -> None:
        self._ack_ev = None
        if tx.collided:
            result = TxResult.COLLISION
        elif tx.pu_hit:
            result = TxResult.PU_HIT
        else:
            result = TxResult.ACK_TIMEOUT
        self.on_tx_result(tx.payload, result)

    def on_tx_result(self, f: Frame, result: TxResult) -> TxOutcome:
        now = self.engine.now
        ac = f.ac
        st = self.stats[ac]
        params = self.params[ac]
        q = self.queues[ac]
        self._tx = None
        if result is TxResult.SUCCESS:
            outcome = TxOutcome.DONE
            st.delivered += 1
        else:
            if result is TxResult.COLLISION:
                st.collisions += 1
            elif result is TxResult.PU_HIT:
                st.pu_hits += 1
            else:
                st.ack_timeouts += 1
            if f.retry_count + 1 > self.phy.max_retries:
                outcome = TxOutcome.DROPPED
                st.dropped += 1
            else:
                outcome = TxOutcome.RETRY
                f.retry_count += 1
                self.cw[ac] = escalate_cw(self.cw[ac], params.cw_max)
        self.counter[ac] = None
        if outcome is not TxOutcome.RETRY:
            self.cw[ac] = params.cw_min
            q.pop()
            hook = self.on_departure[ac]
            if hook is not None:
                hook(ac, now)  # may refill the queue and draw the next counter
        if q.frames and self.counter[ac] is None:
            self.counter[ac] = draw_backoff(self.cw[ac], self.rng)
        self._go_idle(now)
        return outcome

    def send_ack(self, data_tx) -> None:
        """Response frame: SIFS after the data frame, no sensing phase."""
        sender = self.net.stations[data_tx.source]
        self.engine.schedule(self.engine.now + self.phy.sifs, self._ack_start, data_tx.channel, sender,
                             target=self.id, kind=EventKind.TX_END)

    def _ack_start(self, ch_index: int, sender: "Station") -> None:
        ch = self.net.channels[ch_index]
        ch.begin_transmission(self.id, None, self.phy.ack_airtime(), self.engine.now,
                              on_end=sender.on_ack)

    def can_receive(self, ch_index: int) -> bool:
        return self.channel.index == ch_index and self.state != Station.HANDOFF

    @staticmethod
    def decodable(f: Frame) -> bool:
        return f.payload_bits <= MAX_RX_FRAME_BYTES * 8

    # ---- idle / handoff -----------------------------------------------

    def _go_idle(self, now: int) -> None:
        self.state = Station.IDLE
        if self._presense(now):
            return
        if self.idle_since is not None:
            self._resume(now)

    def _start_handoff(self, now: int) -> None:
        self.state = Station.HANDOFF
        self.channel.detach(self)
        self.idle_since = None
        self.net.handoff_attempts += 1
        scan = HandoffScan(self.engine, self.net.channels, self.channel.index, self.net.fine_duration,
                           self.assess, self._on_handoff_done, node=self.id)
        scan.start()

    def _on_handoff_done(self, result: HandoffResult) -> None:
        now = self.engine.now
        self.streak = 0
        origin = self.channel.index
        if result.switched:
            self.channel = self.net.channels[result.switched_to]
        self.net.record_handoff(self, result, origin)
        self.channel.attach(self)
        self.idle_since = None if self.channel.busy else now
        if result.switched:
            self._go_idle(now)
            return
        self.state = Station.SUSPENDED
        self.engine.schedule(now + self.net.handoff_retry, self._on_suspend_over,
                             target=self.id, kind=EventKind.RESUME)

    def _on_suspend_over(self) -> None:
        self._go_idle(self.engine.now)
