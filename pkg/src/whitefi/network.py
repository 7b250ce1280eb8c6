"""Wire one scenario into a runnable simulation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .channel import Channel
from .engine import Engine, EventKind
from .frames import ConfigError, Frame
from .mac_edca import Station
from .metrics import Recorder
from .sensing import HandoffResult
from .traffic import FlowSpec, FrameFactory, arrivals


@dataclass(frozen=True)
class HandoffRecord:
    t: int
    node: int
    from_channel: int
    to_channel: int | None
    scan_time: int
    pu_on_at_switch: bool | None


class Network:
    def __init__(self, config, keep_pairs: bool = False, log_transmissions: bool = False) -> None:
        self.config = config
        self.engine = Engine(config.master_seed)
        self.phy = config.phy
        self.strategy = config.strategy
        self.roc = config.roc
        self.low_snr = config.low_snr
        self.su_detection = config.su_detection
        self.sense_point = config.sense_point
        self.escalation_k = config.escalation_k
        self.fine_duration = config.fine_duration
        self.handoff_retry = config.handoff_retry
        self.duration = config.duration
        self.metrics = Recorder(keep_pairs=keep_pairs)
        self.handoffs: list[HandoffRecord] = []
        self.handoff_attempts = 0

        history = max(self.strategy.max_duration(), self.fine_duration)
        self.channels = []
        for i, pu in enumerate(config.channels):
            intervals = pu.intervals(config.duration, self.engine.rng_stream(f"pu.ch{i}"))
            ch = Channel(self.engine, i, intervals, history=history)
            if log_transmissions:
                ch.log = []
            self.channels.append(ch)
        self.stations = [Station(self, i) for i in range(config.node_count)]

        self.factory = FrameFactory()
        self._hop_ids = itertools.count(1_000_000_000)
        saturated = set()
        for k, flow in enumerate(config.flows):
            rng = self.engine.rng_stream(f"traffic.{flow.model}.flow{k}")
            if flow.model == "Saturated":
                key = (flow.src, flow.ac)
                if key in saturated:
                    raise ConfigError(f"node {flow.src} has two saturated {flow.ac.name} sources")
                saturated.add(key)
                self._prime_saturated(k, flow)
                continue
            gen = arrivals(flow, rng, config.duration)
            t = next(gen, None)
            if t is not None:
                self.engine.schedule(t, self._on_arrival, k, flow, gen, target=("flow", k),
                                     kind=EventKind.ARRIVAL)

    # ---- sources ------------------------------------------------------

    def _on_arrival(self, k: int, flow: FlowSpec, gen) -> None:
        now = self.engine.now
        station = self.stations[flow.src]
        for f in self.factory.message(flow, k, now):
            station.enqueue(f, now)
        t = next(gen, None)
        if t is not None:
            self.engine.schedule(t, self._on_arrival, k, flow, gen, target=("flow", k),
                                 kind=EventKind.ARRIVAL)

    def _prime_saturated(self, k: int, flow: FlowSpec) -> None:
        station = self.stations[flow.src]

        def refill(ac, now):
            if flow.stop is None or now < flow.stop:
                for f in self.factory.message(flow, k, now):
                    station.enqueue(f, now)

        station.on_departure[flow.ac] = refill

        def start():
            for _ in range(max(1, flow.process.depth)):
                refill(flow.ac, self.engine.now)

        self.engine.schedule(flow.start, start, target=("flow", k), kind=EventKind.ARRIVAL)

    # ---- delivery -----------------------------------------------------

    def on_data_end(self, sender: Station, tx) -> None:
        f: Frame = tx.payload
        if tx.collided or tx.pu_hit:
            return
        receiver = self.stations[f.dst]
        if not receiver.can_receive(tx.channel) or not receiver.decodable(f):
            return
        receiver.send_ack(tx)
        if f.delivered_at is not None:
            return  # duplicate after a lost ACK
        now = self.engine.now
        f.delivered_at = now
        if f.final_dst == receiver.id:
            self.metrics.record_e2e_delay(f, receiver.id)
        else:
            receiver.enqueue(f.next_hop(next(self._hop_ids), receiver.id, f.final_dst), now)

    def record_handoff(self, station: Station, result: HandoffResult, origin: int) -> None:
        now = self.engine.now
        pu = self.channels[result.switched_to].pu_on(now) if result.switched else None
        self.handoffs.append(HandoffRecord(now, station.id, origin, result.switched_to,
                                           now - result.started_at, pu))

    # ---- run ----------------------------------------------------------

    def run(self) -> int:
        return self.engine.run_until(self.duration)
