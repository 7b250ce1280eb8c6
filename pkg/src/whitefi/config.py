"""Scenario configuration and its strict JSON form.

JSON field names carry their unit (``_s``, ``_ms``, ``_us``, ``_bps``);
internally every duration is integer nanoseconds. Unknown keys are an error.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any

from .channel import PuSchedule
from .engine import MS, S, US
from .frames import AccessCategory, ConfigError, PhyParams
from .sensing import RocModel, SensingStrategy, SensingType
from .traffic import ArrivalProcess, FlowSpec

TOPOLOGIES = ("adhoc", "infrastructure")
SENSE_POINTS = ("post_backoff", "pre_contention")
SU_DETECTION = ("end", "window")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "custom"
    topology: str = "adhoc"
    nodes: int = 2
    flows: tuple[FlowSpec, ...] = ()
    phy: PhyParams = field(default_factory=PhyParams)
    strategy: SensingStrategy = field(default_factory=SensingStrategy)
    roc: RocModel = field(default_factory=RocModel.perfect)
    low_snr: bool = False
    channels: tuple[PuSchedule, ...] = (PuSchedule(),)
    duration: int = 300 * S
    master_seed: int = 1
    sense_point: str = "post_backoff"
    su_detection: str = "end"
    n_buckets: int = 100
    escalation_k: float = 5
    fine_duration: int = 50 * MS
    handoff_retry: int = 200 * MS

    @property
    def ap(self) -> int | None:
        """Index of the AP/server node in infrastructure mode."""
        return self.nodes if self.topology == "infrastructure" else None

    @property
    def node_count(self) -> int:
        return self.nodes + (1 if self.topology == "infrastructure" else 0)

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def validate(self) -> "ScenarioConfig":
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")
        if self.nodes < 1:
            raise ConfigError("need at least one node")
        if self.sense_point not in SENSE_POINTS:
            raise ConfigError(f"sense_point must be one of {SENSE_POINTS}")
        if self.su_detection not in SU_DETECTION:
            raise ConfigError(f"su_detection must be one of {SU_DETECTION}")
        if not self.channels:
            raise ConfigError("need at least one channel")
        if self.duration < 0:
            raise ConfigError("duration must be >= 0")
        if self.n_buckets < 1:
            raise ConfigError("n_buckets must be >= 1")
        if self.escalation_k < 1:
            raise ConfigError("escalation_k must be >= 1 (use null for never)")
        if not 5 * MS < self.fine_duration:
            raise ConfigError("fine_duration must be a Fine or Extra-Fine duration (> 5 ms)")
        if self.handoff_retry <= 0:
            raise ConfigError("handoff_retry must be positive")
        n = self.node_count
        for i, f in enumerate(self.flows):
            for end in (f.src, f.dst):
                if not 0 <= end < n:
                    raise ConfigError(f"flow {i} references node {end}; scenario has {n} nodes")
            if f.src == f.dst:
                raise ConfigError(f"flow {i} sends to itself")
            if f.relay is not None:
                if self.topology != "infrastructure" or f.relay != self.ap:
                    raise ConfigError(f"flow {i} relays through {f.relay}, which is not the AP")
                if f.model == "Saturated":
                    raise ConfigError(f"flow {i}: saturated sources cannot be relayed")
        return self

    # ---- JSON ---------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "topology": self.topology,
            "nodes": self.nodes,
            "flows": [_flow_to(f) for f in self.flows],
            "phy": _phy_to(self.phy),
            "strategy": _strategy_to(self.strategy),
            "roc": _roc_to(self.roc),
            "low_snr": self.low_snr,
            "channels": [_pu_to(p) for p in self.channels],
            "duration_s": self.duration / S,
            "master_seed": self.master_seed,
            "sense_point": self.sense_point,
            "su_detection": self.su_detection,
            "n_buckets": self.n_buckets,
            "escalation_k": None if math.isinf(self.escalation_k) else self.escalation_k,
            "fine_duration_ms": self.fine_duration / MS,
            "handoff_retry_ms": self.handoff_retry / MS,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScenarioConfig":
        d = _take(d, "scenario", {
            "name", "topology", "nodes", "flows", "phy", "strategy", "roc", "low_snr",
            "channels", "duration_s", "master_seed", "sense_point", "su_detection",
            "n_buckets", "escalation_k", "fine_duration_ms", "handoff_retry_ms"})
        try:
            return cls(**cls._fields_from(d)).validate()
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError, IndexError) as exc:
            raise ConfigError(f"invalid scenario: {exc}") from exc

    @staticmethod
    def _fields_from(d: dict[str, Any]) -> dict[str, Any]:
        kw: dict[str, Any] = {}
        for key in ("name", "topology", "nodes", "low_snr", "master_seed", "sense_point",
                    "su_detection", "n_buckets"):
            if key in d:
                kw[key] = d[key]
        if "flows" in d:
            kw["flows"] = tuple(_flow_from(x) for x in d["flows"])
        if "phy" in d:
            kw["phy"] = _phy_from(d["phy"])
        if "strategy" in d:
            kw["strategy"] = _strategy_from(d["strategy"])
        if "roc" in d:
            kw["roc"] = _roc_from(d["roc"])
        if "channels" in d:
            kw["channels"] = tuple(_pu_from(x) for x in d["channels"])
        if "duration_s" in d:
            kw["duration"] = _ticks(d["duration_s"], S)
        if "escalation_k" in d:
            kw["escalation_k"] = math.inf if d["escalation_k"] is None else d["escalation_k"]
        if "fine_duration_ms" in d:
            kw["fine_duration"] = _ticks(d["fine_duration_ms"], MS)
        if "handoff_retry_ms" in d:
            kw["handoff_retry"] = _ticks(d["handoff_retry_ms"], MS)
        return kw

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return ScenarioConfig.from_json(fh.read())


def _take(d: Any, where: str, allowed: set[str]) -> dict[str, Any]:
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    return d


def _ticks(value: Any, unit: int) -> int:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}")
    return int(round(value * unit))


def _ac(name: str) -> AccessCategory:
    try:
        return AccessCategory[name]
    except KeyError:
        raise ConfigError(f"unknown access category {name!r}") from None


def _flow_to(f: FlowSpec) -> dict[str, Any]:
    p = f.process
    return {
        "src": f.src, "dst": f.dst, "model": f.model, "ac": f.ac.name,
        "start_s": f.start / S, "stop_s": None if f.stop is None else f.stop / S,
        "relay": f.relay,
        "process": {"message_bytes": p.message_bytes, "period_ms": p.period / MS,
                    "mean_interval_ms": p.mean_interval / MS, "depth": p.depth},
    }


def _flow_from(d: Any) -> FlowSpec:
    d = _take(d, "flow", {"src", "dst", "model", "ac", "start_s", "stop_s", "relay", "process"})
    process = None
    if "process" in d:
        p = _take(d["process"], "flow process", {"message_bytes", "period_ms", "mean_interval_ms", "depth"})
        process = ArrivalProcess(p["message_bytes"], _ticks(p.get("period_ms", 0), MS),
                                 _ticks(p.get("mean_interval_ms", 0), MS), p.get("depth", 0))
    try:
        return FlowSpec(
            d["src"], d["dst"], d["model"],
            ac=_ac(d["ac"]) if d.get("ac") is not None else None,
            start=_ticks(d.get("start_s", 0), S),
            stop=None if d.get("stop_s") is None else _ticks(d["stop_s"], S),
            relay=d.get("relay"), process=process)
    except KeyError as exc:
        raise ConfigError(f"flow is missing {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


_PHY_TIMES = ("slot_time", "sifs", "phy_overhead")


def _phy_to(p: PhyParams) -> dict[str, Any]:
    return {
        "slot_time_us": p.slot_time / US, "sifs_us": p.sifs / US, "phy_overhead_us": p.phy_overhead / US,
        "phy_cw_min": p.phy_cw_min, "phy_cw_max": p.phy_cw_max,
        "data_rate_bps": p.data_rate, "control_rate_bps": p.control_rate,
        "ack_bits": p.ack_bits, "max_retries": p.max_retries,
    }


def _phy_from(d: Any) -> PhyParams:
    d = _take(d, "phy", {"slot_time_us", "sifs_us", "phy_overhead_us", "phy_cw_min", "phy_cw_max",
                         "data_rate_bps", "control_rate_bps", "ack_bits", "max_retries"})
    kw = {}
    for name in _PHY_TIMES:
        if f"{name}_us" in d:
            kw[name] = _ticks(d[f"{name}_us"], US)
    for name in ("phy_cw_min", "phy_cw_max", "ack_bits", "max_retries"):
        if name in d:
            kw[name] = d[name]
    if "data_rate_bps" in d:
        kw["data_rate"] = d["data_rate_bps"]
    if "control_rate_bps" in d:
        kw["control_rate"] = d["control_rate_bps"]
    return PhyParams(**kw)


def _strategy_to(s: SensingStrategy) -> dict[str, Any]:
    if s.mode == "fixed":
        return {"mode": "fixed", "fixed_ms": s.fixed / MS}
    return {"mode": "adaptive", "by_ac_ms": {ac.name: d / MS for ac, d in s.by_ac}}


def _strategy_from(d: Any) -> SensingStrategy:
    d = _take(d, "strategy", {"mode", "fixed_ms", "by_ac_ms"})
    mode = d.get("mode", "fixed")
    if mode == "fixed":
        return SensingStrategy("fixed", _ticks(d.get("fixed_ms", 0), MS))
    if mode == "adaptive":
        by = _take(d.get("by_ac_ms", {}), "strategy.by_ac_ms", {ac.name for ac in AccessCategory})
        if "by_ac_ms" not in d:
            return SensingStrategy.adaptive()
        return SensingStrategy("adaptive", 0, tuple((ac, _ticks(by[ac.name], MS)) for ac in AccessCategory
                                                    if ac.name in by))
    raise ConfigError(f"unknown strategy mode {mode!r}")


def _roc_to(r: RocModel) -> dict[str, Any]:
    return {"rates": {t.value: [pf, pmd] for t, pf, pmd in r.rates},
            "low_snr_penalty": r.low_snr_penalty,
            "penalized": [t.value for t in r.penalized]}


def _roc_from(d: Any) -> RocModel:
    d = _take(d, "roc", {"rates", "low_snr_penalty", "penalized"})
    default = RocModel()
    rates = default.rates
    if "rates" in d:
        r = _take(d["rates"], "roc.rates", {t.value for t in SensingType})
        rates = tuple((t, float(r[t.value][0]), float(r[t.value][1])) for t in SensingType if t.value in r)
    penalized = default.penalized
    if "penalized" in d:
        penalized = tuple(SensingType(v) for v in d["penalized"])
    return RocModel(rates, d.get("low_snr_penalty", default.low_snr_penalty), penalized)


def _pu_to(p: PuSchedule) -> dict[str, Any]:
    return {"mode": p.mode, "mean_on_s": p.mean_on / S, "mean_off_s": p.mean_off / S}


def _pu_from(d: Any) -> PuSchedule:
    d = _take(d, "channel", {"mode", "mean_on_s", "mean_off_s"})
    return PuSchedule(d.get("mode", "off"), _ticks(d.get("mean_on_s", 0), S), _ticks(d.get("mean_off_s", 0), S))
