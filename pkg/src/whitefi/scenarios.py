"""Built-in scenario presets."""

from __future__ import annotations

from .channel import PuSchedule
from .config import ScenarioConfig
from .engine import MS, S
from .frames import ConfigError, PhyParams
from .sensing import RocModel, SensingStrategy
from .traffic import FlowSpec

HIGH_RATE = PhyParams(data_rate=240_000_000)


def _voice_mesh(nodes: int) -> list[FlowSpec]:
    """Every ordered pair carries a voice call; starts are staggered over one packet period."""
    pairs = [(a, b) for a in range(nodes) for b in range(nodes) if a != b]
    step = 20 * MS // len(pairs)
    return [FlowSpec(a, b, "VoiceCBR", start=i * step) for i, (a, b) in enumerate(pairs)]


def _video_pairs(ap: int) -> list[FlowSpec]:
    # two conferences (0<->1, 2<->3), each direction relayed by the server
    out = []
    for i, (a, b) in enumerate(((0, 1), (1, 0), (2, 3), (3, 2))):
        out.append(FlowSpec(a, b, "VideoConf", relay=ap, start=i * (S // 30) // 4))
    return out


def _email_both_ways(nodes: int, ap: int) -> list[FlowSpec]:
    out = []
    for n in range(nodes):
        out.append(FlowSpec(n, ap, "EmailHeavy"))
        out.append(FlowSpec(ap, n, "EmailHeavy"))
    return out


def voice_adhoc_4() -> ScenarioConfig:
    return ScenarioConfig(name="voice-adhoc-4", topology="adhoc", nodes=4, flows=tuple(_voice_mesh(4)),
                          strategy=SensingStrategy.fixed_ms(0), roc=RocModel.perfect())


def email_infra() -> ScenarioConfig:
    return ScenarioConfig(name="email-infra", topology="infrastructure", nodes=4,
                          flows=tuple(_email_both_ways(4, 4)),
                          strategy=SensingStrategy.fixed_ms(0), roc=RocModel.perfect())


def video_infra() -> ScenarioConfig:
    return ScenarioConfig(name="video-infra", topology="infrastructure", nodes=4,
                          flows=tuple(_video_pairs(4)), phy=HIGH_RATE,
                          strategy=SensingStrategy.fixed_ms(0), roc=RocModel.perfect())


def combined_eval() -> ScenarioConfig:
    flows = _voice_mesh(4) + _video_pairs(4) + _email_both_ways(4, 4)
    return ScenarioConfig(name="combined-eval", topology="infrastructure", nodes=4, flows=tuple(flows),
                          phy=HIGH_RATE, strategy=SensingStrategy.adaptive(), roc=RocModel.perfect())


def handoff_demo() -> ScenarioConfig:
    pu = PuSchedule("alternating", mean_on=2 * S, mean_off=5 * S)
    return ScenarioConfig(name="handoff-demo", topology="adhoc", nodes=2,
                          flows=(FlowSpec(0, 1, "VoiceCBR"), FlowSpec(1, 0, "VoiceCBR", start=10 * MS)),
                          strategy=SensingStrategy.fixed_ms(50), roc=RocModel.perfect(),
                          channels=(pu, pu, pu), duration=60 * S)


PRESETS = {
    "voice-adhoc-4": voice_adhoc_4,
    "email-infra": email_infra,
    "video-infra": video_infra,
    "combined-eval": combined_eval,
    "handoff-demo": handoff_demo,
}


def preset(name: str) -> ScenarioConfig:
    try:
        build = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}") from None
    return build().validate()
