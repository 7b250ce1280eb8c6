"""Command-line entry point."""

from __future__ import annotations

import argparse
import json
import sys

from .config import ScenarioConfig, load_config
from .engine import MS, S
from .frames import AccessCategory, ConfigError
from .runner import anomalies, comparison_csv, run, sweep
from .scenarios import PRESETS, preset
from .sensing import SensingStrategy


def parse_strategy(text: str) -> SensingStrategy:
    """``fixed:<ms>``, ``adaptive`` or ``adaptive:vo,vi,be,bk`` (ms)."""
    kind, _, rest = text.partition(":")
    try:
        if kind == "fixed" and rest:
            return SensingStrategy.fixed_ms(float(rest))
        if kind == "adaptive":
            if not rest:
                return SensingStrategy.adaptive()
            values = [float(x) for x in rest.split(",")]
            if len(values) != 4:
                raise ConfigError("adaptive needs four durations: vo,vi,be,bk")
            return SensingStrategy.adaptive(dict(zip(AccessCategory, values)))
    except ValueError as exc:
        raise ConfigError(f"bad --strategy {text!r}: {exc}") from exc
    raise ConfigError(f"bad --strategy {text!r}; use fixed:<ms> or adaptive[:vo,vi,be,bk]")


def parse_durations(text: str) -> list[int]:
    try:
        out = [int(round(float(x) * MS)) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad --durations {text!r}") from None
    if any(d < 0 for d in out):
        raise ConfigError("sensing durations must be >= 0")
    return out


def _base_config(args) -> ScenarioConfig:
    if getattr(args, "config", None):
        try:
            cfg = load_config(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
    else:
        cfg = preset(args.preset)
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.duration is not None:
        if args.duration < 0:
            raise ConfigError("--duration must be >= 0")
        changes["duration"] = int(round(args.duration * S))
    if getattr(args, "strategy", None):
        changes["strategy"] = parse_strategy(args.strategy)
    return cfg.with_(**changes).validate() if changes else cfg


def cmd_run(args) -> int:
    cfg = _base_config(args)
    bundle = run(cfg)
    if args.out:
        for p in bundle.export(args.out):
            print(p)
    m = bundle.summary["metrics"]
    print(json.dumps({"scenario": cfg.name, "strategy": cfg.strategy.label(),
                      "e2e_delay_mean_s": m["e2e_delay"]["mean_s"],
                      "media_access_delay_mean_s": m["media_access_delay"]["mean_s"],
                      "throughput_mean_bps": m["throughput"]["mean_bps"],
                      "handoffs": bundle.summary["handoffs"]}, sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    cfg = _base_config(args)
    result = sweep(cfg, parse_durations(args.durations), with_adaptive=args.with_adaptive)
    if args.out:
        result.export(args.out)
    sys.stdout.write(comparison_csv(result.rows))
    for ac, shorter, longer in anomalies(result.rows):
        print(f"note: {ac} mean e2e delay is lower at {longer} than at {shorter}", file=sys.stderr)
    return 0


def cmd_preset(args) -> int:
    if args.show:
        print(preset(args.show).to_json())
        return 0
    for name in PRESETS:
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="whitefi", description="White-Fi EDCA sensing simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, help="master seed")
        sp.add_argument("--duration", type=float, help="simulated seconds")
        sp.add_argument("--out", help="output directory")

    r = sub.add_parser("run", help="run one scenario")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="built-in scenario name")
    src.add_argument("--config", help="JSON scenario file")
    r.add_argument("--strategy", help="fixed:<ms> | adaptive[:vo,vi,be,bk]")
    common(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run one scenario over several fixed sensing durations")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset")
    src.add_argument("--config")
    s.add_argument("--durations", required=True, help="comma-separated milliseconds, e.g. 0,1,5,50")
    s.add_argument("--with-adaptive", action="store_true", help="add one per-AC adaptive run")
    common(s)
    s.set_defaults(func=cmd_sweep)

    ps = sub.add_parser("preset", help="list or show built-in scenarios")
    ps.add_argument("--list", action="store_true", help="list preset names (default)")
    ps.add_argument("--show", metavar="NAME", help="print a preset as JSON config")
    ps.set_defaults(func=cmd_preset)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
