"""Single runs, duration sweeps and their comparison table."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .config import ScenarioConfig
from .engine import MS, S, derive_seed
from .frames import AccessCategory
from .mac_edca import AcStats
from .metrics import ALL, E2E, MAD, METRICS, THROUGHPUT, BucketSeries, export, metric_summary, series_for, write_text
from .network import Network
from .sensing import SensingStrategy


@dataclass
class ResultBundle:
    config: ScenarioConfig
    series: dict[str, list[BucketSeries]]
    summary: dict
    network: Network | None = field(default=None, repr=False)

    def find(self, metric: str, node=ALL, ac: str = ALL) -> BucketSeries | None:
        return next((s for s in self.series[metric] if s.node == node and s.ac == ac), None)

    def mean(self, metric: str, ac: str = ALL) -> float | None:
        """Global mean in seconds (delays) or bits/s (throughput)."""
        s = self.find(metric, ALL, ac)
        if s is None:
            return None if metric != THROUGHPUT else 0.0
        m = s.global_mean
        if m is None or metric == THROUGHPUT:
            return m
        return m / S

    def export(self, out_dir: str | os.PathLike) -> list[Path]:
        return export(self.series, self.summary, out_dir)


def run(config: ScenarioConfig, keep_pairs: bool = False, log_transmissions: bool = False) -> ResultBundle:
    config.validate()
    net = Network(config, keep_pairs=keep_pairs, log_transmissions=log_transmissions)
    net.run()
    series = {m: series_for(net.metrics, m, config.duration, config.n_buckets) for m in METRICS}

    per_ac = {}
    for ac in AccessCategory:
        total = AcStats()
        for st in net.stations:
            for k, v in st.stats[ac].as_dict().items():
                setattr(total, k, getattr(total, k) + v)
        d = total.as_dict()
        d["delivered_e2e"] = sum(1 for row in net.metrics.e2e if row[2] == ac)
        per_ac[ac.name] = d
    summary = {
        "config": config.to_dict(),
        "master_seed": config.master_seed,
        "metrics": {m: metric_summary(series[m]) for m in METRICS},
        "per_ac": per_ac,
        "handoffs": len([h for h in net.handoffs if h.to_channel is not None]),
        "handoff_attempts": net.handoff_attempts,
        "events_processed": net.engine.fired,
    }
    return ResultBundle(config, series, summary, net)


def run_seed(label: str, master_seed: int) -> int:
    """Seed for one sweep run; depends only on the master seed and the run's label."""
    return derive_seed(master_seed, f"sweep:{label}") & 0x7FFF_FFFF_FFFF_FFFF


COMPARISON_HEADER = ["label", "sensing_ms"] + [
    f"{ac.name}_{col}" for ac in AccessCategory
    for col in ("e2e_delay_s", "media_access_delay_s", "throughput_bps")
] + ["all_e2e_delay_s", "all_media_access_delay_s", "all_throughput_bps", "handoffs"]


def comparison_row(label: str, sensing_ms: str, b: ResultBundle) -> dict:
    row = {"label": label, "sensing_ms": sensing_ms}
    for ac in [a.name for a in AccessCategory] + [ALL]:
        prefix = ac if ac != ALL else "all"
        row[f"{prefix}_e2e_delay_s"] = b.mean(E2E, ac)
        row[f"{prefix}_media_access_delay_s"] = b.mean(MAD, ac)
        row[f"{prefix}_throughput_bps"] = b.mean(THROUGHPUT, ac)
    row["handoffs"] = b.summary["handoffs"]
    return row


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.9f}"
    return str(v)


def comparison_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARISON_HEADER)
    for r in rows:
        w.writerow([_cell(r[k]) for k in COMPARISON_HEADER])
    return buf.getvalue()


@dataclass
class SweepResult:
    rows: list[dict]
    bundles: dict[str, ResultBundle]

    def export(self, out_dir: str | os.PathLike) -> list[Path]:
        out = Path(out_dir)
        written = []
        for label, b in self.bundles.items():
            written += b.export(out / label.replace(":", "_").replace(",", "-"))
        path = out / "comparison.csv"
        write_text(path, comparison_csv(self.rows))
        written.append(path)
        return written


def sweep(config: ScenarioConfig, durations: Sequence[int], with_adaptive: bool = False,
          adaptive: SensingStrategy | None = None) -> SweepResult:
    """Run ``config`` once per fixed sensing duration (ns), plus optionally adaptive."""
    if not durations and not with_adaptive:
        raise ValueError("sweep needs at least one duration")
    plan = [(SensingStrategy("fixed", d), f"{d / MS:g}") for d in durations]
    if with_adaptive:
        plan.append((adaptive or SensingStrategy.adaptive(), "adaptive"))
    rows, bundles = [], {}
    for strat, sensing_ms in plan:
        label = strat.label()
        cfg = config.with_(strategy=strat, master_seed=run_seed(label, config.master_seed))
        b = run(cfg)
        bundles[label] = b
        rows.append(comparison_row(label, sensing_ms, b))
    return SweepResult(rows, bundles)


def anomalies(rows: Sequence[dict]) -> list[tuple[str, str, str]]:
    """Spots where an AC's mean e2e delay drops although fixed sensing got longer.

    Returns ``(ac, shorter_label, longer_label)`` for each such step.
    """
    fixed = sorted((r for r in rows if r["label"].startswith("fixed:")), key=lambda r: float(r["sensing_ms"]))
    out = []
    for ac in [a.name for a in AccessCategory]:
        key = f"{ac}_e2e_delay_s"
        prev = None
        for r in fixed:
            v = r.get(key)
            if v is None:
                continue
            if prev is not None and v < prev[1]:
                out.append((ac, prev[0], r["label"]))
            prev = (r["label"], v)
    return out
