"""Delay and throughput collection, bucket-mode aggregation and export.

Delays are kept as integer nanoseconds so bucket sums recombine exactly;
means are only converted to floating-point seconds at export time.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .engine import S
from .frames import AccessCategory, Frame

E2E, MAD, THROUGHPUT = "e2e_delay", "media_access_delay", "throughput"
METRICS = (E2E, MAD, THROUGHPUT)
CSV_HEADER = ("bucket_start_s", "metric", "node", "ac", "count", "mean")
ALL = "all"


@dataclass(frozen=True)
class Sample:
    t: int
    value: int
    metric: str
    node: int
    ac: AccessCategory


class Recorder:
    """Raw per-frame samples for one run, in columnar lists."""

    def __init__(self, keep_pairs: bool = False) -> None:
        self.e2e: list[tuple[int, int, int, int]] = []
        self.mad: list[tuple[int, int, int, int]] = []
        self.deliveries: list[tuple[int, int, int, int]] = []
        # (media access delay of the last hop, end-to-end delay) per delivered frame
        self.pairs: list[tuple[int, int]] | None = [] if keep_pairs else None

    def record_e2e_delay(self, f: Frame, node: int) -> None:
        if f.delivered_at is None:
            raise ValueError("end-to-end delay needs a delivered frame")
        delay = f.delivered_at - f.created_at
        self.e2e.append((f.delivered_at, node, int(f.ac), delay))
        self.deliveries.append((f.delivered_at, node, int(f.ac), f.payload_bits))
        if self.pairs is not None:
            self.pairs.append((f.first_phy_tx_at - f.enqueued_at, delay))

    def record_media_access_delay(self, f: Frame, node: int) -> None:
        if f.first_phy_tx_at is None:
            raise ValueError("media access delay needs a first PHY transmission")
        self.mad.append((f.first_phy_tx_at, node, int(f.ac), f.first_phy_tx_at - f.enqueued_at))

    def samples(self, metric: str) -> list[Sample]:
        rows = {E2E: self.e2e, MAD: self.mad, THROUGHPUT: self.deliveries}[metric]
        return [Sample(t, v, metric, n, AccessCategory(ac)) for t, n, ac, v in rows]


def bucket_edges(duration: int, n: int) -> list[int]:
    """``n + 1`` integer edges; bucket ``b`` is ``[edges[b], edges[b+1])``."""
    return [-(-b * duration // n) for b in range(n + 1)]


def bucket_index(t: int, duration: int, n: int) -> int:
    return min(n - 1, t * n // duration)


@dataclass
class BucketSeries:
    metric: str
    node: int | str
    ac: str
    edges: list[int]
    counts: list[int]
    sums: list[int]
    # delays: per-bucket sample mean; throughput: bits/s over the bucket
    means: list[float | None]
    total_count: int = 0
    total_sum: int = 0
    maximum: int | None = None
    duration: int = 0

    @property
    def global_mean(self) -> float | None:
        if self.metric == THROUGHPUT:
            return self.total_sum * S / self.duration if self.duration else None
        return self.total_sum / self.total_count if self.total_count else None

    def recombined_mean(self) -> float | None:
        """Global mean rebuilt from the bucket means alone."""
        if self.metric == THROUGHPUT:
            if not self.duration:
                return None
            widths = [b - a for a, b in zip(self.edges, self.edges[1:])]
            return sum(m * w for m, w in zip(self.means, widths)) / self.duration
        n = sum(self.counts)
        if not n:
            return None
        return sum(c * m for c, m in zip(self.counts, self.means) if c) / n


def bucketize(samples: Iterable[tuple[int, int]], duration: int, n: int = 100,
              metric: str = E2E, node: int | str = ALL, ac: str = ALL) -> BucketSeries:
    """Aggregate ``(t, value)`` pairs into ``n`` equal-width time buckets.

    Empty delay buckets carry ``None``. Throughput buckets report delivered
    bits per second, so an empty bucket is a genuine zero.
    """
    if n < 1:
        raise ValueError("need at least one bucket")
    if duration <= 0:
        return BucketSeries(metric, node, ac, [], [], [], [], duration=0)
    edges = bucket_edges(duration, n)
    counts = [0] * n
    sums = [0] * n
    maximum = None
    for t, v in samples:
        b = bucket_index(t, duration, n)
        counts[b] += 1
        sums[b] += v
        if maximum is None or v > maximum:
            maximum = v
    if metric == THROUGHPUT:
        means = [s * S / (edges[b + 1] - edges[b]) if edges[b + 1] > edges[b] else 0.0
                 for b, s in enumerate(sums)]
    else:
        means = [s / c if c else None for s, c in zip(sums, counts)]
    return BucketSeries(metric, node, ac, edges, counts, sums, means,
                        sum(counts), sum(sums), maximum, duration)


def throughput(deliveries: Sequence[tuple[int, int, int, int]], window: int, duration: int,
               ac: AccessCategory | None = None) -> list[float]:
    """Delivered payload bits/s in consecutive windows of ``window`` ns."""
    if window <= 0:
        raise ValueError("throughput window must be positive")
    n = max(1, -(-duration // window))
    bits = [0] * n
    for t, _, a, b in deliveries:
        if ac is None or a == ac:
            bits[min(n - 1, t // window)] += b
    return [x * S / window for x in bits]


def series_for(rec: Recorder, metric: str, duration: int, n: int) -> list[BucketSeries]:
    """Per-(node, AC) series plus per-AC and overall aggregates."""
    rows = {E2E: rec.e2e, MAD: rec.mad, THROUGHPUT: rec.deliveries}[metric]
    groups: dict[tuple, list[tuple[int, int]]] = {}
    for t, node, ac, v in rows:
        groups.setdefault((node, ac), []).append((t, v))
        groups.setdefault((ALL, ac), []).append((t, v))
        groups.setdefault((ALL, ALL), []).append((t, v))
    # aggregates exist even without samples so every run exports the same rows
    for ac in AccessCategory:
        groups.setdefault((ALL, int(ac)), [])
    groups.setdefault((ALL, ALL), [])

    def order(key):
        node, ac = key
        return (node == ALL, -1 if node == ALL else node, ac == ALL, -1 if ac == ALL else ac)

    out = []
    for key in sorted(groups, key=order):
        node, ac = key
        ac_label = ALL if ac == ALL else AccessCategory(ac).name
        out.append(bucketize(groups[key], duration, n, metric, node, ac_label))
    return out


def _fmt_seconds(ticks: int) -> str:
    sign = "-" if ticks < 0 else ""
    ticks = abs(ticks)
    return f"{sign}{ticks // S}.{ticks % S:09d}"


def _fmt_mean(metric: str, value: float | None) -> str:
    if value is None:
        return ""
    if metric == THROUGHPUT:
        return f"{value:.6f}"
    return f"{value / S:.9f}"


def series_csv(series: Sequence[BucketSeries]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for s in series:
        for b, count in enumerate(s.counts):
            w.writerow((_fmt_seconds(s.edges[b]), s.metric, s.node, s.ac, count,
                        _fmt_mean(s.metric, s.means[b])))
    return buf.getvalue()


def metric_summary(series: Sequence[BucketSeries]) -> dict:
    overall = next(s for s in series if s.node == ALL and s.ac == ALL)
    mean = overall.global_mean
    if overall.metric == THROUGHPUT:
        return {"count": overall.total_count, "mean_bps": mean,
                "total_bits": overall.total_sum}
    return {"count": overall.total_count,
            "mean_s": None if mean is None else mean / S,
            "max_s": None if overall.maximum is None else overall.maximum / S}


def write_text(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def export(series: dict[str, list[BucketSeries]], summary: dict, out_dir: str | os.PathLike) -> list[Path]:
    """Write one CSV per metric and ``summary.json`` into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    written = []
    for metric in METRICS:
        if metric in series:
            path = out / f"{metric}.csv"
            write_text(path, series_csv(series[metric]))
            written.append(path)
    path = out / "summary.json"
    write_text(path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    written.append(path)
    return written


def read_series_csv(path: str | os.PathLike) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
