"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

Runs use the presets at their default 300 s duration with master seeds 1-5.
Every run made here also feeds the metric-identity and desk-scale checks.
"""

import hashlib
import math
import random
import statistics
import time
from pathlib import Path

import pytest

from whitefi import preset, run
from whitefi.channel import Channel, PuSchedule
from whitefi.config import ScenarioConfig
from whitefi.engine import MS, S, US, Engine
from whitefi.frames import AccessCategory as AC, PhyParams
from whitefi.metrics import THROUGHPUT
from whitefi.sensing import (RocModel, SensingOutcome as O, SensingSpec, SensingStrategy,
                             SensingType as T, classify_type, sense)
from whitefi.traffic import FlowSpec

SEEDS = (1, 2, 3, 4, 5)
REPORT: dict[int, str] = {}

# every bundle produced here is checked for metric identities (criterion 10)
_cache: dict = {}
_identity_failures: list[str] = []
_pairs_checked = [0]
_audited = [0]
_wall: dict[str, float] = {}


def report(n: int, ok: bool, text: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {text}"
    REPORT[n] = line
    print(line)


def check_identities(tag: str, bundle) -> None:
    _audited[0] += 1
    for metric, series in bundle.series.items():
        for s in series:
            g, r = s.global_mean, s.recombined_mean()
            if g is None and r is None:
                continue
            if metric != THROUGHPUT and s.total_count == 0:
                continue
            if g is None or r is None or not math.isclose(g, r, rel_tol=1e-9, abs_tol=1e-12):
                _identity_failures.append(f"{tag} {metric} node={s.node} ac={s.ac}: {g} vs {r}")
            if metric != THROUGHPUT and sum(c * m for c, m in zip(s.counts, s.means) if c) != pytest.approx(s.total_sum, rel=1e-9):
                _identity_failures.append(f"{tag} {metric} node={s.node} ac={s.ac}: bucket sums")
    pairs = bundle.network.metrics.pairs
    bad = sum(1 for mad, e2e in pairs if mad > e2e)
    _pairs_checked[0] += len(pairs)
    if bad:
        _identity_failures.append(f"{tag}: {bad} frames with access delay above end-to-end delay")


def run_preset(name: str, strategy: SensingStrategy, seed: int, **changes):
    key = (name, strategy, seed, tuple(sorted(changes.items())))
    if key not in _cache:
        cfg = preset(name).with_(strategy=strategy, master_seed=seed, **changes)
        t0 = time.perf_counter()
        b = run(cfg, keep_pairs=True)
        wall = time.perf_counter() - t0
        tag = f"{name}/{strategy.label()}/seed{seed}"
        if cfg.duration == 300 * S:
            _wall[tag] = wall
        check_identities(tag, b)
        summary = {
            "e2e": {ac: b.mean("e2e_delay", ac) for ac in ("all",) + tuple(a.name for a in AC)},
            "mad": {ac: b.mean("media_access_delay", ac) for ac in ("all",) + tuple(a.name for a in AC)},
            "thr": {ac: b.mean("throughput", ac) for ac in ("all",) + tuple(a.name for a in AC)},
            "handoffs": b.network.handoffs,
            "channels": b.network.channels,
        }
        _cache[key] = summary
    return _cache[key]


def fixed(ms):
    return SensingStrategy.fixed_ms(ms)


def seed_values(name, strategy, metric, ac="all", **changes):
    return [run_preset(name, strategy, s, **changes)[metric][ac] for s in SEEDS]


# ---- 1 ------------------------------------------------------------------

def test_criterion_1_voice_delay_rises_with_sensing():
    grid = (0, 1, 5, 50, 150, 300)
    samples = {ms: seed_values("voice-adhoc-4", fixed(ms), "e2e") for ms in grid}
    means = {ms: statistics.fmean(v) for ms, v in samples.items()}
    ok = True
    notes = []
    for a, b in zip(grid, grid[1:]):
        se = math.sqrt(statistics.variance(samples[a]) / len(SEEDS) + statistics.variance(samples[b]) / len(SEEDS))
        if means[b] < means[a] - se:
            ok = False
            notes.append(f"{a}->{b} ms drops by more than one pooled SE ({se:.3g} s)")
    ratio = means[300] / means[1]
    ok = ok and ratio >= 3
    text = ", ".join(f"{ms} ms={means[ms]:.4g} s" for ms in grid) + f"; 300/1 ratio {ratio:.1f}"
    report(1, ok, text + ("; " + "; ".join(notes) if notes else ""))
    assert ok


# ---- 2 ------------------------------------------------------------------

def test_criterion_2_email_delay_ordering():
    means = {ms: statistics.fmean(seed_values("email-infra", fixed(ms), "e2e")) for ms in (1, 50, 100, 300)}
    ok = means[300] > means[100] > means[50] > means[1]
    report(2, ok, ", ".join(f"{ms} ms={v:.4g} s" for ms, v in means.items()))
    assert ok


# ---- 3 ------------------------------------------------------------------

def test_criterion_3_voice_above_video_at_300ms():
    v = statistics.fmean(seed_values("voice-adhoc-4", fixed(300), "e2e"))
    w = statistics.fmean(seed_values("video-infra", fixed(300), "e2e"))
    ok = v > w
    report(3, ok, f"voice {v:.4g} s vs video {w:.4g} s")
    assert ok


# ---- 4 and 5 ------------------------------------------------------------

ADAPTIVE = SensingStrategy.adaptive()


def test_criterion_4_adaptive_cuts_voice_access_delay():
    ad = statistics.fmean(seed_values("combined-eval", ADAPTIVE, "mad", "AC_VO"))
    f50 = statistics.fmean(seed_values("combined-eval", fixed(50), "mad", "AC_VO"))
    f100 = statistics.fmean(seed_values("combined-eval", fixed(100), "mad", "AC_VO"))
    ok = ad < 0.8 * f50 and ad < 0.8 * f100
    report(4, ok, f"voice access delay adaptive {ad:.4g} s, fixed 50 ms {f50:.4g} s, fixed 100 ms {f100:.4g} s "
                  f"(margins {1 - ad / f50:.1%}, {1 - ad / f100:.1%})")
    assert ok


def test_criterion_5_adaptive_raises_best_effort_throughput():
    ad = statistics.fmean(seed_values("combined-eval", ADAPTIVE, "thr", "AC_BE"))
    f50 = statistics.fmean(seed_values("combined-eval", fixed(50), "thr", "AC_BE"))
    f100 = statistics.fmean(seed_values("combined-eval", fixed(100), "thr", "AC_BE"))
    f1 = statistics.fmean(seed_values("combined-eval", fixed(1), "thr", "AC_BE"))
    ok = ad > f50 and ad > f100
    stronger = "holds" if ad > f1 else "does not hold"
    report(5, ok, f"AC_BE throughput adaptive {ad:.4g}, fixed 50 ms {f50:.4g}, fixed 100 ms {f100:.4g} b/s; "
                  f"exploratory adaptive > fixed 1 ms ({f1:.4g} b/s) {stronger}")
    assert ok


# ---- 6 ------------------------------------------------------------------

def test_criterion_6_saturation_matches_analytic_cycle():
    phy = PhyParams()
    bits = 1500 * 8
    be = phy.edca(AC.AC_BE)
    aifs_be = phy.sifs + be.aifsn * phy.slot_time
    mean_backoff = be.cw_min / 2 * phy.slot_time
    t_data = phy.phy_overhead + math.ceil(bits * S / phy.data_rate)
    t_ack = phy.phy_overhead + math.ceil(phy.ack_bits * S / phy.control_rate)
    oracle = bits * S / (aifs_be + mean_backoff + t_data + phy.sifs + t_ack)
    cfg = ScenarioConfig(name="saturation", nodes=2, flows=(FlowSpec(0, 1, "Saturated"),),
                         strategy=fixed(0), roc=RocModel.perfect(), duration=60 * S)
    b = run(cfg, keep_pairs=True)
    check_identities("saturation", b)
    got = b.mean("throughput", "AC_BE")
    err = abs(got / oracle - 1)
    ok = err <= 0.02
    report(6, ok, f"measured {got / 1e6:.4f} Mb/s vs oracle {oracle / 1e6:.4f} Mb/s ({err:.2%})")
    assert ok


# ---- 7 ------------------------------------------------------------------

def _digest(folder: Path) -> str:
    h = hashlib.sha256()
    for p in sorted(folder.iterdir()):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()


# recorded once from this implementation; a different value on another
# platform or Python version means the exports are no longer portable
GOLDEN_DIGEST = "68dbde5c2b2b5e0d9565d612795193534bd7784644cedd801360e72db9916bca"


def test_criterion_7_exports_are_byte_identical(tmp_path):
    cfg = preset("combined-eval").with_(duration=20 * S, master_seed=42)
    a, b = run(cfg), run(cfg)
    a.export(tmp_path / "a")
    b.export(tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    same = all((tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes() for n in names)
    digest = _digest(tmp_path / "a")
    ok = same and digest == GOLDEN_DIGEST
    report(7, ok, f"{len(names)} files identical across runs: {same}; digest {digest[:16]} "
                  f"{'matches' if digest == GOLDEN_DIGEST else 'differs from'} the recorded value")
    assert ok


# ---- 8 ------------------------------------------------------------------

def test_criterion_8_edca_priority_ordering():
    # every AC offered about a quarter of the channel, so all four queues stay
    # backlogged while each still gets enough service for 10^4 samples
    flows = tuple(FlowSpec(0, 1, "Poisson", ac=a).with_process(mean_interval=2800 * US) for a in AC)
    cfg = ScenarioConfig(name="priority", nodes=2, flows=flows, strategy=fixed(0), duration=40 * S)
    b = run(cfg, keep_pairs=True)
    check_identities("priority", b)
    mad = [b.mean("media_access_delay", a.name) for a in AC]
    counts = [b.find("media_access_delay", "all", a.name).total_count for a in AC]
    ok = mad == sorted(mad) and min(counts) >= 10_000
    report(8, ok, ", ".join(f"{a.name}={m * 1e3:.3f} ms (n={n})" for a, m, n in zip(AC, mad, counts)))
    assert ok


# ---- 9 ------------------------------------------------------------------

def test_criterion_9_sensing_taxonomy():
    rng = random.Random(9)
    eng = Engine()
    horizon = 20 * S
    pu = PuSchedule("alternating", mean_on=200 * MS, mean_off=300 * MS).intervals(horizon, rng)
    ch = Channel(eng, 0, pu, history=horizon)
    t = 0
    while t < horizon - 400 * MS:
        t += int(rng.expovariate(1 / (2 * MS)))
        eng.run_until(t)
        ch.begin_transmission(rng.randrange(5), None, rng.randrange(50 * US, 2 * MS), t, reserve=60 * US)
        t = eng.now
    rocs = (RocModel(), RocModel.perfect())
    bad_type = bad_range = 0
    n = 1_000_000
    for _ in range(n):
        d = rng.randrange(1, 300 * MS + 1)
        spec = SensingSpec(classify_type(d), d)
        lo, hi = spec.stype.duration_range
        if not lo < spec.duration <= hi:
            bad_range += 1
        start = rng.randrange(0, horizon - 301 * MS)
        out = sense(ch, spec, start, rng, rocs[rng.random() < 0.2], node=rng.randrange(6),
                    low_snr=rng.random() < 0.5, su_detection="window" if rng.random() < 0.5 else "end")
        if spec.stype in (T.COARSE, T.MODERATE) and out in (O.BUSY_PU, O.BUSY_SU):
            bad_type += 1

    switched = unsafe = 0
    for seed in SEEDS:
        r = run_preset("handoff-demo", fixed(50), seed)
        for h in r["handoffs"]:
            if h.to_channel is None:
                continue
            switched += 1
            if r["channels"][h.to_channel].pu_on(h.t) or h.pu_on_at_switch:
                unsafe += 1
    ok = bad_type == 0 and bad_range == 0 and unsafe == 0 and switched > 0
    report(9, ok, f"{n} sense calls: {bad_type} Coarse/Moderate outcomes naming the occupant, "
                  f"{bad_range} out-of-range specs; {switched} handoffs, {unsafe} onto an active PU")
    assert ok


# ---- 10 (runs last: it audits every bundle produced above) ----------------

def test_criterion_10_metric_identities():
    if len(_cache) < 5:
        # run stand-alone: produce a few bundles to audit
        for ms in (0, 50):
            run_preset("voice-adhoc-4", fixed(ms), 1, duration=30 * S)
        run_preset("combined-eval", ADAPTIVE, 1, duration=30 * S)
    ok = not _identity_failures and _pairs_checked[0] > 0
    text = f"{_audited[0]} runs audited, {_pairs_checked[0]} delivered frames checked"
    if _identity_failures:
        text += "; " + "; ".join(_identity_failures[:3])
    report(10, ok, text)
    assert ok


def test_desk_scale_wall_clock():
    """Each 300 s run of up to five nodes must finish within four minutes."""
    if not _wall:
        run_preset("combined-eval", ADAPTIVE, 1)
    worst = max(_wall, key=_wall.get)
    ok = _wall[worst] <= 240
    line = f"{'PASS' if ok else 'FAIL'} desk scale: slowest 300 s run {worst} took {_wall[worst]:.1f} s"
    REPORT[11] = line
    print(line)
    assert ok
