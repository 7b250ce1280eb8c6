import math
import random

from hypothesis import given, strategies as st

from whitefi import preset, run
from whitefi.engine import MS, S
from whitefi.frames import AccessCategory as AC, MAX_TX_FRAME_BYTES
from whitefi.sensing import SensingStrategy
from whitefi.traffic import FlowSpec, FrameFactory, arrivals, fragment, generate


def volume_bps(flow, horizon, seed=0):
    bits = sum(f.payload_bits for _, f in generate(flow, random.Random(seed), horizon))
    return bits * S / horizon


def test_voice_first_frame():
    t, f = next(generate(FlowSpec(0, 1, "VoiceCBR"), None, S))
    assert t == 20 * MS and f.payload_bits == 1280 and f.ac is AC.AC_VO


def test_video_fragments():
    assert fragment(12000) == [3839, 3839, 3839, 483]
    frames = FrameFactory().message(FlowSpec(0, 1, "VideoConf"), 0, 0)
    assert [f.payload_bits for f in frames] == [3839 * 8] * 3 + [483 * 8]
    assert len({f.msg for f in frames}) == 1


@given(st.integers(1, 500_000))
def test_fragment_count(n):
    parts = fragment(n)
    assert len(parts) == math.ceil(n / MAX_TX_FRAME_BYTES)
    assert sum(parts) == n and max(parts) <= MAX_TX_FRAME_BYTES


def test_cbr_volume():
    assert abs(volume_bps(FlowSpec(0, 1, "VoiceCBR"), 300 * S) / 64_000 - 1) < 0.01
    assert abs(volume_bps(FlowSpec(0, 1, "VideoConf"), 300 * S) / (12000 * 8 * 30) - 1) < 0.01


def test_email_volume_over_an_hour():
    assert abs(volume_bps(FlowSpec(0, 1, "EmailHeavy"), 3600 * S, seed=8) / 400_000 - 1) < 0.05


def test_poisson_volume():
    f = FlowSpec(0, 1, "Poisson").with_process(mean_interval=10 * MS)
    assert abs(volume_bps(f, 300 * S, seed=2) / (1500 * 8 * 100) - 1) < 0.05


def test_flow_window_respected():
    f = FlowSpec(0, 1, "VoiceCBR", start=1 * S, stop=2 * S)
    ts = list(arrivals(f, None, 10 * S))
    assert ts[0] == 1 * S + 20 * MS and ts[-1] < 2 * S and len(ts) == 49


def test_default_bindings_and_override():
    assert FlowSpec(0, 1, "VideoConf").ac is AC.AC_VI
    assert FlowSpec(0, 1, "EmailHeavy").ac is AC.AC_BE
    assert FlowSpec(0, 1, "EmailHeavy", ac=AC.AC_BK).ac is AC.AC_BK


def test_relayed_flow_addresses_the_server_first():
    f, *_ = FrameFactory().message(FlowSpec(0, 1, "VideoConf", relay=4), 0, 0)
    assert (f.dst, f.final_dst) == (4, 1)


def test_relay_delivers_once_across_two_hops():
    cfg = preset("video-infra").with_(duration=3 * S, strategy=SensingStrategy.fixed_ms(1))
    res = run(cfg, keep_pairs=True)
    m = res.network.metrics
    assert m.e2e
    assert all(node in (0, 1, 2, 3) for _, node, _, _ in m.e2e)
    # the AP queues the second hop
    ap = res.network.stations[4].stats[AC.AC_VI]
    assert ap.enqueued > 0
    # each delivered frame has a single positive sample that covers both hops
    assert all(d > 0 for *_, d in m.e2e)
    assert all(e2e > mad for mad, e2e in m.pairs)
