import pytest
from hypothesis import given, strategies as st

from whitefi.engine import MS, Engine, SchedulingError, derive_seed, from_seconds, to_seconds


def test_first_event_gets_id_one():
    eng = Engine()
    assert eng.schedule(0, lambda: None).id == 1


def test_same_instant_runs_in_insertion_order():
    eng = Engine()
    seen = []
    for tag in "abc":
        eng.schedule(5, seen.append, tag)
    eng.run_until(10)
    assert seen == ["a", "b", "c"]


def test_schedule_in_the_past_raises():
    eng = Engine()
    eng.run_until(100)
    with pytest.raises(SchedulingError):
        eng.schedule(99, lambda: None)


def test_cancel_pending_fired_and_twice():
    eng = Engine()
    a = eng.schedule(1, lambda: None)
    b = eng.schedule(2, lambda: None)
    assert eng.cancel(b) is True
    assert eng.cancel(b) is False
    eng.run_until(5)
    assert eng.cancel(a) is False
    assert eng.fired == 1 and eng.cancelled == 1


def test_run_until_empty_queue_moves_clock():
    eng = Engine()
    assert eng.run_until(1234) == 0
    assert eng.now == 1234


def test_run_until_counts_only_due_events():
    eng = Engine()
    for t in (1, 2, 3, 50):
        eng.schedule(t, lambda: None)
    assert eng.run_until(10) == 3
    assert eng.pending() == 1


def test_event_scheduled_by_handler_runs_in_same_call():
    eng = Engine()
    seen = []
    eng.schedule(1, lambda: eng.schedule(eng.now + 1, seen.append, "child"))
    assert eng.run_until(5) == 2
    assert seen == ["child"]


def test_named_streams_are_reproducible_and_distinct():
    draws = lambda seed, name: [Engine(seed).rng_stream(name).random() for _ in range(1)][0]
    a = Engine(7).rng_stream("backoff.node0")
    b = Engine(7).rng_stream("backoff.node0")
    assert [a.random() for _ in range(5)] == [b.random() for _ in range(5)]
    assert draws(7, "backoff.node1") != draws(7, "backoff.node0")
    assert draws(8, "backoff.node0") != draws(7, "backoff.node0")


def test_stream_seed_is_pinned():
    # recorded once from the blake2b mix; a change here breaks cross-version reproducibility
    assert derive_seed(1, "backoff.node0") == 16053266064542601853
    assert Engine(1).rng_stream("backoff.node0").stream_seed == 16053266064542601853


def test_second_conversions_round_trip():
    assert from_seconds(0.05) == 50 * MS
    assert to_seconds(50 * MS) == 0.05


@given(st.lists(st.tuples(st.integers(0, 10_000), st.booleans()), max_size=60))
def test_events_fire_once_or_cancel_once_in_time_order(plan):
    eng = Engine()
    fired = []
    events = [eng.schedule(t, lambda e=i: fired.append((eng.now, e))) for i, (t, _) in enumerate(plan)]
    for ev, (_, drop) in zip(events, plan):
        if drop:
            eng.cancel(ev)
    eng.run_until(20_000)
    times = [t for t, _ in fired]
    assert times == sorted(times)
    assert eng.fired + eng.cancelled == eng.scheduled == len(plan)
    assert sorted(e for _, e in fired) == [i for i, (_, drop) in enumerate(plan) if not drop]
    # ties keep insertion order
    for (t1, e1), (t2, e2) in zip(fired, fired[1:]):
        if t1 == t2:
            assert e1 < e2
