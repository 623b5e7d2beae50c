import io
import json
import random

import pytest

from netgen import random_linear_topology, random_sites
from spidernet import demos
from spidernet.engine import (
    EVENT_KINDS,
    HaltReason,
    InjectionError,
    ReplayError,
    TopologyError,
    build_engine,
    dumps,
    replay,
    restore,
)
from spidernet.graph import overlay


def pair_topology(length=3, kind="bounce"):
    return demos.loop_topology({"kind": kind}, length)


def one_way(length):
    return {
        "relays": [{"id": "X", "behavior": {"kind": "split"}}, {"id": "Y", "behavior": {"kind": "split"}}],
        "arrays": [{"id": "X->Y", "from": "X", "to": "Y", "length": length}],
    }


# build_engine ---------------------------------------------------------------


def test_build_two_relays():
    eng = build_engine(pair_topology(3))
    assert len(eng.relays) == 2 and len(eng.arrays) == 2
    assert sum(a.length for a in eng.arrays.values()) == 6
    assert all(not c for a in eng.arrays.values() for c in a.cells)
    assert eng.step_count == 0 and eng.trace == []
    assert eng.arrays["X->Y"].pair == "Y->X"


def test_empty_topology_steps_as_noop():
    eng = build_engine({})
    events = eng.step()
    assert [(e.kind, e.payload) for e in events] == [("shift", {"moved": []})]
    assert eng.step_count == 1


@pytest.mark.parametrize(
    "array",
    [
        {"id": "a", "from": "X", "to": "Q", "length": 1},
        {"id": "a", "from": "X", "to": "Y", "length": 0},
        {"id": "a", "from": "X", "to": "Y", "length": -2},
    ],
)
def test_build_rejects_bad_arrays(array):
    topo = one_way(1)
    topo["arrays"] = [array]
    with pytest.raises(TopologyError):
        build_engine(topo)


def test_explicit_pair_must_be_opposite():
    topo = pair_topology(2)
    topo["arrays"][0]["pair"] = "X->Y"
    with pytest.raises(TopologyError):
        build_engine(topo)


# inject ---------------------------------------------------------------------


def test_inject_creates_root_signal():
    eng = build_engine(pair_topology(3))
    sid = eng.inject("X->Y", 1, 2)
    sig = eng.signals[sid]
    assert sig.parent is None and sig.birth_step == 0 and sig.birth_site == "X"
    assert eng.trace[-1].kind == "inject"
    assert eng.inject("Y->X", 2, -3) == sid + 1


def test_inject_errors():
    eng = build_engine(pair_topology(3))
    eng.inject("X->Y", 1, 2)
    with pytest.raises(InjectionError):
        eng.inject("X->Y", 1, 5)
    with pytest.raises(InjectionError):
        eng.inject("X->Y", 2, 0)
    with pytest.raises(InjectionError):
        eng.inject("X->Y", 4, 1)
    eng.step()
    with pytest.raises(InjectionError):
        eng.inject("Y->X", 1, 1)


# step -----------------------------------------------------------------------


def test_pure_shift():
    eng = build_engine(one_way(5))
    eng.inject("X->Y", 2, 7)
    eng.step()
    assert eng.frame() == {("X->Y", 3): (7,)}


def test_last_cell_bounces_into_return_array():
    eng = build_engine(pair_topology(3))
    root = eng.inject("X->Y", 3, 4)
    eng.step()
    assert eng.frame() == {("Y->X", 1): (4,)}
    (child,) = [s for s in eng.signals if s.parent == root]
    assert child.birth_site == "Y" and child.birth_step == 1
    kinds = [e.kind for e in eng.trace if e.step == 1]
    assert kinds == ["incident", "shift", "emit"]


@pytest.mark.parametrize("lengths", [[1], [5], [2, 3, 1], [4, 1, 6, 2]])
def test_timing_contract(lengths):
    # chain of split relays; one edge of weight w costs exactly w steps
    n = len(lengths)
    topo = {
        "relays": [{"id": f"r{i}", "behavior": {"kind": "split"}} for i in range(n + 1)],
        "arrays": [
            {"id": f"a{i}", "from": f"r{i}", "to": f"r{i + 1}", "length": w}
            for i, w in enumerate(lengths)
        ],
    }
    eng = build_engine(topo)
    eng.inject("a0", 1, 1)
    entered = 0
    for i, w in enumerate(lengths):
        for _ in range(w - 1):
            eng.step()
        assert eng.frame() == {(f"a{i}", w): (1,)}
        assert eng.step_count == entered + w - 1
        eng.step()
        incident = [e for e in eng.trace if e.step == entered + w and e.kind == "incident"]
        assert [e.payload["relay"] for e in incident] == [f"r{i + 1}"]
        entered += w
    assert eng.quiescent and eng.step_count == sum(lengths)


def test_collision_tiebreak_smallest_magnitude_then_id():
    topo = {
        "relays": [{"id": r, "behavior": {"kind": "split"}} for r in ("L", "M", "R", "Z")],
        "arrays": [
            {"id": "L->M", "from": "L", "to": "M", "length": 1},
            {"id": "R->M", "from": "R", "to": "M", "length": 1},
            {"id": "Q->M", "from": "Z", "to": "M", "length": 1},
            {"id": "M->Z", "from": "M", "to": "Z", "length": 2},
        ],
    }
    eng = build_engine(topo)
    a = eng.inject("L->M", 1, 5)
    b = eng.inject("R->M", 1, -3)
    c = eng.inject("Q->M", 1, 3)
    events = eng.step()
    (tb,) = [e for e in events if e.kind == "collision_tiebreak"]
    assert tb.payload == {"relay": "M", "survivor": b, "dropped": [c, a]}
    assert eng.frame() == {("M->Z", 1): (-3,)}


def test_superpose_keeps_all_incident_signals():
    topo = {
        "collisions": "superpose",
        "relays": [{"id": r, "behavior": {"kind": "split"}} for r in ("L", "M", "R", "Z")],
        "arrays": [
            {"id": "L->M", "from": "L", "to": "M", "length": 1},
            {"id": "R->M", "from": "R", "to": "M", "length": 1},
            {"id": "M->Z", "from": "M", "to": "Z", "length": 2},
        ],
    }
    eng = build_engine(topo)
    eng.inject("L->M", 1, 5)
    eng.inject("R->M", 1, -3)
    eng.step()
    assert eng.frame() == {("M->Z", 1): (-3, 5)}
    eng.step()
    assert eng.frame() == {("M->Z", 2): (-3, 5)}
    assert eng.live_signals() == [(2, "M->Z", 2), (3, "M->Z", 2)]


def test_event_kinds_and_incidence_before_emission():
    rng = random.Random(5)
    for _ in range(20):
        topo = random_linear_topology(rng)
        eng = build_engine(topo)
        for aid, cell in random_sites(rng, topo, 2):
            eng.inject(aid, cell, rng.choice([1, -2, 3]))
        for _ in range(15):
            kinds = [e.kind for e in eng.step()]
            assert set(kinds) <= set(EVENT_KINDS)
            if "emit" in kinds and "incident" in kinds:
                assert max(i for i, k in enumerate(kinds) if k == "incident") < kinds.index("emit")


# run_until ------------------------------------------------------------------


def test_run_until_triangle_arrival(triangle):
    eng = build_engine(overlay(triangle, source="A", destination="C"))
    for aid in eng.relay("A").outgoing:
        eng.inject(aid, 1, 2)
    dest = eng.relay("C").state
    steps, why = eng.run_until(lambda e: dest.arrival is not None, 100)
    assert (steps, why) == (2, HaltReason.PREDICATE)
    assert dest.arrival[0] == 2


def test_run_until_zero_budget():
    eng = build_engine(pair_topology(2))
    eng.inject("X->Y", 1, 1)
    assert eng.run_until(lambda e: False, 0) == (0, HaltReason.BUDGET)
    assert eng.step_count == 0


def test_run_until_quiescent_empty():
    eng = build_engine({})
    assert eng.run_until(lambda e: False, 50) == (1, HaltReason.QUIESCENT)


def test_run_until_negative_budget():
    with pytest.raises(ValueError):
        build_engine({}).run_until(None, -1)


# snapshot / replay ----------------------------------------------------------


def test_snapshot_round_trip_at_step_zero():
    eng = build_engine(pair_topology(3))
    eng.inject("X->Y", 2, 9)
    snap = dumps(eng.snapshot())
    assert dumps(restore(json.loads(snap)).snapshot()) == snap


def test_snapshot_round_trip_mid_run_and_continue():
    eng = build_engine(pair_topology(3, "negate"))
    eng.inject("X->Y", 1, 9)
    for _ in range(7):
        eng.step()
    clone = restore(json.loads(dumps(eng.snapshot())))
    assert dumps(clone.snapshot()) == dumps(eng.snapshot())
    for _ in range(11):
        eng.step()
        clone.step()
    assert dumps(clone.snapshot()) == dumps(eng.snapshot())


def test_identical_runs_give_identical_snapshots():
    def run():
        eng = demos.loop_engine({"kind": "amplify", "k": 3}, 2, 5)
        for _ in range(30):
            eng.step()
        return dumps(eng.snapshot()), eng.trace_text()

    assert run() == run()


def test_periodic_loop_history_free_snapshot():
    eng = demos.loop_engine({"kind": "bounce"}, 3, 4)
    for _ in range(100):
        eng.step()
    at_100 = dumps(eng.snapshot(history=False))
    for _ in range(6):
        eng.step()
    assert dumps(eng.snapshot(history=False)) == at_100


def test_trace_replay_reproduces_state():
    rng = random.Random(11)
    topo = random_linear_topology(rng, 4)
    eng = build_engine(topo)
    for aid, cell in random_sites(rng, topo, 3):
        eng.inject(aid, cell, rng.choice([1, 2, -5]))
    for _ in range(25):
        eng.step()
    text = eng.trace_text()
    lines = text.splitlines()
    assert len(lines) == 26
    again = replay(io.StringIO(text))
    assert dumps(again.snapshot()) == dumps(eng.snapshot())


def test_replay_detects_tampering():
    eng = demos.loop_engine({"kind": "bounce"}, 2, 1)
    for _ in range(5):
        eng.step()
    lines = eng.trace_text().splitlines()
    rec = json.loads(lines[3])
    rec["events"][0]["amplitude"] = "99"
    lines[3] = json.dumps(rec)
    with pytest.raises(ReplayError):
        replay(lines)


# invariants over traces -----------------------------------------------------


def _check_unit_speed(eng):
    entry = {}
    for ev in eng.trace:
        p = ev.payload
        if ev.kind == "inject":
            entry[p["signal"]] = (ev.step, p["cell"])
        elif ev.kind == "emit":
            entry[p["signal"]] = (ev.step, 1)
        elif ev.kind == "shift":
            for sid, _aid, cell in p["moved"]:
                s0, c0 = entry[sid]
                assert cell - c0 == ev.step - s0


def test_unit_speed_and_single_occupancy_on_random_networks():
    rng = random.Random(2024)
    for _ in range(40):
        topo = random_linear_topology(rng)
        eng = build_engine(topo)
        for aid, cell in random_sites(rng, topo, rng.randint(1, 3)):
            eng.inject(aid, cell, rng.choice([1, -1, 2, 7]))
        for _ in range(20):
            eng.step()
            for arr in eng.arrays.values():
                assert all(len(c) <= 1 for c in arr.cells)
        _check_unit_speed(eng)
        for sig in eng.signals:
            if sig.parent is not None:
                assert sig.birth_step > eng.signals[sig.parent].birth_step
                assert sig.id > sig.parent


@pytest.mark.parametrize("half", [1, 4, 9])
def test_dalembert_split_small_lines(half):
    eng = demos.line_engine(half)
    assert demos.line_offsets(eng) == {0: (1,)}
    for t in range(1, half + 1):
        eng.step()
        assert demos.line_offsets(eng) == {-t: (1,), t: (1,)}
    eng.step()
    assert eng.quiescent
