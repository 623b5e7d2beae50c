"""Synchronous unit-speed stepping engine for double-edged relay networks.

Each call to :meth:`Engine.step` runs three phases:

1. every signal sitting in the last cell of its array is removed and becomes
   incident on the array's destination relay;
2. every remaining signal moves forward one cell;
3. each relay with incident signals applies its behavior and writes the
   results into the first cells of its outgoing arrays.

A signal written into the first cell of an array of length ``w`` at step
``s`` is incident on the far relay during step ``s + w``, and its children
sit in the next first cells at the end of that same step. Crossing an edge
therefore costs exactly its weight in steps.

Cells are 1-based: cell 1 is adjacent to ``from_relay`` and cell ``length``
to ``to_relay``.
"""

from __future__ import annotations

import enum
import io
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, TextIO

from . import relays
from .relays import Behavior, Incidence

__all__ = [
    "DirectedArray",
    "Engine",
    "HaltReason",
    "InjectionError",
    "RelayNode",
    "ReplayError",
    "Signal",
    "TopologyError",
    "TraceEvent",
    "build_engine",
    "dumps",
    "read_trace",
    "replay",
    "restore",
]

EVENT_KINDS = (
    "inject",
    "shift",
    "incident",
    "emit",
    "filtered",
    "annihilated",
    "collision_tiebreak",
    "arrival",
)

#: one survivor per relay per step, chosen by (|amplitude|, signal id)
TIEBREAK = "tiebreak"
#: every incident signal is processed; simultaneous emissions share a cell
SUPERPOSE = "superpose"


class TopologyError(ValueError):
    pass


class InjectionError(ValueError):
    pass


class ReplayError(RuntimeError):
    pass


class HaltReason(str, enum.Enum):
    PREDICATE = "predicate"
    BUDGET = "step budget"
    QUIESCENT = "quiescent"


def dumps(obj) -> str:
    """Canonical JSON used for snapshots and traces."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class Signal:
    id: int
    amplitude: int
    parent: int | None
    birth_step: int
    birth_site: str

    def to_json(self):
        return {
            "id": self.id,
            "amplitude": str(self.amplitude),
            "parent": self.parent,
            "birth_step": self.birth_step,
            "birth_site": self.birth_site,
        }

    @classmethod
    def from_json(cls, d):
        return cls(d["id"], int(d["amplitude"]), d["parent"], d["birth_step"], d["birth_site"])


@dataclass
class DirectedArray:
    id: str
    from_relay: str
    to_relay: str
    length: int
    index: int = 0
    pair: str | None = None
    # each cell is a tuple of signal ids; () is vacant
    cells: list[tuple[int, ...]] = field(default_factory=list)

    def __post_init__(self):
        if not self.cells:
            self.cells = [()] * self.length

    def occupied(self) -> bool:
        return any(self.cells)


@dataclass
class RelayNode:
    id: str
    behavior: Behavior
    incoming: list[str] = field(default_factory=list)
    outgoing: list[str] = field(default_factory=list)
    state: Any = None
    index: int = 0


@dataclass(frozen=True)
class TraceEvent:
    step: int
    kind: str
    payload: dict

    def to_json(self):
        return {"kind": self.kind, **self.payload}


def _cell_json(cell):
    if not cell:
        return None
    if len(cell) == 1:
        return cell[0]
    return list(cell)


def _cell_from_json(value):
    if value is None:
        return ()
    if isinstance(value, list):
        return tuple(value)
    return (value,)


class Engine:
    """Holds arrays, relays, the signal registry and the trace."""

    def __init__(self, collisions: str = TIEBREAK):
        if collisions not in (TIEBREAK, SUPERPOSE):
            raise TopologyError(f"unknown collision policy {collisions!r}")
        self.collisions = collisions
        self.step_count = 0
        self.relays: dict[str, RelayNode] = {}
        self.arrays: dict[str, DirectedArray] = {}
        self.signals: list[Signal] = []
        self.trace: list[TraceEvent] = []
        self.topology: dict = {}
        self._array_list: list[DirectedArray] = []
        self._relay_list: list[RelayNode] = []
        self._active: set[int] = set()
        self._live = 0

    # construction ---------------------------------------------------------

    def _add_relay(self, rid, behavior, state):
        if rid in self.relays:
            raise TopologyError(f"duplicate relay id {rid!r}")
        node = RelayNode(rid, behavior, state=state, index=len(self._relay_list))
        self.relays[rid] = node
        self._relay_list.append(node)

    def _add_array(self, aid, src, dst, length, pair=None):
        if aid in self.arrays:
            raise TopologyError(f"duplicate array id {aid!r}")
        for end in (src, dst):
            if end not in self.relays:
                raise TopologyError(f"array {aid!r} references unknown relay {end!r}")
        if not isinstance(length, int) or isinstance(length, bool) or length < 1:
            raise TopologyError(f"array {aid!r} has invalid length {length!r}")
        arr = DirectedArray(aid, src, dst, length, index=len(self._array_list), pair=pair)
        self.arrays[aid] = arr
        self._array_list.append(arr)
        self.relays[src].outgoing.append(aid)
        self.relays[dst].incoming.append(aid)

    def _pair_arrays(self):
        by_ends: dict[tuple[str, str], list[DirectedArray]] = {}
        for arr in self._array_list:
            by_ends.setdefault((arr.from_relay, arr.to_relay), []).append(arr)
        for arr in self._array_list:
            if arr.pair is not None:
                other = self.arrays.get(arr.pair)
                if other is None:
                    raise TopologyError(f"array {arr.id!r} paired with unknown {arr.pair!r}")
                if (other.from_relay, other.to_relay) != (arr.to_relay, arr.from_relay):
                    raise TopologyError(f"array {arr.id!r} and {other.id!r} are not opposite")
                if other.length != arr.length:
                    raise TopologyError(f"paired arrays {arr.id!r}/{other.id!r} differ in length")
                continue
            candidates = [
                o
                for o in by_ends.get((arr.to_relay, arr.from_relay), [])
                if o.length == arr.length
            ]
            if len(candidates) == 1:
                arr.pair = candidates[0].id

    def topology_json(self) -> dict:
        return {
            "collisions": self.collisions,
            "relays": [
                {
                    "id": r.id,
                    "behavior": r.behavior.to_json(),
                    "state": r.behavior.state_to_json(r.state),
                }
                for r in self._relay_list
            ],
            "arrays": [
                {
                    "id": a.id,
                    "from": a.from_relay,
                    "to": a.to_relay,
                    "length": a.length,
                    "pair": a.pair,
                }
                for a in self._array_list
            ],
        }

    # queries --------------------------------------------------------------

    def relay(self, rid: str) -> RelayNode:
        return self.relays[rid]

    def live_signals(self) -> list[tuple[int, str, int]]:
        """``(signal id, array id, cell)`` for every live signal, in array order."""
        out = []
        for ai in sorted(self._active):
            arr = self._array_list[ai]
            for i, cell in enumerate(arr.cells, start=1):
                for sid in cell:
                    out.append((sid, arr.id, i))
        return out

    @property
    def quiescent(self) -> bool:
        return self._live == 0

    def frame(self) -> dict[tuple[str, int], tuple[int, ...]]:
        """Occupancy map ``(array id, cell) -> amplitudes``, history-free."""
        frame = {}
        for ai in sorted(self._active):
            arr = self._array_list[ai]
            for i, cell in enumerate(arr.cells, start=1):
                if cell:
                    frame[(arr.id, i)] = tuple(self.signals[s].amplitude for s in cell)
        return frame

    def lineage(self, sid: int) -> list[Signal]:
        """Signal ``sid`` followed by its ancestors back to the injected root."""
        chain = []
        seen = set()
        cur: int | None = sid
        while cur is not None:
            if cur in seen or not 0 <= cur < len(self.signals):
                raise ReplayError(f"broken lineage at signal {cur!r}")
            seen.add(cur)
            sig = self.signals[cur]
            chain.append(sig)
            cur = sig.parent
        return chain

    # dynamics -------------------------------------------------------------

    def _new_signal(self, amplitude, parent, site):
        sig = Signal(len(self.signals), amplitude, parent, self.step_count, site)
        self.signals.append(sig)
        return sig

    def _log(self, step, kind, **payload):
        ev = TraceEvent(step, kind, payload)
        self.trace.append(ev)
        return ev

    def inject(self, array_id: str, cell: int, amplitude: int) -> int:
        if self.step_count != 0:
            raise InjectionError("injection is only allowed at step 0")
        if not isinstance(amplitude, int) or amplitude == 0:
            raise InjectionError(f"amplitude must be a nonzero integer, got {amplitude!r}")
        try:
            arr = self.arrays[array_id]
        except KeyError:
            raise InjectionError(f"unknown array {array_id!r}") from None
        if not 1 <= cell <= arr.length:
            raise InjectionError(f"cell {cell} outside 1..{arr.length} of {array_id!r}")
        if arr.cells[cell - 1]:
            raise InjectionError(f"cell {cell} of {array_id!r} is occupied")
        sig = self._new_signal(amplitude, None, arr.from_relay)
        arr.cells[cell - 1] = (sig.id,)
        self._active.add(arr.index)
        self._live += 1
        self._log(0, "inject", signal=sig.id, array=arr.id, cell=cell, amplitude=str(amplitude))
        return sig.id

    def step(self) -> list[TraceEvent]:
        t = self.step_count + 1
        start = len(self.trace)
        active = sorted(self._active)

        # phase 1: collect incidences
        incident: dict[int, list[tuple[int, DirectedArray]]] = {}
        for ai in active:
            arr = self._array_list[ai]
            last = arr.cells[-1]
            if not last:
                continue
            relay = self.relays[arr.to_relay]
            for sid in last:
                incident.setdefault(relay.index, []).append((sid, arr))
                self._log(
                    t, "incident", signal=sid, relay=relay.id, array=arr.id,
                    amplitude=str(self.signals[sid].amplitude),
                )
            self._live -= len(last)

        # phase 2: shift
        moved = []
        for ai in active:
            arr = self._array_list[ai]
            cells = arr.cells
            cells.pop()
            cells.insert(0, ())
            occupied = False
            for i, cell in enumerate(cells, start=1):
                if cell:
                    occupied = True
                    moved.extend([sid, arr.id, i] for sid in cell)
            if not occupied:
                self._active.discard(ai)
        self._log(t, "shift", moved=moved)

        # phase 3: relay emission
        self.step_count = t
        for ri in sorted(incident):
            relay = self._relay_list[ri]
            batch = sorted(incident[ri], key=lambda x: (abs(self.signals[x[0]].amplitude), x[0]))
            if self.collisions == TIEBREAK and len(batch) > 1:
                self._log(
                    t, "collision_tiebreak", relay=relay.id, survivor=batch[0][0],
                    dropped=[sid for sid, _ in batch[1:]],
                )
                batch = batch[:1]
            for sid, arr in batch:
                self._react(t, relay, self.signals[sid], arr)

        return self.trace[start:]

    def _react(self, t, relay, sig, arr):
        inc = Incidence(
            relay=relay.id,
            signal=sig.id,
            step=t,
            arrival=arr.id,
            reverse=arr.pair,
            outgoing=tuple(relay.outgoing),
            state=relay.state,
        )
        reaction = relay.behavior.react(sig.amplitude, inc)
        if reaction.outcome == "filtered":
            self._log(t, "filtered", signal=sig.id, relay=relay.id, reason=reaction.reason)
        elif reaction.outcome == "arrival":
            self._log(t, "arrival", signal=sig.id, relay=relay.id, amplitude=str(sig.amplitude))
        for aid, amp in reaction.emissions:
            out = self.arrays[aid]
            if out.from_relay != relay.id:
                raise relays.RelayError(f"relay {relay.id!r} cannot emit on {aid!r}")
            if amp == 0:
                self._log(t, "annihilated", signal=sig.id, relay=relay.id, array=aid)
                continue
            first = out.cells[0]
            if first and self.collisions == TIEBREAK:
                raise AssertionError(f"mid-array coincidence in first cell of {aid!r}")
            child = self._new_signal(amp, sig.id, relay.id)
            out.cells[0] = first + (child.id,)
            self._active.add(out.index)
            self._live += 1
            self._log(
                t, "emit", signal=child.id, parent=sig.id, relay=relay.id, array=aid,
                amplitude=str(amp),
            )

    def run_until(
        self,
        predicate: Callable[[Engine], bool] | None = None,
        max_steps: int = 0,
    ) -> tuple[int, HaltReason]:
        if max_steps < 0:
            raise ValueError("max_steps must be >= 0")
        done = 0
        while True:
            if predicate is not None and predicate(self):
                return done, HaltReason.PREDICATE
            if done >= max_steps:
                return done, HaltReason.BUDGET
            self.step()
            done += 1
            if self.quiescent:
                if predicate is not None and predicate(self):
                    return done, HaltReason.PREDICATE
                return done, HaltReason.QUIESCENT

    # serialization --------------------------------------------------------

    def snapshot(self, history: bool = True) -> dict:
        """Serializable state.

        With ``history=False`` cells carry amplitudes instead of signal ids and
        the step counter and signal registry are dropped, so two states that
        differ only in elapsed time and lineage compare equal.
        """
        topo = self.topology_json()
        for entry, arr in zip(topo["arrays"], self._array_list):
            if history:
                entry["cells"] = [_cell_json(c) for c in arr.cells]
            else:
                entry["cells"] = [
                    _cell_json(tuple(str(self.signals[s].amplitude) for s in c))
                    for c in arr.cells
                ]
        if history:
            topo["step"] = self.step_count
            topo["signals"] = [s.to_json() for s in self.signals]
        return topo

    def trace_records(self) -> list[dict]:
        """One ``{"step": t, "events": [...]}`` record per executed step."""
        records = [{"step": t, "events": []} for t in range(self.step_count + 1)]
        for ev in self.trace:
            records[ev.step]["events"].append(ev.to_json())
        return records[1:]

    def write_trace(self, fp: TextIO) -> None:
        """JSON-lines trace: a header line, then one line per step."""
        header = {
            "topology": self.topology,
            "injections": [ev.to_json() for ev in self.trace if ev.kind == "inject"],
        }
        fp.write(dumps(header) + "\n")
        for rec in self.trace_records():
            fp.write(dumps(rec) + "\n")

    def trace_text(self) -> str:
        buf = io.StringIO()
        self.write_trace(buf)
        return buf.getvalue()


def build_engine(topology: dict) -> Engine:
    """Engine at step 0 from a topology dict (see README for the schema).

    ``cells``, ``signals`` and ``step`` are ignored here; use :func:`restore`.
    """
    eng = Engine(topology.get("collisions", TIEBREAK))
    for entry in topology.get("relays", []):
        behavior = relays.behavior_from_json(entry["behavior"])
        state = behavior.state_from_json(entry.get("state"))
        eng._add_relay(entry["id"], behavior, state)
    for entry in topology.get("arrays", []):
        eng._add_array(entry["id"], entry["from"], entry["to"], entry["length"], entry.get("pair"))
    eng._pair_arrays()
    eng.topology = eng.topology_json()
    return eng


def restore(snapshot: dict) -> Engine:
    eng = build_engine(snapshot)
    eng.signals = [Signal.from_json(s) for s in snapshot.get("signals", [])]
    eng.step_count = snapshot.get("step", 0)
    for entry, arr in zip(snapshot["arrays"], eng._array_list):
        cells = entry.get("cells")
        if cells is None:
            continue
        if len(cells) != arr.length:
            raise TopologyError(f"array {arr.id!r} has {len(cells)} cells, expected {arr.length}")
        arr.cells = [_cell_from_json(c) for c in cells]
        n = sum(len(c) for c in arr.cells)
        if n:
            eng._active.add(arr.index)
            eng._live += n
    return eng


def read_trace(lines: Iterable[str]) -> tuple[dict, list[dict]]:
    it = iter(lines)
    header = json.loads(next(it))
    records = [json.loads(line) for line in it if line.strip()]
    return header, records


def replay(lines: Iterable[str]) -> Engine:
    """Rebuild an engine from a JSON-lines trace, checking every step matches."""
    header, records = read_trace(lines)
    eng = build_engine(header["topology"])
    for ev in header["injections"]:
        eng.inject(ev["array"], ev["cell"], int(ev["amplitude"]))
    for rec in records:
        events = [ev.to_json() for ev in eng.step()]
        if rec["step"] != eng.step_count or events != rec["events"]:
            raise ReplayError(f"trace diverges at step {rec['step']}")
    return eng
