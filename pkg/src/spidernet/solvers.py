"""Graph solvers driven by signal propagation on a prime overlay."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TextIO

from . import graph as g
from .engine import Engine, HaltReason, ReplayError, build_engine
from .graph import Graph

__all__ = [
    "CycleResult",
    "PathResult",
    "enumerate_paths",
    "hamiltonian_cycle",
    "recover_path_order",
    "shortest_path",
]


@dataclass
class PathResult:
    distance: int
    vertices: list[str]
    vertex_set: frozenset[str]
    arrival_amplitude: int
    arrival_step: int
    steps: int = 0
    signals: int = 0

    def to_json(self):
        return {
            "found": True,
            "distance": self.distance,
            "path": list(self.vertices),
            "vertex_set": sorted(self.vertex_set, key=g.vertex_key),
            "amplitude": str(self.arrival_amplitude),
            "arrival_step": self.arrival_step,
            "steps": self.steps,
            "signals": self.signals,
        }


@dataclass
class CycleResult:
    vertices: list[str]
    total_weight: int
    arrival_step: int
    arrival_amplitude: int = 1
    steps: int = 0
    signals: int = 0

    def to_json(self):
        return {
            "found": True,
            "cycle": list(self.vertices),
            "weight": self.total_weight,
            "amplitude": str(self.arrival_amplitude),
            "arrival_step": self.arrival_step,
            "steps": self.steps,
            "signals": self.signals,
        }


@dataclass
class _Run:
    engine: Engine
    labeling: dict[str, int]
    halt: HaltReason | None = None
    steps: int = 0
    extra: dict = field(default_factory=dict)


def _check_vertex(graph: Graph, v: str):
    if v not in graph.adjacency:
        raise KeyError(f"unknown vertex {v!r}")


def _launch(graph: Graph, source: str, mode: str, **roles) -> _Run:
    labeling = g.assign_primes(graph)
    eng = build_engine(g.overlay(graph, labeling, mode, source=source, **roles))
    p = labeling[source]
    for aid in eng.relay(source).outgoing:
        eng.inject(aid, 1, p)
    return _Run(eng, labeling)


def recover_path_order(signal_id: int, engine: Engine, destination: str | None = None) -> list[str]:
    """Ordered vertex list of the path walked by ``signal_id``.

    Walks the parent chain back to the injected root; birth sites in reverse
    give the path, and the relay the signal arrived at closes it.
    """
    if destination is None:
        for ev in reversed(engine.trace):
            if ev.kind == "arrival" and ev.payload["signal"] == signal_id:
                destination = ev.payload["relay"]
                break
        else:
            raise ReplayError(f"signal {signal_id} never arrived anywhere")
    chain = engine.lineage(signal_id)
    for child, parent in zip(chain, chain[1:]):
        if child.birth_step <= parent.birth_step:
            raise ReplayError(f"signal {child.id} born no later than its parent")
    return [s.birth_site for s in reversed(chain)] + [destination]


def _path_result(run: _Run, graph: Graph, step: int, sid: int, destination: str) -> PathResult:
    eng = run.engine
    amp = eng.signals[sid].amplitude
    path = recover_path_order(sid, eng, destination)
    # destination never amplifies; add it explicitly
    vset = g.factor_amplitude(amp, run.labeling) | {destination}
    if vset != set(path) or len(path) != len(vset):
        raise ReplayError(f"lineage {path} disagrees with amplitude {amp}")
    if graph.path_weight(path) != step:
        raise ReplayError(f"path {path} weighs {graph.path_weight(path)}, arrived at {step}")
    return PathResult(
        distance=step,
        vertices=path,
        vertex_set=frozenset(vset),
        arrival_amplitude=amp,
        arrival_step=step,
        steps=run.steps,
        signals=len(eng.signals),
    )


def _finish(run: _Run, trace: TextIO | None):
    if trace is not None:
        run.engine.write_trace(trace)


def shortest_path(
    graph: Graph,
    source: str,
    destination: str,
    *,
    mode: str = g.BFS,
    budget: int | None = None,
    trace: TextIO | None = None,
) -> PathResult | None:
    """First-arrival shortest path; ``None`` when the destination is unreachable."""
    _check_vertex(graph, source)
    _check_vertex(graph, destination)
    if source == destination:
        p = g.assign_primes(graph)[source]
        if trace is not None:
            build_engine(g.overlay(graph, mode=mode, source=source)).write_trace(trace)
        return PathResult(0, [source], frozenset([source]), p, 0)
    run = _launch(graph, source, mode, destination=destination)
    dest = run.engine.relay(destination).state
    if budget is None:
        budget = graph.total_weight + 1
    run.steps, run.halt = run.engine.run_until(lambda e: dest.arrival is not None, budget)
    _finish(run, trace)
    if dest.arrival is None:
        return None
    step, sid = dest.arrival
    return _path_result(run, graph, step, sid, destination)


def enumerate_paths(
    graph: Graph,
    source: str,
    destination: str,
    step_budget: int,
    *,
    trace: TextIO | None = None,
) -> list[tuple[list[str], int]]:
    """Every simple path of weight <= ``step_budget``, in arrival order."""
    _check_vertex(graph, source)
    _check_vertex(graph, destination)
    if step_budget < 0:
        raise ValueError("step_budget must be >= 0")
    if source == destination:
        return [([source], 0)]
    run = _launch(graph, source, g.ENUMERATE, destination=destination)
    run.steps, run.halt = run.engine.run_until(None, step_budget)
    _finish(run, trace)
    out = []
    for step, sid in run.engine.relay(destination).state.arrivals:
        out.append((_path_result(run, graph, step, sid, destination).vertices, step))
    return out


def hamiltonian_cycle(
    graph: Graph,
    start: str,
    *,
    budget: int | None = None,
    trace: TextIO | None = None,
) -> CycleResult | None:
    """Cycle through every vertex, found as the first full-product return to ``start``."""
    _check_vertex(graph, start)
    if len(graph.vertices) < 3:
        raise ValueError("a Hamiltonian cycle needs at least 3 vertices")
    run = _launch(graph, start, g.ENUMERATE, cycle_home=start)
    home = run.engine.relay(start).state
    if budget is None:
        budget = graph.total_weight + 1
    run.steps, run.halt = run.engine.run_until(lambda e: home.arrival is not None, budget)
    _finish(run, trace)
    if home.arrival is None:
        return None
    step, sid = home.arrival
    eng = run.engine
    cycle = recover_path_order(sid, eng, start)
    amp = eng.signals[sid].amplitude
    if amp != home.target or sorted(cycle[:-1]) != sorted(graph.vertices):
        raise ReplayError(f"cycle {cycle} does not cover the graph")
    weight = graph.path_weight(cycle)
    if weight != step:
        raise ReplayError(f"cycle {cycle} weighs {weight}, arrived at {step}")
    return CycleResult(cycle, weight, step, amp, run.steps, len(eng.signals))
