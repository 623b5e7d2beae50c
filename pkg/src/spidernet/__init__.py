"""Deterministic simulator for double-edged relay (SPIDER) networks."""

from .engine import Engine, HaltReason, build_engine, replay, restore
from .graph import (
    Graph,
    assign_primes,
    factor_amplitude,
    overlay,
    parse_graph,
    visited_bits,
)
from .solvers import (
    CycleResult,
    PathResult,
    enumerate_paths,
    hamiltonian_cycle,
    recover_path_order,
    shortest_path,
)

__all__ = [
    "CycleResult",
    "Engine",
    "Graph",
    "HaltReason",
    "PathResult",
    "assign_primes",
    "build_engine",
    "enumerate_paths",
    "factor_amplitude",
    "hamiltonian_cycle",
    "overlay",
    "parse_graph",
    "recover_path_order",
    "replay",
    "restore",
    "shortest_path",
    "visited_bits",
]
