"""Classical ground truth for checking the propagation solvers.

Nothing here touches the engine. Shortest paths and simple-path
enumeration are delegated to networkx; Hamiltonian search is plain
backtracking.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

import networkx as nx

from .graph import Graph

__all__ = [
    "MAX_EXHAUSTIVE",
    "OracleResult",
    "OracleSizeError",
    "complete_graph",
    "cycle_graph",
    "oracle_hamiltonian",
    "oracle_shortest_path",
    "oracle_simple_paths",
    "path_graph",
    "petersen_graph",
    "random_graph",
    "star_graph",
]

MAX_EXHAUSTIVE = 12


class OracleSizeError(ValueError):
    pass


@dataclass
class OracleResult:
    distance: int | None
    all_optimal_paths: set[tuple[str, ...]] = field(default_factory=set)

    @property
    def reachable(self) -> bool:
        return self.distance is not None


def to_networkx(graph: Graph) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(graph.vertices)
    G.add_weighted_edges_from(graph.edges)
    return G


def oracle_shortest_path(graph: Graph, source: str, destination: str) -> OracleResult:
    G = to_networkx(graph)
    try:
        dist = nx.dijkstra_path_length(G, source, destination)
    except nx.NetworkXNoPath:
        return OracleResult(None)
    paths = {tuple(p) for p in nx.all_shortest_paths(G, source, destination, weight="weight")}
    return OracleResult(dist, paths)


def _guard(graph: Graph):
    if len(graph.vertices) > MAX_EXHAUSTIVE:
        raise OracleSizeError(
            f"exhaustive search limited to {MAX_EXHAUSTIVE} vertices, got {len(graph.vertices)}"
        )


def oracle_simple_paths(graph: Graph, source: str, destination: str) -> dict[tuple[str, ...], int]:
    _guard(graph)
    if source == destination:
        return {(source,): 0}
    G = to_networkx(graph)
    return {
        tuple(p): graph.path_weight(p)
        for p in nx.all_simple_paths(G, source, destination)
    }


def oracle_hamiltonian(graph: Graph) -> list[str] | None:
    """A Hamiltonian cycle ``[v0, ..., v0]`` or ``None``, by backtracking."""
    _guard(graph)
    n = len(graph.vertices)
    if n < 3:
        return None
    adj = graph.adjacency
    start = graph.vertices[0]
    path = [start]
    on_path = {start}

    def extend() -> bool:
        if len(path) == n:
            return start in adj[path[-1]]
        for nxt in adj[path[-1]]:
            if nxt not in on_path:
                path.append(nxt)
                on_path.add(nxt)
                if extend():
                    return True
                on_path.discard(path.pop())
        return False

    return path + [start] if extend() else None


def random_graph(
    n: int,
    p: float | None = None,
    *,
    degree: float | None = None,
    weights: tuple[int, int] = (1, 10),
    seed: int = 0,
    connected: bool = True,
) -> Graph:
    """Seeded random weighted graph on vertices ``"0" .. str(n-1)``.

    Extra edges are added with probability ``p`` per pair, or until the mean
    degree reaches ``degree``. ``connected`` seeds a random spanning tree first.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lo, hi = weights
    if lo < 1 or hi < lo:
        raise ValueError("weights must be a positive range")
    rng = random.Random(seed)
    names = [str(i) for i in range(n)]
    edges: dict[frozenset, tuple[str, str, int]] = {}

    def add(u, v):
        key = frozenset((u, v))
        if u != v and key not in edges:
            edges[key] = (u, v, rng.randint(lo, hi))

    if connected:
        order = names[:]
        rng.shuffle(order)
        for i in range(1, n):
            add(order[rng.randrange(i)], order[i])
    max_edges = n * (n - 1) // 2
    if p is not None:
        for u, v in itertools.combinations(names, 2):
            if rng.random() < p:
                add(u, v)
    elif degree is not None:
        want = min(max_edges, int(round(degree * n / 2)))
        while len(edges) < want:
            add(rng.choice(names), rng.choice(names))
    return Graph.from_edges(edges.values(), vertices=names)


def _names(n):
    return [chr(ord("A") + i) for i in range(n)] if n <= 26 else [str(i) for i in range(n)]


def complete_graph(n: int, w: int = 1) -> Graph:
    vs = _names(n)
    return Graph.from_edges([(u, v, w) for u, v in itertools.combinations(vs, 2)], vs)


def cycle_graph(n: int, w: int = 1) -> Graph:
    vs = _names(n)
    return Graph.from_edges([(vs[i], vs[(i + 1) % n], w) for i in range(n)], vs)


def path_graph(n: int, w: int = 1) -> Graph:
    vs = _names(n)
    return Graph.from_edges([(vs[i], vs[i + 1], w) for i in range(n - 1)], vs)


def star_graph(leaves: int, w: int = 1) -> Graph:
    vs = _names(leaves + 1)
    return Graph.from_edges([(vs[0], v, w) for v in vs[1:]], vs)


def petersen_graph(w: int = 1) -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges([(u, v, w) for u, v in outer + spokes + inner])
