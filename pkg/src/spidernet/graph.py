"""Weighted undirected graphs and their prime-labeled relay overlay.

Every vertex becomes a ``prime_vertex`` relay carrying a distinct prime. A
signal's amplitude is the product of the primes of the vertices it has
passed, so factoring the amplitude recovers the visited set.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .relays import Behavior, Reaction, register

__all__ = [
    "Graph",
    "GraphError",
    "GraphFormatError",
    "ModelCorruption",
    "PrimeVertex",
    "PrimeVertexState",
    "amplitude_of",
    "assign_primes",
    "factor_amplitude",
    "first_primes",
    "overlay",
    "parse_graph",
    "vertex_key",
    "visited_bits",
]


class GraphError(ValueError):
    pass


class GraphFormatError(GraphError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class ModelCorruption(RuntimeError):
    """An amplitude that cannot have been produced by a prime overlay."""


def vertex_key(v: str):
    # integer-looking ids sort numerically, everything else lexically after them
    return (0, int(v), v) if v.isdigit() else (1, 0, v)


@dataclass(frozen=True)
class Graph:
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, int], ...]

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise GraphError("duplicate vertex ids")
        seen = set()
        for u, v, w in self.edges:
            if u not in vs or v not in vs:
                raise GraphError(f"edge {u}-{v} references an unknown vertex")
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if not isinstance(w, int) or isinstance(w, bool) or w < 1:
                raise GraphError(f"edge {u}-{v} has non-positive or non-integer weight {w!r}")
            key = frozenset((u, v))
            if key in seen:
                raise GraphError(f"duplicate edge {u}-{v}")
            seen.add(key)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple], vertices: Iterable = ()) -> Graph:
        edges = tuple((str(u), str(v), w) for u, v, w in edges)
        vs = {str(v) for v in vertices}
        for u, v, _ in edges:
            vs.update((u, v))
        return cls(tuple(sorted(vs, key=vertex_key)), edges)

    @cached_property
    def adjacency(self) -> dict[str, dict[str, int]]:
        adj: dict[str, dict[str, int]] = {v: {} for v in self.vertices}
        for u, v, w in self.edges:
            adj[u][v] = w
            adj[v][u] = w
        return adj

    @property
    def total_weight(self) -> int:
        return sum(w for _, _, w in self.edges)

    def weight(self, u: str, v: str) -> int:
        return self.adjacency[u][v]

    def path_weight(self, path) -> int:
        return sum(self.adjacency[a][b] for a, b in zip(path, path[1:]))

    def degree(self, v: str) -> int:
        return len(self.adjacency[v])


def first_primes(n: int) -> list[int]:
    if n <= 0:
        return []
    # Rosser's bound p_n < n (ln n + ln ln n) for n >= 6
    limit = 15 if n < 6 else int(n * (math.log(n) + math.log(math.log(n)))) + 1
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, limit + 1, i)))
    return [i for i, is_p in enumerate(sieve) if is_p][:n]


def assign_primes(graph: Graph) -> dict[str, int]:
    if not graph.vertices:
        raise GraphError("cannot label an empty graph")
    ordered = sorted(graph.vertices, key=vertex_key)
    return dict(zip(ordered, first_primes(len(ordered))))


def factor_amplitude(a: int, labeling: dict[str, int]) -> frozenset[str]:
    """Vertex set whose primes multiply to ``a``, by trial division."""
    if a < 1:
        raise ModelCorruption(f"amplitude {a} is not positive")
    found = []
    for v, p in labeling.items():
        if a % p == 0:
            a //= p
            if a % p == 0:
                raise ModelCorruption(f"amplitude divisible by {p}^2")
            found.append(v)
            if a == 1:
                break
    if a != 1:
        raise ModelCorruption(f"amplitude has foreign factor {a}")
    return frozenset(found)


def amplitude_of(vertices: Iterable[str], labeling: dict[str, int]) -> int:
    return math.prod(labeling[v] for v in set(vertices))


def visited_bits(a: int, labeling: dict[str, int]) -> str:
    members = factor_amplitude(a, labeling)
    return "".join(
        "1" if v in members else "0" for v in sorted(labeling, key=vertex_key)
    )


# relay ---------------------------------------------------------------------

BFS = "bfs"
ENUMERATE = "enumerate"


@dataclass
class PrimeVertexState:
    prime: int
    visited: bool = False
    is_destination: bool = False
    arrival: tuple[int, int] | None = None  # (step, signal id) of the first arrival
    arrivals: list[tuple[int, int]] = field(default_factory=list)
    cycle_home: bool = False
    target: int | None = None  # full product of all primes, cycle mode only

    def record_arrival(self, step, sid):
        if self.arrival is None:
            self.arrival = (step, sid)
        self.arrivals.append((step, sid))


@register
class PrimeVertex(Behavior):
    """Multiply by the vertex prime and fan out; drop revisits by divisibility.

    In ``bfs`` mode a vertex that has already forwarded a signal absorbs any
    later one. ``enumerate`` mode keeps every simple path alive.
    """

    kind = "prime_vertex"

    def __init__(self, mode: str = BFS):
        if mode not in (BFS, ENUMERATE):
            raise ValueError(f"unknown prime_vertex mode {mode!r}")
        self.mode = mode

    def params(self):
        return {"mode": self.mode}

    def react(self, amplitude, inc):
        st: PrimeVertexState = inc.state
        p = st.prime
        if amplitude < 1 or amplitude % (p * p) == 0:
            raise ModelCorruption(f"relay {inc.relay!r} received amplitude {amplitude}")
        if amplitude % p == 0:
            if st.cycle_home and amplitude == st.target:
                st.record_arrival(inc.step, inc.signal)
                return Reaction(outcome="arrival")
            return Reaction(outcome="filtered", reason="revisit")
        if self.mode == BFS and st.visited:
            return Reaction(outcome="filtered", reason="visited")
        if st.is_destination:
            st.record_arrival(inc.step, inc.signal)
            return Reaction(outcome="arrival")
        amplified = amplitude * p
        st.visited = True
        outs = tuple((aid, amplified) for aid in inc.outgoing if aid != inc.reverse)
        if not outs:
            return Reaction(outcome="filtered", reason="dead_end")
        return Reaction(outs)

    def state_from_json(self, data):
        if data is None:
            raise ValueError("prime_vertex relay requires a state with its prime")
        return PrimeVertexState(
            prime=int(data["prime"]),
            visited=data.get("visited", False),
            is_destination=data.get("is_destination", False),
            arrival=tuple(data["arrival"]) if data.get("arrival") else None,
            arrivals=[tuple(a) for a in data.get("arrivals", [])],
            cycle_home=data.get("cycle_home", False),
            target=int(data["target"]) if data.get("target") is not None else None,
        )

    def state_to_json(self, st):
        return {
            "prime": st.prime,
            "visited": st.visited,
            "is_destination": st.is_destination,
            "arrival": list(st.arrival) if st.arrival else None,
            "arrivals": [list(a) for a in st.arrivals],
            "cycle_home": st.cycle_home,
            "target": str(st.target) if st.target is not None else None,
        }


def array_id(u: str, v: str) -> str:
    return f"{u}->{v}"


def overlay(
    graph: Graph,
    labeling: dict[str, int] | None = None,
    mode: str = BFS,
    *,
    source: str | None = None,
    destination: str | None = None,
    cycle_home: str | None = None,
) -> dict:
    """Topology dict for :func:`spidernet.engine.build_engine`.

    ``enumerate`` mode uses the superposing collision policy so that
    simultaneous arrivals on different paths all survive.
    """
    if labeling is None:
        labeling = assign_primes(graph)
    missing = set(graph.vertices) - set(labeling)
    if missing:
        raise GraphError(f"labeling misses vertices {sorted(missing)}")
    target = math.prod(labeling[v] for v in graph.vertices)
    relays = []
    for v in graph.vertices:
        st = PrimeVertexState(
            prime=labeling[v],
            visited=(v == source and mode == BFS),
            is_destination=(v == destination),
            cycle_home=(v == cycle_home),
            target=target if v == cycle_home else None,
        )
        relays.append(
            {
                "id": v,
                "behavior": {"kind": PrimeVertex.kind, "mode": mode},
                "state": PrimeVertex(mode).state_to_json(st),
            }
        )
    arrays = []
    for u, v, w in graph.edges:
        arrays.append({"id": array_id(u, v), "from": u, "to": v, "length": w, "pair": array_id(v, u)})
        arrays.append({"id": array_id(v, u), "from": v, "to": u, "length": w, "pair": array_id(u, v)})
    return {
        "collisions": "tiebreak" if mode == BFS else "superpose",
        "relays": relays,
        "arrays": arrays,
    }


# parsing -------------------------------------------------------------------

_COMMENT = re.compile(r"#.*")


def _parse_weight(tok: str, lineno: int) -> int:
    if not tok.isdigit():
        raise GraphFormatError(lineno, f"weight {tok!r} is not a positive integer")
    w = int(tok)
    if w < 1:
        raise GraphFormatError(lineno, "weight must be positive")
    return w


def _add_edge(edges: dict, u: str, v: str, w: int, lineno: int):
    if u == v:
        raise GraphFormatError(lineno, f"self-loop at {u}")
    key = frozenset((u, v))
    if key in edges:
        if edges[key][2] != w:
            raise GraphFormatError(lineno, f"edge {u}-{v} repeated with conflicting weight")
        return
    edges[key] = (u, v, w)


def _looks_dimacs(lines: list[str]) -> bool:
    for line in lines:
        s = line.strip()
        if s:
            return s.split()[0] in ("c", "p", "a")
    return False


def parse_graph(text: str, fmt: str = "auto") -> Graph:
    """Parse an edge list (``u v w`` per line) or DIMACS ``sp`` text."""
    lines = text.splitlines()
    if fmt == "auto":
        fmt = "dimacs" if _looks_dimacs(lines) else "edgelist"
    if fmt == "dimacs":
        return _parse_dimacs(lines)
    if fmt != "edgelist":
        raise ValueError(f"unknown graph format {fmt!r}")
    edges: dict = {}
    for lineno, raw in enumerate(lines, start=1):
        toks = _COMMENT.sub("", raw).split()
        if not toks:
            continue
        if len(toks) != 3:
            raise GraphFormatError(lineno, f"expected 'u v w', got {raw.strip()!r}")
        u, v, w = toks
        _add_edge(edges, u, v, _parse_weight(w, lineno), lineno)
    if not edges:
        raise GraphFormatError(max(len(lines), 1), "no edges found")
    return Graph.from_edges(edges.values())


def _parse_dimacs(lines: list[str]) -> Graph:
    n = None
    edges: dict = {}
    for lineno, raw in enumerate(lines, start=1):
        toks = raw.split()
        if not toks or toks[0] == "c":
            continue
        if toks[0] == "p":
            if len(toks) != 4 or toks[1] != "sp" or not (toks[2].isdigit() and toks[3].isdigit()):
                raise GraphFormatError(lineno, "expected 'p sp n m'")
            if n is not None:
                raise GraphFormatError(lineno, "duplicate problem line")
            n = int(toks[2])
        elif toks[0] == "a":
            if n is None:
                raise GraphFormatError(lineno, "arc before problem line")
            if len(toks) != 4:
                raise GraphFormatError(lineno, "expected 'a u v w'")
            u, v = toks[1], toks[2]
            for x in (u, v):
                if not x.isdigit() or not 1 <= int(x) <= n:
                    raise GraphFormatError(lineno, f"vertex {x!r} outside 1..{n}")
            _add_edge(edges, u, v, _parse_weight(toks[3], lineno), lineno)
        else:
            raise GraphFormatError(lineno, f"unknown line type {toks[0]!r}")
    if n is None:
        raise GraphFormatError(max(len(lines), 1), "missing problem line")
    if n == 0:
        raise GraphFormatError(max(len(lines), 1), "graph has no vertices")
    return Graph.from_edges(edges.values(), vertices=(str(i) for i in range(1, n + 1)))
