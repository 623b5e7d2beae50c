"""Command-line front end.

Exit codes: 0 result found, 1 valid run with a negative result, 2 usage
error, 3 input error.
"""

from __future__ import annotations

import argparse
import contextlib
import sys

from . import demos, solvers
from .engine import dumps
from .graph import BFS, ENUMERATE, parse_graph

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_INPUT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


def _load(path: str, fmt: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return parse_graph(text, fmt)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def _require(graph, *names):
    for v in names:
        if v not in graph.adjacency:
            raise UsageError(f"unknown vertex {v!r}")


@contextlib.contextmanager
def _trace_file(path):
    if path is None:
        yield None
        return
    try:
        fh = open(path, "w", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    with fh:
        yield fh


def _emit(args, obj: dict, human: list[str]):
    if args.json:
        print(dumps(obj))
    else:
        print("\n".join(human))


def cmd_shortest_path(args) -> int:
    graph = _load(args.graph, args.format)
    _require(graph, args.source, args.destination)
    with _trace_file(args.trace) as fh:
        res = solvers.shortest_path(
            graph, args.source, args.destination, mode=args.mode, budget=args.budget, trace=fh
        )
    if res is None:
        _emit(args, {"found": False}, ["no path"])
        return EXIT_NEGATIVE
    _emit(
        args,
        res.to_json(),
        [
            f"distance {res.distance}, path {' '.join(res.vertices)}, "
            f"amplitude {res.arrival_amplitude}, steps {res.arrival_step}",
            f"signals {res.signals}",
        ],
    )
    return EXIT_OK


def cmd_ham_cycle(args) -> int:
    graph = _load(args.graph, args.format)
    _require(graph, args.start)
    if len(graph.vertices) < 3:
        raise UsageError("ham-cycle needs a graph with at least 3 vertices")
    with _trace_file(args.trace) as fh:
        res = solvers.hamiltonian_cycle(graph, args.start, budget=args.budget, trace=fh)
    if res is None:
        _emit(args, {"found": False}, ["none"])
        return EXIT_NEGATIVE
    _emit(
        args,
        res.to_json(),
        [f"cycle {' '.join(res.vertices)}, weight {res.total_weight}", f"signals {res.signals}"],
    )
    return EXIT_OK


def cmd_paths(args) -> int:
    graph = _load(args.graph, args.format)
    _require(graph, args.source, args.destination)
    budget = args.budget if args.budget is not None else graph.total_weight
    with _trace_file(args.trace) as fh:
        found = solvers.enumerate_paths(graph, args.source, args.destination, budget, trace=fh)
    _emit(
        args,
        {"found": bool(found), "paths": [{"path": p, "weight": w} for p, w in found]},
        [f"{w} {' '.join(p)}" for p, w in found] or ["none"],
    )
    return EXIT_OK if found else EXIT_NEGATIVE


def cmd_demo(args) -> int:
    if args.name not in demos.DEMOS:
        raise UsageError(f"unknown demo {args.name!r}; choose from {', '.join(demos.DEMOS)}")
    if args.length < 1 or args.steps < 0 or args.amplitude == 0:
        raise UsageError("need --length >= 1, --steps >= 0 and a nonzero --amplitude")
    eng = demos.demo_engine(args.name, args.length, args.amplitude)
    if args.name == "dalembert-line":
        render = lambda e: demos.render_line(e, args.length)  # noqa: E731
    else:
        render = demos.render_frame
    lines = [render(eng)]
    for _ in range(args.steps):
        events = eng.step()
        lines.append(render(eng))
        for ev in events:
            if ev.kind in ("annihilated", "filtered"):
                lines.append(f"  {ev.kind} signal {ev.payload['signal']} at {ev.payload['relay']}")
        if eng.quiescent:
            lines.append(f"quiescent at step {eng.step_count}")
            break
    with _trace_file(args.trace) as fh:
        if fh is not None:
            eng.write_trace(fh)
    if args.json:
        print(dumps({"demo": args.name, "frames": lines}))
    else:
        print("\n".join(lines))
    return EXIT_OK


def cmd_trace(args) -> int:
    graph = _load(args.graph, args.format)
    if args.solver == "ham-cycle":
        if not args.start:
            raise UsageError("--start is required for ham-cycle")
        _require(graph, args.start)
        if len(graph.vertices) < 3:
            raise UsageError("ham-cycle needs a graph with at least 3 vertices")
        run = lambda fh: solvers.hamiltonian_cycle(graph, args.start, budget=args.budget, trace=fh)  # noqa: E731
    else:
        if not (args.source and args.destination):
            raise UsageError("--source and --destination are required")
        _require(graph, args.source, args.destination)
        if args.solver == "paths":
            budget = args.budget if args.budget is not None else graph.total_weight
            run = lambda fh: solvers.enumerate_paths(  # noqa: E731
                graph, args.source, args.destination, budget, trace=fh
            )
        else:
            run = lambda fh: solvers.shortest_path(  # noqa: E731
                graph, args.source, args.destination, mode=args.mode, budget=args.budget, trace=fh
            )
    with _trace_file(args.output) as fh:
        res = run(fh)
    found = bool(res)
    print(f"trace written to {args.output}" + ("" if found else " (negative result)"))
    return EXIT_OK if found else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spidernet", description="Double-edged relay network simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    def graph_args(p):
        p.add_argument("graph", help="edge-list or DIMACS file")
        p.add_argument("--format", choices=["auto", "edgelist", "dimacs"], default="auto")
        p.add_argument("--budget", type=int, default=None, help="step budget override")
        p.add_argument("--json", action="store_true")

    p = sub.add_parser("shortest-path", help="first-arrival shortest path")
    graph_args(p)
    p.add_argument("source")
    p.add_argument("destination")
    p.add_argument("--mode", choices=[BFS, ENUMERATE], default=BFS)
    p.add_argument("--trace", metavar="PATH")
    p.set_defaults(func=cmd_shortest_path)

    p = sub.add_parser("ham-cycle", help="Hamiltonian cycle through a start vertex")
    graph_args(p)
    p.add_argument("start")
    p.add_argument("--trace", metavar="PATH")
    p.set_defaults(func=cmd_ham_cycle)

    p = sub.add_parser("paths", help="enumerate simple paths within the budget")
    graph_args(p)
    p.add_argument("source")
    p.add_argument("destination")
    p.add_argument("--trace", metavar="PATH")
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("demo", help="run a built-in relay loop")
    p.add_argument("name", help=", ".join(demos.DEMOS))
    p.add_argument("--length", type=int, default=3, help="array length (half-length for the line)")
    p.add_argument("--amplitude", type=int, default=1)
    p.add_argument("--steps", type=int, default=12)
    p.add_argument("--trace", metavar="PATH")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("trace", help="write a full JSON-lines trace of a solver run")
    graph_args(p)
    p.add_argument("--solver", choices=["shortest-path", "ham-cycle", "paths"], default="shortest-path")
    p.add_argument("--source")
    p.add_argument("--destination")
    p.add_argument("--start")
    p.add_argument("--mode", choices=[BFS, ENUMERATE], default=BFS)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_trace)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "budget", None) is not None and args.budget < 0:
        print("error: --budget must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
