"""Built-in relay loops and the line network, plus text frame rendering."""

from __future__ import annotations

from .engine import Engine, build_engine

DEMOS = ("bounce-loop", "alternating-loop", "degrading-loop", "dalembert-line")

# (X behavior, Y behavior); the alternating loop has a single sign-flipping relay
_LOOP_BEHAVIOR = {
    "bounce-loop": ({"kind": "bounce"}, {"kind": "bounce"}),
    "alternating-loop": ({"kind": "negate"}, {"kind": "bounce"}),
    "degrading-loop": ({"kind": "attenuate"}, {"kind": "attenuate"}),
}


def loop_topology(behavior: dict, length: int, other: dict | None = None) -> dict:
    """Relays X and Y joined by paired arrays; Y uses ``other`` if given."""
    return {
        "relays": [
            {"id": "X", "behavior": dict(behavior)},
            {"id": "Y", "behavior": dict(other or behavior)},
        ],
        "arrays": [
            {"id": "X->Y", "from": "X", "to": "Y", "length": length},
            {"id": "Y->X", "from": "Y", "to": "X", "length": length},
        ],
    }


def loop_engine(behavior: dict, length: int, amplitude: int, other: dict | None = None) -> Engine:
    eng = build_engine(loop_topology(behavior, length, other))
    eng.inject("X->Y", 1, amplitude)
    return eng


def line_topology(half: int) -> dict:
    """Split relays at positions -half..half joined by unit-length paired arrays.

    A single-ended feeder array of length 1 enters the centre relay; an
    impulse placed in it reaches the centre on step 1 and splits both ways.
    """
    relays = [{"id": "feed", "behavior": {"kind": "split"}}]
    relays += [{"id": f"r{i}", "behavior": {"kind": "split"}} for i in range(-half, half + 1)]
    arrays = [{"id": "feed->r0", "from": "feed", "to": "r0", "length": 1}]
    for i in range(-half, half):
        a, b = f"r{i}", f"r{i + 1}"
        arrays.append({"id": f"{a}->{b}", "from": a, "to": b, "length": 1})
        arrays.append({"id": f"{b}->{a}", "from": b, "to": a, "length": 1})
    return {"relays": relays, "arrays": arrays}


def line_engine(half: int, amplitude: int = 1) -> Engine:
    eng = build_engine(line_topology(half))
    eng.inject("feed->r0", 1, amplitude)
    return eng


def line_offsets(engine: Engine) -> dict[int, tuple[int, ...]]:
    """Signal amplitudes keyed by the position of the relay each one is heading to."""
    out: dict[int, tuple[int, ...]] = {}
    for (aid, _cell), amps in engine.frame().items():
        head = engine.arrays[aid].to_relay
        out[int(head[1:])] = out.get(int(head[1:]), ()) + amps
    return out


def demo_engine(name: str, length: int = 3, amplitude: int = 1) -> Engine:
    if name == "dalembert-line":
        return line_engine(length, amplitude)
    try:
        x, y = _LOOP_BEHAVIOR[name]
    except KeyError:
        raise ValueError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}") from None
    return loop_engine(x, length, amplitude, y)


def render_frame(engine: Engine) -> str:
    """One line of cell contents per array, ``.`` for vacant cells."""
    frame = engine.frame()
    parts = []
    for aid, arr in engine.arrays.items():
        cells = []
        for i in range(1, arr.length + 1):
            amps = frame.get((aid, i))
            cells.append("." if amps is None else "+".join(str(a) for a in amps))
        parts.append(f"{aid} [{' '.join(cells)}]")
    return f"step {engine.step_count}: " + " ".join(parts)


def render_line(engine: Engine, half: int) -> str:
    offsets = line_offsets(engine)
    strip = "".join(
        "*" if i in offsets else ("|" if i == 0 else ".") for i in range(-half, half + 1)
    )
    detail = " ".join(
        f"{i:+d}:{'+'.join(map(str, offsets[i]))}" for i in sorted(offsets)
    )
    return f"step {engine.step_count}: {strip} {detail}".rstrip()
