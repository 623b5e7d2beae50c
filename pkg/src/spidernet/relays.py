"""Relay behaviors.

A behavior maps one incident signal (its amplitude plus where it arrived
from) and the relay's persistent state to a list of emissions. Emissions
are ``(outgoing array id, amplitude)`` pairs; an amplitude of 0 means the
signal is annihilated and nothing is written.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, NamedTuple

__all__ = [
    "Amplify",
    "Attenuate",
    "Behavior",
    "Bounce",
    "Incidence",
    "Negate",
    "Reaction",
    "RelayError",
    "Split",
    "behavior_from_json",
    "register",
]


class RelayError(RuntimeError):
    """A relay was asked to do something its wiring cannot support."""


class Incidence(NamedTuple):
    relay: str
    signal: int
    step: int
    arrival: str
    reverse: str | None  # paired return array of ``arrival``, if any
    outgoing: tuple[str, ...]
    state: Any


@dataclass(frozen=True)
class Reaction:
    emissions: tuple[tuple[str, int], ...] = ()
    outcome: str | None = None  # "filtered" or "arrival"
    reason: str | None = None


BEHAVIORS: dict[str, type[Behavior]] = {}


def register(cls):
    BEHAVIORS[cls.kind] = cls
    return cls


def behavior_from_json(data: dict) -> Behavior:
    params = dict(data)
    try:
        kind = params.pop("kind")
        cls = BEHAVIORS[kind]
    except KeyError:
        raise ValueError(f"unknown relay behavior: {data!r}") from None
    return cls(**params)


class Behavior:
    kind = ""
    #: routing and amplitude both commute with integer scaling
    linear = False

    def react(self, amplitude: int, inc: Incidence) -> Reaction:
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.params()}

    def state_from_json(self, data):
        return None

    def state_to_json(self, state):
        return None

    def __eq__(self, other):
        return type(self) is type(other) and self.params() == other.params()

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self.params().items()))))

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


def _return_array(inc: Incidence) -> str:
    if inc.reverse is None:
        raise RelayError(
            f"relay {inc.relay!r} has no paired return array for {inc.arrival!r}"
        )
    return inc.reverse


@register
class Bounce(Behavior):
    """Reflect the signal unchanged onto the paired return array (Neumann wall)."""

    kind = "bounce"
    linear = True

    def react(self, amplitude, inc):
        return Reaction(((_return_array(inc), amplitude),))


@register
class Negate(Behavior):
    """Reflect with a sign flip (Dirichlet wall)."""

    kind = "negate"
    linear = True

    def react(self, amplitude, inc):
        return Reaction(((_return_array(inc), -amplitude),))


@register
class Attenuate(Behavior):
    """Reflect with the magnitude reduced by one; dies on reaching zero.

    Not linear: ``attenuate(2a) != 2 * attenuate(a)`` whenever ``|a| >= 1``.
    """

    kind = "attenuate"

    def react(self, amplitude, inc):
        sign = 1 if amplitude > 0 else -1
        return Reaction(((_return_array(inc), sign * (abs(amplitude) - 1)),))


@register
class Amplify(Behavior):
    kind = "amplify"
    linear = True

    def __init__(self, k: int):
        if not isinstance(k, int) or k == 0:
            raise ValueError(f"amplify factor must be a nonzero integer, got {k!r}")
        self.k = k

    def params(self):
        return {"k": self.k}

    def react(self, amplitude, inc):
        return Reaction(((_return_array(inc), self.k * amplitude),))


@register
class Split(Behavior):
    """Copy the signal onto every outgoing array.

    The arrival edge's return array is skipped unless ``include_reverse``
    is set. A relay with nowhere to send absorbs the signal.
    """

    kind = "split"
    linear = True

    def __init__(self, include_reverse: bool = False):
        self.include_reverse = bool(include_reverse)

    def params(self):
        return {"include_reverse": self.include_reverse} if self.include_reverse else {}

    def react(self, amplitude, inc):
        outs = tuple(
            (aid, amplitude)
            for aid in inc.outgoing
            if self.include_reverse or aid != inc.reverse
        )
        if not outs:
            return Reaction(outcome="filtered", reason="dead_end")
        return Reaction(outs)
