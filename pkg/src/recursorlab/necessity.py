"""Positional right-hand sides of a step rule and the duplication oracle.

The grammar has three constructors over one generator variable ``y``::

    r ::= x | frame(y, r) | active(x, y, n)

A right side that both emits a frame and keeps an active call must mention
``y`` at least twice.  ``enumerate_and_verify`` checks that by exhaustion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

MAX_DEPTH = 12


class DepthCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class Carrier:
    def __str__(self):
        return "x"


@dataclass(frozen=True)
class Active:
    def __str__(self):
        return "active(x,y,n)"


@dataclass(frozen=True)
class Frame:
    inner: "RhsTerm"

    def __str__(self):
        depth, r = 0, self
        while isinstance(r, Frame):
            depth, r = depth + 1, r.inner
        return "frame(y," * depth + str(r) + ")" * depth


RhsTerm = Carrier | Active | Frame
CARRIER = Carrier()
ACTIVE = Active()


def depth(r: RhsTerm) -> int:
    d = 1
    while isinstance(r, Frame):
        d, r = d + 1, r.inner
    return d


@dataclass(frozen=True)
class RhsAnalysis:
    has_frame: bool
    has_active: bool
    y_count: int
    frames: int
    actives: int

    @property
    def implication_holds(self) -> bool:
        return not (self.has_frame and self.has_active) or self.y_count >= 2

    def to_report(self) -> dict:
        return {
            "hasFrame": self.has_frame,
            "hasActive": self.has_active,
            "yCount": self.y_count,
            "implication_holds": self.implication_holds,
        }


def analyze_rhs(r: RhsTerm) -> RhsAnalysis:
    frames = actives = y = 0
    while True:
        if isinstance(r, Frame):
            frames += 1
            y += 1
            r = r.inner
        elif isinstance(r, Active):
            actives += 1
            y += 1
            break
        elif isinstance(r, Carrier):
            break
        else:
            raise TypeError(f"not a right-hand side: {r!r}")
    return RhsAnalysis(frames > 0, actives > 0, y, frames, actives)


def enumerate_rhs(max_depth: int) -> Iterator[RhsTerm]:
    """Every term of depth <= max_depth, shallowest first."""
    if max_depth > MAX_DEPTH:
        raise DepthCapExceeded(f"depth {max_depth} exceeds the cap of {MAX_DEPTH}")
    layer: list[RhsTerm] = [CARRIER, ACTIVE] if max_depth >= 1 else []
    d = 1
    while layer:
        yield from layer
        d += 1
        layer = [Frame(r) for r in layer] if d <= max_depth else []


@dataclass(frozen=True)
class EnumerationSummary:
    max_depth: int
    enumerated: int
    counterexamples: int
    count_identity_failures: int
    first_counterexample: Optional[str] = None

    def to_report(self) -> dict:
        return {
            "maxDepth": self.max_depth,
            "enumerated": self.enumerated,
            "counterexamples": self.counterexamples,
            "count_identity_failures": self.count_identity_failures,
            "first_counterexample": self.first_counterexample,
        }


def enumerate_and_verify(max_depth: int) -> EnumerationSummary:
    if max_depth < 0:
        raise ValueError("depth must be nonnegative")
    n = bad = identity = 0
    first = None
    for r in enumerate_rhs(max_depth):
        n += 1
        a = analyze_rhs(r)
        if not a.implication_holds:
            bad += 1
            first = first or str(r)
        if a.y_count != a.frames + a.actives:
            identity += 1
    return EnumerationSummary(max_depth, n, bad, identity, first)


class NotPositional(ValueError):
    pass


def rhs_from_term(t, carrier: str = "x", generator: str = "y", counter: str = "n") -> RhsTerm:
    """Read a step-rule right side built from G-frames around x or F(x,y,n)."""
    from .terms import F, G

    frames = 0
    while not t.is_var and t.head is G:
        g, t = t.args
        if g.head != generator:
            raise NotPositional(f"frame generator must be {generator}")
        frames += 1
    if t.head == carrier:
        r: RhsTerm = CARRIER
    elif t.head is F and [a.head for a in t.args] == [carrier, generator, counter]:
        r = ACTIVE
    else:
        raise NotPositional(f"{t} is outside the positional syntax")
    for _ in range(frames):
        r = Frame(r)
    return r
