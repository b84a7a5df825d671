"""Leftmost-innermost rewriting and the canonical trace of the duplicator.

The engine works on a zipper: a hash-consed chain of one-hole frames
(``Context``) plus the focused subterm. After contracting a redex, every
subterm to its left is already normal, so the next leftmost-innermost redex
is found by searching the reduct, then right siblings and ancestors on the
way up. On the canonical trace that makes each firing O(1) instead of O(depth).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from collections.abc import Sequence
from typing import Iterator, Optional

from .terms import (
    F,
    InternTable,
    G,
    S,
    Symbol,
    Term,
    Z,
    count_slot,
    count_symbol,
    replace_at,
    successor_height,
)
from .trs import RECURSOR, Rule, Trs

DEFAULT_FUEL = 10**6


def default_fuel() -> int:
    raw = os.environ.get("RECURSORLAB_FUEL")
    if raw is None:
        return DEFAULT_FUEL
    fuel = int(raw)
    if fuel <= 0:
        raise ValueError("RECURSORLAB_FUEL must be positive")
    return fuel


def match(pattern: Term, t: Term, sigma: Optional[dict] = None) -> Optional[dict]:
    """Syntactic matching: sigma with pattern·sigma == t, or None."""
    sigma = {} if sigma is None else sigma
    stack = [(pattern, t)]
    while stack:
        p, u = stack.pop()
        if p.ground:
            if p is not u:
                return None
            continue
        if p.is_var:
            bound = sigma.get(p.head)
            if bound is None:
                sigma[p.head] = u
            elif bound is not u:
                return None
            continue
        if p.head != u.head:
            return None
        stack.extend(zip(p.args, u.args))
    return sigma


def instantiate(t: Term, sigma: dict) -> Term:
    if t.ground:
        return t
    if t.is_var:
        return sigma.get(t.head, t)
    # Right-hand sides are small; plain recursion is fine here.
    return Term(t.head, [instantiate(a, sigma) for a in t.args])


class Context:
    """One frame of a one-hole context: ``symbol(*left, [], *right)`` inside ``parent``."""

    __slots__ = ("symbol", "left", "right", "parent", "depth", "_memo", "__weakref__")

    _table = InternTable()

    def __new__(cls, symbol: Symbol, left: tuple, right: tuple, parent: Optional["Context"]):
        key = (symbol, len(left), *map(id, left), *map(id, right), id(parent))
        ref = cls._table.data.get(key)
        if ref is not None:
            found = ref()
            if found is not None:
                return found
        if len(left) + len(right) + 1 != symbol.arity:
            raise ValueError(f"frame for {symbol.name} has the wrong number of siblings")
        self = object.__new__(cls)
        self.symbol = symbol
        self.left = left
        self.right = right
        self.parent = parent
        self.depth = 1 if parent is None else parent.depth + 1
        self._memo = {}
        cls._table.put(key, self)
        return self

    @property
    def hole(self) -> int:
        return len(self.left)

    def fold(self, key, own) -> int:
        """Sum of ``own(frame)`` over this frame and all its ancestors, cached."""
        memo = self._memo
        if key in memo:
            return memo[key]
        chain = []
        c: Optional[Context] = self
        while c is not None and key not in c._memo:
            chain.append(c)
            c = c.parent
        acc = 0 if c is None else c._memo[key]
        for c in reversed(chain):
            acc += own(c)
            c._memo[key] = acc
        return acc

    def count_symbol(self, s: Symbol) -> int:
        return self.fold(
            ("sym", s),
            lambda c: (c.symbol == s)
            + sum(count_symbol(u, s) for u in c.left)
            + sum(count_symbol(u, s) for u in c.right),
        )

    def hole_in_slot(self, s: Symbol, index: int) -> bool:
        """Whether some frame in the chain is ``s`` with its hole at ``index``."""
        return self.fold(("hole", s, index), lambda c: c.symbol == s and c.hole == index) > 0

    def count_slot(self, s: Symbol, index: int, u: Term) -> int:
        """Slot count over sibling material and frame heads whose slot is a sibling.

        Only exact when ``hole_in_slot(s, index)`` is false.
        """

        def own(c: Context) -> int:
            total = sum(count_slot(v, s, index, u) for v in c.left)
            total += sum(count_slot(v, s, index, u) for v in c.right)
            if c.symbol == s and c.hole != index:
                sib = c.left[index] if index < c.hole else c.right[index - c.hole - 1]
                total += sib is u
            return total

        return self.fold(("slot", s, index, u), own)


def plug(ctx: Optional[Context], focus: Term) -> Term:
    t = focus
    while ctx is not None:
        t = Term(ctx.symbol, ctx.left + (t,) + ctx.right)
        ctx = ctx.parent
    return t


def frames_of(ctx: Optional[Context]) -> list[Context]:
    """Frames from the root down to the hole."""
    out = []
    while ctx is not None:
        out.append(ctx)
        ctx = ctx.parent
    out.reverse()
    return out


class Rewriter:
    """Leftmost-innermost rewriting for one TRS, with persistent memo tables."""

    def __init__(self, trs: Trs):
        self.trs = trs
        self._by_head: dict[Symbol, list[Rule]] = {}
        for r in trs.rules:
            self._by_head.setdefault(r.lhs.head, []).append(r)
        self._normal: set[Term] = set()
        self._contract: dict[Term, Optional[tuple[str, Term]]] = {}
        self._found: dict[Term, tuple] = {}

    def contract(self, t: Term) -> Optional[tuple[str, Term]]:
        """Contract t at the root with the first matching rule, if any."""
        memo = self._contract
        if t in memo:
            return memo[t]
        result = None
        if not t.is_var:
            for r in self._by_head.get(t.head, ()):
                sigma = match(r.lhs, t)
                if sigma is not None:
                    result = (r.label, instantiate(r.rhs, sigma))
                    break
        memo[t] = result
        return result

    def is_normal(self, t: Term) -> bool:
        return self._search(t) is None

    def _search(self, t: Term):
        """Leftmost-innermost redex inside t, or None when t is normal.

        Hits are (frames, redex, label, reduct) where ``frames`` lists
        (symbol, left, right) from t down to the redex's parent.
        """
        if t in self._normal:
            return None
        memo = self._found
        hit = memo.get(t)
        if hit is None:
            hit = self._search_uncached(t)
            if hit is not None:
                memo[t] = hit
        return hit

    def _search_uncached(self, t: Term):
        normal = self._normal
        stack = [[t, 0]]
        while stack:
            top = stack[-1]
            node, i = top
            args = node.args
            n = len(args)
            while i < n and args[i] in normal:
                i += 1
            if i < n:
                top[1] = i + 1
                stack.append([args[i], 0])
                continue
            hit = self.contract(node)
            if hit is not None:
                frames = []
                for parent, nxt in stack[:-1]:
                    j = nxt - 1
                    pa = parent.args
                    frames.append((parent.head, pa[:j], pa[j + 1:]))
                return tuple(frames), node, hit[0], hit[1]
            normal.add(node)
            stack.pop()
        return None

    @staticmethod
    def _descend(ctx, frames):
        for symbol, left, right in frames:
            ctx = Context(symbol, left, right, ctx)
        return ctx

    def locate(self, ctx: Optional[Context], focus: Term):
        """Next redex given that everything left of the hole is normal.

        Returns (context, redex, label, reduct), or (None, normal form) when
        the plugged term is normal.
        """
        found = self._search(focus)
        if found is not None:
            frames, redex, label, reduct = found
            return self._descend(ctx, frames), redex, label, reduct
        while ctx is not None:
            right = ctx.right
            for j, sib in enumerate(right):
                found = self._search(sib)
                if found is not None:
                    frame = Context(
                        ctx.symbol, ctx.left + (focus,) + right[:j], right[j + 1:], ctx.parent
                    )
                    frames, redex, label, reduct = found
                    return self._descend(frame, frames), redex, label, reduct
            parent_term = Term(ctx.symbol, ctx.left + (focus,) + right)
            hit = self.contract(parent_term)
            if hit is not None:
                return ctx.parent, parent_term, hit[0], hit[1]
            self._normal.add(parent_term)
            focus = parent_term
            ctx = ctx.parent
        return None, focus

    def run(self, t: Term, fuel: int) -> Iterator[tuple[Optional[Context], Term, str]]:
        """Yield (context, focus, label-of-firing-that-produced-it) per state.

        The first state carries label "initial". While a redex remains the
        focus is that redex; the final state has an empty context and the
        whole normal form (or the unreduced term when fuel runs out).
        """
        label = "initial"
        ctx, focus = None, t
        fired = 0
        while True:
            loc = self.locate(ctx, focus)
            if len(loc) == 2:
                yield None, loc[1], label
                return
            ctx, redex, next_label, reduct = loc
            yield ctx, redex, label
            if fired >= fuel:
                return
            fired += 1
            label = next_label
            focus = reduct


def normalize(trs: Trs, t: Term, fuel: Optional[int] = None, engine: Optional[Rewriter] = None):
    """(normal form or last term, firings, exhausted)."""
    fuel = default_fuel() if fuel is None else fuel
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    engine = engine or Rewriter(trs)
    firings = -1
    last = None
    for ctx, focus, _ in engine.run(t, fuel):
        firings += 1
        last = (ctx, focus)
    ctx, focus = last
    exhausted = ctx is not None or not engine.is_normal(focus)
    return plug(ctx, focus), firings, exhausted


def rewrite_once(trs: Trs, t: Term):
    """Reduce the leftmost-innermost redex: (term, label, position) or None.

    A direct, memo-free traversal kept independent of the zipper engine.
    """
    index: dict[Symbol, list[Rule]] = {}
    for r in trs.rules:
        index.setdefault(r.lhs.head, []).append(r)

    def at_root(u: Term):
        if u.is_var:
            return None
        for r in index.get(u.head, ()):
            sigma = match(r.lhs, u)
            if sigma is not None:
                return r.label, instantiate(r.rhs, sigma)
        return None

    stack: list = [((), t, False)]
    while stack:
        pos, u, expanded = stack.pop()
        if not expanded and u.args:
            stack.append((pos, u, True))
            for i in range(len(u.args), 0, -1):
                stack.append((pos + (i,), u.args[i - 1], False))
            continue
        hit = at_root(u)
        if hit is not None:
            label, reduct = hit
            return replace_at(t, pos, reduct), label, pos
    return None


def leftmost_innermost(t: Term, symbol: Symbol) -> Optional[Term]:
    """First ``symbol``-headed node in post-order (innermost, then leftmost)."""
    stack = [(t, False)]
    while stack:
        u, expanded = stack.pop()
        if count_symbol(u, symbol) == 0:
            continue
        if expanded or not u.args:
            if u.head == symbol:
                return u
            continue
        stack.append((u, True))
        for a in reversed(u.args):
            stack.append((a, False))
    return None


class TraceStep:
    """State i of a trace: ``plug(context, focus)``, plus the rule that produced it."""

    __slots__ = ("index", "context", "focus", "fired_rule", "payload")

    def __init__(self, index, context, focus, fired_rule, payload):
        self.index = index
        self.context = context
        self.focus = focus
        self.fired_rule = fired_rule
        self.payload = payload

    @property
    def term(self) -> Term:
        return plug(self.context, self.focus)

    def _active(self) -> Optional[Term]:
        focus = self.focus
        ctx_f = 0 if self.context is None else self.context.count_symbol(F)
        if ctx_f == 0:
            if focus.head is F and count_symbol(focus, F) == 1:
                return focus
            return leftmost_innermost(focus, F)
        return leftmost_innermost(self.term, F)

    @property
    def g_frames(self) -> int:
        ctx = self.context
        return (0 if ctx is None else ctx.count_symbol(G)) + count_symbol(self.focus, G)

    @property
    def ctr(self) -> Optional[int]:
        active = self._active()
        return None if active is None else successor_height(active.args[2])

    @property
    def pay(self) -> int:
        b = self.payload
        ctx = self.context
        if ctx is None:
            wrappers = count_slot(self.focus, G, 0, b)
        elif ctx.hole_in_slot(G, 0):
            wrappers = count_slot(self.term, G, 0, b)
        else:
            wrappers = ctx.count_slot(G, 0, b) + count_slot(self.focus, G, 0, b)
        active = self._active()
        return wrappers + (active is not None and active.args[1] is b)

    def to_report(self) -> dict:
        return {
            "index": self.index,
            "term": self.term,
            "ctr": self.ctr,
            "pay": self.pay,
            "g_frames": self.g_frames,
            "fired_rule": self.fired_rule,
        }


class TraceSteps(Sequence):
    """Trace states materialized as TraceStep objects on access."""

    __slots__ = ("_states", "_payload")

    def __init__(self, states: list, payload: Term):
        self._states = states
        self._payload = payload

    def __len__(self):
        return len(self._states)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        n = len(self._states)
        if i < 0:
            i += n
        ctx, focus, label = self._states[i]
        return TraceStep(i, ctx, focus, label, self._payload)

    def states(self) -> list:
        """Raw (context, focus, label) triples."""
        return self._states


@dataclass(frozen=True, eq=False)
class CanonicalTrace:
    a: Term
    b: Term
    k: int
    steps: TraceSteps

    @property
    def firings(self) -> int:
        return len(self.steps) - 1

    @property
    def terminal(self) -> Term:
        return self.steps[-1].term

    def to_report(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "k": self.k,
            "firings": self.firings,
            "terminal": self.terminal,
            "steps": list(self.steps),
        }


_COUNTERS: list[Term] = [Z]
_FOCI: dict[tuple[Term, Term], list[Term]] = {}
_WRAPPERS: dict[Term, list[Optional[Context]]] = {}
_RECORDS: dict[tuple[Term, Term], list[Term]] = {}


def _counter(m: int) -> Term:
    while len(_COUNTERS) <= m:
        _COUNTERS.append(Term(S, (_COUNTERS[-1],)))
    return _COUNTERS[m]


def terminal_record(a: Term, b: Term, k: int) -> Term:
    """G^k(b, a)."""
    records = _RECORDS.setdefault((a, b), [a])
    while len(records) <= k:
        records.append(Term(G, (b, records[-1])))
    return records[k]


def closed_form(a: Term, b: Term, k: int) -> list[tuple[Optional[Context], Term]]:
    """The closed-form states G^i(b, F(a,b,S^(k-i)(Z))) and G^k(b,a) as zipper pairs.

    Built directly from the formula (never by rewriting); the building blocks
    are cached per (a, b) so sweeps over k share them.
    """
    foci = _FOCI.setdefault((a, b), [])
    while len(foci) <= k:
        foci.append(Term(F, (a, b, _counter(len(foci)))))
    stacks = _WRAPPERS.setdefault(b, [None])
    while len(stacks) <= k:
        stacks.append(Context(G, (b,), (), stacks[-1]))
    out = [(stacks[i], foci[k - i]) for i in range(k + 1)]
    out.append((None, terminal_record(a, b, k)))
    return out


_SHARED: dict[int, Rewriter] = {}


def recursor_engine() -> Rewriter:
    engine = _SHARED.get(0)
    if engine is None:
        engine = _SHARED[0] = Rewriter(RECURSOR)
    return engine


class ReducibleInput(ValueError):
    pass


def canonical_trace(a: Term, b: Term, k: int, engine: Optional[Rewriter] = None) -> CanonicalTrace:
    """Step the recursor from F(a, b, S^k(Z)) to its normal form."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    engine = engine or recursor_engine()
    for name, t in (("a", a), ("b", b)):
        if not t.ground:
            raise ReducibleInput(f"{name} must be ground")
        if not engine.is_normal(t):
            raise ReducibleInput(f"{name} = {t} is reducible")
    start = Term(F, (a, b, _counter(k)))
    return CanonicalTrace(a, b, k, TraceSteps(list(engine.run(start, k + 2)), b))


def matches_closed_form(trace: CanonicalTrace) -> bool:
    expected = closed_form(trace.a, trace.b, trace.k)
    if len(expected) != len(trace.steps):
        return False
    return all(
        ctx is c and focus is f
        for (ctx, focus, _), (c, f) in zip(trace.steps.states(), expected)
    )
