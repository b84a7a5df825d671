"""Immutable first-order terms.

Terms are hash-consed: two structurally equal terms are the same object, so
equality and hashing are identity-based and O(1). Every traversal here is
iterative because canonical traces routinely nest a thousand levels deep.
"""

from __future__ import annotations

import re
import weakref
from collections import Counter
from typing import Iterator, Mapping

IDENTIFIER = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
# Marked (dependency-pair) symbols carry a trailing "#".
SYMBOL_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*#?\Z")

SCHEMA_ARITIES = {"F": 3, "G": 2, "S": 1, "Z": 0}


class ArityError(ValueError):
    pass


class InternTable:
    """Weak-valued map used for hash-consing.

    Lookups are a plain dict probe plus a weakref call; entries vanish when
    their value is collected.
    """

    __slots__ = ("data",)

    def __init__(self):
        self.data: dict = {}

    def get(self, key):
        ref = self.data.get(key)
        return None if ref is None else ref()

    def put(self, key, value) -> None:
        data = self.data

        def remove(ref, key=key):
            if data.get(key) is ref:
                del data[key]

        data[key] = weakref.ref(value, remove)

    def __len__(self):
        return len(self.data)


class Symbol:
    """A function symbol with a fixed arity, interned by (name, arity)."""

    __slots__ = ("name", "arity", "__weakref__")

    _table = InternTable()

    def __new__(cls, name: str, arity: int):
        found = cls._table.get((name, arity))
        if found is not None:
            return found
        if not isinstance(name, str) or not SYMBOL_NAME.match(name):
            raise ValueError(f"invalid symbol name {name!r}")
        if not isinstance(arity, int) or isinstance(arity, bool) or arity < 0:
            raise ValueError(f"invalid arity {arity!r} for {name}")
        expected = SCHEMA_ARITIES.get(name)
        if expected is not None and expected != arity:
            raise ArityError(f"schema symbol {name} has arity {expected}, not {arity}")
        self = object.__new__(cls)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "arity", arity)
        cls._table.put((name, arity), self)
        return self

    def __setattr__(self, key, value):
        raise AttributeError("Symbol is immutable")

    def __repr__(self):
        return f"Symbol({self.name!r}, {self.arity})"

    def __str__(self):
        return self.name

    def __lt__(self, other):
        return (self.name, self.arity) < (other.name, other.arity)

    def __call__(self, *args: "Term") -> "Term":
        return Term(self, args)

    def __reduce__(self):
        return (Symbol, (self.name, self.arity))


F = Symbol("F", 3)
G = Symbol("G", 2)
S = Symbol("S", 1)
Z_SYMBOL = Symbol("Z", 0)
SCHEMA = (F, G, S, Z_SYMBOL)


class Term:
    """A variable (``head`` is a str) or a symbol applied to ``arity`` terms.

    ``size`` counts symbol nodes only; ``nodes`` also counts variables.
    """

    __slots__ = ("head", "args", "size", "nodes", "ground", "_memo", "__weakref__")

    _table = InternTable()

    def __new__(cls, head, args=()):
        args = tuple(args)
        key = (head, *map(id, args)) if args else head
        ref = cls._table.data.get(key)
        if ref is not None:
            found = ref()
            if found is not None:
                return found
        if isinstance(head, Symbol):
            if len(args) != head.arity:
                raise ArityError(
                    f"{head.name} expects {head.arity} argument(s), got {len(args)}"
                )
            size = nodes = 1
            ground = True
            for a in args:
                if type(a) is not Term:
                    raise TypeError(f"argument {a!r} of {head.name} is not a Term")
                size += a.size
                nodes += a.nodes
                ground = ground and a.ground
        elif isinstance(head, str):
            if args:
                raise ArityError(f"variable {head} cannot take arguments")
            if not IDENTIFIER.match(head):
                raise ValueError(f"invalid variable name {head!r}")
            size, nodes, ground = 0, 1, False
        else:
            raise TypeError(f"term head must be a Symbol or str, got {head!r}")
        self = object.__new__(cls)
        setattr_ = object.__setattr__
        setattr_(self, "head", head)
        setattr_(self, "args", args)
        setattr_(self, "size", size)
        setattr_(self, "nodes", nodes)
        setattr_(self, "ground", ground)
        setattr_(self, "_memo", None)
        cls._table.put(key, self)
        return self

    def __setattr__(self, key, value):
        raise AttributeError("Term is immutable")

    def __reduce__(self):
        return (Term, (self.head, self.args))

    @property
    def is_var(self) -> bool:
        return isinstance(self.head, str)

    def memo(self) -> dict:
        m = self._memo
        if m is None:
            m = {}
            object.__setattr__(self, "_memo", m)
        return m

    def __str__(self):
        return format_term(self)

    def __repr__(self):
        return f"Term({format_term(self)!r})"

    def __lt__(self, other):
        return format_term(self) < format_term(other)


Substitution = Mapping[str, Term]

Z = Term(Z_SYMBOL)


def var(name: str) -> Term:
    return Term(name)


def numeral(m: int, base: Term = Z) -> Term:
    """S^m(base)."""
    t = base
    for _ in range(m):
        t = Term(S, (t,))
    return t


def wrap(symbol: Symbol, left: Term, inner: Term, times: int) -> Term:
    """symbol^times(left, inner), nesting in the last argument."""
    t = inner
    for _ in range(times):
        t = Term(symbol, (left, t))
    return t


def _post_order(t: Term) -> Iterator[Term]:
    stack = [(t, False)]
    while stack:
        u, expanded = stack.pop()
        if expanded or not u.args:
            yield u
        else:
            stack.append((u, True))
            for a in reversed(u.args):
                stack.append((a, False))


def _memo_fold(t: Term, key, combine):
    """Bottom-up fold cached on every node under ``key``.

    ``combine(node, child_values)`` computes a node's value; each distinct
    node is evaluated once, so shared subterms cost nothing after the first.
    """
    memo = t._memo
    if memo is not None and key in memo:
        return memo[key]
    stack = [(t, False)]
    while stack:
        u, expanded = stack.pop()
        um = u.memo()
        if key in um:
            continue
        if expanded:
            um[key] = combine(u, [a._memo[key] for a in u.args])
            continue
        stack.append((u, True))
        for a in u.args:
            am = a._memo
            if am is None or key not in am:
                stack.append((a, False))
    return t._memo[key]


def symbol_counts(t: Term) -> Counter:
    """Occurrences of every head (symbols and variable names) in t."""

    def combine(u, child):
        c = Counter({u.head: 1})
        for cc in child:
            c.update(cc)
        return c

    return _memo_fold(t, "counts", combine)


def count_symbol(t: Term, s: Symbol) -> int:
    return symbol_counts(t)[s]


def count_variable(t: Term, name: str) -> int:
    return symbol_counts(t)[name]


def count_subterm(t: Term, u: Term) -> int:
    """Number of positions p with t|p == u."""
    if not u.ground:
        raise ValueError("count_subterm expects a ground pattern")
    return _memo_fold(
        t, ("sub", u), lambda node, child: (node is u) + sum(child)
    )


def count_slot(t: Term, s: Symbol, index: int, u: Term) -> int:
    """Number of s-headed nodes whose argument ``index`` is exactly u."""
    return _memo_fold(
        t,
        ("slot", s, index, u),
        lambda node, child: (node.head == s and node.args[index] is u) + sum(child),
    )


def successor_height(t: Term) -> int:
    """Number of S layers on top of t (cached along the S spine)."""
    memo = t._memo
    if memo is not None and "sh" in memo:
        return memo["sh"]
    spine = []
    u = t
    while u.head is S:
        m = u._memo
        if m is not None and "sh" in m:
            break
        spine.append(u)
        u = u.args[0]
    h = u._memo["sh"] if u.head is S else 0
    for v in reversed(spine):
        h += 1
        v.memo()["sh"] = h
    return h


def variables(t: Term) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for u in _pre_order(t):
        if u.is_var:
            seen.setdefault(u.head, None)
    return tuple(seen)


def _pre_order(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        stack.extend(reversed(u.args))


def positions(t: Term) -> Iterator[tuple[tuple[int, ...], Term]]:
    """All (position, subterm) pairs in pre-order; positions are 1-based."""
    stack: list[tuple[tuple[int, ...], Term]] = [((), t)]
    while stack:
        p, u = stack.pop()
        yield p, u
        for i in range(len(u.args), 0, -1):
            stack.append((p + (i,), u.args[i - 1]))


def subterm_at(t: Term, position: tuple[int, ...]) -> Term:
    for i in position:
        t = t.args[i - 1]
    return t


def replace_at(t: Term, position: tuple[int, ...], u: Term) -> Term:
    spine = []
    for i in position:
        spine.append((t, i))
        t = t.args[i - 1]
    for parent, i in reversed(spine):
        args = parent.args
        u = Term(parent.head, args[: i - 1] + (u,) + args[i:])
    return u


def apply_substitution(t: Term, sigma: Substitution) -> Term:
    """Simultaneous replacement of variables; unbound variables stay."""
    if not sigma or t.ground:
        return t
    done: dict[int, Term] = {}
    for u in _post_order(t):
        if id(u) in done:
            continue
        if u.is_var:
            done[id(u)] = sigma.get(u.head, u)
        elif u.ground:
            done[id(u)] = u
        else:
            done[id(u)] = Term(u.head, [done[id(a)] for a in u.args])
    return done[id(t)]


def format_term(t: Term) -> str:
    """Prefix notation, comma-separated arguments, nullary symbols bare."""
    memo = t._memo
    if memo is not None and "text" in memo:
        return memo["text"]
    out: list[str] = []
    stack: list = [t]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        name = item.head if item.is_var else item.head.name
        if not item.args:
            out.append(name)
            continue
        out.append(name + "(")
        stack.append(")")
        for i in range(len(item.args) - 1, -1, -1):
            stack.append(item.args[i])
            if i:
                stack.append(",")
    text = "".join(out)
    if t.nodes < 4096:
        t.memo()["text"] = text
    return text
