"""Dependency pairs, the four counter-rank routes, and license cost accounting.

The four rank functions are written independently on purpose: their
agreement on the primitive fragment is a tested property, not a shared
helper.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import networkx as nx

from .rewrite import match
from .terms import F, G, S, Symbol, Term, _pre_order, positions
from .trs import Rule, Trs

ROUTES = ("dp-projection", "counter-projection", "sct", "argument-filtering")
LICENSES = {
    "dp-projection": "ArtsGiesl2000",
    "counter-projection": "SubtermCriterion",
    "sct": "LeeJonesBenAmram2001",
    "argument-filtering": "ArgumentFilteringDP",
}
REGISTER_ANNOTATION = "Pi02/ISigma1; RCA0 descriptor omega^3"
DIMENSION = "pi_y"
DISCARDED_OBSERVABLE = "l1 payload coordinate: total size of the wrapper payload slots"


class NoLicense(ValueError):
    """Raised when the base order fails, so no confession license applies."""


def mark(s: Symbol) -> Symbol:
    return Symbol(s.name + "#", s.arity)


def marked(t: Term) -> Term:
    return Term(mark(t.head), t.args)


@dataclass(frozen=True)
class DependencyPairProblem:
    pairs: tuple[Rule, ...]
    base: Trs
    edges: tuple[tuple[int, int], ...]

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.pairs)))
        g.add_edges_from(self.edges)
        return g

    def cyclic_components(self) -> list[list[int]]:
        g = self.graph()
        out = []
        for comp in nx.strongly_connected_components(g):
            nodes = sorted(comp)
            if len(nodes) > 1 or g.has_edge(nodes[0], nodes[0]):
                out.append(nodes)
        return sorted(out)

    def to_report(self) -> dict:
        return {
            "trs": self.base.name,
            "pairs": [{"label": p.label, "lhs": p.lhs, "rhs": p.rhs} for p in self.pairs],
            "edges": [list(e) for e in self.edges],
            "sccs": self.cyclic_components(),
        }


def extract_dependency_pairs(trs: Trs) -> DependencyPairProblem:
    """One pair per rule and per defined-symbol occurrence on its right side."""
    defined = set(trs.defined_symbols)
    pairs = []
    for rule in trs.rules:
        n = 0
        for _, sub in positions(rule.rhs):
            if not sub.is_var and sub.head in defined:
                n += 1
                pairs.append(Rule(marked(rule.lhs), marked(sub), f"{rule.label}_dp{n}"))
    edges = tuple(
        (i, j)
        for i, p in enumerate(pairs)
        for j, q in enumerate(pairs)
        if p.rhs.head is q.lhs.head
    )
    return DependencyPairProblem(tuple(pairs), trs, edges)


def _proper_subterm(u: Term, s: Term) -> bool:
    return any(v is u for a in s.args for v in _pre_order(a))


@dataclass(frozen=True)
class BaseOrderVerdict:
    outcome: str
    positions: tuple[tuple[tuple[int, ...], int], ...] = ()
    failing_pair: Optional[str] = None

    @property
    def oriented(self) -> bool:
        return self.outcome == "oriented"

    @property
    def position(self) -> Optional[int]:
        found = {p for _, p in self.positions}
        return found.pop() if len(found) == 1 else None

    def to_report(self) -> dict:
        out: dict = {"outcome": self.outcome}
        if self.oriented:
            out["position"] = self.position
            out["components"] = [{"pairs": list(c), "position": p} for c, p in self.positions]
        else:
            out["failing_pair"] = self.failing_pair
        return out


def check_base_order(problem: DependencyPairProblem) -> BaseOrderVerdict:
    """Strict subterm descent at one argument position per cyclic component."""
    chosen = []
    for comp in problem.cyclic_components():
        pairs = [problem.pairs[i] for i in comp]
        arity = pairs[0].lhs.head.arity
        pos = next(
            (
                k + 1
                for k in range(arity)
                if all(
                    p.rhs.head.arity == arity and _proper_subterm(p.rhs.args[k], p.lhs.args[k])
                    for p in pairs
                )
            ),
            None,
        )
        if pos is None:
            bad = next(
                (p for p in pairs if not any(
                    k < p.rhs.head.arity and _proper_subterm(p.rhs.args[k], p.lhs.args[k])
                    for k in range(p.lhs.head.arity)
                )),
                pairs[0],
            )
            return BaseOrderVerdict("not-oriented", failing_pair=bad.label)
        chosen.append((tuple(comp), pos))
    return BaseOrderVerdict("oriented", tuple(chosen))


# ------------------------------------------------------------- rank routes


def _rank_dp_projection(t: Term) -> int:
    # First F in post-order, then its counter depth.
    stack = [(t, False)]
    while stack:
        u, expanded = stack.pop()
        if expanded or not u.args:
            if u.head is F:
                depth, c = 0, u.args[2]
                while c.head is S:
                    depth += 1
                    c = c.args[0]
                return depth
            continue
        stack.append((u, True))
        stack.extend((a, False) for a in reversed(u.args))
    return 0


def _rank_counter_projection(t: Term) -> int:
    # Innermost F sites have no F strictly below; take the least position.
    sites = [(p, u) for p, u in positions(t) if u.head is F]
    innermost = [
        (p, u) for p, u in sites if not any(q != p and q[: len(p)] == p for q, _ in sites)
    ]
    if not innermost:
        return 0
    _, site = min(innermost, key=lambda pu: pu[0])
    # Subterm-criterion reading: count successive strict-subterm descents
    # S(u) ▷ u available at the counter slot.
    counter = site.args[2]
    return sum(
        1
        for p, u in positions(counter)
        if all(i == 1 for i in p) and u.head is S
    )


_X, _Y, _N = Term("x"), Term("y"), Term("n")
_CALL = Term(Symbol("F#", 3), (_X, _Y, Term(S, (_N,))))


def _rank_sct(t: Term) -> int:
    # Size-change reading: how many times the single call edge
    # F#(x,y,S(n)) -> F#(x,y,n) can fire from the active call.
    site = None
    stack = [(t, False)]
    while stack and site is None:
        u, expanded = stack.pop()
        if expanded or not u.args:
            if u.head is F:
                site = u
            continue
        stack.append((u, True))
        stack.extend((a, False) for a in reversed(u.args))
    if site is None:
        return 0
    call = Term(Symbol("F#", 3), site.args)
    level = 0
    while True:
        sigma = match(_CALL, call)
        if sigma is None:
            return level
        call = Term(call.head, (sigma["x"], sigma["y"], sigma["n"]))
        level += 1


_FILTERED = Symbol("F_pi", 1)


def _filter(t: Term) -> Term:
    """Argument filter F ↦ F_pi(arg 3), G ↦ arg 2; other symbols keep their args."""
    done: dict[Term, Term] = {}
    stack = [(t, False)]
    while stack:
        u, expanded = stack.pop()
        if u in done:
            continue
        if u.head is G:
            inner = u.args[1]
            if inner in done:
                done[u] = done[inner]
            else:
                stack.extend([(u, True), (inner, False)])
            continue
        kids = (u.args[2],) if u.head is F else u.args
        if not expanded and any(a not in done for a in kids):
            stack.append((u, True))
            stack.extend((a, False) for a in kids if a not in done)
            continue
        if u.head is F:
            done[u] = Term(_FILTERED, (done[u.args[2]],))
        else:
            done[u] = Term(u.head, [done[a] for a in u.args])
    return done[t]


def _rank_argument_filtering(t: Term) -> int:
    filtered = _filter(t)
    for u in _pre_order(filtered):
        if u.head is _FILTERED:
            h, c = 0, u.args[0]
            while c.head is S:
                h += 1
                c = c.args[0]
            return h
    return 0


_RANKS: dict[str, Callable[[Term], int]] = {
    "dp-projection": _rank_dp_projection,
    "counter-projection": _rank_counter_projection,
    "sct": _rank_sct,
    "argument-filtering": _rank_argument_filtering,
}


def rank_of(route: str, t: Term) -> int:
    try:
        fn = _RANKS[route]
    except KeyError:
        raise ValueError(f"unknown route {route!r}; expected one of {', '.join(ROUTES)}") from None
    if not t.ground:
        raise ValueError("rank_of expects a ground term")
    return fn(t)


# ------------------------------------------------------------- witnesses


@dataclass(frozen=True)
class License:
    name: str
    register_annotation: str = REGISTER_ANNOTATION


@dataclass(frozen=True)
class ForgettingWitness:
    route: str
    dimension: str
    license: License
    discarded_observable: str

    def residual_rank(self, t: Term) -> int:
        return rank_of(self.route, t)

    def to_report(self) -> dict:
        return {
            "route": self.route,
            "dimension": self.dimension,
            "license": {"name": self.license.name, "register_annotation": self.license.register_annotation},
            "discarded_observable": self.discarded_observable,
        }


def build_forgetting_witness(route: str) -> ForgettingWitness:
    if route not in LICENSES:
        raise ValueError(f"unknown route {route!r}")
    return ForgettingWitness(route, DIMENSION, License(LICENSES[route]), DISCARDED_OBSERVABLE)


@dataclass(frozen=True)
class AgCostAccount:
    C: int
    rules: int
    signature: int
    pairs: int
    K: int

    @property
    def construction_cost(self) -> int:
        return self.C * self.rules**2 * self.signature

    @property
    def base_order_cost(self) -> int:
        return self.pairs

    @property
    def bound(self) -> int:
        return self.construction_cost + self.base_order_cost

    def residual(self, K: Optional[int] = None) -> int:
        return self.K if K is None else K

    def certificate_length(self, K: Optional[int] = None) -> int:
        return self.bound + self.residual(K)

    def to_report(self) -> dict:
        return {
            "C": self.C,
            "rules": self.rules,
            "signature": self.signature,
            "pairs": self.pairs,
            "K": self.K,
            "construction_cost": self.construction_cost,
            "base_order_cost": self.base_order_cost,
            "bound": self.bound,
            "residual": self.residual(),
            "certificate_length": self.certificate_length(),
        }


def ag_account(trs: Trs, K: int, C: int = 1) -> AgCostAccount:
    problem = extract_dependency_pairs(trs)
    verdict = check_base_order(problem)
    if not verdict.oriented:
        raise NoLicense(f"base order fails on pair {verdict.failing_pair}; no license applies")
    if K < 0 or C < 0:
        raise ValueError("K and C must be nonnegative")
    return AgCostAccount(C, len(trs.rules), len(trs.signature), len(problem.pairs), K)


def rank_table(route: str, terms) -> list[dict]:
    return [{"index": i, "rank": rank_of(route, t)} for i, t in enumerate(terms)]

