"""Whole-term measures, pump refutations, and the two construction escapes.

Additive and affine measures are compared symbolically: both sides of a rule
reduce to a linear form ``c + Σ a_v·μ(v)`` over the rule's variables. A rule
is oriented when the difference has a positive constant and no negative
coefficient; a negative coefficient on a variable yields a constructive pump
``v ↦ S^m(Z)`` with the least ``m ≥ 1`` that closes the gap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping, Optional

import sympy

from .terms import S, Symbol, Term, Z, apply_substitution, format_term, numeral, variables
from .trs import RECURSOR, Rule, Trs

FAMILIES = ("additive", "affine", "poly")

BARRIER_CLASSES = (
    "additive",
    "transparent-compositional",
    "affine",
    "restricted quadratic",
    "bounded cross-term quadratic",
    "bounded multilinear",
    "generalized bounded polynomial",
    "max-plus",
    "tracked componentwise",
    "tracked-primary lexicographic",
    "balanced mixed-coordinate",
    "weighted scalar-projection",
)
CONSTRUCTIVE_CLASSES = frozenset({"additive", "transparent-compositional", "affine"})
DECLARED_LICENSE = "companion barrier package"


class UnweightedSymbol(KeyError):
    def __str__(self):
        return f"symbol {self.args[0]} has no weight in the measure"


class MeasureError(ValueError):
    pass


# ---------------------------------------------------------------- measures


@dataclass(frozen=True)
class MeasureSpec:
    """A per-symbol interpretation.

    ``weights`` maps symbol names to: an int (additive), ``{"c": int,
    "a": [int, ...]}`` (affine), or a polynomial string over ``x1..xn``
    (poly).
    """

    family: str
    weights: Mapping[str, Any]

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise MeasureError(f"unknown measure family {self.family!r}")
        object.__setattr__(self, "weights", dict(self.weights))
        for name, w in self.weights.items():
            if self.family == "additive":
                if not _nat(w):
                    raise MeasureError(f"additive weight of {name} must be a nonnegative integer")
            elif self.family == "affine":
                if not isinstance(w, Mapping) or not _nat(w.get("c")):
                    raise MeasureError(f"affine weight of {name} needs a nonnegative constant 'c'")
                mult = w.get("a", [])
                if not all(_nat(a) and a >= 1 for a in mult):
                    raise MeasureError(f"affine multipliers of {name} must be integers >= 1")
            elif not isinstance(w, str):
                raise MeasureError(f"polynomial of {name} must be a string")

    @classmethod
    def uniform(cls, family: str, symbols=("F", "G", "S", "Z"), value: int = 1) -> "MeasureSpec":
        arity = {"F": 3, "G": 2, "S": 1, "Z": 0}
        if family == "additive":
            return cls("additive", {s: value for s in symbols})
        if family == "affine":
            return cls("affine", {s: {"c": value, "a": [1] * arity[s]} for s in symbols})
        raise MeasureError(f"no uniform {family} measure")

    @classmethod
    def from_report(cls, data: Mapping) -> "MeasureSpec":
        return cls(data["family"], data["weights"])

    def to_report(self) -> dict:
        return {"family": self.family, "weights": dict(self.weights)}

    def affine_of(self, s: Symbol) -> tuple[int, tuple[int, ...]]:
        """(constant, multipliers) of s; additive weights are affine with unit multipliers."""
        try:
            w = self.weights[s.name]
        except KeyError:
            raise UnweightedSymbol(s.name) from None
        if self.family == "additive":
            return w, (1,) * s.arity
        if self.family == "affine":
            mult = tuple(w.get("a", ()))
            if len(mult) != s.arity:
                raise MeasureError(f"{s.name} needs {s.arity} multipliers, got {len(mult)}")
            return w["c"], mult
        raise MeasureError("polynomial measures are not affine")

    @cached_property
    def _poly(self) -> dict[str, "Interpretation"]:
        return {name: Interpretation.parse(name, text) for name, text in self.weights.items()}

    def interpretation(self, s: Symbol) -> "Interpretation":
        try:
            interp = self._poly[s.name]
        except KeyError:
            raise UnweightedSymbol(s.name) from None
        if interp.arity > s.arity:
            raise MeasureError(f"polynomial of {s.name} mentions x{interp.arity} but arity is {s.arity}")
        return interp


def _nat(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and v >= 0


@dataclass(frozen=True)
class Interpretation:
    """A polynomial with nonnegative integer coefficients over x1..xn."""

    name: str
    text: str
    arity: int
    monomials: tuple[tuple[int, tuple[int, ...]], ...]

    @classmethod
    def parse(cls, name: str, text: str) -> "Interpretation":
        xs = sympy.symbols("x1:10")
        try:
            expr = sympy.sympify(text, locals={str(x): x for x in xs})
        except (sympy.SympifyError, SyntaxError, TypeError) as exc:
            raise MeasureError(f"cannot parse polynomial for {name}: {text!r}") from exc
        free = expr.free_symbols
        if not free <= set(xs):
            raise MeasureError(f"polynomial for {name} uses unknown variables {sorted(map(str, free - set(xs)))}")
        arity = max((xs.index(x) + 1 for x in free), default=0)
        gens = xs[:arity]
        try:
            poly = sympy.Poly(sympy.expand(expr), *gens) if gens else None
        except sympy.PolynomialError as exc:
            raise MeasureError(f"{name}: {text!r} is not a polynomial") from exc
        terms = poly.terms() if poly is not None else [((), sympy.sympify(expr))]
        monomials = []
        for exps, coef in terms:
            if not (coef.is_Integer and coef >= 0):
                raise MeasureError(f"{name}: coefficient {coef} is not a nonnegative integer")
            if coef:
                monomials.append((int(coef), tuple(int(e) for e in exps)))
        return cls(name, text, arity, tuple(monomials))

    def __call__(self, args: list[int]) -> int:
        total = 0
        for coef, exps in self.monomials:
            v = coef
            for a, e in zip(args, exps):
                if e:
                    v *= a**e
            total += v
        return total

    def strictly_monotone(self, arity: int) -> bool:
        """Sufficient test: every argument has a linear monomial of coefficient >= 1."""
        linear = set()
        for _, exps in self.monomials:
            nz = [i for i, e in enumerate(exps) if e]
            if len(nz) == 1 and exps[nz[0]] == 1:
                linear.add(nz[0])
        return all(i in linear for i in range(arity))

    def sympy_expr(self, args: list) -> sympy.Expr:
        total = sympy.Integer(0)
        for coef, exps in self.monomials:
            v = sympy.Integer(coef)
            for a, e in zip(args, exps):
                if e:
                    v *= a**e
            total += v
        return total


def evaluate_measure(m: MeasureSpec, t: Term) -> int:
    """Bottom-up value of a ground term."""
    if not t.ground:
        raise MeasureError(f"cannot evaluate non-ground term {format_term(t)}")
    done: dict[Term, int] = {}
    stack = [(t, False)]
    poly = m.family == "poly"
    while stack:
        u, expanded = stack.pop()
        if u in done:
            continue
        if not expanded and u.args:
            stack.append((u, True))
            stack.extend((a, False) for a in u.args if a not in done)
            continue
        vals = [done[a] for a in u.args]
        if poly:
            done[u] = m.interpretation(u.head)(vals)
        else:
            c, mult = m.affine_of(u.head)
            done[u] = c + sum(a * v for a, v in zip(mult, vals))
    return done[t]


# ------------------------------------------------------------ linear forms


@dataclass(frozen=True)
class LinearForm:
    const: int
    coefs: Mapping[str, int]

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        keys = dict.fromkeys([*self.coefs, *other.coefs])
        return LinearForm(
            self.const - other.const,
            {v: self.coefs.get(v, 0) - other.coefs.get(v, 0) for v in keys},
        )

    def __str__(self):
        parts = [str(self.const)]
        for v, c in self.coefs.items():
            if c:
                parts.append(f"{c}*{v}")
        return " + ".join(parts).replace("+ -", "- ")


def linearize(m: MeasureSpec, t: Term) -> LinearForm:
    """μ(t) as an affine function of μ of t's variables."""
    if t.is_var:
        return LinearForm(0, {t.head: 1})
    c, mult = m.affine_of(t.head)
    const = c
    coefs: dict[str, int] = {}
    for a, sub in zip(mult, t.args):
        form = linearize(m, sub)
        const += a * form.const
        for v, k in form.coefs.items():
            coefs[v] = coefs.get(v, 0) + a * k
    return LinearForm(const, coefs)


# ----------------------------------------------------------------- verdicts


@dataclass(frozen=True)
class Pump:
    rule: str
    substitution: Mapping[str, Term]
    lhs_value: int
    rhs_value: int
    tower: Optional[int] = None

    def to_report(self) -> dict:
        out = {
            "rule": self.rule,
            "substitution": {v: format_term(t) for v, t in sorted(self.substitution.items())},
            "lhs_value": self.lhs_value,
            "rhs_value": self.rhs_value,
        }
        if self.tower is not None:
            out["tower"] = self.tower
        return out


@dataclass(frozen=True)
class PrecedenceSpec:
    """A strict order on symbol names, closed transitively on construction."""

    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        closure = set(self.pairs)
        while True:
            extra = {(a, d) for a, b in closure for c, d in closure if b == c} - closure
            if not extra:
                break
            closure |= extra
        for a, b in closure:
            if a == b:
                raise ValueError(f"precedence is not irreflexive: {a} > {a}")
        object.__setattr__(self, "pairs", tuple(sorted(closure)))

    @classmethod
    def parse(cls, text: str) -> "PrecedenceSpec":
        pairs = []
        for chunk in filter(None, (c.strip() for c in text.replace(";", ",").split(","))):
            names = [n.strip() for n in chunk.split(">")]
            if len(names) < 2 or not all(names):
                raise ValueError(f"bad precedence chain {chunk!r}")
            pairs.extend(zip(names, names[1:]))
        return cls(tuple(pairs))

    def greater(self, f: str, g: str) -> bool:
        return (f, g) in self._set

    @cached_property
    def _set(self) -> frozenset:
        return frozenset(self.pairs)

    def to_report(self) -> list:
        return [f"{a}>{b}" for a, b in self.pairs]


@dataclass(frozen=True)
class OrientationVerdict:
    """``oriented`` carries a witness; ``refuted`` carries a pump; ``not-oriented``
    means the sufficient criterion failed and no counterexample was found."""

    outcome: str
    method: str
    witness: Any = None
    evidence: tuple = ()
    pump: Optional[Pump] = None
    failing_rule: Optional[str] = None
    detail: Mapping[str, Any] = field(default_factory=dict)

    @property
    def oriented(self) -> bool:
        return self.outcome == "oriented"

    def to_report(self) -> dict:
        out = {"outcome": self.outcome, "method": self.method, "evidence": list(self.evidence)}
        if self.outcome == "oriented":
            out["witness"] = self.witness
        else:
            out["failing_rule"] = self.failing_rule
            out["attempted"] = self.witness
        if self.pump is not None:
            out["pump"] = self.pump
        out.update(self.detail)
        return out


def _pump_for(m: MeasureSpec, rule: Rule, diff: LinearForm, min_tower: int = 1) -> Optional[Pump]:
    """Instantiate every variable with Z except one negatively weighted variable,
    which gets the least S-tower making the rule non-decreasing."""
    negative = [v for v, c in diff.coefs.items() if c < 0]
    if not negative:
        sigma = {v: Z for v in variables(rule.lhs)}
        lhs = evaluate_measure(m, apply_substitution(rule.lhs, sigma))
        rhs = evaluate_measure(m, apply_substitution(rule.rhs, sigma))
        return Pump(rule.label, sigma, lhs, rhs) if lhs <= rhs else None
    v = negative[0]
    z = evaluate_measure(m, Z)
    gap = diff.const + sum(c * z for u, c in diff.coefs.items() if u != v)
    tower = _least_tower(m, -diff.coefs[v], gap, min_tower)
    sigma = {u: Z for u in variables(rule.lhs)}
    sigma[v] = numeral(tower)
    lhs = evaluate_measure(m, apply_substitution(rule.lhs, sigma))
    rhs = evaluate_measure(m, apply_substitution(rule.rhs, sigma))
    if lhs > rhs:
        raise AssertionError("pump construction failed re-evaluation")
    return Pump(rule.label, sigma, lhs, rhs, tower)


def _least_tower(m: MeasureSpec, extra: int, gap: int, start: int) -> int:
    """Least t >= start with extra·μ(S^t(Z)) >= gap."""
    c_s, (a_s,) = m.affine_of(S)
    value = evaluate_measure(m, numeral(start))
    if extra * value >= gap:
        return start
    if a_s == 1:
        if c_s == 0:
            raise AssertionError("successor tower cannot grow")
        need = -(-gap // extra)
        return start + -(-(need - value) // c_s)
    t = start
    while extra * value < gap:
        nxt = c_s + a_s * value
        if nxt == value:
            raise AssertionError("successor tower cannot grow")
        value = nxt
        t += 1
    return t


def _step_rule(trs: Trs) -> Rule:
    return trs.rule("step")


def refute_additive(m: MeasureSpec, trs: Trs = RECURSOR) -> OrientationVerdict:
    """Pump the duplicated step argument: x ↦ Z, n ↦ Z, y ↦ S(Z)."""
    if m.family != "additive":
        raise MeasureError("refute_additive needs an additive measure")
    return _refute_linear(m, trs)


def refute_affine(m: MeasureSpec, trs: Trs = RECURSOR) -> OrientationVerdict:
    if m.family not in ("additive", "affine"):
        raise MeasureError("refute_affine needs an affine measure")
    return _refute_linear(m, trs)


def _refute_linear(m: MeasureSpec, trs: Trs) -> OrientationVerdict:
    rule = _step_rule(trs)
    diff = linearize(m, rule.lhs) - linearize(m, rule.rhs)
    pump = _pump_for(m, rule, diff)
    if pump is None:
        raise AssertionError("no pump for the step rule")
    return OrientationVerdict(
        "refuted",
        m.family,
        witness=m,
        evidence=({"rule": rule.label, "difference": str(diff)},),
        pump=pump,
        failing_rule=rule.label,
    )


def orient_linear(trs: Trs, m: MeasureSpec) -> OrientationVerdict:
    """Orient with an additive/affine measure or refute it with a pump."""
    evidence = []
    for rule in trs.rules:
        diff = linearize(m, rule.lhs) - linearize(m, rule.rhs)
        evidence.append({"rule": rule.label, "difference": str(diff)})
        if diff.const > 0 and all(c >= 0 for c in diff.coefs.values()):
            continue
        pump = _pump_for(m, rule, diff)
        outcome = "refuted" if pump is not None else "not-oriented"
        return OrientationVerdict(
            outcome, m.family, witness=m, evidence=tuple(evidence), pump=pump, failing_rule=rule.label
        )
    return OrientationVerdict("oriented", m.family, witness=m, evidence=tuple(evidence))


# --------------------------------------------------------------- polynomial

DEFAULT_POLY = MeasureSpec(
    "poly",
    {"F": "x1 + x2*x3 + x2 + 2*x3 + 1", "G": "x1 + x2 + 1", "S": "x1 + 1", "Z": "0"},
)


def poly_expression(m: MeasureSpec, t: Term, env: Mapping[str, sympy.Symbol]) -> sympy.Expr:
    if t.is_var:
        return env[t.head]
    args = [poly_expression(m, a, env) for a in t.args]
    return m.interpretation(t.head).sympy_expr(args)


def poly_difference(m: MeasureSpec, rule: Rule) -> tuple[sympy.Expr, dict[tuple, int]]:
    """Expanded [lhs] − [rhs] and its coefficients keyed by exponent tuples
    over the lhs variables in order of first occurrence."""
    names = list(variables(rule.lhs))
    env = {v: sympy.Symbol(v) for v in names}
    d = sympy.expand(poly_expression(m, rule.lhs, env) - poly_expression(m, rule.rhs, env))
    gens = [env[v] for v in names]
    if gens:
        coeffs = {exps: int(c) for exps, c in sympy.Poly(d, *gens).terms()}
    else:
        coeffs = {(): int(d)}
    return d, coeffs


def _sample_counterexample(m: MeasureSpec, rule: Rule, bound: int) -> Optional[Pump]:
    names = list(variables(rule.lhs))
    towers = sorted(itertools.product(range(bound + 1), repeat=len(names)), key=lambda p: (sum(p), p))
    for point in towers:
        sigma = {v: numeral(j) for v, j in zip(names, point)}
        lhs = evaluate_measure(m, apply_substitution(rule.lhs, sigma))
        rhs = evaluate_measure(m, apply_substitution(rule.rhs, sigma))
        if lhs <= rhs:
            return Pump(rule.label, sigma, lhs, rhs)
    return None


def orient_poly(trs: Trs, m: MeasureSpec = DEFAULT_POLY, sample_bound: int = 4) -> OrientationVerdict:
    """Nonnegative-coefficient criterion on every rule difference, plus strict
    monotonicity of each interpretation in every argument."""
    if m.family != "poly":
        raise MeasureError("orient_poly needs a polynomial measure")
    evidence = []
    failing = None
    for rule in trs.rules:
        d, coeffs = poly_difference(m, rule)
        const = coeffs.get((0,) * len(variables(rule.lhs)), 0)
        ok = const > 0 and all(c >= 0 for c in coeffs.values())
        evidence.append({"rule": rule.label, "difference": str(d), "decreases": ok})
        if not ok and failing is None:
            failing = rule
    monotone = all(
        m.interpretation(s).strictly_monotone(s.arity) for s in trs.signature
    )
    detail = {"strictly_monotone": monotone}
    if failing is None and monotone:
        return OrientationVerdict("oriented", "poly", witness=m, evidence=tuple(evidence), detail=detail)
    pump = _sample_counterexample(m, failing, sample_bound) if failing is not None else None
    return OrientationVerdict(
        "refuted" if pump is not None else "not-oriented",
        "poly",
        witness=m,
        evidence=tuple(evidence),
        pump=pump,
        failing_rule=None if failing is None else failing.label,
        detail=detail,
    )


# -------------------------------------------------------------------- MPO


def mpo_greater(s: Term, t: Term, prec: PrecedenceSpec, memo: Optional[dict] = None) -> bool:
    """s >mpo t under the multiset path order (syntactic equality on args)."""
    memo = {} if memo is None else memo
    key = (s, t)
    if key in memo:
        return memo[key]
    result = False
    if not s.is_var and s is not t:
        if any(a is t or mpo_greater(a, t, prec, memo) for a in s.args):
            result = True
        elif not t.is_var:
            f, g = s.head, t.head
            if f is not g and prec.greater(f.name, g.name):
                result = all(mpo_greater(s, b, prec, memo) for b in t.args)
            elif f is g:
                result = _multiset_greater(list(s.args), list(t.args), prec, memo)
    memo[key] = result
    return result


def _multiset_greater(ms: list, ns: list, prec, memo) -> bool:
    ms, ns = list(ms), list(ns)
    for x in list(ms):
        if x in ns:
            ms.remove(x)
            ns.remove(x)
    if not ms:
        return False
    return all(any(mpo_greater(a, b, prec, memo) for a in ms) for b in ns)


def orient_mpo(trs: Trs, prec: PrecedenceSpec) -> OrientationVerdict:
    memo: dict = {}
    evidence = []
    for rule in trs.rules:
        ok = mpo_greater(rule.lhs, rule.rhs, prec, memo)
        evidence.append({"rule": rule.label, "decreases": ok})
        if not ok:
            return OrientationVerdict(
                "not-oriented", "mpo", witness=prec, evidence=tuple(evidence), failing_rule=rule.label
            )
    return OrientationVerdict("oriented", "mpo", witness=prec, evidence=tuple(evidence))


# ------------------------------------------------------------ barrier run


@dataclass(frozen=True)
class FailureCertificate:
    entry_name: str
    level: int
    kind: str
    boundary_condition: str
    pump: Optional[Pump] = None
    license: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("constructive-pump", "declared"):
            raise ValueError(f"unknown certificate kind {self.kind!r}")

    def to_report(self) -> dict:
        out = {
            "entry_name": self.entry_name,
            "level": self.level,
            "kind": self.kind,
            "boundary_condition": self.boundary_condition,
        }
        if self.pump is not None:
            out["pump"] = self.pump
        if self.license is not None:
            out["license"] = self.license
        return out

    @classmethod
    def from_report(cls, data: Mapping) -> "FailureCertificate":
        pump = data.get("pump")
        if pump is not None:
            from .trs import parse_term

            pump = Pump(
                pump["rule"],
                {v: parse_term(t) for v, t in pump["substitution"].items()},
                pump["lhs_value"],
                pump["rhs_value"],
                pump.get("tower"),
            )
        return cls(
            data["entry_name"], data["level"], data["kind"], data["boundary_condition"], pump, data.get("license")
        )


def certificate_from_verdict(name: str, level: int, verdict: OrientationVerdict) -> FailureCertificate:
    if verdict.pump is not None:
        p = verdict.pump
        why = (
            f"rule {p.rule} does not strictly decrease: "
            f"measure {p.lhs_value} <= {p.rhs_value} under the recorded substitution"
        )
        return FailureCertificate(name, level, "constructive-pump", why, p)
    why = f"{verdict.method} criterion fails on rule {verdict.failing_rule}"
    return FailureCertificate(name, level, "declared", why, license="sufficient-criterion-failure")


def declared_certificate(name: str, level: int, license: str = DECLARED_LICENSE) -> FailureCertificate:
    return FailureCertificate(
        name, level, "declared", f"no {name} measure orients the step rule", license=license
    )


def run_barrier(
    classes=BARRIER_CLASSES,
    measures: Optional[Mapping[str, MeasureSpec]] = None,
    trs: Trs = RECURSOR,
) -> list[FailureCertificate]:
    """One certificate per class, in catalog order."""
    measures = dict(measures or {})
    out = []
    for name in classes:
        if name not in BARRIER_CLASSES:
            raise ValueError(f"unknown barrier class {name!r}")
        if name in CONSTRUCTIVE_CLASSES:
            family = "affine" if name == "affine" else "additive"
            m = measures.get(name) or MeasureSpec.uniform(family)
            verdict = refute_affine(m, trs) if family == "affine" else refute_additive(m, trs)
            out.append(certificate_from_verdict(name, 0, verdict))
        else:
            out.append(declared_certificate(name, 0))
    return out


def record_kind(plain: Mapping) -> str:
    """Classify an emitted record as an orientation witness or a failure certificate."""
    if "entry_name" in plain and "kind" in plain and "witness" not in plain:
        return "failure-certificate"
    if "outcome" in plain and "method" in plain and "license" not in plain and "entry_name" not in plain:
        return "orientation-verdict"
    raise ValueError("unrecognized record")

