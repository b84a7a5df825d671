"""Rewrite rules, rewrite systems, and the TPDB-style text format.

Grammar (whitespace and CRLF insensitive)::

    trs    := [ "(" "NAME" ident ")" ] "(" "VAR" ident* ")"
              [ "(" "SIG" (ident "/" int)* ")" ] "(" "RULES" rule* ")"
    rule   := [ ident ":" ] term "->" term
    term   := ident [ "(" term ("," term)* ")" ]

``NAME``, ``SIG`` and rule labels are optional extensions; a file without
them is plain TPDB. Identifiers listed under ``VAR`` are variables, every
other identifier is a function symbol whose arity is fixed by first use.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .terms import (
    IDENTIFIER,
    ArityError,
    Symbol,
    Term,
    format_term,
    variables,
    _pre_order,
)


class TrsSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class UnboundRhsVariable(ValueError):
    pass


def symbols_of(t: Term) -> list[Symbol]:
    seen: dict[Symbol, None] = {}
    for u in _pre_order(t):
        if not u.is_var:
            seen.setdefault(u.head, None)
    return list(seen)


@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term
    label: str

    def __post_init__(self):
        if not IDENTIFIER.match(self.label):
            raise ValueError(f"invalid rule label {self.label!r}")
        if self.lhs.is_var:
            raise ValueError(f"rule {self.label}: left-hand side is a variable")
        extra = set(variables(self.rhs)) - set(variables(self.lhs))
        if extra:
            names = ", ".join(sorted(extra))
            raise UnboundRhsVariable(
                f"rule {self.label}: variable(s) {names} occur only on the right-hand side"
            )

    def __str__(self):
        return f"{self.label}: {format_term(self.lhs)} -> {format_term(self.rhs)}"


@dataclass(frozen=True)
class Trs:
    name: str
    rules: tuple[Rule, ...]
    signature: tuple[Symbol, ...] = field(default=())

    def __post_init__(self):
        if not IDENTIFIER.match(self.name):
            raise ValueError(f"invalid system name {self.name!r}")
        object.__setattr__(self, "rules", tuple(self.rules))
        labels = [r.label for r in self.rules]
        dupes = sorted({x for x in labels if labels.count(x) > 1})
        if dupes:
            raise ValueError(f"duplicate rule label(s): {', '.join(dupes)}")
        sig = list(self.signature)
        by_name: dict[str, Symbol] = {}
        for s in sig:
            if s.name in by_name:
                raise ArityError(f"symbol {s.name} declared twice")
            by_name[s.name] = s
        for s in inferred_signature(self.rules):
            known = by_name.get(s.name)
            if known is None:
                by_name[s.name] = s
                sig.append(s)
            elif known.arity != s.arity:
                raise ArityError(
                    f"symbol {s.name} used with arity {s.arity}, declared {known.arity}"
                )
        object.__setattr__(self, "signature", tuple(sig))

    @property
    def defined_symbols(self) -> tuple[Symbol, ...]:
        seen: dict[Symbol, None] = {}
        for r in self.rules:
            seen.setdefault(r.lhs.head, None)
        return tuple(seen)

    def rule(self, label: str) -> Rule:
        for r in self.rules:
            if r.label == label:
                return r
        raise KeyError(label)

    def __str__(self):
        return format_trs(self)


def inferred_signature(rules) -> list[Symbol]:
    seen: dict[str, Symbol] = {}
    for r in rules:
        for side in (r.lhs, r.rhs):
            for s in symbols_of(side):
                known = seen.setdefault(s.name, s)
                if known.arity != s.arity:
                    raise ArityError(
                        f"symbol {s.name} used with arities {known.arity} and {s.arity}"
                    )
    return list(seen.values())


_TOKEN = re.compile(
    r"(?P<ws>[ \t\n]+)|(?P<arrow>->)|(?P<punct>[(),:/])|(?P<int>[0-9]+)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise TrsSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        chunk = m.group()
        if kind == "ws":
            for i, ch in enumerate(chunk):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        else:
            toks.append(_Tok(kind if kind != "punct" else chunk, chunk, line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, variables_: frozenset[str] = frozenset()):
        self.toks = _tokenize(text)
        self.i = 0
        self.vars = set(variables_)
        self.arities: dict[str, Symbol] = {}

    def peek(self, offset: int = 0) -> _Tok:
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def fail(self, message: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise TrsSyntaxError(message, tok.line, tok.col)

    def expect(self, kind: str, what: str | None = None) -> _Tok:
        tok = self.peek()
        if tok.kind != kind:
            found = tok.text or "end of input"
            self.fail(f"expected {what or kind!r}, found {found!r}")
        self.i += 1
        return tok

    def symbol(self, name: str, arity: int, tok: _Tok) -> Symbol:
        known = self.arities.get(name)
        if known is not None:
            if known.arity != arity:
                raise ArityError(
                    f"{tok.line}:{tok.col}: symbol {name} used with arity {arity}, "
                    f"earlier with arity {known.arity}"
                )
            return known
        try:
            s = Symbol(name, arity)
        except ArityError as exc:
            raise ArityError(f"{tok.line}:{tok.col}: {exc}") from None
        self.arities[name] = s
        return s

    def term(self) -> Term:
        # Iterative so that deeply nested inputs cannot exhaust the C stack.
        frames: list[tuple[str, _Tok, list[Term]]] = []
        while True:
            tok = self.expect("ident", "identifier")
            if self.peek().kind == "(":
                if tok.text in self.vars:
                    raise ArityError(
                        f"{tok.line}:{tok.col}: variable {tok.text} applied to arguments"
                    )
                self.i += 1
                frames.append((tok.text, tok, []))
                continue
            if tok.text in self.vars:
                done = Term(tok.text)
            else:
                done = Term(self.symbol(tok.text, 0, tok))
            while True:
                if not frames:
                    return done
                name, head_tok, args = frames[-1]
                args.append(done)
                nxt = self.peek()
                if nxt.kind == ",":
                    self.i += 1
                    break
                if nxt.kind == ")":
                    self.i += 1
                    frames.pop()
                    done = Term(self.symbol(name, len(args), head_tok), args)
                    continue
                self.fail(f"expected ',' or ')', found {nxt.text or 'end of input'!r}")

    def block(self, keyword: str) -> bool:
        if self.peek().kind == "(" and self.peek(1).kind == "ident" and self.peek(1).text == keyword:
            self.i += 2
            return True
        return False

    def trs(self) -> Trs:
        name = "trs"
        if self.block("NAME"):
            name = self.expect("ident", "system name").text
            self.expect(")", ")")
        if not self.block("VAR"):
            self.fail("expected '(VAR ...)' block")
        while self.peek().kind == "ident":
            self.vars.add(self.expect("ident").text)
        self.expect(")", ")")
        declared: list[Symbol] = []
        if self.block("SIG"):
            while self.peek().kind == "ident":
                tok = self.expect("ident")
                if tok.text in self.vars:
                    self.fail(f"{tok.text} is declared as a variable", tok)
                self.expect("/", "/")
                arity = int(self.expect("int", "arity").text)
                if tok.text in self.arities:
                    self.fail(f"symbol {tok.text} declared twice", tok)
                declared.append(self.symbol(tok.text, arity, tok))
            self.expect(")", ")")
        if not self.block("RULES"):
            self.fail("expected '(RULES ...)' block")
        rules: list[Rule] = []
        while self.peek().kind == "ident":
            start = self.peek()
            label = f"r{len(rules) + 1}"
            if self.peek(1).kind == ":":
                label = start.text
                self.i += 2
            lhs = self.term()
            self.expect("arrow", "->")
            rhs = self.term()
            try:
                rules.append(Rule(lhs, rhs, label))
            except UnboundRhsVariable as exc:
                raise UnboundRhsVariable(f"{start.line}:{start.col}: {exc}") from None
            except ValueError as exc:
                raise TrsSyntaxError(str(exc), start.line, start.col) from None
        self.expect(")", ")")
        self.expect("eof", "end of input")
        try:
            return Trs(name, tuple(rules), tuple(declared))
        except ArityError:
            raise
        except ValueError as exc:
            raise TrsSyntaxError(str(exc), start.line if rules else 1, 1) from None


RECURSOR_TEXT = """(NAME recursor)
(VAR x y n)
(RULES
  base: F(x,y,Z) -> x
  step: F(x,y,S(n)) -> G(y,F(x,y,n))
)"""

BUILTINS = {"recursor": RECURSOR_TEXT}


def parse_trs(text: str) -> Trs:
    """Parse TRS text; a bare builtin name (e.g. ``recursor``) is also accepted."""
    stripped = text.strip()
    if stripped in BUILTINS:
        text = BUILTINS[stripped]
    return _Parser(text).trs()


def parse_term(text: str, variables_=()) -> Term:
    """Parse one term; identifiers in ``variables_`` are variables."""
    p = _Parser(text, frozenset(variables_))
    t = p.term()
    p.expect("eof", "end of input")
    return t


def format_trs(trs: Trs) -> str:
    var_names: dict[str, None] = {}
    for r in trs.rules:
        for v in variables(r.lhs):
            var_names.setdefault(v, None)
    lines = [f"(NAME {trs.name})", "(VAR" + "".join(" " + v for v in var_names) + ")"]
    if list(trs.signature) != inferred_signature(trs.rules):
        lines.append("(SIG" + "".join(f" {s.name}/{s.arity}" for s in trs.signature) + ")")
    lines.append("(RULES")
    lines.extend(f"  {r}" for r in trs.rules)
    lines.append(")")
    return "\n".join(lines)


def recursor() -> Trs:
    return parse_trs(RECURSOR_TEXT)


RECURSOR = recursor()
