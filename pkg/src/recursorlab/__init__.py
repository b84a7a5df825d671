"""A laboratory for the step-duplicating recursor F(x,y,Z)->x, F(x,y,S(n))->G(y,F(x,y,n)).

Rewriting engine, orientation and refutation, dependency-pair confession,
trace diagnostics, witness-order bookkeeping, a typed supervisory loop and
its audit, plus a small command line.
"""

__version__ = "0.1.0"

from .terms import F, G, S, Z, Symbol, Term, numeral, var
from .trs import RECURSOR, Rule, Trs, format_trs, parse_term, parse_trs
from .rewrite import canonical_trace, closed_form, normalize, rewrite_once
from .report import emit_report, parse_report

__all__ = [
    "F", "G", "S", "Z", "Symbol", "Term", "numeral", "var",
    "RECURSOR", "Rule", "Trs", "format_trs", "parse_term", "parse_trs",
    "canonical_trace", "closed_form", "normalize", "rewrite_once",
    "emit_report", "parse_report",
]
