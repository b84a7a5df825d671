"""``recursorlab`` command line: one JSON document on stdout per run.

Exit codes: 0 success, 1 a checker rejected its input, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import platform
import sys
from typing import Optional, Sequence

from . import __version__, confession, diagnostics, family, necessity
from .orientation import (
    DEFAULT_POLY,
    MeasureError,
    MeasureSpec,
    PrecedenceSpec,
    UnweightedSymbol,
    orient_linear,
    orient_mpo,
    orient_poly,
)
from .report import emit_report
from .rewrite import ReducibleInput, canonical_trace, normalize
from .schemas import schema_for
from .supervisor import RecordError, audit_record, load_record, payload_term, supervise
from .terms import ArityError, Term
from .trs import BUILTINS, TrsSyntaxError, UnboundRhsVariable, format_trs, parse_term, parse_trs
from .witness_order import CatalogError, compute_kappa, load_catalog

COMMANDS = (
    "parse", "trace", "orient", "dp", "confess", "diagnose", "kappa",
    "supervise", "audit", "necessity", "family", "sweep",
)
INPUT_ERRORS = (
    TrsSyntaxError, UnboundRhsVariable, ArityError, CatalogError, RecordError,
    MeasureError, UnweightedSymbol, ReducibleInput, ValueError, OSError, KeyError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _trs(spec: Optional[str]):
    spec = spec or "recursor"
    return parse_trs(spec) if spec in BUILTINS else parse_trs(_read(spec))


def _ground(text: Optional[str], default: str = "Z") -> Term:
    return payload_term(text if text is not None else default)


def _k(args, default: int = 0) -> int:
    k = default if args.k is None else args.k
    if k < 0:
        raise ValueError("--k must be nonnegative")
    return k


# ------------------------------------------------------------- commands


def cmd_parse(args):
    trs = _trs(args.trs)
    out = {
        "name": trs.name,
        "signature": [f"{s.name}/{s.arity}" for s in trs.signature],
        "rules": [{"label": r.label, "lhs": r.lhs, "rhs": r.rhs} for r in trs.rules],
        "text": format_trs(trs),
    }
    if args.term is not None:
        nf, firings, exhausted = normalize(trs, parse_term(args.term))
        out.update(normal_form=nf, firings=firings, exhausted=exhausted)
    return out, 0


def cmd_trace(args):
    trace = canonical_trace(_ground(args.base), _ground(args.payload), _k(args))
    return trace, 0


def _measure_from(args, family_name: str) -> MeasureSpec:
    if args.weights is None:
        return DEFAULT_POLY if family_name == "poly" else MeasureSpec.uniform(family_name)
    data = json.loads(_read(args.weights))
    if isinstance(data, dict) and "family" in data:
        return MeasureSpec.from_report(data)
    return MeasureSpec(family_name, data)


def cmd_orient(args):
    trs = _trs(args.trs)
    method = args.method or "mpo"
    if method in ("additive", "affine"):
        verdict = orient_linear(trs, _measure_from(args, method))
    elif method == "poly":
        verdict = orient_poly(trs, _measure_from(args, "poly"))
    elif method == "mpo":
        verdict = orient_mpo(trs, PrecedenceSpec.parse(args.precedence or ""))
    else:
        raise UsageError(f"unknown --method {method!r}; expected additive, affine, poly or mpo")
    code = 1 if args.expect is not None and verdict.outcome != args.expect else 0
    return verdict, code


def cmd_dp(args):
    problem = confession.extract_dependency_pairs(_trs(args.trs))
    return {"problem": problem, "base_order": confession.check_base_order(problem)}, 0


def cmd_confess(args):
    trs = _trs(args.trs)
    route = args.route or "dp-projection"
    witness = confession.build_forgetting_witness(route)
    problem = confession.extract_dependency_pairs(trs)
    verdict = confession.check_base_order(problem)
    out = {"forgetting_witness": witness, "problem": problem, "base_order": verdict}
    if not verdict.oriented:
        return out, 1
    k = _k(args)
    out["account"] = confession.ag_account(trs, k)
    trace = canonical_trace(_ground(args.base), _ground(args.payload), k)
    out["rank_table"] = [confession.rank_of(route, s.term) for s in trace.steps]
    return out, 0


def cmd_diagnose(args):
    a, b = _ground(args.base), _ground(args.payload)
    k = _k(args, 1)
    return diagnostics.diagnose(k, b.size, diagnostics.default_base_overhead(b.size, a.size)), 0


def cmd_kappa(args):
    return compute_kappa(_trs(args.trs), load_catalog(args.catalog or "barrier-confined")), 0


def cmd_supervise(args):
    record = supervise(
        _trs(args.trs), load_catalog(args.catalog or "barrier-confined"),
        _k(args), _ground(args.base), _ground(args.payload),
    )
    return record, 0


def cmd_audit(args):
    if args.record is None:
        raise UsageError("audit: a record file is required")
    data = load_record(_read(args.record))
    catalog = load_catalog(args.catalog or "barrier-confined")
    if args.kappa is not None:
        kappa = int(args.kappa) if args.kappa.isdigit() else args.kappa
    else:
        trs_text = (data.get("obligation") or {}).get("trs_text")
        trs = parse_trs(trs_text) if trs_text else _trs(None)
        kappa = compute_kappa(trs, catalog).kappa_star if catalog.entries else 0
    verdict = audit_record(data, catalog, kappa)
    return verdict, 0 if verdict.valid else 1


def cmd_necessity(args):
    depth = 6 if args.depth is None else args.depth
    out = necessity.enumerate_and_verify(depth).to_report()
    if args.rhs is not None:
        r = necessity.rhs_from_term(parse_term(args.rhs, ("x", "y", "n")))
        out["analysis"] = {"rhs": str(r), **necessity.analyze_rhs(r).to_report()}
    return out, 0 if out["counterexamples"] == 0 else 1


def cmd_family(args):
    table = family.classify_family()
    complete = [c for c in table.values() if c.member.complete]
    biconditional = all(
        (c.cls == "duplicating-complete-blocked") == (c.member.step_kind == "duplicating") for c in complete
    )
    return {"members": list(table.values()), "blocked_iff_duplicating": biconditional}, 0


def _int_range(text: str) -> list[int]:
    parts = [int(p) for p in text.split(":")]
    if len(parts) == 1:
        return parts
    if len(parts) not in (2, 3):
        raise ValueError(f"bad range {text!r}; use N, LO:HI or LO:HI:STEP")
    lo, hi = parts[0], parts[1]
    step = parts[2] if len(parts) == 3 else 1
    if step <= 0:
        raise ValueError("range step must be positive")
    return list(range(lo, hi + 1, step))


def cmd_sweep(args):
    ks = _int_range(args.krange or "1:10")
    sizes = [payload_term(p).size for p in (args.payload or ["Z"])]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(diagnostics.SWEEP_COLUMNS)
    for row in diagnostics.sweep_rows(ks, sizes):
        w.writerow([format(v, ".16e") if isinstance(v, float) else str(v) for v in row])
    return buf.getvalue(), 0


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}

HELP = {
    "parse": "parse a TRS file (or builtin 'recursor'); --term normalizes a term under it",
    "trace": "canonical trace of F(a,b,S^k(Z)) under the duplicator",
    "orient": "orient a TRS with an additive, affine, poly or mpo witness",
    "dp": "dependency pairs, graph components and the subterm base order",
    "confess": "confession witness, cost account and rank table along the trace",
    "diagnose": "closed-form trace diagnostics for --k and --payload",
    "kappa": "minimal witness order over a catalog",
    "supervise": "run the budgeted supervisory loop and emit a T3/T4 record",
    "audit": "audit a T3/T4 record against a catalog",
    "necessity": "exhaustive check of the duplication theorem on positional right sides",
    "family": "classify the six-member recursion family",
    "sweep": "CSV sweep of diagnostics over k ranges",
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="recursorlab", description="Step-duplicating recursor laboratory.")
    parser.add_argument("--version", action="version", version=f"recursorlab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name], description=HELP[name])
        p.add_argument("--schema", action="store_true", help="print the output JSON schema and exit")
        p.add_argument("--meta", action="store_true", help="add version and platform data to the report")
        if name in ("parse", "orient", "dp", "confess", "kappa", "supervise"):
            p.add_argument("trs", nargs="?", help="TRS file, '-' for stdin, or 'recursor' (default)")
        if name == "parse":
            p.add_argument("--term", help="normalize this term (fuel: RECURSORLAB_FUEL)")
        if name in ("trace", "confess", "diagnose", "supervise"):
            p.add_argument("--k", type=int, help="counter height K")
            p.add_argument("--payload", help="ground payload term b (default Z)")
            p.add_argument("--base", help="ground base term a (default Z)")
        if name == "orient":
            p.add_argument("--method", choices=("additive", "affine", "poly", "mpo"))
            p.add_argument("--weights", metavar="FILE", help="JSON weights for additive/affine/poly")
            p.add_argument("--precedence", help='MPO precedence such as "F>G"')
            p.add_argument("--expect", choices=("oriented", "refuted", "not-oriented"))
        if name == "confess":
            p.add_argument("--route", choices=confession.ROUTES)
        if name in ("kappa", "supervise", "audit"):
            p.add_argument("--catalog", metavar="FILE", help="catalog JSON or shipped catalog name")
        if name == "audit":
            p.add_argument("record", nargs="?", help="typed output record JSON ('-' for stdin)")
            p.add_argument("--kappa", help="kappaStar to audit against (default: computed)")
        if name == "necessity":
            p.add_argument("--depth", type=int, help=f"maximum depth (<= {necessity.MAX_DEPTH}, default 6)")
            p.add_argument("--rhs", help="analyze one right side, e.g. 'G(y,F(x,y,n))'")
        if name == "sweep":
            p.add_argument("--k", dest="krange", help="k range N, LO:HI or LO:HI:STEP (default 1:10)")
            p.add_argument("--payload", action="append", help="payload term; repeat for several sizes")
    return parser


def _error(kind: str, message: str) -> str:
    return emit_report({"error": {"type": kind, "message": message}})


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required; see --help")
        if args.schema:
            stdout.write(json.dumps(schema_for(args.command), sort_keys=True, indent=2) + "\n")
            return 0
        result, code = HANDLERS[args.command](args)
    except UsageError as exc:
        stderr.write(f"{exc}\n")
        stdout.write(_error("usage", str(exc)) + "\n")
        return 2
    except INPUT_ERRORS as exc:
        message = str(exc) or type(exc).__name__
        stderr.write(f"recursorlab: {message}\n")
        stdout.write(_error(type(exc).__name__, message) + "\n")
        return 2
    if isinstance(result, str):
        stdout.write(result)
        return code
    if args.meta:
        result = {"report": result, "meta": {"version": __version__, "python": platform.python_version()}}
    stdout.write(emit_report(result) + "\n")
    if code:
        stderr.write(f"recursorlab {args.command}: checker rejected the input\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
