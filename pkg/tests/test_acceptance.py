"""The fifteen acceptance criteria, one test each, at their stated tolerances.

Each test prints one PASS/FAIL line; the session summary repeats them in order.
"""

import json
import math
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

from recursorlab.confession import (
    ROUTES,
    ag_account,
    check_base_order,
    extract_dependency_pairs,
    rank_of,
)
from recursorlab.diagnostics import con, description_gap, diagnose, eta, h_proof_curve, inefficiency
from recursorlab.family import classify_family
from recursorlab.necessity import enumerate_and_verify
from recursorlab.orientation import (
    DEFAULT_POLY,
    FailureCertificate,
    MeasureSpec,
    PrecedenceSpec,
    orient_mpo,
    orient_poly,
    refute_additive,
    refute_affine,
    run_barrier,
)
from recursorlab.report import emit_report, parse_report
from recursorlab.rewrite import canonical_trace, matches_closed_form, terminal_record
from recursorlab.supervisor import TypedOutputRecord, audit_record, supervise
from recursorlab.terms import F, G, S, Term, Z, count_symbol, numeral
from recursorlab.trs import RECURSOR, RECURSOR_TEXT, format_trs, parse_trs
from recursorlab.witness_order import UNDEFINED, Catalog, compute_kappa, load_catalog

from . import oracle
from .strategies import fuzz_catalog

RESULTS = {}
PAYLOADS = (Z, numeral(1), numeral(5))


@contextmanager
def criterion(n, title):
    note = []
    try:
        yield note
    except BaseException:
        RESULTS[n] = (title, False, "; ".join(note))
        print(f"criterion {n:2d} FAIL  {title}")
        raise
    RESULTS[n] = (title, True, "; ".join(note))
    print(f"criterion {n:2d} PASS  {title}")


def _random_normal(rng, budget):
    """Random ground term over G, S, Z with at most ``budget`` nodes."""
    if budget < 2 or rng.random() < 0.3:
        return Z
    if budget >= 3 and rng.random() < 0.4:
        left = _random_normal(rng, (budget - 1) // 2)
        return Term(G, (left, _random_normal(rng, budget - 1 - left.size)))
    return Term(S, (_random_normal(rng, budget - 1),))


def _random_ground(rng, budget):
    """Random ground term over the full signature F, G, S, Z."""
    if budget < 2 or rng.random() < 0.25:
        return Z
    r = rng.random()
    if r < 0.4:
        return Term(S, (_random_ground(rng, budget - 1),))
    if r < 0.7 and budget >= 3:
        left = _random_ground(rng, (budget - 1) // 2)
        return Term(G, (left, _random_ground(rng, budget - 1 - left.size)))
    if budget >= 4:
        x = _random_ground(rng, (budget - 1) // 3)
        y = _random_ground(rng, (budget - 1) // 3)
        return Term(F, (x, y, _random_ground(rng, budget - 1 - x.size - y.size)))
    return Term(S, (Z,))


def test_criterion_01_trace_law():
    with criterion(1, "trace law, k <= 1000, b in {Z, S(Z), S^5(Z)}, < 10 s") as note:
        start = time.perf_counter()
        for b in PAYLOADS:
            for k in range(1001):
                trace = canonical_trace(Z, b, k)
                assert matches_closed_form(trace), (b, k)
                assert trace.firings == k + 1
                assert trace.terminal is terminal_record(Z, b, k)
                assert count_symbol(trace.terminal, G) == k
        elapsed = time.perf_counter() - start
        note.append(f"{elapsed:.2f} s")
        assert elapsed < 10.0


def test_criterion_02_offset_conservation():
    with criterion(2, "offset conservation #b - #G = 1 on nonterminal steps"):
        for b in PAYLOADS:
            for k in range(1001):
                steps = canonical_trace(Z, b, k).steps
                for i in range(len(steps) - 1):
                    s = steps[i]
                    assert s.pay - s.g_frames == 1, (b, k, i)


def test_criterion_03_dominance():
    with criterion(3, "dominance Con/Res, exact rationals") as note:
        report = diagnose(2, 1)
        assert (report.con, report.res) == (6, 2)
        assert con(2, 1) == oracle.con(2, 1) == 6
        for k in range(200, 1001):
            assert Fraction(con(k, 1), k) > 100
        worst = None
        for b in range(1, 11):
            for k in range(3, 1001):
                gap = abs(Fraction(con(k, b), k * k) - Fraction(b, 2))
                bound = Fraction(3 * b, 2 * k)
                if gap > bound and worst is None:
                    worst = (k, b, gap, bound)
        if worst is not None:
            k, b, gap, bound = worst
            note.append(f"first violation k={k} |b|={b}: {gap} > {bound}")
        assert worst is None, f"|Con/Res^2 - |b|/2| = {worst[2]} exceeds {worst[3]} at k={worst[0]}, |b|={worst[1]}"


def test_criterion_04_proof_entropy():
    with criterion(4, "H_proof non-decreasing with exact differences"):
        for k in range(1, 201):
            for b in range(11):
                for c in range(2, 21):
                    curve = h_proof_curve(k, b, c)
                    assert curve[0] == 0
                    prev = curve[0]
                    for i in range(k):
                        cur = curve[i + 1]
                        d_i, d_next = k + c + i * b, k + c + (i + 1) * b
                        num = cur.numerator * prev.denominator - prev.numerator * cur.denominator
                        den = cur.denominator * prev.denominator
                        assert num >= 0
                        assert num * d_i * d_next == b * (k + c) * den
                        prev = cur


def test_criterion_05_inefficiency():
    with criterion(5, "inefficiency lower bound and closed form"):
        for n in range(501):
            v = inefficiency(2 * n + 1, 1)
            assert v.lower_bound == n and v.eta >= n
        rng = random.Random(5)
        for _ in range(2000):
            k, w = rng.randint(1, 10_000), rng.randint(1, 20)
            lhs = eta(k, w) * 2 * math.log(k + 1)
            rhs = (k + 1) * (k + 2) * w
            assert abs(lhs - rhs) <= 1e-12 * rhs


def test_criterion_06_description_gap():
    with criterion(6, "description gap identity, i <= 10^4, |b| <= 10"):
        for b in range(11):
            for i in range(10_001):
                assert description_gap(i, b) == i * (b + 1) - oracle.bits(i + 1) - 1


def test_criterion_07_pump_universality():
    with criterion(7, "pump universality, 10 000 additive + 10 000 affine"):
        rng = random.Random(7)
        for _ in range(10_000):
            w = {s: rng.randint(0, 100) for s in "FGSZ"}
            v = refute_additive(MeasureSpec("additive", w))
            assert v.outcome == "refuted"
            sigma = {x: oracle.parse(str(t)) for x, t in v.pump.substitution.items()}
            lhs = oracle.additive(w, oracle.substitute(oracle.STEP_LHS, sigma))
            rhs = oracle.additive(w, oracle.substitute(oracle.STEP_RHS, sigma))
            assert (lhs, rhs) == (v.pump.lhs_value, v.pump.rhs_value) and lhs <= rhs
        for _ in range(10_000):
            spec = {
                "F": {"c": rng.randint(0, 100), "a": [rng.randint(1, 5) for _ in range(3)]},
                "G": {"c": rng.randint(0, 100), "a": [rng.randint(1, 5) for _ in range(2)]},
                "S": {"c": rng.randint(0, 100), "a": [rng.randint(1, 5)]},
                "Z": {"c": rng.randint(0, 100)},
            }
            v = refute_affine(MeasureSpec("affine", spec))
            assert v.outcome == "refuted"
            sigma = {x: oracle.parse(str(t)) for x, t in v.pump.substitution.items()}
            lhs = oracle.affine(spec, oracle.substitute(oracle.STEP_LHS, sigma))
            rhs = oracle.affine(spec, oracle.substitute(oracle.STEP_RHS, sigma))
            assert (lhs, rhs) == (v.pump.lhs_value, v.pump.rhs_value) and lhs <= rhs


def test_criterion_08_construction_escapes():
    with criterion(8, "poly witness and MPO F>G orient the recursor"):
        assert orient_poly(RECURSOR, DEFAULT_POLY).oriented
        assert orient_mpo(RECURSOR, PrecedenceSpec.parse("F>G")).oriented
        rng = random.Random(8)
        w = DEFAULT_POLY.weights
        for _ in range(10_000):
            sigma = {x: oracle.parse(str(_random_ground(rng, 12))) for x in "xyn"}
            for lhs, rhs in ((oracle.BASE_LHS, oracle.BASE_RHS), (oracle.STEP_LHS, oracle.STEP_RHS)):
                assert oracle.poly(w, oracle.substitute(lhs, sigma)) > oracle.poly(w, oracle.substitute(rhs, sigma))


def test_criterion_09_route_convergence():
    with criterion(9, "four confession ranks agree and count down"):
        rng = random.Random(9)
        for _ in range(10_000):
            i, m = rng.randint(0, 30), rng.randint(0, 30)
            a, b = _random_normal(rng, 6), _random_normal(rng, 6)
            t = Term(F, (a, b, numeral(m)))
            for _ in range(i):
                t = Term(G, (b, t))
            assert {rank_of(r, t) for r in ROUTES} == {m}
        for k in range(101):
            steps = canonical_trace(Z, numeral(1), k).steps
            for r in ROUTES:
                ranks = [rank_of(r, s.term) for s in steps]
                for j in range(1, len(steps)):
                    if steps[j].fired_rule == "step":
                        assert ranks[j] == ranks[j - 1] - 1


def test_criterion_10_dp_extraction():
    with criterion(10, "one dependency pair, base order at 3, certificate 17+K"):
        problem = extract_dependency_pairs(RECURSOR)
        assert len(problem.pairs) == 1 and problem.edges == ((0, 0),)
        verdict = check_base_order(problem)
        assert verdict.oriented and verdict.position == 3
        for K in (0, 5, 50, 500):
            acc = ag_account(RECURSOR, K, C=1)
            assert acc.bound == 17
            assert acc.certificate_length() == 17 + K


def test_criterion_11_necessity():
    with criterion(11, "necessity oracle, depths 1-6 exhaustive"):
        for d in range(1, 7):
            assert enumerate_and_verify(d).counterexamples == 0


def test_criterion_12_witness_order():
    with criterion(12, "kappa star on barrier-confined, full, non-duplicating"):
        r = compute_kappa(RECURSOR, load_catalog("barrier-confined"))
        assert (r.kappa_star, r.ob) == (2, True)
        r = compute_kappa(RECURSOR, load_catalog("full"))
        assert (r.kappa_star, r.ob) == (1, True)
        linear = parse_trs(RECURSOR_TEXT.replace("G(y,F(x,y,n))", "F(x,y,n)"))
        r = compute_kappa(linear, load_catalog("non-duplicating"))
        assert (r.kappa_star, r.ob) == (0, False)


def test_criterion_13_supervisor():
    with criterion(13, "supervisor budget, self-audit, deletion sweep, 11 vs 12"):
        rng = random.Random(13)
        for i in range(1000):
            cat = fuzz_catalog(rng, i)
            record = supervise(RECURSOR, cat)
            assert record.kind in ("T3", "T4")
            assert record.steps_consumed <= sum(b + 1 for b in cat.budgets.values())
            assert audit_record(record, cat, record.kappa_star).valid
        confined = load_catalog("confined-below-w2")
        minimal = parse_report(emit_report(supervise(RECURSOR, confined)))
        assert minimal["kind"] == "T4" and audit_record(minimal, confined, UNDEFINED).valid
        for j in range(len(minimal["certificates"])):
            mutated = json.loads(json.dumps(minimal))
            del mutated["certificates"][j]
            assert not audit_record(mutated, confined, UNDEFINED).valid
        eleven = json.loads(json.dumps(minimal))
        eleven["certificates"] = [c for c in eleven["certificates"] if c["level"] == 0][:11]
        verdict = audit_record(eleven, load_catalog("barrier-confined"), 1)
        hits = [(v.found, v.required) for v in verdict.violations if v.type == "insufficient-exhaustion"]
        assert hits == [(11, 12)]


def test_criterion_14_family():
    with criterion(14, "family classification and blocked iff duplicating"):
        table = classify_family()
        complete = {n: c.cls for n, c in table.items() if c.member.complete}
        assert complete == {
            "base-duplicating": "duplicating-complete-blocked",
            "base-linear": "linear-complete-direct",
        }
        assert sum(c.cls == "incomplete" for c in table.values()) == 4
        for c in table.values():
            if c.member.complete:
                assert (c.cls == "duplicating-complete-blocked") == (c.member.step_kind == "duplicating")


def _byte_round_trip(value, rebuild=None):
    text = emit_report(value)
    parsed = parse_report(text)
    assert emit_report(parsed) == text
    if rebuild is not None:
        assert emit_report(rebuild(parsed)) == text


def test_criterion_15_round_trips():
    with criterion(15, "TRS text and JSON records round-trip; CLI deterministic"):
        assert format_trs(parse_trs(RECURSOR_TEXT)) == RECURSOR_TEXT
        ext = "(NAME ext)\n(VAR x)\n(SIG h/2 f/1)\n(RULES\n  r1: f(x) -> x\n)"
        assert format_trs(parse_trs(ext)) == ext
        linear = parse_trs(RECURSOR_TEXT.replace("G(y,F(x,y,n))", "F(x,y,n)"))
        assert format_trs(parse_trs(format_trs(linear))) == format_trs(linear)

        barrier = load_catalog("barrier-confined")
        problem = extract_dependency_pairs(RECURSOR)
        _byte_round_trip(canonical_trace(Z, numeral(1), 7))
        _byte_round_trip(orient_poly(RECURSOR, DEFAULT_POLY))
        _byte_round_trip(refute_additive(MeasureSpec.uniform("additive")))
        _byte_round_trip(run_barrier(), lambda d: [FailureCertificate.from_report(c) for c in d])
        _byte_round_trip(problem)
        _byte_round_trip(check_base_order(problem))
        _byte_round_trip(ag_account(RECURSOR, 9))
        _byte_round_trip(compute_kappa(RECURSOR, barrier))
        _byte_round_trip(barrier, Catalog.from_data)
        for cat in (barrier, load_catalog("full"), load_catalog("confined-below-w2")):
            record = supervise(RECURSOR, cat, 4, b=numeral(1))
            _byte_round_trip(record, TypedOutputRecord.from_report)
            _byte_round_trip(audit_record(record, cat, record.kappa_star))
        _byte_round_trip(enumerate_and_verify(6))
        _byte_round_trip(classify_family())
        _byte_round_trip(diagnose(11, 3))

        for argv in (
            ["trace", "--k", "3", "--payload", "S(Z)"],
            ["supervise"],
            ["kappa", "--catalog", "full"],
            ["diagnose", "--k", "12"],
            ["sweep", "--k", "1:30:7"],
        ):
            outs = {
                subprocess.run(
                    [sys.executable, "-m", "recursorlab.cli", *argv],
                    capture_output=True, text=True, check=True,
                ).stdout
                for _ in range(2)
            }
            assert len(outs) == 1
