from recursorlab.family import CLASSES, MEMBERS, classify_family, classify_member, member
from recursorlab.orientation import MeasureSpec, orient_linear
from recursorlab.report import emit_report, to_plain

from . import oracle


def test_six_members():
    assert [m.name for m in MEMBERS] == [
        "base-duplicating", "base-linear", "base-none",
        "nobase-duplicating", "nobase-linear", "nobase-none",
    ]
    assert sum(m.complete for m in MEMBERS) == 2


def test_classification():
    result = classify_family()
    assert {name: c.cls for name, c in result.items()} == {
        "base-duplicating": "duplicating-complete-blocked",
        "base-linear": "linear-complete-direct",
        "base-none": "incomplete",
        "nobase-duplicating": "incomplete",
        "nobase-linear": "incomplete",
        "nobase-none": "incomplete",
    }
    assert set(c.cls for c in result.values()) == set(CLASSES)


def test_blocked_iff_duplicating_on_complete_members():
    for m in MEMBERS:
        if m.complete:
            blocked = classify_member(m).cls == "duplicating-complete-blocked"
            assert blocked == (m.step_kind == "duplicating")


def test_blocked_member_refutes_every_sample():
    c = classify_member(member(True, "duplicating"), samples=200, seed=9)
    assert (c.refuted_samples, c.samples) == (200, 200)


def test_linear_member_differences():
    v = orient_linear(member(True, "linear").trs, MeasureSpec.uniform("additive"))
    assert v.oriented
    diffs = {e["rule"]: e["difference"] for e in to_plain(v)["evidence"]}
    assert diffs == {"base": "2 + 1*y", "step": "1"}
    w = {s: 1 for s in "FGSZ"}
    x, y, n = oracle.num(2), oracle.num(3), oracle.num(4)
    lhs = oracle.additive(w, oracle.F(x, y, oracle.S(n)))
    rhs = oracle.additive(w, oracle.F(x, y, n))
    assert lhs - rhs == 1


def test_incomplete_members_admit_weights_or_are_empty():
    uniform = MeasureSpec.uniform("additive")
    for m in MEMBERS:
        if m.complete:
            continue
        trs = m.trs
        if trs.rules and not orient_linear(trs, uniform).oriented:
            # only the wrapper-duplicating step without a base rule lands here
            assert (m.has_base, m.step_kind) == (False, "duplicating")
            assert orient_linear(trs, uniform).outcome == "refuted"
        elif trs.rules:
            assert orient_linear(trs, uniform).oriented


def test_report_deterministic():
    assert emit_report(classify_family()) == emit_report(classify_family())
