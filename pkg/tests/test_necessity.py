import pytest
from hypothesis import given
from hypothesis import strategies as st

from recursorlab.necessity import (
    ACTIVE,
    CARRIER,
    MAX_DEPTH,
    DepthCapExceeded,
    Frame,
    NotPositional,
    analyze_rhs,
    depth,
    enumerate_and_verify,
    enumerate_rhs,
    rhs_from_term,
)
from recursorlab.trs import RECURSOR, parse_term

from . import oracle


def frames(n, leaf):
    r = leaf
    for _ in range(n):
        r = Frame(r)
    return r


def summary(r):
    a = analyze_rhs(r)
    return (a.has_frame, a.has_active, a.y_count)


def test_examples():
    assert summary(ACTIVE) == (False, True, 1)
    assert summary(Frame(ACTIVE)) == (True, True, 2)
    assert summary(CARRIER) == (False, False, 0)
    assert str(Frame(ACTIVE)) == "frame(y,active(x,y,n))"


def test_depth_one():
    s = enumerate_and_verify(1)
    assert (s.enumerated, s.counterexamples) == (2, 0)
    assert list(enumerate_rhs(1)) == [CARRIER, ACTIVE]


@pytest.mark.parametrize("d", range(0, MAX_DEPTH + 1))
def test_exhaustive(d):
    s = enumerate_and_verify(d)
    assert s.counterexamples == 0
    assert s.count_identity_failures == 0
    assert s.enumerated == len(oracle.necessity_terms(d)) == 2 * d
    assert s.first_counterexample is None


def test_enumeration_matches_oracle():
    ours = sorted((depth(r) - 1, "active" if analyze_rhs(r).has_active else "x") for r in enumerate_rhs(7))
    assert ours == sorted(oracle.necessity_terms(7))


def test_depth_cap():
    with pytest.raises(DepthCapExceeded):
        enumerate_and_verify(MAX_DEPTH + 1)
    with pytest.raises(ValueError):
        enumerate_and_verify(-1)


def test_reads_duplicator_step():
    r = rhs_from_term(RECURSOR.rule("step").rhs)
    assert r == Frame(ACTIVE)
    assert analyze_rhs(r).implication_holds


def test_reads_other_shapes():
    v = ("x", "y", "n")
    assert rhs_from_term(parse_term("G(y,G(y,x))", v)) == frames(2, CARRIER)
    assert rhs_from_term(parse_term("F(x,y,n)", v)) == ACTIVE
    with pytest.raises(NotPositional):
        rhs_from_term(parse_term("G(Z,F(x,y,n))", v))
    with pytest.raises(NotPositional):
        rhs_from_term(parse_term("F(y,x,n)", v))


@given(st.integers(0, 30), st.sampled_from([CARRIER, ACTIVE]))
def test_y_count_is_node_count(n, leaf):
    a = analyze_rhs(frames(n, leaf))
    assert a.y_count == a.frames + a.actives == n + (leaf is ACTIVE)
    assert a.implication_holds
