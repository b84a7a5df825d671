import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recursorlab.confession import (
    LICENSES,
    ROUTES,
    NoLicense,
    ag_account,
    build_forgetting_witness,
    check_base_order,
    extract_dependency_pairs,
    rank_of,
)
from recursorlab.report import to_plain
from recursorlab.rewrite import canonical_trace
from recursorlab.terms import F, G, S, Term, Z, numeral
from recursorlab.trs import RECURSOR, Trs, parse_term, parse_trs

from . import oracle
from .strategies import normal_ground_terms, primitive_fragment


class TestDependencyPairs:
    def test_recursor_single_pair(self):
        problem = extract_dependency_pairs(RECURSOR)
        assert [f"{p.lhs} -> {p.rhs}" for p in problem.pairs] == ["F#(x,y,S(n)) -> F#(x,y,n)"]
        assert problem.edges == ((0, 0),)
        assert problem.pairs[0].lhs.head.name == "F#"
        assert problem.pairs[0].lhs.head.arity == 3

    def test_projection_rule_has_no_pairs(self):
        assert extract_dependency_pairs(parse_trs("(VAR x) (RULES f(x) -> x)")).pairs == ()

    def test_two_occurrences(self):
        problem = extract_dependency_pairs(parse_trs("(VAR x) (RULES f(x) -> g(f(x),f(x)))"))
        assert len(problem.pairs) == 2
        assert len(problem.edges) == 4


class TestBaseOrder:
    def test_recursor(self):
        v = check_base_order(extract_dependency_pairs(RECURSOR))
        assert v.oriented and v.position == 3

    def test_empty(self):
        v = check_base_order(extract_dependency_pairs(Trs("empty", ())))
        assert v.oriented

    def test_reflexive_pair(self):
        v = check_base_order(extract_dependency_pairs(parse_trs("(VAR x) (RULES f(x) -> f(x))")))
        assert not v.oriented
        assert v.failing_pair == "r1_dp1"


class TestRanks:
    @pytest.mark.parametrize("route", ROUTES)
    def test_examples(self, route):
        assert rank_of(route, parse_term("F(Z,S(Z),S(S(S(Z))))")) == 3
        assert rank_of(route, parse_term("G(S(Z),G(S(Z),Z))")) == 0
        assert rank_of(route, parse_term("G(S(Z),F(Z,S(Z),S(Z)))")) == 1

    def test_unknown_route(self):
        with pytest.raises(ValueError):
            rank_of("lexicographic", Z)

    def test_ground_only(self):
        with pytest.raises(ValueError):
            rank_of("sct", parse_term("F(x,Z,Z)", ("x",)))

    @pytest.mark.parametrize("route", ROUTES)
    def test_strict_decrease_along_traces(self, route):
        for k in (0, 1, 2, 13, 50, 100):
            steps = canonical_trace(Z, numeral(1), k).steps
            ranks = [rank_of(route, s.term) for s in steps]
            assert ranks == [k - i for i in range(k + 1)] + [0]
            for before, after in zip(steps, steps[1:]):
                if after.fired_rule == "step":
                    assert rank_of(route, after.term) == rank_of(route, before.term) - 1


@settings(max_examples=1000, deadline=None)
@given(primitive_fragment())
def test_routes_agree_on_primitive_fragment(case):
    term, m = case
    assert {rank_of(r, term) for r in ROUTES} == {m}


@settings(max_examples=300, deadline=None)
@given(primitive_fragment(), normal_ground_terms(), normal_ground_terms())
def test_rank_depends_only_on_counter(case, a2, b2):
    term, m = case
    # relabel every payload slot: rebuild the wrapper stack with new a, b
    depth, t = 0, term
    while t.head is G:
        depth, t = depth + 1, t.args[1]
    relabeled = Term(F, (a2, b2, t.args[2]))
    for _ in range(depth):
        relabeled = Term(G, (b2, relabeled))
    for r in ROUTES:
        assert rank_of(r, relabeled) == rank_of(r, term) == m == oracle.active_rank(oracle.parse(str(term)))


@settings(max_examples=200, deadline=None)
@given(primitive_fragment())
def test_routes_agree_on_subterms(case):
    term, _ = case
    stack = [term]
    while stack:
        u = stack.pop()
        assert len({rank_of(r, u) for r in ROUTES}) == 1
        stack.extend(u.args)


class TestWitness:
    def test_licenses(self):
        assert build_forgetting_witness("dp-projection").license.name == "ArtsGiesl2000"
        assert build_forgetting_witness("counter-projection").license.name == "SubtermCriterion"
        assert build_forgetting_witness("sct").license.name == "LeeJonesBenAmram2001"
        assert build_forgetting_witness("argument-filtering").license.name == "ArgumentFilteringDP"

    def test_licenses_distinct_residuals_agree(self):
        witnesses = [build_forgetting_witness(r) for r in ROUTES]
        assert len({w.license.name for w in witnesses}) == 4
        assert {w.dimension for w in witnesses} == {"pi_y"}
        t = parse_term("G(S(Z),G(S(Z),F(Z,S(Z),S(S(Z)))))")
        assert {w.residual_rank(t) for w in witnesses} == {2}
        annotation = {to_plain(w)["license"]["register_annotation"] for w in witnesses}
        assert annotation == {"Pi02/ISigma1; RCA0 descriptor omega^3"}

    def test_unknown(self):
        with pytest.raises(ValueError):
            build_forgetting_witness("kbo")
        assert set(LICENSES) == set(ROUTES)


class TestAccount:
    def test_values(self):
        assert ag_account(RECURSOR, 5).certificate_length() == 22
        assert ag_account(RECURSOR, 0).certificate_length() == 17
        assert ag_account(RECURSOR, 5).bound == ag_account(RECURSOR, 500).bound == 17

    def test_construction_constant(self):
        acc = ag_account(RECURSOR, 3, C=2)
        assert (acc.construction_cost, acc.base_order_cost, acc.bound) == (32, 1, 33)

    def test_refused_without_base_order(self):
        with pytest.raises(NoLicense):
            ag_account(parse_trs("(VAR x) (RULES f(x) -> f(x))"), 1)

    @given(st.integers(0, 10**6))
    def test_overhead_constant_in_K(self, K):
        acc = ag_account(RECURSOR, K)
        assert acc.certificate_length() - acc.residual() == 17
        assert acc.certificate_length() == 17 + K


def test_oracle_active_rank_agrees():
    t = Term(G, (numeral(1), Term(F, (Z, numeral(1), Term(S, (numeral(4),))))))
    assert oracle.active_rank(oracle.parse(str(t))) == 5 == rank_of("sct", t)
