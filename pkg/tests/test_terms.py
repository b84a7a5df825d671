import pickle

import pytest
from hypothesis import given, settings

from recursorlab.terms import (
    F,
    G,
    S,
    Z,
    ArityError,
    Symbol,
    Term,
    apply_substitution,
    count_subterm,
    count_symbol,
    count_variable,
    numeral,
    positions,
    replace_at,
    subterm_at,
    successor_height,
    var,
    variables,
    wrap,
)
from recursorlab.trs import parse_term

from .strategies import ground_terms, open_terms, substitutions


def T(text):
    return parse_term(text, ("x", "y", "n"))


class TestConstruction:
    def test_schema_arities_fixed(self):
        assert (F.arity, G.arity, S.arity, Z.head.arity) == (3, 2, 1, 0)
        with pytest.raises(ArityError):
            Symbol("F", 2)

    def test_arity_checked(self):
        with pytest.raises(ArityError):
            Term(G, (Z,))
        with pytest.raises(ArityError):
            Term("x", (Z,))

    def test_extension_symbol(self):
        f = Symbol("f", 1)
        assert Term(f, (Z,)).size == 2

    def test_bad_names(self):
        with pytest.raises(ValueError):
            Symbol("1f", 0)
        with pytest.raises(ValueError):
            var("x y")

    def test_hash_consing(self):
        assert T("G(S(Z),F(Z,S(Z),Z))") is Term(G, (numeral(1), Term(F, (Z, numeral(1), Z))))

    def test_immutable(self):
        with pytest.raises(AttributeError):
            Z.size = 5

    def test_pickle_preserves_identity(self):
        t = T("F(x,S(Z),n)")
        assert pickle.loads(pickle.dumps(t)) is t

    def test_size_and_nodes(self):
        t = T("F(x,y,S(Z))")
        assert t.size == 3
        assert t.nodes == 5
        assert not t.ground
        assert numeral(4).ground

    def test_deep_numeral(self):
        t = numeral(50_000)
        assert t.size == 50_001
        assert successor_height(t) == 50_000
        assert str(numeral(2)) == "S(S(Z))"

    def test_wrap(self):
        assert str(wrap(G, Z, numeral(1), 2)) == "G(Z,G(Z,S(Z)))"


class TestCounting:
    def test_count_symbol(self):
        assert count_symbol(T("G(Z,G(Z,Z))"), G) == 2
        assert count_symbol(T("F(Z,Z,S(S(Z)))"), S) == 2
        assert count_symbol(Z, G) == 0

    def test_count_subterm(self):
        assert count_subterm(T("G(S(Z),F(Z,S(Z),Z))"), T("S(Z)")) == 2
        assert count_subterm(Z, T("S(Z)")) == 0
        assert count_subterm(T("G(S(Z),G(S(Z),F(Z,S(Z),Z)))"), T("S(Z)")) == 3

    def test_count_variable(self):
        assert count_variable(T("G(y,F(x,y,n))"), "y") == 2

    def test_variables_in_order(self):
        assert variables(T("G(y,F(x,y,n))")) == ("y", "x", "n")


class TestSubstitution:
    def test_examples(self):
        sigma = {"x": Z, "y": numeral(1), "n": Z}
        assert apply_substitution(T("F(x,y,n)"), sigma) is T("F(Z,S(Z),Z)")
        assert apply_substitution(var("x"), {}) is var("x")
        assert str(apply_substitution(T("G(y,F(x,y,n))"), {"y": numeral(1)})) == "G(S(Z),F(x,S(Z),n))"

    def test_simultaneous(self):
        swapped = apply_substitution(T("G(x,y)"), {"x": var("y"), "y": var("x")})
        assert swapped is T("G(y,x)")


class TestPositions:
    def test_positions_preorder(self):
        t = T("G(Z,S(Z))")
        assert [p for p, _ in positions(t)] == [(), (1,), (2,), (2, 1)]
        assert subterm_at(t, (2, 1)) is Z
        assert replace_at(t, (2,), Z) is T("G(Z,Z)")

    def test_bad_position(self):
        with pytest.raises((IndexError, ValueError)):
            subterm_at(Z, (1,))


@settings(max_examples=200, deadline=None)
@given(open_terms(), substitutions())
def test_size_under_substitution(t, sigma):
    image = apply_substitution(t, sigma)
    expected = t.size + sum(count_variable(t, v) * u.size for v, u in sigma.items())
    assert image.size == expected


@settings(max_examples=200, deadline=None)
@given(open_terms())
def test_empty_substitution_is_identity(t):
    assert apply_substitution(t, {}) is t


@settings(max_examples=200, deadline=None)
@given(ground_terms(), ground_terms(), ground_terms())
def test_structural_equality_is_equivalence(a, b, c):
    rebuilt = parse_term(str(a))
    assert rebuilt == a and a == rebuilt
    assert a == a
    if a == b and b == c:
        assert a == c
    assert (a == b) == (str(a) == str(b))


@settings(max_examples=200, deadline=None)
@given(ground_terms())
def test_count_symbol_matches_count_subterm_on_constants(t):
    assert count_symbol(t, Z.head) == count_subterm(t, Z)
