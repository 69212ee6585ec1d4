import pytest
from hypothesis import given, settings

from helpers import formulas, lassos
from opaque_plan.ltl import (
    FALSE,
    TRUE,
    Always,
    And,
    Atom,
    Eventually,
    Next,
    Not,
    Or,
    ParseError,
    Release,
    Until,
    eval_lasso,
    is_nnf,
    lasso,
    parse,
    props,
    to_nnf,
    to_string,
)

p, q, a, b, c = Atom("p"), Atom("q"), Atom("a"), Atom("b"), Atom("c")


# -- parsing -----------------------------------------------------------------


def test_parse_case_study_formula():
    assert parse("GF p1 && GF p2") == And(
        Always(Eventually(Atom("p1"))), Always(Eventually(Atom("p2")))
    )


def test_parse_literals():
    assert parse("true") == TRUE
    assert parse("false") == FALSE


def test_until_is_right_associative():
    assert parse("a U b U c") == Until(a, Until(b, c))
    assert parse("a U (b U c)") == Until(a, Until(b, c))
    assert parse("a R b R c") == Release(a, Release(b, c))


def test_precedence():
    assert parse("!a U b") == Until(Not(a), b)
    assert parse("X a U b && c") == And(Until(Next(a), b), c)
    assert parse("a && b || c") == Or(And(a, b), c)
    assert parse("a || b && c") == Or(a, And(b, c))


def test_implication_is_sugar_and_right_associative():
    assert parse("a -> b") == Or(Not(a), b)
    assert parse("a -> b -> c") == Or(Not(a), Or(Not(b), c))


def test_operator_letters_split_but_identifiers_stay_whole():
    assert parse("XFG a") == Next(Eventually(Always(a)))
    assert parse("Fx") == Atom("Fx")
    with pytest.raises(ParseError):
        parse("GF")


@pytest.mark.parametrize(
    "text, offset",
    [("", 0), ("p &&", 4), ("p q", 2), ("(p", 2), ("U p", 0), ("p @ q", 2), ("p )", 2)],
)
def test_parse_errors_carry_offset(text, offset):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.offset == offset
    assert f"byte {offset}" in str(info.value)


def test_parse_error_lists_expected_tokens():
    with pytest.raises(ParseError) as info:
        parse("p &&")
    assert {"(", "IDENT", "true"} <= set(info.value.expected)


@given(formulas())
def test_round_trip(f):
    assert parse(to_string(f)) == f


def test_props():
    assert props(parse("GF p && (q U !p)")) == {"p", "q"}
    assert props(TRUE) == frozenset()


# -- normal form -------------------------------------------------------------


def test_nnf_examples():
    assert to_nnf(Not(Until(a, b))) == Release(Not(a), Not(b))
    assert to_nnf(Not(Not(a))) == a
    assert to_nnf(Not(Always(a))) == Until(TRUE, Not(a))
    assert to_nnf(Eventually(a)) == Until(TRUE, a)
    assert to_nnf(Always(a)) == Release(FALSE, a)
    assert to_nnf(Not(Next(a))) == Next(Not(a))


@given(formulas())
def test_nnf_shape(f):
    g = to_nnf(f)
    assert is_nnf(g)
    assert to_nnf(g) == g


@settings(max_examples=300)
@given(formulas(), lassos)
def test_nnf_preserves_meaning(f, w):
    assert eval_lasso(f, w) == eval_lasso(to_nnf(f), w)


# -- semantics ---------------------------------------------------------------


def test_eval_case_study_trace():
    f = parse("GF P1 && GF P2")
    assert eval_lasso(f, lasso([set(), set()], [{"P1"}, {"P2"}]))
    assert not eval_lasso(parse("GF P1"), lasso([], [set()]))


def test_eval_until_by_hand():
    w = lasso([{"a"}, {"a"}, {"b"}], [set()])
    assert eval_lasso(parse("a U b"), w)
    assert not eval_lasso(parse("a U b"), lasso([{"a"}, set(), {"b"}], [set()]))
    assert not eval_lasso(parse("a U b"), lasso([], [{"a"}]))


def test_eval_release_and_next():
    assert eval_lasso(parse("false R a"), lasso([], [{"a"}]))
    assert eval_lasso(parse("b R a"), lasso([{"a"}, {"a", "b"}], [set()]))
    assert not eval_lasso(parse("b R a"), lasso([{"a"}, set()], [{"a", "b"}]))
    assert eval_lasso(parse("X X a"), lasso([set(), set()], [{"a"}]))
    assert eval_lasso(parse("X a"), lasso([], [set(), {"a"}]))


def test_lasso_needs_a_loop():
    with pytest.raises(ValueError):
        lasso([{"a"}], [])


@settings(max_examples=300)
@given(formulas(), lassos)
def test_rotation_invariance(f, w):
    assert eval_lasso(f, w) == eval_lasso(f, w.rotated())


@given(formulas(max_leaves=4), lassos)
def test_eventually_always_identities(f, w):
    assert eval_lasso(Eventually(f), w) == eval_lasso(Until(TRUE, f), w)
    assert eval_lasso(Always(f), w) == eval_lasso(Release(FALSE, f), w)
    assert eval_lasso(Always(f), w) == (not eval_lasso(Eventually(Not(f)), w))


@given(formulas(max_leaves=4), formulas(max_leaves=4), lassos)
def test_until_release_duality(f, g, w):
    assert eval_lasso(Until(f, g), w) == (not eval_lasso(Release(Not(f), Not(g)), w))
