import random

import pytest
from hypothesis import given, strategies as st

from lsublab.gen import random_lambda_closure_term
from lsublab.syntax import Var, parse
from lsublab.typesys import (
    Arrow, Base, Derivation, Env, IncompatibleEnv, Inter, System,
    add_to_mul, all_types, check_derivation, env_strengthen, explain,
    from_sexp, generation_compose, generation_decompose, infer_simple,
    is_beta_normal, ll_check, ll_closure, mul_to_add, parse_type,
    sn_typability_campaign, to_sexp, type_normal_form, type_str, weaken,
)

from conftest import pure_terms

A, B = Base("A"), Base("B")
S = System

types = st.recursive(
    st.sampled_from([A, B, Base("C")]),
    lambda c: st.builds(Arrow, c, c) | st.builds(Inter, c, c),
    max_leaves=6)


def test_ll_axioms():
    assert ll_check(Inter(A, B), A)
    assert ll_check(Inter(A, B), B)
    assert ll_check(A, Inter(A, A))
    assert not ll_check(A, Inter(A, B))
    assert not ll_check(Arrow(A, B), A)


def test_type_syntax():
    t = parse_type("(A -> B) & A -> B")
    assert t == Arrow(Inter(Arrow(A, B), A), B)
    assert type_str(parse_type("A -> B -> C")) == "A -> B -> C"
    assert type_str(Arrow(Arrow(A, B), A)) == "(A -> B) -> A"
    with pytest.raises(ValueError):
        parse_type("A -> ")


@given(types)
def test_type_print_parse_roundtrip(t):
    assert parse_type(type_str(t)) == t


def test_type_universe():
    assert len(all_types(1)) == 2
    assert len(all_types(3)) == 202


def test_ll_matches_brute_force_on_small_universe():
    universe = all_types(2)
    closure = ll_closure(universe)
    for a in universe:
        for b in universe:
            assert ((a, b) in closure) == ll_check(a, b)


def test_env_union():
    e = Env({"x": A})
    assert e.union(Env({"y": B})) == Env({"x": A, "y": B})
    assert e.union(Env({"x": A})) == e
    with pytest.raises(IncompatibleEnv):
        e.union(Env({"x": B}))


def delta_derivation():
    # x:(A->B)&A |- x x : B, using both projections
    env = Env({"x": Inter(Arrow(A, B), A)})
    x = parse("x")
    ax = Derivation("ax+", env, x, Inter(Arrow(A, B), A))
    left = Derivation("capE", env, x, Arrow(A, B), (ax,))
    right = Derivation("capE", env, x, A, (ax,))
    return Derivation("app+", env, parse("x x"), B, (left, right))


def test_delta_derivation():
    d = delta_derivation()
    assert d.size() == 5
    assert check_derivation(d, S.ADDI_LAM)
    assert not check_derivation(d, S.ADD_LAM)  # no intersection rules
    assert d.judgement() == "x:(A -> B) & A ⊢ x x : B"


def test_delta_transfers_both_ways():
    d = delta_derivation()
    m = add_to_mul(d, inter=True)
    assert check_derivation(m, S.MULI_LAM)
    back = mul_to_add(m, d.env)
    assert check_derivation(back, S.ADDI_LAM)
    assert back.judgement() == d.judgement()


def test_abs2_side_condition():
    body = Derivation("ax*", Env({"x": A}), Var("x"), A)
    bad = Derivation("abs*2", Env({"x": A}), parse("\\x. x"), Arrow(B, A), (body,))
    assert not check_derivation(bad, S.MULI_LAM)
    assert "must not declare" in str(explain(bad, S.MULI_LAM))
    y = Derivation("ax*", Env({"y": A}), Var("y"), A)
    good = Derivation("abs*2", Env({"y": A}), parse("\\x. y"), Arrow(B, A), (y,))
    assert check_derivation(good, S.MULI_LAM)


def test_rule_outside_system_is_rejected():
    d = delta_derivation()
    err = explain(d, S.ADD_LAM)
    assert err.path == (0,)


def test_inference():
    d = infer_simple(parse("\\f.\\x. f (f x)"))
    assert d.judgement() == "⊢ \\f. \\x. f (f x) : (A -> A) -> A -> A"
    assert infer_simple(parse("x x")) is None
    assert infer_simple(parse("(\\x. x x) (\\x. x x)")) is None
    d = infer_simple(parse("x[y/\\z.z]"), S.ADD_ES)
    assert d.judgement() == "x:A ⊢ x[y/\\z. z] : A"
    assert check_derivation(d, S.ADD_ES)


def test_inference_needs_the_closure_rule():
    with pytest.raises(ValueError):
        infer_simple(parse("x[y/z]"), S.ADD_LAM)


def test_weakening_multiplicative_to_additive():
    m = add_to_mul(infer_simple(parse("\\x.x")))
    assert check_derivation(m, S.MUL_LAM)
    d = mul_to_add(m, Env({"q": A}))
    assert d.judgement() == "q:A ⊢ \\x. x : A -> A"
    assert check_derivation(d, S.ADD_LAM)
    assert check_derivation(weaken(infer_simple(parse("x")), Env({"w": B})), S.ADD_LAM)


@pytest.mark.parametrize("src,judgement", [
    ("\\x. x (\\y. y)", "⊢ \\x. x (\\y. y) : ((A -> A) -> B) -> B"),
    ("x y y", "x:A -> A -> B, y:A ⊢ x y y : B"),
    ("x x", "x:A & (A -> B) ⊢ x x : B"),
    ("\\x. x x", "⊢ \\x. x x : A & (A -> B) -> B"),
])
def test_normal_forms_are_typed(src, judgement):
    d = type_normal_form(parse(src))
    assert d.judgement() == judgement
    assert check_derivation(d, S.ADDI_LAM)


def test_normal_form_typing_needs_normal_form():
    assert not is_beta_normal(parse("(\\x. x) y"))
    with pytest.raises(ValueError):
        type_normal_form(parse("(\\x. x) y"))


def test_sexp_roundtrip():
    d = delta_derivation()
    text = to_sexp(d)
    assert text.splitlines()[0] == '(app+ ((x "(A -> B) & A")) "x x" "B"'
    assert from_sexp(text) == d


def test_sexp_errors():
    with pytest.raises(ValueError):
        from_sexp("(ax+ ((x \"A\")) \"x\"")
    with pytest.raises(ValueError):
        from_sexp("(ax+ () \"x\" \"A\") extra")


def test_generation_round_trip_and_strengthening():
    d = infer_simple(parse("\\f. f y"))
    g = generation_decompose(d)
    assert generation_compose(g) == d
    s = env_strengthen(d, "y", Inter(d.env["y"], B))
    assert check_derivation(s, S.ADDI_LAM)
    assert s.env["y"] == Inter(d.env["y"], B)


@given(pure_terms)
def test_typable_terms_round_trip_through_mul(t):
    d = infer_simple(t)
    if d is None:
        return
    m = add_to_mul(d)
    assert check_derivation(m, S.MUL_LAM)
    assert m.env.names() == set(t.fv)
    assert mul_to_add(m, d.env) == d


@given(pure_terms)
def test_normal_forms_are_always_typable(t):
    if is_beta_normal(t):
        assert check_derivation(type_normal_form(t), S.ADDI_LAM)


def test_campaign_small():
    rep = sn_typability_campaign(seed=3, count=60, size=8)
    assert rep.ok, rep.violations
    assert rep.typable == rep.typable_sn > 0
    assert rep.normal_forms_typed == rep.lsub_sn


def test_random_derivations_validate():
    rng = random.Random(4)
    made = 0
    while made < 30:
        t = random_lambda_closure_term(rng, rng.randint(1, 8))
        d = infer_simple(t, S.ADD_ES)
        if d is None:
            continue
        made += 1
        assert check_derivation(d, S.ADD_ES)
        assert check_derivation(add_to_mul(d, inter=True), S.MULI_ES)
