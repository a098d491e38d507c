import random

import pytest
from hypothesis import assume, given

from lsublab import calculi
from lsublab.calculi import (
    CalculusId, SimKind, SimOutcome, alc_normalize, erase_marks,
    idle_substitutions_ok, lmpar, parlm, reduce, reaches_plus, simulate_check,
    step_rules, tra,
)
from lsublab.lsub import LSUB_RULES, RuleId, Verdict, explore_sn, format_trace, redexes
from lsublab.syntax import alpha_eq, parse, subst
from lsublab.typesys import System, infer_simple

from conftest import closure_terms, pure_terms


def test_partial_beta_trace():
    r = reduce("lpar", parse("(\\x. x y) z"))
    assert r.normal
    assert format_trace(r.trace).splitlines() == [
        "BetaP @ ε/0.0.0 : (\\x. x y) z ==> (\\x. z y) z",
        "BGc @ ε : (\\x. z y) z ==> z y",
    ]


def test_app3_moves_substitution_left():
    (s,) = redexes(parse("(x a)[x/b]"), calculi.RULES[CalculusId.ALC])
    assert s.rule is RuleId.App3
    assert s.after == parse("x[x/b] a")


@pytest.mark.parametrize("src,nf", [
    ("(x y)[z/w]", "(x y)[v0/w]"),          # garbage stays: ALC has no Gc
    ("(x z)[z/w]", "x v0[v0/w]"),           # and no Var rule
    ("(\\y. x)[x/v]", "\\v0. v1[v1/v]"),
])
def test_alc_normal_forms(src, nf):
    assert alc_normalize(parse(src)) == parse(nf)


def test_les_reduction():
    r = reduce("les", parse("(\\x. x x) y"))
    assert r.normal and r.final == parse("y y")
    assert [s.rule for s in r.trace] == [RuleId.B, RuleId.App1, RuleId.Var, RuleId.Var]


@pytest.mark.parametrize("src,image", [
    ("x", "x"),
    ("x y", "(x y)[#g0/y]"),
    ("a[y/b]", "a[v0/b]"),
    ("x y z", "((x y)[#g0/y] z)[#g1/z]"),
])
def test_tra(src, image):
    assert alpha_eq(tra(parse(src)), parse(image, marked=True))


def test_tra_closure_uses_alc_normal_form():
    t = tra(parse("x[x/y]"))
    assert t == parse("v0[#v1/y][v0/y]", marked=True)
    assert idle_substitutions_ok(t)


def test_erase_marks():
    t = erase_marks(parse("x[#g0/y]", marked=True))
    assert alpha_eq(t, parse("x[g/y]"))


@pytest.mark.parametrize("src,image", [
    ("(\\x.v) u", "v[x/u]"),
    ("\\x. (\\y.y) z", "\\x. y[y/z]"),
    ("x y", "x y"),
])
def test_parlm(src, image):
    assert parlm(parse(src)) == parse(image)


def test_lmpar():
    assert lmpar(parse("t[x/u]")) == parse("(\\x. t) u")


def test_inputs_are_checked():
    with pytest.raises(ValueError):
        reduce("lpar", parse("x[x/y]"))
    with pytest.raises(ValueError):
        reduce("ldef", parse("?X{x}"))
    with pytest.raises(ValueError):
        parlm(parse("x[x/y]"))


def test_b_step_maps_to_equal_beta_images():
    r = simulate_check(SimKind.LSUB_TO_LPAR, parse("(\\x. x x) y"), parse("(x x)[x/y]"))
    assert r.outcome is SimOutcome.HOLDS


@pytest.mark.parametrize("kind,a,b", [
    (SimKind.LSUB_TO_LES, "(\\x. x x) y", "(x x)[x/y]"),
    (SimKind.LSUB_TO_LES, "(x x)[x/y]", "(y x)[x/y]"),
    (SimKind.LDEF_TO_LSUB, "(\\x. x x) y", "y y"),
    (SimKind.LPAR_TO_LSUB, "(\\x. x x) y", "(\\x. y x) y"),
    (SimKind.LSUB_TO_LDEF, "(x x)[x/y]", "(y x)[x/y]"),
    (SimKind.LSUB_TO_LPAR, "(x x)[x/y]", "(y x)[x/y]"),
])
def test_simulations(kind, a, b):
    assert simulate_check(kind, parse(a), parse(b)).outcome is SimOutcome.HOLDS


def test_simulation_needs_a_real_step():
    with pytest.raises(ValueError):
        simulate_check(SimKind.LDEF_TO_LSUB, parse("x"), parse("y"))


def test_reaches_plus_is_three_valued():
    omega = parse("(\\x. x x) (\\x. x x)")
    assert reaches_plus(parse("x"), parse("x"), LSUB_RULES) is SimOutcome.FAILS
    assert reaches_plus(omega, parse("z"), LSUB_RULES, state_bound=50) \
        is SimOutcome.INCONCLUSIVE


@given(closure_terms)
def test_lsub_steps_are_ldef_steps(t):
    ldef = calculi.RULES[CalculusId.LDef]
    for s in redexes(t, LSUB_RULES):
        assert s.rule in step_rules(t, s.after, ldef | LSUB_RULES)
        assert s.rule in ldef


@given(closure_terms)
def test_translations_keep_free_variables(t):
    assert tra(t).fv == t.fv
    assert lmpar(t).fv == t.fv
    assert idle_substitutions_ok(tra(t))


@given(pure_terms)
def test_parlm_keeps_free_variables(t):
    assert parlm(t).fv == t.fv
    assert lmpar(parlm(t)) == t


@given(closure_terms, closure_terms)
def test_lmpar_commutes_with_substitution(t, u):
    assert alpha_eq(subst(lmpar(t), "x", lmpar(u)), lmpar(subst(t, "x", u)))


@given(pure_terms)
def test_simple_typability_survives_the_embeddings(t):
    typed = infer_simple(t) is not None
    assert (infer_simple(parlm(t), System.ADD_ES) is not None) == typed
    assert (infer_simple(lmpar(parlm(t))) is not None) == typed


@given(closure_terms)
def test_lsub_and_ldef_agree_on_sn(t):
    a = explore_sn(t, LSUB_RULES, state_bound=300).verdict
    b = explore_sn(t, calculi.RULES[CalculusId.LDef], state_bound=300).verdict
    assume(Verdict.BoundExceeded not in (a, b))
    assert a is b


@given(pure_terms)
def test_lsub_and_lpar_agree_on_sn(t):
    a = explore_sn(t, LSUB_RULES, state_bound=300).verdict
    b = explore_sn(t, calculi.RULES[CalculusId.LPar], state_bound=300).verdict
    assume(Verdict.BoundExceeded not in (a, b))
    assert a is b


@pytest.mark.parametrize("kind", list(SimKind))
def test_random_steps_simulate(kind):
    rng = random.Random(11)
    t = parse("(\\x. x (x y)) ((\\z. z) w)")
    if calculi.SOURCE[kind] is not CalculusId.LPar:
        t = parlm(t)
    for _ in range(4):
        st = calculi.random_step(rng, t, calculi.SOURCE[kind])
        assert simulate_check(kind, st.before, st.after).outcome is SimOutcome.HOLDS
