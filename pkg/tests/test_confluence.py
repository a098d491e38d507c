from collections import deque

import pytest
from hypothesis import assume, given, settings

from lsublab.confluence import (
    ALC, LSUB_FAMILIES, ALC_FAMILIES, Outcome, confluence_fuzz,
    critical_pairs_check, diamond_check, joinable, parallel_reducts,
    parallel_step, project_and_check,
)
from lsublab.lsub import (
    LSUB_RULES, es_canonical, normalize_sub, redexes, step_modulo,
    sub_denotation,
)
from lsublab.syntax import Closure, parse

from conftest import terms


def snf(src):
    return sub_denotation(parse(src))


def test_parallel_reducts_of_identity_redex():
    r = parallel_reducts(parse("(\\x.x) y"))
    assert not r.truncated
    assert r.terms == [parse("(\\v0. v0) y"), parse("y")]


def test_parallel_reduction_inside_substituted_term():
    r = parallel_reducts(parse("?X{x}[x/(\\z.z) w]"))
    assert es_canonical(parse("?X{x}[x/w]")) in r.terms


def test_parallel_reducts_reject_non_normal_input():
    with pytest.raises(ValueError):
        parallel_reducts(parse("(x x)[x/y]"))


def test_fanout_bound_is_reported():
    t = snf("(\\a. a) ((\\b. b) ((\\c. c) ((\\d. d) e)))")
    assert parallel_reducts(t, fanout_bound=3).truncated
    assert diamond_check(t, fanout_bound=3).outcome is Outcome.INCONCLUSIVE


def test_diamond_on_duplicating_redex():
    assert diamond_check(parse("(\\x. x x) ((\\y.y) z)")).outcome is Outcome.HOLDS


@pytest.mark.parametrize("before,after", [
    ("((\\x. ?X{x,y}) z)[y/v]", "?X{x,y}[x/z][y/v]"),
    ("(\\x. x x) y", "(x x)[x/y]"),
    ("\\q. (\\x. x x) y", "\\q. (x x)[x/y]"),
    ("(x x)[x/(\\y. y) z]", "(x x)[x/y[y/z]]"),
])
def test_projection(before, after):
    assert project_and_check(parse(before), parse(after)) is Outcome.HOLDS


def test_projection_rejects_non_steps():
    with pytest.raises(ValueError):
        project_and_check(parse("x"), parse("y"))


def test_composition_peak_joins():
    # ((\x. x) y)[y/z] -B-> x[x/y][y/z]; the other side substitutes first
    src = parse("((\\x. x) y)[y/z]")
    a = parse("x[x/y][y/z]")
    b = parse("((\\x. x) z)[y/z]")
    assert es_canonical(a) in step_modulo(src, LSUB_RULES)
    assert joinable(a, b, LSUB_RULES) is Outcome.HOLDS


def test_gc_r_pair_joins_at_garbage():
    assert joinable(parse("y[x/u]"), parse("y[z/u][x/u]"), LSUB_RULES) is Outcome.HOLDS


@pytest.mark.parametrize("name", sorted(LSUB_FAMILIES))
def test_lsub_critical_pairs(name):
    (r,) = critical_pairs_check([("lsub", LSUB_RULES, {name: LSUB_FAMILIES[name]})])
    assert r.outcome is Outcome.HOLDS, r.unjoined


@pytest.mark.parametrize("name", sorted(ALC_FAMILIES))
def test_alc_critical_pairs(name):
    (r,) = critical_pairs_check([("alc", ALC, {name: ALC_FAMILIES[name]})])
    assert r.outcome is Outcome.HOLDS, r.unjoined
    assert r.peaks > 0


def test_seeded_confluence_run():
    rep = confluence_fuzz(seed=42, count=500, size=10)
    assert rep.ok
    assert rep.checked > 400


def _par_star(t, bound=200):
    start = es_canonical(t)
    seen, todo = {start}, deque([start])
    while todo:
        r = parallel_reducts(todo.popleft())
        if r.truncated:
            return None
        for n in r.terms:
            if n not in seen:
                seen.add(n)
                todo.append(n)
                if len(seen) > bound:
                    return None
    return seen


def _sub_star(t, bound=200):
    start = es_canonical(t)
    seen, todo = {start}, deque([start])
    while todo:
        for n in step_modulo(todo.popleft(), LSUB_RULES):
            if n not in seen:
                seen.add(n)
                todo.append(n)
                if len(seen) > bound:
                    return None
    return {normalize_sub(s) for s in seen}


@given(terms)
def test_parallel_reduction_is_reflexive_and_shrinks_fv(t):
    s = sub_denotation(t)
    r = parallel_reducts(s)
    assume(not r.truncated)
    assert es_canonical(s) in r.terms
    assert all(u.fv <= s.fv for u in r.terms)


@settings(max_examples=60)
@given(terms)
def test_reflexive_transitive_closures_agree(t):
    s = sub_denotation(t)
    a, b = _par_star(s), _sub_star(s)
    assume(a is not None and b is not None)
    assert a == b


@settings(max_examples=60)
@given(terms, terms)
def test_substitution_stability(t, u):
    t, u = sub_denotation(t), sub_denotation(u)
    rt, ru = parallel_reducts(t), parallel_reducts(u)
    assume(not rt.truncated and not ru.truncated)
    for t2 in rt.terms[:3]:
        for u2 in ru.terms[:3]:
            o = parallel_step(normalize_sub(Closure(t, "x", u)),
                              normalize_sub(Closure(t2, "x", u2)))
            assert o is not Outcome.FAILS


@given(terms)
def test_every_step_projects(t):
    for st in redexes(t, LSUB_RULES)[:4]:
        assert project_and_check(st.before, st.after) is not Outcome.FAILS
