import random

import pytest
from hypothesis import given

from lsublab.gen import random_chain
from lsublab.lsub import SUB_RULES, LSUB_RULES, RuleId, class_members, redexes
from lsublab.measures import check_decrease, mul_map, mul_of, size_s
from lsublab.syntax import parse

from conftest import terms


@pytest.mark.parametrize("src,s", [
    ("x", 1),
    ("?X{x}[x/u v]", 2),     # a lone substitution over a metavariable costs s(u)
    ("?X{x}[x/u]", 1),
    ("(x x)[x/y]", 5),       # 2 + 1 + 2*1
    ("(?X{x,y} z)[x/u]", 5),
    ("\\x. x", 1),
])
def test_size(src, s):
    assert size_s(parse(src)) == s


@pytest.mark.parametrize("x,src,m", [
    ("x", "x", 1),
    ("x", "?X{x,y}", 1),
    ("x", "(x x)[y/x]", 3),
    ("x", "(x y)[y/x]", 3),
    ("x", "y", 0),
    ("x", "\\x. x", 0),
])
def test_multiplicity(x, src, m):
    assert mul_of(x, parse(src)) == m


def test_gc_step_decreases():
    (st,) = redexes(parse("y[x/u]"), SUB_RULES)
    r = check_decrease(st)
    assert r.ok and (r.size_before, r.size_after) == (2, 1)


def test_r_steps_decrease():
    steps = redexes(parse("(x x)[x/y]"), SUB_RULES)
    assert len(steps) == 2
    assert all(check_decrease(s).ok for s in steps)


def test_b_is_not_measured():
    (st,) = redexes(parse("(\\x. x) y"), LSUB_RULES)
    assert st.rule is RuleId.B
    with pytest.raises(ValueError):
        check_decrease(st)


def test_swaps_leave_measures_alone():
    rng = random.Random(5)
    for _ in range(100):
        t = random_chain(rng, 4)
        for m in class_members(t, limit=20):
            assert size_s(m) == size_s(t)
            assert mul_map(m) == mul_map(t)


@given(terms)
def test_every_substitution_step_decreases(t):
    for st in redexes(t, SUB_RULES):
        assert check_decrease(st).ok, st


@given(terms)
def test_measures_are_class_invariants(t):
    s, m = size_s(t), mul_map(t)
    for c in class_members(t, limit=30):
        assert size_s(c) == s
        assert mul_map(c) == m
