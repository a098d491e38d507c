import random
import sys

from hypothesis import settings, strategies as st

from lsublab.gen import random_term
from lsublab.syntax import Abs, App, Closure, Meta, Var

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")

NAMES = st.sampled_from(["x", "y", "z", "a"])

_leaf = NAMES.map(Var) | st.builds(
    Meta, st.sampled_from(["X", "Y"]), st.lists(NAMES, min_size=1, max_size=3))


def _node(children):
    return (st.builds(Abs, NAMES, children)
            | st.builds(App, children, children)
            | st.builds(Closure, children, NAMES, children))


# shrinkable terms with heavy shadowing; a small name pool on purpose
terms = st.recursive(_leaf, _node, max_leaves=7)
pure_terms = st.recursive(
    NAMES.map(Var),
    lambda c: st.builds(Abs, NAMES, c) | st.builds(App, c, c),
    max_leaves=6)
closure_terms = st.recursive(
    NAMES.map(Var),
    lambda c: (st.builds(Abs, NAMES, c) | st.builds(App, c, c)
               | st.builds(Closure, c, NAMES, c)),
    max_leaves=6)

# generator-driven terms, same distribution as the campaigns
seeded_terms = st.builds(lambda s, n: random_term(random.Random(s), n),
                         st.integers(0, 2**32 - 1), st.integers(1, 12))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
