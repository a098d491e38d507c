"""Seeded random terms and exhaustive enumeration of small pure terms."""

from __future__ import annotations

import random
from functools import lru_cache

from .syntax import Abs, App, Closure, Meta, Term, Var, canonicalize_alpha

BINDERS = ("x", "y", "z", "w")
FREE = ("a", "b")
METAS = ("X", "Y")


def random_term(rng: random.Random, size: int, meta_prob: float = 0.15,
                closure_prob: float = 0.25, free=FREE) -> Term:
    """A term with exactly ``size`` nodes. Leaves are metavariables with
    probability ``meta_prob``; inner nodes are closures with probability
    ``closure_prob``; the rest split between abstraction and application.
    Variables prefer names in scope, so most terms are mostly closed."""

    def leaf(scope):
        names = list(scope) or list(free)
        if meta_prob and rng.random() < meta_prob:
            pool = sorted(set(scope) | set(free))
            k = rng.randint(1, min(3, len(pool)))
            return Meta(rng.choice(METAS), rng.sample(pool, k))
        if scope and rng.random() < 0.85:
            return Var(rng.choice(names))
        return Var(rng.choice(free))

    def go(n, scope):
        if n <= 1:
            return leaf(scope)
        if n == 2:
            x = rng.choice(BINDERS)
            return Abs(x, go(1, scope + (x,)))
        r = rng.random()
        if r < closure_prob:
            k = rng.randint(1, n - 2)
            x = rng.choice(BINDERS)
            return Closure(go(k, scope + (x,)), x, go(n - 1 - k, scope))
        if r < closure_prob + (1 - closure_prob) * 0.4:
            x = rng.choice(BINDERS)
            return Abs(x, go(n - 1, scope + (x,)))
        k = rng.randint(1, n - 2)
        return App(go(k, scope), go(n - 1 - k, scope))

    return go(size, ())


def random_pure(rng: random.Random, size: int, free=FREE) -> Term:
    return random_term(rng, size, meta_prob=0.0, closure_prob=0.0, free=free)


def random_lambda_closure_term(rng: random.Random, size: int, free=FREE):
    """Closures allowed, no metavariables."""
    return random_term(rng, size, meta_prob=0.0, free=free)


def sized(rng: random.Random, max_size: int, low: int = 1) -> int:
    return rng.randint(low, max_size)


@lru_cache(maxsize=None)
def _pure_db(size: int, depth: int, nfree: int) -> tuple:
    """Pure terms as de Bruijn-style tuples: ('v', i) bound index, ('f', j)
    free name, ('l', body), ('a', f, a)."""
    if size < 1:
        return ()
    out = []
    if size == 1:
        out += [("v", i) for i in range(depth)]
        out += [("f", j) for j in range(nfree)]
        return tuple(out)
    out += [("l", b) for b in _pure_db(size - 1, depth + 1, nfree)]
    for k in range(1, size - 1):
        for f in _pure_db(k, depth, nfree):
            for a in _pure_db(size - 1 - k, depth, nfree):
                out.append(("a", f, a))
    return tuple(out)


def _from_db(d, scope, free):
    tag = d[0]
    if tag == "v":
        return Var(scope[-1 - d[1]])
    if tag == "f":
        return Var(free[d[1]])
    if tag == "l":
        x = f"x{len(scope)}"
        return Abs(x, _from_db(d[1], scope + (x,), free))
    return App(_from_db(d[1], scope, free), _from_db(d[2], scope, free))


def enumerate_pure(max_size: int, free=("a",)):
    """Every pure term with at most ``max_size`` nodes and free names in
    ``free``, one per alpha class, smallest first."""
    for n in range(1, max_size + 1):
        for d in _pure_db(n, 0, len(free)):
            yield canonicalize_alpha(_from_db(d, (), tuple(free)))


def count_pure(max_size: int, nfree: int = 1) -> int:
    return sum(len(_pure_db(n, 0, nfree)) for n in range(1, max_size + 1))


def random_chain(rng: random.Random, length: int, leaf_size: int = 3,
                 dep_prob: float = 0.3, meta_prob: float = 0.2) -> Term:
    """A substitution chain ``t0[x1/u1]...[xn/un]`` whose substituted
    terms sometimes mention outer binders, so that only some of the
    letters commute. Useful for exercising the commutation class."""
    names = [f"c{i}" for i in range(length)]
    pool = FREE + tuple(names)
    if rng.random() < meta_prob:
        t0 = Meta("X", rng.sample(pool, rng.randint(1, 3)))
    else:
        t0 = _random_over(rng, rng.randint(1, leaf_size), pool)
    for i, x in enumerate(names):
        outer = tuple(n for n in names[i + 1:] if rng.random() < dep_prob)
        u = _random_over(rng, rng.randint(1, leaf_size), FREE + outer)
        t0 = Closure(t0, x, u)
    return t0


def _random_over(rng, size, names):
    if size <= 1:
        return Var(rng.choice(names))
    if size == 2 or rng.random() < 0.3:
        return Abs("y", _random_over(rng, size - 1, names + ("y",)))
    k = rng.randint(1, size - 2) if size > 2 else 1
    return App(_random_over(rng, k, names), _random_over(rng, size - 1 - k, names))
