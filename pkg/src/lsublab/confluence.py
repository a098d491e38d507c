"""Parallel reduction on substitution normal forms and confluence checks.

Parallel reduction contracts any set of B-redexes of a {R, Gc, RX} normal
form at once and re-normalizes; it enjoys the diamond property, and every
one-step reduction projects onto it. The checks here are executable
versions of those facts plus a replay of the critical overlaps.
"""

from __future__ import annotations

import enum
import random
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

from .gen import random_term
from .lsub import (
    LSUB_RULES, RuleId, Verdict, c_equal, es_canonical,
    explore_sn, is_snf_shape, normalize_sub, redexes, run, split_chain,
    step_modulo, sub_denotation,
)
from .syntax import Abs, App, Closure, Meta, Term, Var, freshen, parse


class Outcome(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"

    def __str__(self):
        return self.value


@dataclass
class Reducts:
    terms: list
    truncated: bool = False


class _Truncated(Exception):
    pass


def parallel_reducts(t: Term, fanout_bound: int = 10_000) -> Reducts:
    """All ``t'`` with ``t`` parallel-reducing to ``t'``, as canonical
    representatives. ``t`` must be a {R, Gc, RX} normal form."""
    t = freshen(t)
    if not is_snf_shape(t):
        raise ValueError(f"not a substitution normal form: {t}")
    try:
        raw = _par(t, fanout_bound)
    except _Truncated:
        return Reducts([], True)
    out = sorted({es_canonical(s) for s in raw}, key=str)
    return Reducts(out, False)


def _par(t, bound):
    if isinstance(t, (Var, Meta)):
        return [t]
    if isinstance(t, Abs):
        return [Abs(t.var, b) for b in _par(t.body, bound)]
    if isinstance(t, App):
        fs = _par(t.fun, bound)
        args = _par(t.arg, bound)
        n = len(fs) * len(args)
        if isinstance(t.fun, Abs):
            bodies = _par(t.fun.body, bound)
            n += len(bodies) * len(args)
        if n > bound:
            raise _Truncated
        out = [App(f, a) for f in fs for a in args]
        if isinstance(t.fun, Abs):
            x = t.fun.var
            out += [sub_denotation(Closure(b, x, a)) for b in bodies for a in args]
        return _dedupe(out)
    t0, letters = split_chain(t)
    options = [_par(u, bound) for _, u in letters]
    n = 1
    for o in options:
        n *= len(o)
    if n > bound:
        raise _Truncated
    out = []
    for combo in product(*options):
        acc = t0
        for (x, _), u in zip(letters, combo):
            acc = Closure(acc, x, u)
        out.append(acc)
    return out


def _dedupe(xs):
    seen, out = set(), []
    for x in xs:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


def parallel_step(s: Term, s2: Term, fanout_bound: int = 10_000) -> Outcome:
    """Does ``s`` parallel-reduce to ``s2`` (modulo commutation)?"""
    r = parallel_reducts(s, fanout_bound)
    if r.truncated:
        return Outcome.INCONCLUSIVE
    return Outcome.HOLDS if es_canonical(s2) in set(r.terms) else Outcome.FAILS


@dataclass
class DiamondResult:
    outcome: Outcome
    reducts: int = 0
    witness: Optional[tuple] = None  # a pair with no common reduct


def diamond_check(t: Term, fanout_bound: int = 10_000) -> DiamondResult:
    """Every two parallel reducts of ``t`` share a parallel reduct."""
    first = parallel_reducts(t, fanout_bound)
    if first.truncated:
        return DiamondResult(Outcome.INCONCLUSIVE)
    second = {}
    truncated = False
    for s in first.terms:
        r = parallel_reducts(s, fanout_bound)
        truncated |= r.truncated
        second[s] = set(r.terms)
    terms = first.terms
    for i, a in enumerate(terms):
        for b in terms[i:]:
            if second[a].isdisjoint(second[b]):
                if truncated:
                    return DiamondResult(Outcome.INCONCLUSIVE, len(terms))
                return DiamondResult(Outcome.FAILS, len(terms), (a, b))
    return DiamondResult(Outcome.HOLDS, len(terms))


def project_and_check(t: Term, t2: Term, fanout_bound: int = 10_000) -> Outcome:
    """For a one-step reduction ``t -> t2``: the substitution normal form
    of ``t`` parallel-reduces to that of ``t2``."""
    if es_canonical(t2) not in set(step_modulo(t, LSUB_RULES, exhaustive=False)):
        raise ValueError("second term is not a one-step reduct of the first")
    return parallel_step(normalize_sub(t), normalize_sub(t2), fanout_bound)


# ------------------------------------------------------------ fuzzing

@dataclass
class FuzzReport:
    checked: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


def confluence_fuzz(seed: int, count: int, size: int,
                    state_bound: int = 2000, meta_prob: float = 0.15) -> FuzzReport:
    """Random terms until ``count`` of them are found SN (at most
    ``4 * count`` tries); for each, two independent random maximal
    reductions must end in the same class."""
    rng = random.Random(seed)
    rep = FuzzReport()
    for _ in range(4 * count):
        if rep.checked >= count:
            break
        t = random_term(rng, rng.randint(1, size), meta_prob=meta_prob)
        sn = explore_sn(t, LSUB_RULES, state_bound=state_bound)
        if sn.verdict is not Verdict.SN:
            rep.skipped += 1
            continue
        r1 = random.Random(rng.random())
        r2 = random.Random(rng.random())
        tr1, n1, _ = run(t, LSUB_RULES, "random", r1, max_steps=10_000)
        tr2, n2, _ = run(t, LSUB_RULES, "random", r2, max_steps=10_000)
        rep.checked += 1
        if not c_equal(n1, n2):
            rep.failures.append((t, tr1, tr2))
    return rep


# ------------------------------------------------------ critical pairs

def joinable(a: Term, b: Term, rules, state_bound: int = 4000) -> Outcome:
    """``a`` and ``b`` reduce to a common class, rewriting modulo
    commutation."""
    seen_a = _reach(a, rules, state_bound)
    seen_b = _reach(b, rules, state_bound)
    if seen_a is None or seen_b is None:
        return Outcome.INCONCLUSIVE
    return Outcome.FAILS if seen_a.isdisjoint(seen_b) else Outcome.HOLDS


def _reach(t, rules, bound):
    start = es_canonical(t)
    seen = {start}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for nxt in step_modulo(s, rules):
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > bound:
                    return None
                queue.append(nxt)
    return seen


@dataclass
class PeakResult:
    family: str
    source: str
    calculus: str
    peaks: int
    outcome: Outcome
    unjoined: list = field(default_factory=list)


ALC = frozenset({RuleId.App1, RuleId.App2, RuleId.App3, RuleId.Lamb,
                 RuleId.Comp1, RuleId.Comp2})

# family name -> source term; every peak below the source is checked
LSUB_FAMILIES = {
    "Gc/R (substituted term)": "y[z/x][x/u]",
    "R/R": "(x x)[x/u]",
    "R/C": "(x y)[x/u][y/v]",
    "Gc/C": "a[x/u][y/v]",
    "RX/C": "(?X{x,y} a)[x/u][y/v]",
    "RX/R": "(?X{x} x)[x/u]",
    "RX/RX": "(?X{x} ?Y{x})[x/u]",
    "B/R": "((\\z. z) x)[x/u]",
    "B/Gc": "((\\z. z) a)[x/u]",
    "B/RX": "((\\z. ?X{x,z}) a)[x/u]",
    "R under substitution": "x[x/y][y/u]",
    "RX/Gc": "(\\z. ?X{x})[x/u][y/v]",
}

ALC_FAMILIES = {
    "Comp2/App1": "(x x)[x/y][y/w]",
    "Comp2/App2": "(a x)[x/y][y/w]",
    "Comp2/App3": "(x a)[x/y][y/w]",
    "Comp2/Lamb": "(\\z. x)[x/y][y/w]",
    "Comp1/App1 (y in both)": "(x y (x y))[x/y][y/w]",
    "Comp1/App1 (y left)": "(x y x)[x/y][y/w]",
    "Comp1/App1 (y right)": "(x (x y))[x/y][y/w]",
    "Comp1/App2 (y left)": "(y x)[x/y][y/w]",
    "Comp1/App2 (y right)": "(a (x y))[x/y][y/w]",
    "Comp1/App2 (y in both)": "(y (x y))[x/y][y/w]",
    "Comp1/App3 (y right)": "(x y)[x/y][y/w]",
    "Comp1/App3 (y left)": "(x y a)[x/y][y/w]",
    "Comp1/App3 (y in both)": "(x y y)[x/y][y/w]",
    "Comp1/Lamb": "(\\z. x y)[x/y][y/w]",
    "Comp2/Comp2": "x[x/y][y/z][z/w]",
    "Comp1/Comp2": "(x y)[x/y][y/z][z/w]",
    "Comp2/Comp1": "(x z)[x/y][y/z][z/w]",
    "Comp1/Comp1": "(x y z)[x/y][y/z][z/w]",
    "Comp1/Comp1 (shared)": "(x y z)[x/y z][y/z][z/w]",
    "App1/C": "(x y (x y))[x/a][y/b]",
    "App2/C": "(a x)[x/a][y/b]",
    "App3/C": "(x a)[x/a][y/b]",
    "Lamb/C": "(\\z. x)[x/a][y/b]",
    "Comp2/C": "x[x/y][y/a][z/b]",
    "Comp2/C (inner swap)": "x[z/b][x/y][y/a]",
    "Comp1/C": "(x y)[x/y][y/a][z/b]",
    "Comp1/C (inner swap)": "(x y z)[z/b][x/y][y/a]",
}


def _one_step_or_swap(t, rules):
    """Plain one-step reducts of ``t`` and of each commutation variant."""
    from .lsub import class_members

    t = freshen(t)
    out = []
    for m in class_members(t, limit=200):
        if m != t:
            out.append(m)
        out += [freshen(s.after) for s in redexes(m, rules, exhaustive=False)]
    return out


def critical_pairs_check(families=None) -> list:
    """Check every peak below each family's source term: for each pair of
    plain one-step reducts (or commutation variants) there is a common
    reduct modulo commutation."""
    if families is None:
        families = [("lsub", LSUB_RULES, LSUB_FAMILIES), ("alc", ALC, ALC_FAMILIES)]
    results = []
    for calc, rules, fams in families:
        for name, src in fams.items():
            t = parse(src)
            ends = _one_step_or_swap(t, rules)
            res = PeakResult(name, src, calc, 0, Outcome.HOLDS)
            for i, a in enumerate(ends):
                for b in ends[i + 1:]:
                    res.peaks += 1
                    o = joinable(a, b, rules)
                    if o is not Outcome.HOLDS:
                        res.unjoined.append((str(a), str(b), str(o)))
                        if res.outcome is Outcome.HOLDS or o is Outcome.FAILS:
                            res.outcome = o
            results.append(res)
    return results


def local_confluence_fuzz(seed: int, count: int, size: int, rules=LSUB_RULES,
                          meta_prob: float = 0.15) -> FuzzReport:
    """Every peak of plain one-step reducts of a random term joins."""
    rng = random.Random(seed)
    rep = FuzzReport()
    for _ in range(count):
        t = random_term(rng, rng.randint(1, size), meta_prob=meta_prob)
        ends = [freshen(s.after) for s in redexes(t, rules)]
        ok = True
        for i, a in enumerate(ends):
            for b in ends[i + 1:]:
                o = joinable(a, b, rules, state_bound=1500)
                if o is Outcome.INCONCLUSIVE:
                    rep.skipped += 1
                    ok = None
                    break
                if o is Outcome.FAILS:
                    rep.failures.append((t, a, b))
                    ok = False
                    break
            if ok is not True:
                break
        if ok is True:
            rep.checked += 1
    return rep
