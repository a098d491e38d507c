"""Rewriting with explicit substitutions modulo the commutation equation.

Terms are compared modulo alpha and the swap of independent adjacent
substitutions ``t[x/u][y/v] = t[y/v][x/u]`` (``y`` not free in ``u``,
``x`` not free in ``v``). :func:`es_canonical` picks one representative per
class; every reduction function here returns representatives or works on
them.

The rule set is shared with the sister calculi in :mod:`lsublab.calculi`.
"""

from __future__ import annotations

import enum
import itertools
import json
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .syntax import (
    Abs, App, CanonicalNamer, Closure, Meta, Term, Var, children, freshen,
    is_marked, replace_at, subst, subterm_at,
)


class RuleId(str, enum.Enum):
    B = "B"
    R = "R"
    Gc = "Gc"
    RX = "RX"
    Beta = "Beta"
    BetaP = "BetaP"
    BGc = "BGc"
    Var = "Var"
    App1 = "App1"
    App2 = "App2"
    App3 = "App3"
    Lamb = "Lamb"
    Comp1 = "Comp1"
    Comp2 = "Comp2"

    def __str__(self):
        return self.value


# leftmost-outermost ties are broken by this order
RULE_PRIORITY = {r: i for i, r in enumerate([
    RuleId.Gc, RuleId.R, RuleId.RX, RuleId.B, RuleId.Beta, RuleId.BetaP,
    RuleId.BGc, RuleId.Var, RuleId.App1, RuleId.App2, RuleId.App3,
    RuleId.Lamb, RuleId.Comp1, RuleId.Comp2])}

SUB_RULES = frozenset({RuleId.R, RuleId.Gc, RuleId.RX})
LSUB_RULES = SUB_RULES | {RuleId.B}

# Rules whose applicability at a closure depends on which substitution of
# a chain is innermost or adjacent; only these need the whole class.
ORDER_SENSITIVE = frozenset({RuleId.Var, RuleId.App1, RuleId.App2,
                             RuleId.App3, RuleId.Lamb, RuleId.Comp1,
                             RuleId.Comp2})


@dataclass(frozen=True)
class Step:
    """One rewrite. ``position`` is the path to the redex root inside
    ``before``; ``occurrence`` (for rules that act on one occurrence) is
    the path from the redex root to that occurrence."""

    rule: RuleId
    position: tuple
    before: Term
    after: Term
    occurrence: Optional[tuple] = None

    def sort_key(self):
        return (self.position, RULE_PRIORITY[self.rule], self.occurrence or ())


def replay(step: Step) -> Term:
    """Re-apply ``step.rule`` at ``step.position`` in ``step.before``."""
    node = subterm_at(step.before, step.position)
    for rule, occ, result in _local(node, frozenset({step.rule})):
        if occ == step.occurrence:
            return replace_at(step.before, step.position, result)
    raise ValueError(f"no {step.rule} redex at {step.position}")


# ------------------------------------------------------- local matchers

def _free_occurrences(t: Term, x: str, path=()):
    """Paths of free occurrences of variable ``x`` in ``t``."""
    if x not in t.fv:
        return
    if isinstance(t, Var):
        yield path
    elif isinstance(t, Abs):
        yield from _free_occurrences(t.body, x, path + (0,))
    elif isinstance(t, App):
        yield from _free_occurrences(t.fun, x, path + (0,))
        yield from _free_occurrences(t.arg, x, path + (1,))
    elif isinstance(t, Closure):
        if t.var != x:
            yield from _free_occurrences(t.body, x, path + (0,))
        yield from _free_occurrences(t.arg, x, path + (1,))


def _meta_occurrences(t: Term, x: str, path=(), chain=True):
    """(path, under_chain_only) for metavariables with ``x`` free in
    their support. ``under_chain_only`` is True when every step from the
    start is into the body of a closure."""
    if x not in t.fv:
        return
    if isinstance(t, Meta):
        yield path, chain
    elif isinstance(t, Abs):
        yield from _meta_occurrences(t.body, x, path + (0,), False)
    elif isinstance(t, App):
        yield from _meta_occurrences(t.fun, x, path + (0,), False)
        yield from _meta_occurrences(t.arg, x, path + (1,), False)
    elif isinstance(t, Closure):
        if t.var != x:
            yield from _meta_occurrences(t.body, x, path + (0,), chain)
        yield from _meta_occurrences(t.arg, x, path + (1,), False)


def _local(node: Term, rules) -> Iterable:
    """Redexes rooted at ``node``: (rule, occurrence, contractum)."""
    if isinstance(node, App) and isinstance(node.fun, Abs):
        lam, u = node.fun, node.arg
        x, b = lam.var, lam.body
        if RuleId.B in rules:
            yield RuleId.B, None, Closure(b, x, u)
        if RuleId.Beta in rules:
            yield RuleId.Beta, None, subst(b, x, u)
        if RuleId.BetaP in rules:
            for q in _free_occurrences(b, x):
                yield (RuleId.BetaP, (0, 0) + q,
                       App(Abs(x, replace_at(b, q, u)), u))
        if RuleId.BGc in rules and x not in b.fv:
            yield RuleId.BGc, None, b
        return
    if not isinstance(node, Closure):
        return
    b, x, u = node.body, node.var, node.arg
    used = x in b.fv
    if RuleId.Gc in rules and not used:
        yield RuleId.Gc, None, b
    if RuleId.R in rules and used:
        for q in _free_occurrences(b, x):
            yield RuleId.R, (0,) + q, Closure(replace_at(b, q, u), x, u)
    if RuleId.RX in rules and used:
        for q, chain_only in _meta_occurrences(b, x):
            if not chain_only:
                m = subterm_at(b, q)
                yield (RuleId.RX, (0,) + q,
                       Closure(replace_at(b, q, Closure(m, x, u)), x, u))
    if RuleId.Var in rules and isinstance(b, Var) and b.name == x:
        yield RuleId.Var, None, u
    if isinstance(b, App):
        inf, ina = x in b.fun.fv, x in b.arg.fv
        if RuleId.App1 in rules and inf and ina:
            yield RuleId.App1, None, App(Closure(b.fun, x, u),
                                         Closure(b.arg, x, u))
        if RuleId.App2 in rules and not inf and ina:
            yield RuleId.App2, None, App(b.fun, Closure(b.arg, x, u))
        if RuleId.App3 in rules and inf and not ina:
            yield RuleId.App3, None, App(Closure(b.fun, x, u), b.arg)
    if RuleId.Lamb in rules and isinstance(b, Abs):
        yield RuleId.Lamb, None, Abs(b.var, Closure(b.body, x, u))
    if isinstance(b, Closure) and x in b.arg.fv:
        s, y, w = b.body, b.var, b.arg
        if RuleId.Comp1 in rules and x in s.fv:
            yield RuleId.Comp1, None, Closure(Closure(s, x, u), y,
                                              Closure(w, x, u))
        if RuleId.Comp2 in rules and x not in s.fv:
            yield RuleId.Comp2, None, Closure(s, y, Closure(w, x, u))


# -------------------------------------------------------------- chains

def split_chain(t: Term):
    """``t0[x1/u1]...[xn/un]`` -> (t0, [(x1, u1), ..., (xn, un)]), with
    the innermost substitution first."""
    letters = []
    while isinstance(t, Closure):
        letters.append((t.var, t.arg))
        t = t.body
    letters.reverse()
    return t, letters


def build_chain(t0: Term, letters) -> Term:
    for x, u in letters:
        t0 = Closure(t0, x, u)
    return t0


def _must_be_inside(letters):
    """inside[i] = letters that must stay inside letter i (their
    substituted term mentions the binder of i). Assumes unique names."""
    n = len(letters)
    return [{k for k in range(n) if k != i and letters[i][0] in letters[k][1].fv}
            for i in range(n)]


def chain_orders(letters):
    """All innermost-first orders reachable by swapping independent
    neighbours (linear extensions of the dependency order)."""
    n = len(letters)
    inside = _must_be_inside(letters)

    def go(placed, remaining):
        if not remaining:
            yield list(placed)
            return
        for i in sorted(remaining):
            if not (inside[i] & remaining):
                placed.append(i)
                remaining.discard(i)
                yield from go(placed, remaining)
                remaining.add(i)
                placed.pop()

    yield from go([], set(range(n)))


def class_members(t: Term, limit: int = 10_000):
    """Enumerate the commutation class of ``t`` (up to renaming), by
    reordering every chain independently. Mainly for tests."""
    t = freshen(t)
    seen = 0
    for m in _members(t):
        yield m
        seen += 1
        if seen >= limit:
            return


def _members(t):
    if isinstance(t, (Var, Meta)):
        yield t
    elif isinstance(t, Abs):
        for b in _members(t.body):
            yield Abs(t.var, b)
    elif isinstance(t, App):
        for f in _members(t.fun):
            for a in _members(t.arg):
                yield App(f, a)
    else:
        t0, letters = split_chain(t)
        inner = [list(_members(t0))] + [list(_members(u)) for _, u in letters]
        for order in chain_orders(letters):
            for combo in itertools.product(*inner):
                yield build_chain(combo[0], [(letters[i][0], combo[1 + i])
                                             for i in order])


# ------------------------------------------------- canonical representative

def es_canonical(t: Term) -> Term:
    """Canonical representative of the class of ``t`` modulo alpha and
    commutation: chains are linearized to the least order under a
    name-independent key, then binders are named ``v0, v1, ...`` in
    preorder."""
    t = freshen(t)
    namer = CanonicalNamer(t.fv)
    return _canon(t, {}, namer)


def c_equal(a: Term, b: Term) -> bool:
    if a.fv != b.fv or a.size != b.size:
        return False
    return es_canonical(a) == es_canonical(b)


def _canon(t, env, namer):
    if isinstance(t, Var):
        n = env.get(t.name)
        return t if n is None or n == t.name else Var(n)
    if isinstance(t, Meta):
        sup = tuple(env.get(x, x) for x in t.support)
        return t if sup == t.support else Meta(t.ident, sup)
    if isinstance(t, App):
        return App(_canon(t.fun, env, namer), _canon(t.arg, env, namer))
    if isinstance(t, Abs):
        nx = namer.fresh(t.var)
        env2 = dict(env)
        env2[t.var] = nx
        return Abs(nx, _canon(t.body, env2, namer))
    t0, letters = split_chain(t)
    if len(letters) == 1:
        x, u = letters[0]
        nx = namer.fresh(x)
        env2 = dict(env)
        env2[x] = nx
        body = _canon(t0, env2, namer)
        return Closure(body, nx, _canon(u, env, namer))
    return _canon_chain(t0, letters, env, namer)


def _key(u, env):
    # Name-independent description of ``u`` given the names in scope.
    local = CanonicalNamer((), prefix="%")
    return str(_canon(u, env, local))


def _canon_chain(t0, letters, env, namer):
    n = len(letters)
    inside = _must_be_inside(letters)
    idx = namer.peek(n)
    occurring = set(t0.fv)
    for _, u in letters:
        occurring |= u.fv

    def outer_first_orders(placed, env2):
        # placed: letters chosen so far, outermost first
        if len(placed) == n:
            yield list(placed), env2
            return
        remaining = set(range(n)) - set(placed)
        # letter i may go next (outermost among the rest) iff no remaining
        # letter must contain it
        avail = [i for i in sorted(remaining)
                 if not any(i in inside[j] for j in remaining if j != i)]
        keys = {i: (is_marked(letters[i][0]), _key(letters[i][1], env2))
                for i in avail}
        best = min(keys.values())
        cands = [i for i in avail if keys[i] == best]
        # unused binders with equal keys are interchangeable
        unused = [i for i in cands if letters[i][0] not in occurring]
        cands = [i for i in cands if letters[i][0] in occurring] + unused[:1]
        pos = len(placed)
        for i in cands:
            env3 = dict(env2)
            env3[letters[i][0]] = namer.name(idx[pos], is_marked(letters[i][0]))
            placed.append(i)
            yield from outer_first_orders(placed, env3)
            placed.pop()

    start = namer.k
    best_term, best_str, end = None, None, None
    for order, env2 in outer_first_orders([], dict(env)):
        namer.k = start
        for _ in range(n):
            namer.next_index()
        body = _canon(t0, env2, namer)
        acc = body
        for pos in range(n - 1, -1, -1):
            i = order[pos]
            x, u = letters[i]
            acc = Closure(acc, env2[x], _canon(u, env2, namer))
        if best_term is None:
            best_term, end = acc, namer.k
        else:
            s = str(acc)
            if best_str is None:
                best_str = str(best_term)
            if s < best_str:
                best_term, best_str = acc, s
    namer.k = end
    return best_term


# ------------------------------------------------------ step enumeration

def redexes(t: Term, rules=LSUB_RULES, exhaustive: bool = False):
    """All one-step rewrites of ``t``. Binders are first renamed apart
    where needed. With ``exhaustive`` every chain is additionally tried in
    each of its commutation orders (needed for rules that look at the
    innermost or adjacent substitutions)."""
    rules = frozenset(rules)
    t = freshen(t)
    steps = []
    _collect(t, t, (), rules, exhaustive, steps, False)
    return steps


def _collect(root, node, path, rules, exhaustive, out, in_chain):
    if isinstance(node, Closure) and not in_chain:
        t0, letters = split_chain(node)
        n = len(letters)
        orders = chain_orders(letters) if exhaustive and n > 1 else [list(range(n))]
        for order in orders:
            if order == list(range(n)):
                member, r = node, root
            else:
                member = build_chain(t0, [letters[i] for i in order])
                r = replace_at(root, path, member)
            p, s = path, member
            for _ in range(n):
                for rule, occ, res in _local(s, rules):
                    out.append(Step(rule, p, r, replace_at(r, p, res), occ))
                p, s = p + (0,), s.body
        # below the spine: the innermost body and every substituted term
        p, s = path, node
        for _ in range(n):
            _collect(root, s.arg, p + (1,), rules, exhaustive, out, False)
            p, s = p + (0,), s.body
        _collect(root, s, p, rules, exhaustive, out, False)
        return
    for rule, occ, res in _local(node, rules):
        out.append(Step(rule, path, root, replace_at(root, path, res), occ))
    for i, c in enumerate(children(node)):
        _collect(root, c, path + (i,), rules, exhaustive, out, False)


def step_modulo(t: Term, rules=LSUB_RULES, exhaustive: bool = True) -> list:
    """One-step reducts of the class of ``t``, as sorted distinct
    canonical representatives."""
    seen = {es_canonical(s.after) for s in redexes(t, rules, exhaustive)}
    return sorted(seen, key=str)


# ---------------------------------------------------------- strategies

def choose_step(steps, strategy="leftmost", rng=None):
    if not steps:
        return None
    if strategy == "leftmost":
        return min(steps, key=Step.sort_key)
    if strategy == "random":
        steps = sorted(steps, key=Step.sort_key)
        return (rng or random).choice(steps)
    raise ValueError(f"unknown strategy {strategy!r}")


def run(t: Term, rules, strategy="leftmost", rng=None, max_steps=10_000,
        exhaustive=None):
    """Rewrite until no rule applies or ``max_steps`` is hit.
    Returns (trace, final_term, finished)."""
    rules = frozenset(rules)
    if exhaustive is None:
        exhaustive = bool(rules & ORDER_SENSITIVE)
    trace = []
    cur = freshen(t)
    for _ in range(max_steps):
        step = choose_step(redexes(cur, rules, exhaustive), strategy, rng)
        if step is None:
            return trace, cur, True
        trace.append(step)
        cur = freshen(step.after)
    return trace, cur, not redexes(cur, rules, exhaustive)


class NotNormalizing(RuntimeError):
    pass


def normalize(t: Term, rules, strategy="leftmost", rng=None,
              max_steps=100_000) -> Term:
    _, final, done = run(t, rules, strategy, rng, max_steps)
    if not done:
        raise NotNormalizing(f"no normal form within {max_steps} steps")
    return es_canonical(final)


def normalize_sub(t: Term, strategy="leftmost", rng=None,
                  max_steps=100_000) -> Term:
    """Normal form for {R, Gc, RX}, as a canonical representative."""
    return normalize(t, SUB_RULES, strategy, rng, max_steps)


def sub_denotation(t: Term) -> Term:
    """Compositional computation of the {R, Gc, RX} normal form:
    closures are turned into implicit substitutions bottom-up.
    Independent of the rewriting engine; used as an oracle."""
    if isinstance(t, (Var, Meta)):
        return t
    if isinstance(t, Abs):
        return Abs(t.var, sub_denotation(t.body))
    if isinstance(t, App):
        return App(sub_denotation(t.fun), sub_denotation(t.arg))
    return subst(sub_denotation(t.body), t.var, sub_denotation(t.arg))


def full_composition_check(t: Term, x: str, u: Term) -> bool:
    """``t[x/u]`` and ``t{x/u}`` have the same {R, Gc, RX} normal form."""
    return normalize_sub(Closure(t, x, u)) == normalize_sub(subst(t, x, u))


def is_sub_normal(t: Term) -> bool:
    return not redexes(t, SUB_RULES)


def is_snf_shape(t: Term) -> bool:
    """Structural description of {R, Gc, RX} normal forms: no closures
    except on metavariables, where each substitution binds a name of the
    support and no substituted term mentions another binder of the
    chain."""
    if isinstance(t, (Var, Meta)):
        return True
    if isinstance(t, Abs):
        return is_snf_shape(t.body)
    if isinstance(t, App):
        return is_snf_shape(t.fun) and is_snf_shape(t.arg)
    t0, letters = split_chain(t)
    if not isinstance(t0, Meta):
        return False
    names = [x for x, _ in letters]
    if len(set(names)) != len(names):
        return False
    for x, u in letters:
        if x not in t0.support or not is_snf_shape(u):
            return False
        if any(y in u.fv for y in names):
            return False
    return True


# --------------------------------------------------------- SN exploration

class Verdict(str, enum.Enum):
    SN = "SN"
    NotSN = "NotSN"
    BoundExceeded = "BoundExceeded"

    def __str__(self):
        return self.value


@dataclass
class SnReport:
    verdict: Verdict
    max_length: Optional[int]
    distinct_states: int
    witness: Optional[Term] = None


def explore_sn(t: Term, rules=LSUB_RULES, state_bound: int = 5000,
               depth_bound: Optional[int] = None, exhaustive=None,
               size_bound: Optional[int] = 1000) -> SnReport:
    """Explore the reduction graph of ``t`` modulo commutation.

    SN: graph fully explored and acyclic; ``max_length`` is the longest
    reduction. NotSN: a cycle was found (the witness lies on it); this is
    conclusive even if exploration stopped early. BoundExceeded: the
    explored part is acyclic but not complete. States with more than
    ``size_bound`` nodes are not expanded."""
    rules = frozenset(rules)
    if exhaustive is None:
        exhaustive = bool(rules & ORDER_SENSITIVE)
    start = es_canonical(t)
    index = {start: 0}
    states = [start]
    depth = [0]
    succ = {}
    queue = deque([0])
    frontier = None
    # infinite graphs often have short cycles near the root: look for one
    # whenever the explored part doubles instead of only at the end
    next_check = 64
    while queue:
        if len(succ) >= next_check:
            next_check *= 2
            cyc = _find_cycle(succ)
            if cyc is not None:
                return SnReport(Verdict.NotSN, None, len(states), states[cyc])
        i = queue.popleft()
        if size_bound is not None and states[i].size > size_bound:
            frontier = frontier if frontier is not None else i
            continue
        if depth_bound is not None and depth[i] >= depth_bound:
            if step_modulo(states[i], rules, exhaustive):
                frontier = frontier if frontier is not None else i
            continue
        nxt = []
        over = False
        for s in step_modulo(states[i], rules, exhaustive):
            j = index.get(s)
            if j is None:
                if len(states) >= state_bound:
                    over = True
                    break
                j = len(states)
                index[s] = j
                states.append(s)
                depth.append(depth[i] + 1)
                queue.append(j)
            nxt.append(j)
        if over:
            frontier = frontier if frontier is not None else i
            break
        succ[i] = nxt
    cyc = _find_cycle(succ)
    if cyc is not None:
        return SnReport(Verdict.NotSN, None, len(states), states[cyc])
    if frontier is not None or queue:
        w = frontier if frontier is not None else queue[0]
        return SnReport(Verdict.BoundExceeded, None, len(states), states[w])
    return SnReport(Verdict.SN, _longest(succ), len(states), None)


def _find_cycle(succ):
    """Some node on a cycle, or None (iterative three-colour DFS)."""
    colour = {}
    for root in succ:
        if root in colour:
            continue
        colour[root] = 1
        stack = [(root, iter(succ.get(root, ())))]
        while stack:
            v, it = stack[-1]
            for w in it:
                c = colour.get(w, 0)
                if c == 1:
                    return w
                if c == 0:
                    colour[w] = 1
                    stack.append((w, iter(succ.get(w, ()))))
                    break
            else:
                colour[v] = 2
                stack.pop()
    return None


def _longest(succ):
    memo = {}
    for root in succ:
        if root in memo:
            continue
        stack = [(root, False)]
        while stack:
            v, done = stack.pop()
            if done:
                memo[v] = max((memo[w] + 1 for w in succ.get(v, ())), default=0)
                continue
            if v in memo:
                continue
            stack.append((v, True))
            for w in succ.get(v, ()):
                if w not in memo:
                    stack.append((w, False))
    return memo.get(0, 0)


# ---------------------------------------------------------------- traces

def path_str(path) -> str:
    return ".".join(map(str, path)) if path else "ε"


def format_step(step: Step) -> str:
    where = path_str(step.position)
    if step.occurrence is not None:
        where += "/" + path_str(step.occurrence)
    return f"{step.rule} @ {where} : {step.before} ==> {step.after}"


def step_json(step: Step) -> str:
    return json.dumps({
        "rule": str(step.rule),
        "position": list(step.position),
        "occurrence": None if step.occurrence is None else list(step.occurrence),
        "before": str(step.before),
        "after": str(step.after),
    }, sort_keys=True, ensure_ascii=False)


def format_trace(trace, jsonl: bool = False) -> str:
    fmt = step_json if jsonl else format_step
    return "".join(fmt(s) + "\n" for s in trace)
