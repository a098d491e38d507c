"""Sister calculi and the translations between them.

* ``LPar``: pure lambda terms with partial beta (one occurrence at a time)
  and garbage-collecting beta.
* ``LDef``: closures plus beta, B, Gc and R.
* ``LEs``/``Es``/``ALC``: closures distributed through the term by
  App/Lamb/Comp rules, with and without B, Var and Gc.

``tra`` translates closures into the last calculus using idle
substitutions on marked names; ``parlm``/``lmpar`` go back and forth
between partial beta and closures.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .lsub import (
    LSUB_RULES, ORDER_SENSITIVE, SUB_RULES, RuleId, Step, es_canonical,
    normalize, redexes, run, step_modulo,
)
from .syntax import (
    Abs, App, Closure, Meta, Term, Var, alpha_eq, binders,
    canonicalize_alpha, fresh_name, freshen, has_closures, has_metavars,
    is_marked,
)


class CalculusId(str, enum.Enum):
    LSub = "lsub"
    Sub = "sub"
    LPar = "lpar"
    LDef = "ldef"
    LEs = "les"
    Es = "es"
    ALC = "alc"
    Beta = "beta"

    def __str__(self):
        return self.value


ALC_RULES = frozenset({RuleId.App1, RuleId.App2, RuleId.App3, RuleId.Lamb,
                       RuleId.Comp1, RuleId.Comp2})
ES_RULES = ALC_RULES | {RuleId.Var, RuleId.Gc}

RULES = {
    CalculusId.LSub: LSUB_RULES,
    CalculusId.Sub: SUB_RULES,
    CalculusId.LPar: frozenset({RuleId.BetaP, RuleId.BGc}),
    CalculusId.LDef: frozenset({RuleId.Beta, RuleId.B, RuleId.Gc, RuleId.R}),
    CalculusId.LEs: ES_RULES | {RuleId.B},
    CalculusId.Es: ES_RULES,
    CalculusId.ALC: ALC_RULES,
    CalculusId.Beta: frozenset({RuleId.Beta}),
}


def check_input(calc: CalculusId, t: Term):
    """Reject terms outside the calculus' syntax."""
    if calc in (CalculusId.LSub, CalculusId.Sub):
        return
    if has_metavars(t):
        raise ValueError(f"{calc} does not accept metavariables")
    if calc in (CalculusId.LPar, CalculusId.Beta) and has_closures(t):
        raise ValueError(f"{calc} works on pure lambda terms")


@dataclass
class Reduction:
    trace: list
    final: Term
    normal: bool


def reduce(calc: CalculusId, t: Term, strategy: str = "leftmost",
           max_steps: int = 1000, rng=None) -> Reduction:
    calc = CalculusId(calc)
    check_input(calc, t)
    trace, final, done = run(t, RULES[calc], strategy, rng, max_steps)
    return Reduction(trace, final, done)


def alc_normalize(t: Term) -> Term:
    """ALC normal form, as a canonical representative (unique modulo
    commutation)."""
    return normalize(t, ALC_RULES)


# ---------------------------------------------------------- translations

def tra(t: Term) -> Term:
    """Translate into the calculus with distributed substitutions. Every
    application gets an idle substitution ``[#g/u]`` on its argument;
    marked names ``#g0, #g1, ...`` are allocated left to right."""
    if has_metavars(t):
        raise ValueError("tra is defined on terms without metavariables")
    t = freshen(t)
    counter = itertools.count()

    def go(s):
        if isinstance(s, Var):
            return s
        if isinstance(s, Abs):
            return Abs(s.var, go(s.body))
        if isinstance(s, App):
            f, a = go(s.fun), go(s.arg)
            return Closure(App(f, a), f"#g{next(counter)}", a)
        body, u = go(s.body), go(s.arg)
        inner = Closure(body, s.var, u)
        if s.var in s.body.fv:
            inner = Closure(inner, f"#g{next(counter)}", u)
        return freshen(alc_normalize(inner))

    return freshen(go(t))


def idle_substitutions_ok(t: Term) -> bool:
    """Every substitution on a marked name binds nothing."""
    if isinstance(t, Closure) and is_marked(t.var) and t.var in t.body.fv:
        return False
    if isinstance(t, Abs):
        return idle_substitutions_ok(t.body)
    if isinstance(t, App):
        return idle_substitutions_ok(t.fun) and idle_substitutions_ok(t.arg)
    if isinstance(t, Closure):
        return idle_substitutions_ok(t.body) and idle_substitutions_ok(t.arg)
    return True


def erase_marks(t: Term) -> Term:
    """Rename marked binders to ordinary fresh names. Marks only record
    where a substitution came from; no rule looks at them."""
    used = set(t.fv)

    def go(s, env):
        if isinstance(s, Var):
            return Var(env.get(s.name, s.name))
        if isinstance(s, Meta):
            return Meta(s.ident, [env.get(x, x) for x in s.support])
        if isinstance(s, App):
            return App(go(s.fun, env), go(s.arg, env))
        x = s.var
        if is_marked(x):
            x = fresh_name("g", used)
            used.add(x)
        env2 = {**env, s.var: x}
        if isinstance(s, Abs):
            return Abs(x, go(s.body, env2))
        return Closure(go(s.body, env2), x, go(s.arg, env))

    used.update(b for b in binders(t) if not is_marked(b))
    return go(t, {})


def parlm(t: Term) -> Term:
    """Pure term -> closures: every beta-redex becomes a closure."""
    if has_closures(t) or has_metavars(t):
        raise ValueError("parlm expects a pure lambda term")
    return _parlm(t)


def _parlm(t):
    if isinstance(t, Var):
        return t
    if isinstance(t, Abs):
        return Abs(t.var, _parlm(t.body))
    if isinstance(t.fun, Abs):
        return Closure(_parlm(t.fun.body), t.fun.var, _parlm(t.arg))
    return App(_parlm(t.fun), _parlm(t.arg))


def lmpar(t: Term) -> Term:
    """Closures -> pure term: every closure becomes a beta-redex."""
    if has_metavars(t):
        raise ValueError("lmpar expects a term without metavariables")
    if isinstance(t, Var):
        return t
    if isinstance(t, Abs):
        return Abs(t.var, lmpar(t.body))
    if isinstance(t, App):
        return App(lmpar(t.fun), lmpar(t.arg))
    return App(Abs(t.var, lmpar(t.body)), lmpar(t.arg))


# ------------------------------------------------------------ simulation

class SimOutcome(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"

    def __str__(self):
        return self.value


class SimKind(str, enum.Enum):
    LPAR_TO_LSUB = "lpar-lsub"
    LSUB_TO_LPAR = "lsub-lpar"
    LDEF_TO_LSUB = "ldef-lsub"
    LSUB_TO_LDEF = "lsub-ldef"
    LSUB_TO_LES = "lsub-les"

    def __str__(self):
        return self.value


SOURCE = {
    SimKind.LPAR_TO_LSUB: CalculusId.LPar,
    SimKind.LSUB_TO_LPAR: CalculusId.LSub,
    SimKind.LDEF_TO_LSUB: CalculusId.LDef,
    SimKind.LSUB_TO_LDEF: CalculusId.LSub,
    SimKind.LSUB_TO_LES: CalculusId.LSub,
}


@dataclass
class SimResult:
    outcome: SimOutcome
    detail: str = ""


def reaches_plus(src: Term, target: Term, rules, depth_bound: int = 64,
                 state_bound: int = 20_000) -> SimOutcome:
    """Is there a non-empty reduction from ``src`` to the class of
    ``target``? Breadth-first over canonical representatives."""
    goal = es_canonical(target)
    exhaustive = bool(frozenset(rules) & ORDER_SENSITIVE)
    start = es_canonical(src)
    seen = {}
    queue = deque()
    for s in step_modulo(start, rules, exhaustive):
        if s == goal:
            return SimOutcome.HOLDS
        if s not in seen:
            seen[s] = 1
            queue.append(s)
    cut = False
    while queue:
        s = queue.popleft()
        d = seen[s]
        if d >= depth_bound:
            cut = True
            continue
        for n in step_modulo(s, rules, exhaustive):
            if n == goal:
                return SimOutcome.HOLDS
            if n not in seen:
                if len(seen) >= state_bound:
                    return SimOutcome.INCONCLUSIVE
                seen[n] = d + 1
                queue.append(n)
    return SimOutcome.INCONCLUSIVE if cut else SimOutcome.FAILS


def step_rules(t: Term, t2: Term, rules) -> set:
    """Rules by which ``t`` rewrites to ``t2`` in one plain step (up to
    renaming)."""
    key = canonicalize_alpha(t2)
    return {s.rule for s in redexes(t, rules)
            if canonicalize_alpha(freshen(s.after)) == key}


def simulate_check(kind: SimKind, t: Term, t2: Term, depth_bound: int = 64,
                   state_bound: int = 20_000) -> SimResult:
    """Check one instance of a simulation between calculi, for a given
    one-step reduction ``t -> t2`` in the source calculus."""
    kind = SimKind(kind)
    src = SOURCE[kind]
    check_input(src, t)
    used = step_rules(t, t2, RULES[src])
    if not used:
        raise ValueError(f"not a one-step {src} reduction")
    if kind is SimKind.LPAR_TO_LSUB:
        o = reaches_plus(parlm(t), parlm(t2), LSUB_RULES, depth_bound, state_bound)
        return SimResult(o)
    if kind is SimKind.LSUB_TO_LPAR:
        if has_metavars(t):
            raise ValueError("metavariables cannot be mapped to pure terms")
        outcomes = []
        if RuleId.B in used:
            ok = alpha_eq(lmpar(t), lmpar(t2))
            outcomes.append(SimOutcome.HOLDS if ok else SimOutcome.FAILS)
        if used & SUB_RULES:
            outcomes.append(reaches_plus(lmpar(t), lmpar(t2),
                                         RULES[CalculusId.LPar], depth_bound,
                                         state_bound))
        return SimResult(_combine(outcomes), ",".join(sorted(map(str, used))))
    if kind is SimKind.LDEF_TO_LSUB:
        return SimResult(reaches_plus(t, t2, LSUB_RULES, depth_bound, state_bound))
    if kind is SimKind.LSUB_TO_LDEF:
        return SimResult(reaches_plus(t, t2, RULES[CalculusId.LDef],
                                      depth_bound, state_bound))
    return SimResult(reaches_plus(erase_marks(tra(t)), erase_marks(tra(t2)),
                                  RULES[CalculusId.LEs], depth_bound,
                                  state_bound))


def _combine(outcomes):
    if SimOutcome.FAILS in outcomes:
        return SimOutcome.FAILS
    if SimOutcome.INCONCLUSIVE in outcomes:
        return SimOutcome.INCONCLUSIVE
    return SimOutcome.HOLDS


def random_step(rng, t: Term, calc: CalculusId) -> Optional[Step]:
    steps = sorted(redexes(t, RULES[CalculusId(calc)]), key=Step.sort_key)
    return rng.choice(steps) if steps else None
