"""Size and multiplicity measures on terms.

``size_s`` strictly decreases along every {R, Gc, RX} step while no
multiplicity increases; both are invariant under swapping independent
substitutions. Everything here is computed on the raw term.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lsub import SUB_RULES, Step
from .syntax import Abs, App, Closure, Meta, Term, Var


def _meta_chain_support(t: Term, x: str):
    """If ``t`` is ``?X{D}[x1/u1]...[xn/un]`` and ``x`` in ``D`` refers to
    a name bound outside the chain, return True."""
    inner_binders = set()
    while isinstance(t, Closure):
        inner_binders.add(t.var)
        t = t.body
    return isinstance(t, Meta) and x in t.support and x not in inner_binders


def is_meta_chain(t: Term) -> bool:
    while isinstance(t, Closure):
        t = t.body
    return isinstance(t, Meta)


def mul_of(x: str, t: Term) -> int:
    """Multiplicity of ``x`` in ``t``: how many copies of a substitution
    for ``x`` would be needed to reach normal form."""
    if x not in t.fv:
        return 0
    if isinstance(t, (Var, Meta)):
        return 1
    if isinstance(t, App):
        return mul_of(x, t.fun) + mul_of(x, t.arg)
    if isinstance(t, Abs):
        return mul_of(x, t.body)
    y, body, u = t.var, t.body, t.arg
    inner = 0 if x == y else mul_of(x, body)
    mu = mul_of(x, u)
    if mu == 0:
        return inner
    my = mul_of(y, body)
    if _meta_chain_support(body, y):
        return inner + my * mu
    return inner + mu + my * mu


def size_s(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    if isinstance(t, Meta):
        return len(t.support)
    if isinstance(t, App):
        return size_s(t.fun) + size_s(t.arg)
    if isinstance(t, Abs):
        return size_s(t.body)
    su = size_s(t.arg)
    sb = size_s(t.body)
    m = mul_of(t.var, t.body)
    if _meta_chain_support(t.body, t.var):
        return sb - 1 + m * su
    return sb + su + m * su


def mul_map(t: Term) -> dict:
    """Nonzero multiplicities of the free names of ``t``."""
    return {x: m for x in sorted(t.fv) if (m := mul_of(x, t))}


@dataclass
class DecreaseReport:
    ok: bool
    size_before: int
    size_after: int
    increased: dict  # name -> (before, after)


def check_decrease(step: Step) -> DecreaseReport:
    """For a {R, Gc, RX} step: size strictly drops and no multiplicity
    grows."""
    if step.rule not in SUB_RULES:
        raise ValueError(f"{step.rule} is not a substitution rule")
    a, b = step.before, step.after
    sa, sb = size_s(a), size_s(b)
    inc = {}
    for z in sorted(a.fv | b.fv):
        ma, mb = mul_of(z, a), mul_of(z, b)
        if mb > ma:
            inc[z] = (ma, mb)
    return DecreaseReport(sb < sa and not inc, sa, sb, inc)
