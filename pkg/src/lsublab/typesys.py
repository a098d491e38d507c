"""Simple and intersection type systems, additive and multiplicative.

Additive systems share one environment across premises; multiplicative
ones split it (``Γ ⊎ Δ``) and keep only the names that occur. Each comes
in a pure variant (``-lam``) and one with closures (``-es``), and the
intersection variants (``addi``/``muli``) add introduction and projection
of ``&``.

Derivations are plain trees; :func:`validate` re-checks every node, and
the constructions (inference, transfer between additive and
multiplicative, typing of normal forms, ...) all produce derivations that
are validated in the tests.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass
from typing import Optional

from .syntax import (
    Abs, App, Closure, Term, Var, freshen, has_closures, has_metavars,
    parse,
)


# ------------------------------------------------------------------ types

class Type:
    __slots__ = ()

    def __str__(self):
        return type_str(self)

    def __repr__(self):
        return f"parse_type({type_str(self)!r})"


@dataclass(frozen=True, repr=False)
class Base(Type):
    name: str


@dataclass(frozen=True, repr=False)
class Arrow(Type):
    left: Type
    right: Type


@dataclass(frozen=True, repr=False)
class Inter(Type):
    left: Type
    right: Type


def type_str(a: Type) -> str:
    if isinstance(a, Base):
        return a.name
    if isinstance(a, Arrow):
        left = type_str(a.left)
        if isinstance(a.left, Arrow):
            left = f"({left})"
        return f"{left} -> {type_str(a.right)}"
    left, right = type_str(a.left), type_str(a.right)
    if isinstance(a.left, Arrow):
        left = f"({left})"
    if not isinstance(a.right, Base):
        right = f"({right})"
    return f"{left} & {right}"


_TTOK = re.compile(r"\s*(?:(->)|([A-Za-z_?'][A-Za-z0-9_']*)|(.))")


def parse_type(src: str) -> Type:
    toks = []
    pos = 0
    while pos < len(src):
        m = _TTOK.match(src, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1):
            toks.append("->")
        elif m.group(2):
            toks.append(("b", m.group(2)))
        elif m.group(3):
            if m.group(3) not in "()&":
                raise ValueError(f"bad character in type: {m.group(3)!r}")
            toks.append(m.group(3))
        pos = m.end()
    toks.append(None)
    i = 0

    def arrow():
        nonlocal i
        left = inter()
        if toks[i] == "->":
            i += 1
            return Arrow(left, arrow())
        return left

    def inter():
        nonlocal i
        t = atom()
        while toks[i] == "&":
            i += 1
            t = Inter(t, atom())
        return t

    def atom():
        nonlocal i
        tok = toks[i]
        if tok == "(":
            i += 1
            t = arrow()
            if toks[i] != ")":
                raise ValueError("expected ')' in type")
            i += 1
            return t
        if isinstance(tok, tuple):
            i += 1
            return Base(tok[1])
        raise ValueError(f"unexpected token in type: {tok!r}")

    t = arrow()
    if toks[i] is not None:
        raise ValueError(f"trailing input in type: {toks[i]!r}")
    return t


def conjuncts(a: Type) -> list:
    """Flatten nested intersections (left to right)."""
    if isinstance(a, Inter):
        return conjuncts(a.left) + conjuncts(a.right)
    return [a]


def ll_check(a: Type, b: Type) -> bool:
    """``a ≪ b``: every conjunct of ``b`` is a conjunct of ``a``."""
    have = set(conjuncts(a))
    return all(c in have for c in conjuncts(b))


def intersect(types) -> Type:
    types = list(types)
    acc = types[0]
    for t in types[1:]:
        acc = Inter(acc, t)
    return acc


def type_depth(a: Type) -> int:
    """Bases have depth 1."""
    if isinstance(a, Base):
        return 1
    return 1 + max(type_depth(a.left), type_depth(a.right))


def all_types(max_depth: int, bases=("A", "B")) -> list:
    level = [Base(b) for b in bases]
    out = list(level)
    for _ in range(max_depth - 1):
        new = []
        for l, r in itertools.product(out, repeat=2):
            new.append(Arrow(l, r))
            new.append(Inter(l, r))
        out = list(dict.fromkeys(out + new))
    return out


def ll_closure(universe) -> set:
    """Least relation on ``universe`` closed under the five ≪ rules
    (reflexivity, both projections, transitivity, pairing), computed by
    saturation with bitsets. Independent of :func:`ll_check`."""
    idx = {t: i for i, t in enumerate(universe)}
    n = len(universe)
    rows = [1 << i for i in range(n)]
    for t, i in idx.items():
        if isinstance(t, Inter):
            for part in (t.left, t.right):
                if part in idx:
                    rows[i] |= 1 << idx[part]
    pairs = [(i, idx[t.left], idx[t.right]) for t, i in idx.items()
             if isinstance(t, Inter) and t.left in idx and t.right in idx]
    changed = True
    while changed:
        changed = False
        for a in range(n):
            row = rows[a]
            acc = row
            bits = row
            while bits:
                low = bits & -bits
                j = low.bit_length() - 1
                acc |= rows[j]
                bits ^= low
            for k, l, r in pairs:
                if (acc >> l) & 1 and (acc >> r) & 1:
                    acc |= 1 << k
            if acc != row:
                rows[a] = acc
                changed = True
    return {(universe[a], universe[b]) for a in range(n) for b in range(n)
            if (rows[a] >> b) & 1}


# ----------------------------------------------------------- environments

class IncompatibleEnv(ValueError):
    pass


class Env:
    """Immutable finite map from names to types, ordered by name."""

    __slots__ = ("_d",)

    def __init__(self, items=()):
        d = dict(items.items() if isinstance(items, (dict, Env)) else items)
        object.__setattr__(self, "_d", dict(sorted(d.items())))

    def __setattr__(self, k, v):
        raise AttributeError("Env is immutable")

    def items(self):
        return self._d.items()

    def names(self):
        return set(self._d)

    def __contains__(self, x):
        return x in self._d

    def __getitem__(self, x):
        return self._d[x]

    def get(self, x, default=None):
        return self._d.get(x, default)

    def __len__(self):
        return len(self._d)

    def __eq__(self, other):
        return isinstance(other, Env) and self._d == other._d

    def __hash__(self):
        return hash(tuple(self._d.items()))

    def __str__(self):
        return ", ".join(f"{x}:{type_str(a)}" for x, a in self._d.items())

    def __repr__(self):
        return f"Env({{{str(self)}}})"

    def extend(self, x, a):
        if x in self._d:
            raise IncompatibleEnv(f"{x} already declared")
        return Env({**self._d, x: a})

    def set(self, x, a):
        return Env({**self._d, x: a})

    def remove(self, x):
        return Env({k: v for k, v in self._d.items() if k != x})

    def restrict(self, names):
        return Env({k: v for k, v in self._d.items() if k in names})

    def union(self, other: "Env") -> "Env":
        """``Γ ⊎ Δ``: common names must have equal types."""
        out = dict(self._d)
        for x, a in other.items():
            if x in out and out[x] != a:
                raise IncompatibleEnv(
                    f"{x} has types {type_str(out[x])} and {type_str(a)}")
            out[x] = a
        return Env(out)


# ------------------------------------------------------------- systems

class System(str, enum.Enum):
    ADD_LAM = "add-lam"
    ADD_ES = "add-es"
    MUL_LAM = "mul-lam"
    MUL_ES = "mul-es"
    ADDI_LAM = "addi-lam"
    ADDI_ES = "addi-es"
    MULI_LAM = "muli-lam"
    MULI_ES = "muli-es"

    def __str__(self):
        return self.value

    @property
    def multiplicative(self):
        return self.value.startswith("mul")

    @property
    def intersection(self):
        return self.value[3] == "i" or self.value[4:5] == "i"

    @property
    def closures(self):
        return self.value.endswith("-es")

    @classmethod
    def make(cls, multiplicative=False, intersection=False, closures=False):
        name = ("mul" if multiplicative else "add") + ("i" if intersection else "")
        return cls(name + ("-es" if closures else "-lam"))


def rules_of(system: System) -> frozenset:
    system = System(system)
    if system.multiplicative:
        rules = {"ax*", "app*"}
        if system.intersection:
            rules |= {"abs*1", "abs*2", "capI", "capE"}
            if system.closures:
                rules |= {"subs*1", "subs*2"}
        else:
            rules |= {"abs*"}
            if system.closures:
                rules |= {"subs*"}
    else:
        rules = {"ax+", "app+", "abs+"}
        if system.closures:
            rules |= {"subs+"}
        if system.intersection:
            rules |= {"capI", "capE"}
    return frozenset(rules)


# ------------------------------------------------------------ derivations

@dataclass(frozen=True)
class Derivation:
    rule: str
    env: Env
    term: Term
    type: Type
    premises: tuple = ()

    def judgement(self) -> str:
        env = f"{self.env} " if len(self.env) else ""
        return f"{env}⊢ {self.term} : {type_str(self.type)}"

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()


class DerivationError(ValueError):
    def __init__(self, path, reason):
        where = ".".join(map(str, path)) if path else "root"
        super().__init__(f"at {where}: {reason}")
        self.path = tuple(path)
        self.reason = reason


def validate(d: Derivation, system: System, path=()):
    """Raise :class:`DerivationError` at the first (preorder) bad node."""
    system = System(system)
    allowed = rules_of(system)

    def fail(msg):
        raise DerivationError(path, msg)

    if d.rule not in allowed:
        fail(f"rule {d.rule} is not part of {system}")
    t, env, a, ps = d.term, d.env, d.type, d.premises

    def arity(n):
        if len(ps) != n:
            fail(f"{d.rule} takes {n} premise(s), got {len(ps)}")

    r = d.rule
    if r in ("ax+", "ax*"):
        arity(0)
        if not isinstance(t, Var):
            fail("axiom on a non-variable")
        if env.get(t.name) != a:
            fail(f"{t.name} is not declared with type {type_str(a)}")
        if r == "ax*" and len(env) != 1:
            fail("multiplicative axiom needs exactly the variable")
    elif r in ("app+", "app*"):
        arity(2)
        if not isinstance(t, App):
            fail("application rule on a non-application")
        f, u = ps
        if f.term != t.fun or u.term != t.arg:
            fail("premise terms do not match")
        if f.type != Arrow(u.type, a):
            fail("function type does not match argument and result")
        if r == "app+":
            if f.env != env or u.env != env:
                fail("additive premises must share the environment")
        else:
            try:
                merged = f.env.union(u.env)
            except IncompatibleEnv as e:
                fail(str(e))
            if merged != env:
                fail("environment is not the union of the premises'")
    elif r in ("abs+", "abs*", "abs*1", "abs*2"):
        arity(1)
        if not isinstance(t, Abs):
            fail("abstraction rule on a non-abstraction")
        (b,) = ps
        x = t.var
        if b.term != t.body:
            fail("premise term does not match")
        if not isinstance(a, Arrow) or b.type != a.right:
            fail("result type does not match the premise")
        if r == "abs+":
            if x in env:
                fail(f"bound name {x} is already declared")
            if b.env != env.extend(x, a.left):
                fail("premise environment must extend the conclusion's")
        elif r == "abs*":
            if x in b.env and b.env[x] != a.left:
                fail("declared type of the bound name does not match")
            if env != b.env.remove(x):
                fail("environment must be the premise's without the bound name")
        elif r == "abs*1":
            if b.env.get(x) != a.left:
                fail("premise must declare the bound name with the domain type")
            if env != b.env.remove(x):
                fail("environment must be the premise's without the bound name")
        else:
            if x in b.env:
                fail("premise must not declare the bound name")
            if env != b.env:
                fail("environment must equal the premise's")
    elif r in ("subs+", "subs*", "subs*1", "subs*2"):
        arity(2)
        if not isinstance(t, Closure):
            fail("substitution rule on a non-closure")
        du, dt = ps
        x = t.var
        if du.term != t.arg or dt.term != t.body:
            fail("premise terms do not match")
        if dt.type != a:
            fail("type must be the body's")
        b = du.type
        if r == "subs+":
            if du.env != env:
                fail("substituted term must be typed in the same environment")
            if x in env:
                fail(f"bound name {x} is already declared")
            if dt.env != env.extend(x, b):
                fail("body environment must extend the conclusion's")
        else:
            if r == "subs*1" and dt.env.get(x) != b:
                fail("body must declare the bound name with the substituted type")
            if r == "subs*2" and x in dt.env:
                fail("body must not declare the bound name")
            if r == "subs*" and x in dt.env and dt.env[x] != b:
                fail("declared type of the bound name does not match")
            try:
                merged = du.env.union(dt.env.remove(x))
            except IncompatibleEnv as e:
                fail(str(e))
            if merged != env:
                fail("environment is not the union of the premises'")
    elif r == "capI":
        arity(2)
        p, q = ps
        if p.term != t or q.term != t or p.env != env or q.env != env:
            fail("intersection premises must have the same term and environment")
        if a != Inter(p.type, q.type):
            fail("type must be the intersection of the premises'")
    elif r == "capE":
        arity(1)
        (p,) = ps
        if p.term != t or p.env != env:
            fail("projection must keep term and environment")
        if not isinstance(p.type, Inter) or a not in (p.type.left, p.type.right):
            fail("type must be a component of the premise's intersection")
    else:
        fail(f"unknown rule {r}")
    for i, p in enumerate(ps):
        validate(p, system, path + (i,))


def check_derivation(d: Derivation, system: System) -> bool:
    try:
        validate(d, system)
        return True
    except DerivationError:
        return False


def explain(d: Derivation, system: System) -> Optional[DerivationError]:
    try:
        validate(d, system)
    except DerivationError as e:
        return e
    return None


# -------------------------------------------------------- s-expressions

def to_sexp(d: Derivation, indent: int = 0) -> str:
    pad = "  " * indent
    env = " ".join(f"({x} {_q(type_str(a))})" for x, a in d.env.items())
    head = f"{pad}({d.rule} ({env}) {_q(str(d.term))} {_q(type_str(d.type))}"
    if not d.premises:
        return head + ")"
    inner = "\n".join(to_sexp(p, indent + 1) for p in d.premises)
    return f"{head}\n{inner})"


def _q(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


_SEXP = re.compile(r'\s*(?:(\()|(\))|"((?:[^"\\]|\\.)*)"|([^\s()"]+))')


def _read_sexp(src):
    pos, stack, top = 0, [[]], None
    while True:
        m = _SEXP.match(src, pos)
        if m is None or m.end() == pos:
            if src[pos:].strip():
                raise ValueError(f"bad s-expression near offset {pos}")
            break
        pos = m.end()
        if m.group(1):
            stack.append([])
        elif m.group(2):
            if len(stack) == 1:
                raise ValueError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        elif m.group(3) is not None:
            stack[-1].append(("str", re.sub(r"\\(.)", r"\1", m.group(3))))
        else:
            stack[-1].append(m.group(4))
    if len(stack) != 1 or len(stack[0]) != 1:
        raise ValueError("expected exactly one s-expression")
    top = stack[0][0]
    return top


def from_sexp(src: str) -> Derivation:
    def build(e):
        if not isinstance(e, list) or len(e) < 4:
            raise ValueError("derivation node must be (rule (env) term type ...)")
        rule, env, term, ty = e[:4]
        if not isinstance(rule, str):
            raise ValueError("rule name expected")
        decls = {}
        for item in env:
            if not (isinstance(item, list) and len(item) == 2):
                raise ValueError("environment entries are (name \"type\")")
            decls[item[0]] = parse_type(item[1][1])
        return Derivation(rule, Env(decls), parse(term[1], marked=True),
                          parse_type(ty[1]), tuple(build(p) for p in e[4:]))

    return build(_read_sexp(src))


# ------------------------------------------------------------- inference

class _Unifier:
    def __init__(self):
        self.sub = {}
        self.n = 0

    def fresh(self):
        self.n += 1
        return Base(f"?{self.n}")

    def find(self, a):
        while isinstance(a, Base) and a.name in self.sub:
            a = self.sub[a.name]
        return a

    def resolve(self, a):
        a = self.find(a)
        if isinstance(a, Arrow):
            return Arrow(self.resolve(a.left), self.resolve(a.right))
        return a

    def occurs(self, v, a):
        a = self.find(a)
        if isinstance(a, Base):
            return a.name == v
        return self.occurs(v, a.left) or self.occurs(v, a.right)

    def unify(self, a, b):
        a, b = self.find(a), self.find(b)
        if a == b:
            return True
        if isinstance(a, Base) and a.name.startswith("?"):
            if self.occurs(a.name, b):
                return False
            self.sub[a.name] = b
            return True
        if isinstance(b, Base) and b.name.startswith("?"):
            return self.unify(b, a)
        if isinstance(a, Arrow) and isinstance(b, Arrow):
            return self.unify(a.left, b.left) and self.unify(a.right, b.right)
        return False


def _letters():
    for n in itertools.count():
        for c in "ABCDEFGHIJKLMNOPQRSTUVWXYZ":
            yield c if n == 0 else f"{c}{n}"


def infer_simple(t: Term, system: System = System.ADD_LAM) -> Optional[Derivation]:
    """Principal simple typing, as a derivation in the additive system
    (``add-lam`` for pure terms, ``add-es`` with closures). ``None`` if
    the term has no simple type."""
    if has_metavars(t):
        raise ValueError("metavariables are not typable")
    system = System(system)
    if system not in (System.ADD_LAM, System.ADD_ES):
        raise ValueError("inference targets the additive simple systems")
    if has_closures(t) and not system.closures:
        raise ValueError(f"{system} has no rule for closures")
    t = freshen(t)
    u = _Unifier()
    free = {x: u.fresh() for x in sorted(t.fv)}
    types = {}

    def gen(s, env, path):
        if isinstance(s, Var):
            a = env[s.name]
        elif isinstance(s, Abs):
            v = u.fresh()
            b = gen(s.body, {**env, s.var: v}, path + (0,))
            a = Arrow(v, b)
        elif isinstance(s, App):
            f = gen(s.fun, env, path + (0,))
            x = gen(s.arg, env, path + (1,))
            a = u.fresh()
            if not u.unify(f, Arrow(x, a)):
                raise _Untypable
        else:
            b = gen(s.arg, env, path + (1,))
            a = gen(s.body, {**env, s.var: b}, path + (0,))
        types[path] = a
        return a

    try:
        gen(t, free, ())
    except _Untypable:
        return None
    names = {}
    letters = _letters()

    def pretty(a):
        a = u.resolve(a)
        if isinstance(a, Base):
            if a.name not in names:
                names[a.name] = Base(next(letters))
            return names[a.name]
        return Arrow(pretty(a.left), pretty(a.right))

    env = Env({x: pretty(a) for x, a in free.items()})
    pretty(types[()])
    rule = {"var": "ax+", "app": "app+", "abs": "abs+", "sub": "subs+"}

    def build(s, env, path):
        a = pretty(types[path])
        if isinstance(s, Var):
            return Derivation(rule["var"], env, s, a)
        if isinstance(s, Abs):
            b = build(s.body, env.extend(s.var, a.left), path + (0,))
            return Derivation(rule["abs"], env, s, a, (b,))
        if isinstance(s, App):
            f = build(s.fun, env, path + (0,))
            x = build(s.arg, env, path + (1,))
            return Derivation(rule["app"], env, s, a, (f, x))
        du = build(s.arg, env, path + (1,))
        dt = build(s.body, env.extend(s.var, du.type), path + (0,))
        return Derivation(rule["sub"], env, s, a, (du, dt))

    return build(t, env, ())


class _Untypable(Exception):
    pass


# ------------------------------------------------- additive <-> multiplicative

def is_additive(d: Derivation) -> bool:
    for n in d.nodes():
        if n.rule.endswith("+"):
            return True
        if "*" in n.rule:
            return False
    raise ValueError("derivation has no syntax-directed rule")


def add_to_mul(d: Derivation, inter: bool = False) -> Derivation:
    """``Γ ⊢ t : A`` additive becomes ``Γ ∩ fv(t) ⊢ t : A``
    multiplicative."""
    env = d.env.restrict(d.term.fv)
    t, r, ps = d.term, d.rule, d.premises
    if r == "ax+":
        return Derivation("ax*", env, t, d.type)
    if r == "app+":
        return Derivation("app*", env, t, d.type,
                          tuple(add_to_mul(p, inter) for p in ps))
    if r == "abs+":
        b = add_to_mul(ps[0], inter)
        rule = "abs*" if not inter else ("abs*1" if t.var in b.env else "abs*2")
        return Derivation(rule, env, t, d.type, (b,))
    if r == "subs+":
        du, dt = (add_to_mul(p, inter) for p in ps)
        rule = "subs*" if not inter else ("subs*1" if t.var in dt.env else "subs*2")
        return Derivation(rule, env, t, d.type, (du, dt))
    if r in ("capI", "capE"):
        return Derivation(r, env, t, d.type, tuple(add_to_mul(p, inter) for p in ps))
    raise ValueError(f"not an additive rule: {r}")


def mul_to_add(d: Derivation, env: Optional[Env] = None) -> Derivation:
    """Weaken a multiplicative derivation to an additive one with the
    environment ``env`` (default: the derivation's own), which must agree
    with it on the free names."""
    env = d.env if env is None else env
    if env.restrict(d.term.fv) != d.env.restrict(d.term.fv):
        raise IncompatibleEnv("target environment disagrees on free names")
    t, r, ps = d.term, d.rule, d.premises
    if r == "ax*":
        return Derivation("ax+", env, t, d.type)
    if r == "app*":
        return Derivation("app+", env, t, d.type,
                          tuple(mul_to_add(p, env) for p in ps))
    if r in ("abs*", "abs*1", "abs*2"):
        inner = env.extend(t.var, d.type.left)
        return Derivation("abs+", env, t, d.type, (mul_to_add(ps[0], inner),))
    if r in ("subs*", "subs*1", "subs*2"):
        du, dt = ps
        return Derivation("subs+", env, t, d.type,
                          (mul_to_add(du, env),
                           mul_to_add(dt, env.extend(t.var, du.type))))
    if r in ("capI", "capE"):
        return Derivation(r, env, t, d.type, tuple(mul_to_add(p, env) for p in ps))
    raise ValueError(f"not a multiplicative rule: {r}")


def add_mul_transfer(d: Derivation, inter: Optional[bool] = None,
                     env: Optional[Env] = None) -> Derivation:
    """Additive to multiplicative or back, depending on ``d``."""
    if is_additive(d):
        if inter is None:
            inter = any(n.rule in ("capI", "capE") for n in d.nodes())
        return add_to_mul(d, inter)
    return mul_to_add(d, env)


def weaken(d: Derivation, extra: Env) -> Derivation:
    """Additive weakening by declarations for names that are neither free
    nor bound in the term."""
    clash = extra.names() & (d.term.fv | set(_bound(d.term)))
    if clash:
        raise IncompatibleEnv(f"cannot weaken with {sorted(clash)}")

    def go(n):
        return Derivation(n.rule, n.env.union(extra), n.term, n.type,
                          tuple(go(p) for p in n.premises))

    return go(d)


def _bound(t):
    from .syntax import binders
    return binders(t)


# --------------------------------------------------- ≪ and generation

def ll_derivation(d: Derivation, target: Type) -> Derivation:
    """From ``Γ ⊢ t : C`` with ``C ≪ target`` build ``Γ ⊢ t : target``
    using only intersection introduction and projection."""
    if not ll_check(d.type, target):
        raise ValueError(f"{type_str(d.type)} is not below {type_str(target)}")
    if d.type == target:
        return d
    if isinstance(target, Inter):
        return Derivation("capI", d.env, d.term, target,
                          (ll_derivation(d, target.left),
                           ll_derivation(d, target.right)))
    return _project(d, target)


def _project(d, target):
    if d.type == target:
        return d
    a = d.type
    for side in (a.left, a.right):
        if target in conjuncts(side):
            return _project(Derivation("capE", d.env, d.term, side, (d,)), target)
    raise ValueError("target is not a conjunct")


@dataclass
class Generation:
    """A derivation split into its syntax-directed parts: for each part
    the premises of the rule that introduced the term constructor. The
    intersection of the parts' types is below ``target``."""
    env: Env
    term: Term
    target: Type
    parts: list


def generation_decompose(d: Derivation) -> Generation:
    def collect(n):
        if n.rule == "capI":
            return collect(n.premises[0]) + collect(n.premises[1])
        if n.rule == "capE":
            return collect(n.premises[0])
        return [n]

    return Generation(d.env, d.term, d.type, collect(d))


def generation_compose(g: Generation) -> Derivation:
    """Rebuild each part with its own rule, intersect, and project down
    to the target."""
    rebuilt = [Derivation(p.rule, p.env, p.term, p.type, p.premises) for p in g.parts]
    acc = rebuilt[0]
    for p in rebuilt[1:]:
        acc = Derivation("capI", g.env, g.term, Inter(acc.type, p.type), (acc, p))
    return ll_derivation(acc, g.target)


def env_strengthen(d: Derivation, x: str, c: Type) -> Derivation:
    """Replace the declaration ``x : B`` by ``x : C`` (with ``C ≪ B``)
    throughout, fixing the axioms for ``x`` by projection."""

    def go(n):
        env = n.env.set(x, c) if x in n.env else n.env
        if n.rule in ("ax+", "ax*") and n.term == Var(x):
            ax = Derivation(n.rule, env, n.term, c)
            return ll_derivation(ax, n.type)
        return Derivation(n.rule, env, n.term, n.type, tuple(go(p) for p in n.premises))

    return go(d)


# ---------------------------------------------------- normal forms

def is_beta_normal(t: Term) -> bool:
    if isinstance(t, Var):
        return True
    if isinstance(t, Abs):
        return is_beta_normal(t.body)
    if isinstance(t, App):
        return (not isinstance(t.fun, Abs) and is_beta_normal(t.fun)
                and is_beta_normal(t.arg))
    return False


def type_normal_form(t: Term) -> Derivation:
    """An ``addi-lam`` derivation for a beta-normal pure term. Each
    variable gets the intersection of the types its occurrences need;
    a variable used without arguments gets its own base type."""
    if has_closures(t) or has_metavars(t) or not is_beta_normal(t):
        raise ValueError("expected a beta-normal pure term")
    t = freshen(t)
    letters = _letters()
    bare = {}
    occ = {}   # name -> list of occurrence types, in order

    def base_for(x):
        if x not in bare:
            bare[x] = Base(next(letters))
        return bare[x]

    def head_spine(s):
        args = []
        while isinstance(s, App):
            args.append(s.arg)
            s = s.fun
        return s, args[::-1]

    def gen(s):
        if isinstance(s, Abs):
            body = gen(s.body)
            dom = _occ_type(s.var)
            return Arrow(dom, body)
        h, args = head_spine(s)
        arg_types = [gen(a) for a in args]
        if not args:
            ty = base_for(h.name)
        else:
            ty = Base(next(letters))
            for a in reversed(arg_types):
                ty = Arrow(a, ty)
        occ.setdefault(h.name, [])
        if ty not in occ[h.name]:
            occ[h.name].append(ty)
        return ty if not args else _result(ty, len(args))

    def _occ_type(x):
        if x in occ:
            return intersect(occ[x])
        return base_for(x)

    def _result(ty, n):
        for _ in range(n):
            ty = ty.right
        return ty

    top = gen(t)
    env = Env({x: intersect(occ[x]) for x in sorted(t.fv)})

    def build(s, env, want):
        if isinstance(s, Abs):
            b = build(s.body, env.extend(s.var, want.left), want.right)
            return Derivation("abs+", env, s, want, (b,))
        h, args = head_spine(s)
        # the occurrence type of the head is the one whose result is `want`
        # and whose arguments are typed by the arguments
        arg_derivs = []
        candidates = [o for o in conjuncts(env[h.name])
                      if _arity_ok(o, len(args)) and _result(o, len(args)) == want]
        for ty in candidates:
            try:
                arg_derivs = []
                cur = ty
                for a in args:
                    arg_derivs.append(build(a, env, cur.left))
                    cur = cur.right
                break
            except ValueError:
                continue
        else:
            raise ValueError(f"no occurrence type fits {h.name}")
        d = ll_derivation(Derivation("ax+", env, h, env[h.name]), ty)
        sub = h
        for a, da in zip(args, arg_derivs):
            sub = App(sub, a)
            d = Derivation("app+", env, sub, d.type.right, (d, da))
        return d

    def _arity_ok(ty, n):
        for _ in range(n):
            if not isinstance(ty, Arrow):
                return False
            ty = ty.right
        return True

    return build(t, env, top)


# ------------------------------------------------- SN and typability

@dataclass
class CampaignReport:
    samples: int = 0
    typable: int = 0
    typable_sn: int = 0
    beta_sn: int = 0
    beta_sn_lsub_sn: int = 0
    lsub_sn: int = 0
    normal_forms_typed: int = 0
    inconclusive: int = 0
    violations: list = None

    def __post_init__(self):
        if self.violations is None:
            self.violations = []

    @property
    def ok(self):
        return not self.violations


def beta_normal_form(t: Term, max_steps: int = 10_000) -> Optional[Term]:
    from .lsub import RuleId, run

    _, final, done = run(t, {RuleId.Beta}, "leftmost", None, max_steps)
    return final if done else None


def sn_typability_campaign(seed: int, count: int, size: int,
                           state_bound: int = 5000) -> CampaignReport:
    """On random pure terms: simply typable implies SN for the calculus
    with closures; beta-SN implies the same; and every term found SN has
    a beta-normal form that the intersection system types."""
    import random

    from .gen import random_pure
    from .lsub import LSUB_RULES, RuleId, Verdict, explore_sn

    rng = random.Random(seed)
    rep = CampaignReport()
    for _ in range(count):
        t = random_pure(rng, rng.randint(1, size))
        rep.samples += 1
        d = infer_simple(t)
        sub = explore_sn(t, LSUB_RULES, state_bound=state_bound)
        beta = explore_sn(t, {RuleId.Beta}, state_bound=state_bound)
        if d is not None:
            rep.typable += 1
            if not check_derivation(d, System.ADD_LAM):
                rep.violations.append(f"invalid inferred derivation for {t}")
            if sub.verdict is Verdict.SN:
                rep.typable_sn += 1
            elif sub.verdict is Verdict.NotSN:
                rep.violations.append(f"typable but not SN: {t}")
            else:
                rep.inconclusive += 1
        if beta.verdict is Verdict.SN:
            rep.beta_sn += 1
            if sub.verdict is Verdict.SN:
                rep.beta_sn_lsub_sn += 1
            elif sub.verdict is Verdict.NotSN:
                rep.violations.append(f"beta-SN but not SN with closures: {t}")
            else:
                rep.inconclusive += 1
        if sub.verdict is Verdict.SN:
            rep.lsub_sn += 1
            nf = beta_normal_form(t)
            if nf is None:
                rep.violations.append(f"SN term without beta-normal form: {t}")
                continue
            dn = type_normal_form(nf)
            if check_derivation(dn, System.ADDI_LAM):
                rep.normal_forms_typed += 1
            else:
                rep.violations.append(f"normal form not typed: {nf}")
    return rep
