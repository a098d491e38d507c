"""Terms with explicit substitutions and metavariables.

Grammar accepted by :func:`parse`::

    term  := "\\" ident "." term | app
    app   := atom {atom}
    atom  := ident | "#" ident | "?" ident "{" [ident {"," ident}] "}"
           | "(" term ")" | atom "[" ident "/" term "]"

Closures bind tighter than application, so ``x y[y/z]`` is ``x (y[y/z])``.
Names starting with ``#`` are marked variables; they are only accepted when
``parse(..., marked=True)`` and are otherwise reserved for the translation
into the calculus with idle substitutions.
"""

from __future__ import annotations

import re
from typing import Callable, Iterator

__all__ = [
    "Term", "Var", "Abs", "App", "Closure", "Meta", "ParseError",
    "parse", "to_str", "free_vars", "is_marked", "alpha_eq", "subst",
    "rename", "canonicalize_alpha", "freshen", "is_barendregt", "fresh_name",
    "children", "subterm_at", "replace_at", "positions", "Context",
    "contexts", "term_size", "is_pure", "has_closures", "has_metavars",
    "binders",
]


class Term:
    """Base class. Nodes are immutable, hashed structurally, and carry
    their free variables."""

    __slots__ = ("fv", "_h", "size")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Term) or self._h != other._h:
            return False
        return self._key() == other._key()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return self._h

    def __str__(self):
        return to_str(self)

    def __repr__(self):
        return f"parse({to_str(self)!r})"

    def __setattr__(self, name, value):
        raise AttributeError("terms are immutable")

    def _init(self, fv, h, size):
        object.__setattr__(self, "fv", fv)
        object.__setattr__(self, "_h", h)
        object.__setattr__(self, "size", size)


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        self._init(frozenset((name,)), hash(("v", name)), 1)

    def _key(self):
        return ("v", self.name)


class Meta(Term):
    """Metavariable ``?X{x1,...,xn}``; the support is kept sorted."""

    __slots__ = ("ident", "support")

    def __init__(self, ident: str, support):
        support = tuple(sorted(set(support)))
        object.__setattr__(self, "ident", ident)
        object.__setattr__(self, "support", support)
        self._init(frozenset(support), hash(("m", ident, support)), 1)

    def _key(self):
        return ("m", self.ident, self.support)


class Abs(Term):
    __slots__ = ("var", "body")

    def __init__(self, var: str, body: Term):
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "body", body)
        fv = body.fv - {var} if var in body.fv else body.fv
        self._init(fv, hash(("l", var, body._h)), 1 + body.size)

    def _key(self):
        return ("l", self.var, self.body)


class App(Term):
    __slots__ = ("fun", "arg")

    def __init__(self, fun: Term, arg: Term):
        object.__setattr__(self, "fun", fun)
        object.__setattr__(self, "arg", arg)
        self._init(fun.fv | arg.fv, hash(("a", fun._h, arg._h)),
                   1 + fun.size + arg.size)

    def _key(self):
        return ("a", self.fun, self.arg)


class Closure(Term):
    """``body[var/arg]``: ``var`` is bound in ``body`` only."""

    __slots__ = ("body", "var", "arg")

    def __init__(self, body: Term, var: str, arg: Term):
        object.__setattr__(self, "body", body)
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "arg", arg)
        inner = body.fv - {var} if var in body.fv else body.fv
        self._init(inner | arg.fv, hash(("c", body._h, var, arg._h)),
                   1 + body.size + arg.size)

    def _key(self):
        return ("c", self.body, self.var, self.arg)


def is_marked(name: str) -> bool:
    return name.startswith("#")


def free_vars(t: Term) -> frozenset:
    return t.fv


def term_size(t: Term) -> int:
    """Number of nodes."""
    return t.size


# ---------------------------------------------------------------- parsing

class ParseError(ValueError):
    def __init__(self, msg, pos):
        super().__init__(f"{msg} at offset {pos}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_']*)|(.))")


def _tokenize(src: str):
    toks = []
    pos = 0
    n = len(src)
    while pos < n:
        m = _TOKEN.match(src, pos)
        if m is None:  # only trailing whitespace remains
            break
        if m.group(1):
            toks.append(("id", m.group(1), m.start(1)))
        elif m.group(2):
            ch = m.group(2)
            if ch == "λ":
                ch = "\\"
            if ch not in "\\.()[]/{},#?":
                raise ParseError(f"unexpected character {ch!r}", m.start(2))
            toks.append((ch, ch, m.start(2)))
        pos = m.end()
    toks.append(("eof", "", n))
    return toks


class _Parser:
    def __init__(self, src, marked):
        self.toks = _tokenize(src)
        self.i = 0
        self.marked = marked

    def peek(self):
        return self.toks[self.i][0]

    def take(self, kind):
        tok = self.toks[self.i]
        if tok[0] != kind:
            what = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise ParseError(f"expected {kind!r}, found {what}", tok[2])
        self.i += 1
        return tok[1]

    def name(self):
        if self.peek() == "#":
            pos = self.toks[self.i][2]
            if not self.marked:
                raise ParseError("marked variables are not allowed here", pos)
            self.i += 1
            return "#" + self.take("id")
        return self.take("id")

    def term(self):
        if self.peek() == "\\":
            self.i += 1
            x = self.name()
            self.take(".")
            return Abs(x, self.term())
        return self.app()

    def app(self):
        t = self.atom()
        while self.peek() in ("id", "#", "?", "("):
            t = App(t, self.atom())
        return t

    def atom(self):
        k = self.peek()
        if k in ("id", "#"):
            t = Var(self.name())
        elif k == "?":
            self.i += 1
            ident = self.take("id")
            self.take("{")
            support = []
            if self.peek() != "}":
                support.append(self.name())
                while self.peek() == ",":
                    self.i += 1
                    support.append(self.name())
            self.take("}")
            t = Meta(ident, support)
        elif k == "(":
            self.i += 1
            t = self.term()
            self.take(")")
        else:
            tok = self.toks[self.i]
            what = "end of input" if k == "eof" else repr(tok[1])
            raise ParseError(f"unexpected {what}", tok[2])
        while self.peek() == "[":
            self.i += 1
            x = self.name()
            self.take("/")
            u = self.term()
            self.take("]")
            t = Closure(t, x, u)
        return t


def parse(src: str, marked: bool = False) -> Term:
    p = _Parser(src, marked)
    t = p.term()
    if p.peek() != "eof":
        tok = p.toks[p.i]
        raise ParseError(f"trailing input {tok[1]!r}", tok[2])
    return t


# --------------------------------------------------------------- printing

def to_str(t: Term) -> str:
    out = []
    _emit(t, "top", out)
    return "".join(out)


def _emit(t, ctx, out):
    # ctx: "top" (anything), "fun" (left of application),
    # "arg" (right of application), "clo" (body of a closure)
    if isinstance(t, Var):
        out.append(t.name)
    elif isinstance(t, Meta):
        out.append(f"?{t.ident}{{{','.join(t.support)}}}")
    elif isinstance(t, Abs):
        paren = ctx != "top"
        if paren:
            out.append("(")
        out.append(f"\\{t.var}. ")
        _emit(t.body, "top", out)
        if paren:
            out.append(")")
    elif isinstance(t, App):
        paren = ctx in ("arg", "clo")
        if paren:
            out.append("(")
        _emit(t.fun, "fun", out)
        out.append(" ")
        _emit(t.arg, "arg", out)
        if paren:
            out.append(")")
    else:
        _emit(t.body, "clo", out)
        out.append(f"[{t.var}/")
        _emit(t.arg, "top", out)
        out.append("]")


# ------------------------------------------------------------- positions

def children(t: Term) -> tuple:
    if isinstance(t, Abs):
        return (t.body,)
    if isinstance(t, App):
        return (t.fun, t.arg)
    if isinstance(t, Closure):
        return (t.body, t.arg)
    return ()


def _with_child(t, i, new):
    if isinstance(t, Abs):
        return Abs(t.var, new)
    if isinstance(t, App):
        return App(new, t.arg) if i == 0 else App(t.fun, new)
    if isinstance(t, Closure):
        if i == 0:
            return Closure(new, t.var, t.arg)
        return Closure(t.body, t.var, new)
    raise IndexError("leaf has no children")


def subterm_at(t: Term, path) -> Term:
    for i in path:
        t = children(t)[i]
    return t


def replace_at(t: Term, path, new: Term) -> Term:
    """Graft ``new`` at ``path`` without any renaming (may capture)."""
    if not path:
        return new
    i = path[0]
    return _with_child(t, i, replace_at(children(t)[i], path[1:], new))


def positions(t: Term, path=()) -> Iterator[tuple]:
    """All paths in preorder (outermost first, then left to right)."""
    yield path
    for i, c in enumerate(children(t)):
        yield from positions(c, path + (i,))


def _binder_at(t, i):
    """Name bound by node ``t`` over its child ``i``, if any."""
    if isinstance(t, Abs):
        return t.var
    if isinstance(t, Closure) and i == 0:
        return t.var
    return None


class Context:
    """A one-hole context, represented by the surrounding term and the
    path to the hole."""

    __slots__ = ("term", "path")

    def __init__(self, term: Term, path: tuple):
        self.term = term
        self.path = tuple(path)

    def plug(self, u: Term) -> Term:
        return replace_at(self.term, self.path, u)

    def binders(self) -> list:
        """Names bound on the way from the root to the hole."""
        out = []
        t = self.term
        for i in self.path:
            b = _binder_at(t, i)
            if b is not None:
                out.append(b)
            t = children(t)[i]
        return out

    def is_subst_chain(self) -> bool:
        """True for contexts of the form ``[][y1/v1]...[yn/vn]``."""
        t = self.term
        for i in self.path:
            if not (isinstance(t, Closure) and i == 0):
                return False
            t = t.body
        return True

    def plug_checked(self, u: Term, avoid) -> Term:
        """Plug, refusing if a binder on the path captures a name in
        ``avoid``."""
        caught = set(self.binders()) & set(avoid)
        if caught:
            raise ValueError(f"plugging would capture {sorted(caught)}")
        return self.plug(u)


def contexts(t: Term):
    for p in positions(t):
        yield Context(t, p), subterm_at(t, p)


def binders(t: Term) -> list:
    """All binder names in preorder."""
    out = []

    def go(s):
        if isinstance(s, (Abs, Closure)):
            out.append(s.var)
        for c in children(s):
            go(c)

    go(t)
    return out


def is_pure(t: Term) -> bool:
    """No closures and no metavariables."""
    return not has_closures(t) and not has_metavars(t)


def has_closures(t: Term) -> bool:
    if isinstance(t, Closure):
        return True
    return any(has_closures(c) for c in children(t))


def has_metavars(t: Term) -> bool:
    if isinstance(t, Meta):
        return True
    return any(has_metavars(c) for c in children(t))


# -------------------------------------------------------------- renaming

def all_names(t: Term) -> set:
    out = set(t.fv)
    out.update(binders(t))

    def go(s):
        if isinstance(s, Meta):
            out.update(s.support)
        for c in children(s):
            go(c)

    go(t)
    return out


_TRAILING_DIGITS = re.compile(r"\d+$")


def fresh_name(base: str, avoid) -> str:
    """``base`` itself if unused, else ``base`` with a numeric suffix."""
    if base not in avoid:
        return base
    stem = _TRAILING_DIGITS.sub("", base) or base
    k = 1
    while f"{stem}{k}" in avoid:
        k += 1
    return f"{stem}{k}"


def _relabel(t: Term, env: dict, choose: Callable[[str], str]) -> Term:
    """Rename every binder via ``choose`` (called in preorder) and every
    bound occurrence accordingly. Free names are left alone."""
    if isinstance(t, Var):
        n = env.get(t.name)
        return t if n is None or n == t.name else Var(n)
    if isinstance(t, Meta):
        sup = tuple(env.get(x, x) for x in t.support)
        return t if sup == t.support else Meta(t.ident, sup)
    if isinstance(t, App):
        return App(_relabel(t.fun, env, choose), _relabel(t.arg, env, choose))
    if isinstance(t, Abs):
        nx = choose(t.var)
        env2 = dict(env)
        env2[t.var] = nx
        return Abs(nx, _relabel(t.body, env2, choose))
    nx = choose(t.var)
    env2 = dict(env)
    env2[t.var] = nx
    body = _relabel(t.body, env2, choose)
    return Closure(body, nx, _relabel(t.arg, env, choose))


class CanonicalNamer:
    """Hands out ``v0, v1, ...`` (``#v0, ...`` for marked binders),
    skipping indices whose names are in ``avoid``."""

    def __init__(self, avoid=(), prefix="v", start=0):
        self.avoid = frozenset(avoid)
        self.prefix = prefix
        self.k = start

    def _ok(self, k):
        n = f"{self.prefix}{k}"
        return n not in self.avoid and "#" + n not in self.avoid

    def next_index(self):
        while not self._ok(self.k):
            self.k += 1
        k = self.k
        self.k += 1
        return k

    def peek(self, n):
        """The next ``n`` indices without consuming them."""
        out, k = [], self.k
        while len(out) < n:
            if self._ok(k):
                out.append(k)
            k += 1
        return out

    def name(self, k, marked):
        return ("#" if marked else "") + f"{self.prefix}{k}"

    def fresh(self, old):
        return self.name(self.next_index(), is_marked(old))


def canonicalize_alpha(t: Term) -> Term:
    """Rename binders to ``v0, v1, ...`` in preorder. Two terms are
    alpha-equivalent iff their canonical forms are identical."""
    namer = CanonicalNamer(t.fv)
    return _relabel(t, {}, namer.fresh)


def alpha_eq(a: Term, b: Term) -> bool:
    if a.fv != b.fv or a.size != b.size:
        return False
    return canonicalize_alpha(a) == canonicalize_alpha(b)


def is_barendregt(t: Term) -> bool:
    """Binders pairwise distinct and distinct from the free names."""
    seen = set(t.fv)
    for b in binders(t):
        if b in seen:
            return False
        seen.add(b)
    return True


def freshen(t: Term, avoid=()) -> Term:
    """Rename only the binders that clash, keeping names readable."""
    if not avoid and is_barendregt(t):
        return t
    used = set(t.fv) | set(avoid)

    def choose(old):
        n = fresh_name(old, used)
        used.add(n)
        return n

    return _relabel(t, {}, choose)


def rename(t: Term, old: str, new: str) -> Term:
    """Rename the free name ``old`` to ``new`` (including metavariable
    supports). ``new`` is assumed not to be captured."""
    if old not in t.fv:
        return t
    if isinstance(t, Var):
        return Var(new)
    if isinstance(t, Meta):
        return Meta(t.ident, [new if x == old else x for x in t.support])
    if isinstance(t, App):
        return App(rename(t.fun, old, new), rename(t.arg, old, new))
    if isinstance(t, Abs):
        return Abs(t.var, rename(t.body, old, new))
    return Closure(rename(t.body, old, new), t.var, rename(t.arg, old, new))


# ---------------------------------------------------------- substitution

def subst(t: Term, x: str, v: Term) -> Term:
    """Capture-avoiding implicit substitution ``t{x/v}``. On a
    metavariable whose support contains ``x`` the substitution is
    suspended as an explicit closure."""
    if x not in t.fv:
        return t
    if isinstance(t, Var):
        return v
    if isinstance(t, Meta):
        return Closure(t, x, v)
    if isinstance(t, App):
        return App(subst(t.fun, x, v), subst(t.arg, x, v))
    if isinstance(t, Abs):
        y, body = _avoid_capture(t.var, t.body, x, v)
        return Abs(y, subst(body, x, v))
    arg = subst(t.arg, x, v)
    if t.var == x:
        return Closure(t.body, t.var, arg)
    y, body = _avoid_capture(t.var, t.body, x, v)
    return Closure(subst(body, x, v), y, arg)


def _avoid_capture(y, body, x, v):
    if y not in v.fv:
        return y, body
    y2 = fresh_name(y, body.fv | v.fv | {x})
    return y2, rename(body, y, y2)
