"""Explicit substitutions with metavariables: rewriting, measures,
confluence checks, sister calculi and type systems."""

import sys

from .syntax import (Abs, App, Closure, Meta, Term, Var, alpha_eq,
                     canonicalize_alpha, free_vars, parse, subst, to_str)
from .lsub import (RuleId, Step, c_equal, es_canonical, explore_sn,
                   normalize_sub, redexes, step_modulo)

# term operations recurse on the tree; a 1000-node application spine
# needs a few thousand frames
if sys.getrecursionlimit() < 10_000:
    sys.setrecursionlimit(10_000)

__all__ = [
    "Abs", "App", "Closure", "Meta", "Term", "Var", "alpha_eq",
    "canonicalize_alpha", "free_vars", "parse", "subst", "to_str",
    "RuleId", "Step", "c_equal", "es_canonical", "explore_sn",
    "normalize_sub", "redexes", "step_modulo",
]
__version__ = "0.1.0"
