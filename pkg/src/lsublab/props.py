"""Property campaigns shared by the command line and the test-suite.

Each campaign is deterministic for a given seed and returns a
:class:`PropReport`.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from . import calculi, confluence, measures, typesys
from .gen import (
    enumerate_pure, random_chain, random_lambda_closure_term, random_pure,
    random_term,
)
from .lsub import (
    LSUB_RULES, SUB_RULES, RuleId, Verdict, es_canonical, explore_sn,
    full_composition_check, is_snf_shape, normalize_sub, redexes, run,
    split_chain, sub_denotation,
)
from .syntax import Closure, freshen


@dataclass
class PropReport:
    name: str
    checked: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, msg):
        self.failures.append(str(msg))

    def summary(self) -> str:
        status = "pass" if self.ok else "FAIL"
        extra = "".join(f" {k}={v}" for k, v in self.notes.items())
        return (f"{self.name}: {status} checked={self.checked} "
                f"skipped={self.skipped} failures={len(self.failures)}{extra}")

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "ok": self.ok,
                           "checked": self.checked, "skipped": self.skipped,
                           "failures": self.failures, "notes": self.notes},
                          sort_keys=True, ensure_ascii=False)


def full_composition(seed=0, count=1000, size=10, meta_prob=0.3):
    """``t[x/u]`` and ``t{x/u}`` share their substitution normal form, and
    it agrees with the compositional oracle."""
    rng = random.Random(seed)
    rep = PropReport("full-composition")
    for _ in range(count):
        t = random_term(rng, rng.randint(1, size), meta_prob=meta_prob,
                        free=("x", "a"))
        u = random_term(rng, rng.randint(1, max(1, size // 2)), meta_prob=meta_prob)
        rep.checked += 1
        if not full_composition_check(t, "x", u):
            rep.fail(f"{t} [x/{u}]")
            continue
        nf = normalize_sub(Closure(t, "x", u))
        if nf != es_canonical(sub_denotation(Closure(t, "x", u))):
            rep.fail(f"oracle disagrees on {t} [x/{u}]")
    return rep


def snf_uniqueness(seed=0, count=1000, size=10, meta_prob=0.3):
    """Random and leftmost strategies reach the same normal form, of the
    expected shape."""
    rng = random.Random(seed)
    rep = PropReport("snf-uniqueness")
    for _ in range(count):
        t = random_term(rng, rng.randint(1, size), meta_prob=meta_prob)
        a = normalize_sub(t)
        b = normalize_sub(t, "random", random.Random(rng.random()))
        c = normalize_sub(t, "random", random.Random(rng.random()))
        rep.checked += 1
        if not (a == b == c):
            rep.fail(f"{t}: {a} / {b} / {c}")
        elif not is_snf_shape(a):
            rep.fail(f"{t}: normal form {a} has an unexpected shape")
    return rep


def measure_decrease(seed=0, count=1000, swaps=500, size=10, meta_prob=0.3):
    """Every substitution step strictly shrinks the size measure without
    raising any multiplicity; swaps of independent substitutions leave
    both unchanged."""
    rng = random.Random(seed)
    rep = PropReport("measures")
    steps = 0
    for _ in range(count):
        t = random_term(rng, rng.randint(1, size), meta_prob=meta_prob)
        rep.checked += 1
        # every step out of every state on the way to normal form
        trace, _, _ = run(t, SUB_RULES)
        for st in (s for state in [t] + [x.after for x in trace]
                   for s in redexes(state, SUB_RULES)):
            steps += 1
            r = measures.check_decrease(st)
            if not r.ok:
                rep.fail(f"{st.rule} on {st.before}: s {r.size_before}->{r.size_after}"
                         f" increased {r.increased}")
    done = 0
    while done < swaps:
        t = random_chain(rng, rng.randint(2, 5))
        t0, letters = split_chain(t)
        # letters are innermost first; a swap needs neither binder free
        # in the other's substituted term
        cand = [i for i in range(len(letters) - 1)
                if letters[i + 1][0] not in letters[i][1].fv
                and letters[i][0] not in letters[i + 1][1].fv]
        if not cand:
            continue
        i = rng.choice(cand)
        letters[i], letters[i + 1] = letters[i + 1], letters[i]
        swapped = t0
        for x, u in letters:
            swapped = Closure(swapped, x, u)
        done += 1
        if (measures.size_s(t) != measures.size_s(swapped)
                or measures.mul_map(t) != measures.mul_map(swapped)):
            rep.fail(f"swap changed measures: {t} vs {swapped}")
    rep.notes["steps"] = steps
    rep.notes["swaps"] = swaps
    return rep


def diamond(seed=0, count=300, size=10, meta_prob=0.2, projections=1000):
    """Parallel reduction on substitution normal forms has the diamond
    property, and single steps project onto it."""
    rng = random.Random(seed)
    rep = PropReport("diamond")
    inconclusive = 0
    for _ in range(count):
        t = sub_denotation(random_term(rng, rng.randint(1, size), meta_prob=meta_prob))
        d = confluence.diamond_check(t)
        if d.outcome is confluence.Outcome.INCONCLUSIVE:
            inconclusive += 1
            continue
        rep.checked += 1
        if d.outcome is confluence.Outcome.FAILS:
            rep.fail(f"diamond fails on {t}: {d.witness}")
    done = 0
    while done < projections:
        t = random_term(rng, rng.randint(1, size), meta_prob=meta_prob)
        steps = redexes(t, LSUB_RULES)
        if not steps:
            continue
        st = rng.choice(steps)
        done += 1
        o = confluence.project_and_check(st.before, st.after)
        if o is confluence.Outcome.INCONCLUSIVE:
            inconclusive += 1
        elif o is confluence.Outcome.FAILS:
            rep.fail(f"projection fails for {st.rule} on {st.before}")
        else:
            rep.checked += 1
    rep.skipped = inconclusive
    return rep


def confluence_prop(seed=0, count=500, size=10, meta_prob=0.15):
    r = confluence.confluence_fuzz(seed, count, size, meta_prob=meta_prob)
    rep = PropReport("confluence", r.checked, r.skipped)
    for t, _, _ in r.failures:
        rep.fail(f"different normal forms from {t}")
    return rep


def critical_pairs(seed=0, count=0, size=0):
    rep = PropReport("critical-pairs")
    peaks = 0
    for r in confluence.critical_pairs_check():
        rep.checked += 1
        peaks += r.peaks
        if r.outcome is not confluence.Outcome.HOLDS:
            rep.fail(f"{r.calculus} {r.family} from {r.source}: {r.unjoined[:1]}")
    rep.notes["peaks"] = peaks
    if count:
        lc = confluence.local_confluence_fuzz(seed, count, size)
        rep.checked += lc.checked
        rep.skipped += lc.skipped
        for t, a, b in lc.failures:
            rep.fail(f"peak from {t} does not join: {a} / {b}")
    return rep


def _simulation_source(rng, kind, size):
    """A small pure term, walked a few random steps in the source calculus
    so that substitution steps are sampled too."""
    src = calculi.SOURCE[kind]
    t = random_pure(rng, rng.randint(2, size))
    if src is not calculi.CalculusId.LPar:
        for _ in range(rng.randint(0, 3)):
            st = calculi.random_step(rng, t, src)
            if st is None:
                break
            t = freshen(st.after)
    return t


def simulation(seed=0, count=500, size=8, kinds=None):
    """``count`` random one-step reductions per simulation kind, each
    checked for a nonempty path between the images."""
    rng = random.Random(seed)
    rep = PropReport("simulation")
    kinds = list(calculi.SimKind) if kinds is None else [calculi.SimKind(k) for k in kinds]
    for kind in kinds:
        done = skipped = 0
        rules = set()
        while done < count:
            t = _simulation_source(rng, kind, size)
            st = calculi.random_step(rng, t, calculi.SOURCE[kind])
            if st is None:
                continue
            done += 1
            rules.add(str(st.rule))
            res = calculi.simulate_check(kind, st.before, freshen(st.after))
            if res.outcome is calculi.SimOutcome.INCONCLUSIVE:
                skipped += 1
            elif res.outcome is calculi.SimOutcome.FAILS:
                rep.fail(f"{kind}: {st.rule} {st.before} -> {st.after}")
            else:
                rep.checked += 1
        rep.skipped += skipped
        rep.notes[f"{kind}_inconclusive"] = skipped
        rep.notes[f"{kind}_rules"] = ",".join(sorted(rules))
    return rep


SN_CALCULI = {
    "beta": frozenset({RuleId.Beta}),
    "lsub": LSUB_RULES,
    "lpar": calculi.RULES[calculi.CalculusId.LPar],
    "ldef": calculi.RULES[calculi.CalculusId.LDef],
}


def sn_profile(t, state_bound=5000):
    return {k: explore_sn(t, rules, state_bound=state_bound).verdict
            for k, rules in SN_CALCULI.items()}


def _sn_implications(rep, t, v):
    sn, notsn = Verdict.SN, Verdict.NotSN
    checks = [
        ("beta SN => lsub SN", v["beta"] is sn, v["lsub"]),
        ("lsub SN => lpar SN", v["lsub"] is sn, v["lpar"]),
        ("lpar SN => lsub SN", v["lpar"] is sn, v["lsub"]),
        ("lsub SN => ldef SN", v["lsub"] is sn, v["ldef"]),
        ("ldef SN => lsub SN", v["ldef"] is sn, v["lsub"]),
    ]
    conclusive = True
    for name, premise, concl in checks:
        if not premise:
            continue
        if concl is notsn:
            rep.fail(f"{name} fails on {t}")
        elif concl is not sn:
            conclusive = False
    return conclusive


def psn_exhaustive(max_size=7, state_bound=5000, free=("a",)):
    """SN transfers between the calculi on every small pure term."""
    rep = PropReport("psn-exhaustive")
    tally = {k: 0 for k in SN_CALCULI}
    for t in enumerate_pure(max_size, free):
        v = sn_profile(t, state_bound)
        if any(x is Verdict.BoundExceeded for x in v.values()):
            # graphs larger than the bound are out of scope; a cycle found
            # in any calculus is still checked against the others
            if not any(x is Verdict.NotSN for x in v.values()):
                rep.skipped += 1
                continue
        for k, x in v.items():
            tally[k] += x is Verdict.SN
        if _sn_implications(rep, t, v):
            rep.checked += 1
        else:
            rep.skipped += 1
    rep.notes.update({f"sn_{k}": n for k, n in tally.items()})
    return rep


def psn_random(seed=0, count=200, size=9, state_bound=3000):
    rng = random.Random(seed)
    rep = PropReport("psn")
    for _ in range(count):
        t = random_pure(rng, rng.randint(1, size))
        v = sn_profile(t, state_bound)
        if _sn_implications(rep, t, v):
            rep.checked += 1
        else:
            rep.skipped += 1
    return rep


def typing(seed=0, count=500, size=8, derivations=200, ll_depth=3):
    """Typability and SN, derivation constructions, and the ≪ decision
    procedure against brute force."""
    rep = PropReport("typing")
    camp = typesys.sn_typability_campaign(seed, count, size)
    for v in camp.violations:
        rep.fail(v)
    rep.checked += camp.samples
    rep.skipped += camp.inconclusive
    rep.notes.update(typable=camp.typable, typable_sn=camp.typable_sn,
                     normal_forms_typed=camp.normal_forms_typed)
    rng = random.Random(seed + 1)
    made = 0
    while made < derivations:
        t = random_lambda_closure_term(rng, rng.randint(1, size))
        d = typesys.infer_simple(t, typesys.System.ADD_ES)
        if d is None:
            continue
        made += 1
        for msg in derivation_roundtrips(d):
            rep.fail(f"{t}: {msg}")
    rep.checked += made
    universe = typesys.all_types(ll_depth)
    closure = typesys.ll_closure(universe)
    bad = sum(1 for a in universe for b in universe
              if ((a, b) in closure) != typesys.ll_check(a, b))
    if bad:
        rep.fail(f"≪ decision disagrees with brute force on {bad} pairs")
    rep.notes["ll_pairs"] = len(universe) ** 2
    return rep


def derivation_roundtrips(d):
    """Problems found when pushing ``d`` (additive, simple, with
    closures) through every derivation construction."""
    S = typesys.System
    probs = []
    if not typesys.check_derivation(d, S.ADD_ES):
        return ["inferred derivation invalid"]
    for inter, target in ((False, S.MUL_ES), (True, S.MULI_ES)):
        m = typesys.add_to_mul(d, inter)
        if not typesys.check_derivation(m, target):
            probs.append(f"transfer to {target} invalid: {typesys.explain(m, target)}")
            continue
        back = typesys.mul_to_add(m, d.env)
        if back != d:
            probs.append(f"round trip through {target} changed the derivation")
        for n in m.nodes():
            g = typesys.generation_compose(typesys.generation_decompose(n))
            if g.env != n.env or g.type != n.type or not typesys.check_derivation(g, target):
                probs.append(f"generation round trip fails in {target}")
                break
    for n in d.nodes():
        g = typesys.generation_compose(typesys.generation_decompose(n))
        if not typesys.check_derivation(g, S.ADDI_ES):
            probs.append("additive generation round trip fails")
            break
    # strengthen a free variable's type by intersecting it with itself
    for x, a in d.env.items():
        c = typesys.Inter(a, typesys.Base("Z"))
        s = typesys.env_strengthen(d, x, c)
        if not typesys.check_derivation(s, S.ADDI_ES):
            probs.append(f"strengthening {x} fails")
        break
    extra = typesys.Env({"zz_unused": typesys.Base("W")})
    if not typesys.check_derivation(typesys.weaken(d, extra), S.ADD_ES):
        probs.append("weakening fails")
    return probs


CAMPAIGNS = {
    "confluence": confluence_prop,
    "full-composition": full_composition,
    "simulation": simulation,
    "psn": psn_random,
    "measures": measure_decrease,
    "diamond": diamond,
    "critical-pairs": critical_pairs,
    "typing": typing,
}
