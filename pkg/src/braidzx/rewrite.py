"""Clifford rewrite rules, a greedy reducer, and replayable traces.

A *site* is a tuple of vertex/edge ids whose meaning depends on the rule:

===============  ======================================================
SpiderFusion     (edge,) plain edge joining two same-colour spiders
IdentityRemoval  (v,) phase-0 degree-2 spider with at least one plain leg
HadamardCancel   (v,) phase-0 degree-2 spider with two Hadamard legs
PiCopy           (p, v) degree-2 pi spider p plainly attached to an
                 opposite-colour spider v
PhaseCopy0       (p, v) degree-1 spider of phase 0 or pi attached to an
                 opposite-colour spider v
Hopf             (u, v) u < v, two parallel edges that cancel
Bialgebra        (edge,) single plain edge between phase-0 Z and X spiders
ColorChange      (v,) any spider
SelfLoopRemoval  (edge,) a self-loop
===============  ======================================================

All rules hold up to a nonzero scalar, which is dropped.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable

from .zx import EdgeTag, Spider, ZXDiagram, ZXError


class Rule(str, Enum):
    SPIDER_FUSION = "SpiderFusion"
    IDENTITY_REMOVAL = "IdentityRemoval"
    PI_COPY = "PiCopy"
    PHASE_COPY0 = "PhaseCopy0"
    HOPF = "Hopf"
    BIALGEBRA = "Bialgebra"
    COLOR_CHANGE = "ColorChange"
    HADAMARD_CANCEL = "HadamardCancel"
    SELF_LOOP_REMOVAL = "SelfLoopRemoval"


Site = tuple


class NoMatch(ZXError):
    pass


class Divergence(ZXError):
    pass


# -- matchers -----------------------------------------------------------

def _spider(d: ZXDiagram, v: int) -> Spider | None:
    return d.spiders.get(v)


def _has_loop(d: ZXDiagram, v: int) -> bool:
    return any(d.edges[e].is_loop for e in d.incident(v))


def _ok_fusion(d, site):
    (e,) = site
    edge = d.edges.get(e)
    if edge is None or edge.is_loop or edge.tag is not EdgeTag.PLAIN:
        return False
    a, b = _spider(d, edge.a), _spider(d, edge.b)
    return a is not None and b is not None and a.color is b.color


def _ok_identity(d, site, hadamards: int):
    (v,) = site
    s = _spider(d, v)
    if s is None or s.phase != 0 or _has_loop(d, v):
        return False
    inc = d.incident(v)
    if len(inc) != 2:
        return False
    n_had = sum(1 for e in inc if d.edges[e].tag is EdgeTag.HADAMARD)
    return n_had == 2 if hadamards == 2 else n_had < 2


def _ok_picopy(d, site):
    p, v = site
    sp, sv = _spider(d, p), _spider(d, v)
    if sp is None or sv is None or p == v or sp.phase != 4 or sp.color is sv.color:
        return False
    if _has_loop(d, p) or _has_loop(d, v) or len(d.incident(p)) != 2:
        return False
    link = d.edges_between(p, v)
    return len(link) == 1 and d.edges[link[0]].tag is EdgeTag.PLAIN


def _ok_phasecopy(d, site):
    p, v = site
    sp, sv = _spider(d, p), _spider(d, v)
    if sp is None or sv is None or p == v or sp.phase not in (0, 4) or sp.color is sv.color:
        return False
    inc = d.incident(p)
    if len(inc) != 1 or d.edges[inc[0]].is_loop or d.edges[inc[0]].tag is not EdgeTag.PLAIN:
        return False
    return d.edges[inc[0]].other(p) == v and not _has_loop(d, v)


def _hopf_pair(d, u, v) -> list[int]:
    su, sv = _spider(d, u), _spider(d, v)
    if su is None or sv is None or u == v:
        return []
    want = EdgeTag.PLAIN if su.color is not sv.color else EdgeTag.HADAMARD
    return [e for e in d.edges_between(u, v) if d.edges[e].tag is want][:2]


def _ok_hopf(d, site):
    u, v = site
    return u < v and len(_hopf_pair(d, u, v)) == 2


def _ok_bialg(d, site):
    (e,) = site
    edge = d.edges.get(e)
    if edge is None or edge.is_loop or edge.tag is not EdgeTag.PLAIN:
        return False
    a, b = _spider(d, edge.a), _spider(d, edge.b)
    if a is None or b is None or a.color is b.color or a.phase or b.phase:
        return False
    if _has_loop(d, edge.a) or _has_loop(d, edge.b):
        return False
    return len(d.edges_between(edge.a, edge.b)) == 1


def _ok_color(d, site):
    (v,) = site
    return v in d.spiders


def _ok_loop(d, site):
    (e,) = site
    edge = d.edges.get(e)
    return edge is not None and edge.is_loop and edge.a in d.spiders


MATCHERS: dict[Rule, Callable] = {
    Rule.SPIDER_FUSION: _ok_fusion,
    Rule.IDENTITY_REMOVAL: lambda d, s: _ok_identity(d, s, 1),
    Rule.HADAMARD_CANCEL: lambda d, s: _ok_identity(d, s, 2),
    Rule.PI_COPY: _ok_picopy,
    Rule.PHASE_COPY0: _ok_phasecopy,
    Rule.HOPF: _ok_hopf,
    Rule.BIALGEBRA: _ok_bialg,
    Rule.COLOR_CHANGE: _ok_color,
    Rule.SELF_LOOP_REMOVAL: _ok_loop,
}


def _candidates(d: ZXDiagram, rule: Rule) -> list[Site]:
    if rule in (Rule.SPIDER_FUSION, Rule.BIALGEBRA, Rule.SELF_LOOP_REMOVAL):
        return [(e,) for e in sorted(d.edges)]
    if rule in (Rule.IDENTITY_REMOVAL, Rule.HADAMARD_CANCEL, Rule.COLOR_CHANGE):
        return [(v,) for v in sorted(d.spiders)]
    if rule is Rule.HOPF:
        pairs = {tuple(sorted((ed.a, ed.b))) for ed in d.edges.values() if not ed.is_loop}
        return sorted(pairs)
    # PiCopy / PhaseCopy0: (small spider, its neighbour)
    out = []
    for p in sorted(d.spiders):
        if d.spiders[p].phase in (0, 4) and len(d.incident(p)) <= 2:
            for v in sorted(set(d.neighbors(p))):
                out.append((p, v))
    return out


def match_sites(d: ZXDiagram, rule: Rule) -> list[Site]:
    """Every site where ``rule`` applies, in ascending id order."""
    rule = Rule(rule)
    ok = MATCHERS[rule]
    return [s for s in _candidates(d, rule) if ok(d, s)]


# -- rewriters (mutate in place) ----------------------------------------

def _fuse(d: ZXDiagram, site):
    (e,) = site
    edge = d.edges[e]
    keep, gone = min(edge.a, edge.b), max(edge.a, edge.b)
    sk, sg = d.spiders[keep], d.spiders[gone]
    d.remove_edge(e)
    for f in d.incident(gone):
        d.retarget_edge(f, gone, keep)
    d.set_phase(keep, sk.phase + sg.phase)
    d.add_tags(keep, sg.tags)
    d.remove_spider(gone)


def _identity(d: ZXDiagram, site):
    (v,) = site
    e1, e2 = d.incident(v)
    x, y = d.edges[e1].other(v), d.edges[e2].other(v)
    tag = EdgeTag.HADAMARD if (d.edges[e1].tag is EdgeTag.HADAMARD) != (d.edges[e2].tag is EdgeTag.HADAMARD) else EdgeTag.PLAIN
    d.remove_spider(v)
    d.add_edge(x, y, tag)


def _picopy(d: ZXDiagram, site):
    p, v = site
    sp, sv = d.spiders[p], d.spiders[v]
    (link,) = d.edges_between(p, v)
    (outer,) = [e for e in d.incident(p) if e != link]
    w, tag = d.edges[outer].other(p), d.edges[outer].tag
    legs = [e for e in d.incident(v) if e != link]
    d.remove_spider(p)
    d.set_phase(v, -sv.phase)
    new_edge = d.add_edge(v, w, tag)
    for f in legs:
        x = d.edges[f].other(v)
        ftag = d.edges[f].tag
        d.remove_edge(f)
        q = d.add_spider(sp.color, 4, sp.tags)
        d.add_edge(v, q, EdgeTag.PLAIN)
        d.add_edge(q, x, ftag)
    return new_edge


def _phasecopy(d: ZXDiagram, site):
    p, v = site
    sp = d.spiders[p]
    (link,) = d.incident(p)
    legs = [e for e in d.incident(v) if e != link]
    ends = [(d.edges[f].other(v), d.edges[f].tag) for f in legs]
    d.remove_spider(p)
    d.remove_spider(v)
    for x, tag in ends:
        q = d.add_spider(sp.color, sp.phase)
        d.add_edge(q, x, tag)


def _hopf(d: ZXDiagram, site):
    u, v = site
    for e in _hopf_pair(d, u, v):
        d.remove_edge(e)


def _bialg(d: ZXDiagram, site):
    (e,) = site
    edge = d.edges[e]
    u, v = edge.a, edge.b
    cu, cv = d.spiders[u].color, d.spiders[v].color
    ends_u = [(d.edges[f].other(u), d.edges[f].tag) for f in d.incident(u) if f != e]
    ends_v = [(d.edges[f].other(v), d.edges[f].tag) for f in d.incident(v) if f != e]
    d.remove_spider(u)
    d.remove_spider(v)
    new_u = []
    for x, tag in ends_u:
        q = d.add_spider(cv)
        d.add_edge(q, x, tag)
        new_u.append(q)
    new_v = []
    for x, tag in ends_v:
        q = d.add_spider(cu)
        d.add_edge(q, x, tag)
        new_v.append(q)
    for a in new_u:
        for b in new_v:
            d.add_edge(a, b)


def _color_change(d: ZXDiagram, site):
    (v,) = site
    d.set_color(v, d.spiders[v].color.other)
    for e in d.incident(v):
        if not d.edges[e].is_loop:
            d.set_edge_tag(e, d.edges[e].tag.toggled())


def _self_loop(d: ZXDiagram, site):
    (e,) = site
    edge = d.remove_edge(e)
    if edge.tag is EdgeTag.HADAMARD:
        d.set_phase(edge.a, d.spiders[edge.a].phase + 4)


REWRITERS: dict[Rule, Callable] = {
    Rule.SPIDER_FUSION: _fuse,
    Rule.IDENTITY_REMOVAL: _identity,
    Rule.HADAMARD_CANCEL: _identity,
    Rule.PI_COPY: _picopy,
    Rule.PHASE_COPY0: _phasecopy,
    Rule.HOPF: _hopf,
    Rule.BIALGEBRA: _bialg,
    Rule.COLOR_CHANGE: _color_change,
    Rule.SELF_LOOP_REMOVAL: _self_loop,
}


# -- traces -------------------------------------------------------------

@dataclass(frozen=True)
class TraceStep:
    rule: Rule
    site: tuple
    removed_spiders: tuple = ()
    added_spiders: tuple = ()
    removed_edges: tuple = ()
    added_edges: tuple = ()

    def to_dict(self) -> dict:
        return {
            "rule": self.rule.value,
            "site": list(self.site),
            "delta": {
                "removed_spiders": list(self.removed_spiders),
                "added_spiders": list(self.added_spiders),
                "removed_edges": list(self.removed_edges),
                "added_edges": list(self.added_edges),
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TraceStep":
        delta = doc.get("delta", {})
        return cls(
            Rule(doc["rule"]),
            tuple(doc["site"]),
            tuple(delta.get("removed_spiders", ())),
            tuple(delta.get("added_spiders", ())),
            tuple(delta.get("removed_edges", ())),
            tuple(delta.get("added_edges", ())),
        )


@dataclass
class RewriteTrace:
    steps: list[TraceStep] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def to_json(self) -> str:
        return json.dumps([s.to_dict() for s in self.steps], indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RewriteTrace":
        return cls([TraceStep.from_dict(x) for x in json.loads(text)])


def _delta_step(d: ZXDiagram, rule: Rule, site: tuple) -> TraceStep:
    tv, te = d.touched()
    rs = tuple(sorted(v for v, (sp, _) in tv.items() if sp is not None and v not in d.spiders))
    as_ = tuple(sorted(v for v, (sp, _) in tv.items() if sp is None and v in d.spiders))
    re = tuple(sorted(e for e, old in te.items() if old is not None and d.edges.get(e) != old))
    ae = tuple(sorted(e for e, old in te.items() if e in d.edges and d.edges[e] != old))
    return TraceStep(rule, tuple(site), rs, as_, re, ae)


def apply_in_place(d: ZXDiagram, rule: Rule, site: tuple) -> TraceStep:
    rule = Rule(rule)
    site = tuple(site)
    if not MATCHERS[rule](d, site):
        raise NoMatch(f"{rule.value} does not match at {site}")
    d.begin()
    REWRITERS[rule](d, site)
    step = _delta_step(d, rule, site)
    d.commit()
    return step


def apply_rule(d: ZXDiagram, rule: Rule, site: tuple) -> tuple[ZXDiagram, TraceStep]:
    """Rewrite a copy of ``d`` at ``site``; ``d`` itself is left alone."""
    out = d.copy()
    step = apply_in_place(out, rule, site)
    return out, step


def replay(d: ZXDiagram, trace: RewriteTrace) -> ZXDiagram:
    out = d.copy()
    for i, step in enumerate(trace.steps):
        try:
            got = apply_in_place(out, step.rule, step.site)
        except NoMatch as exc:
            raise Divergence(f"step {i}: {exc}") from None
        if got != step:
            raise Divergence(f"step {i}: {step.rule.value} at {step.site} produced a different delta")
    return out


# -- reduction ----------------------------------------------------------

@dataclass(frozen=True)
class ReductionPolicy:
    node_weight: Fraction = Fraction(1)
    hadamard_weight: Fraction = Fraction(1)
    injection_weight: Fraction = Fraction(2)
    preserve_t_count: bool = True
    max_steps: int = 100_000
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.preserve_t_count:
            raise ValueError("preserve_t_count cannot be disabled")
        for w in (self.node_weight, self.hadamard_weight, self.injection_weight):
            if w < 0:
                raise ValueError("objective weights must be nonnegative")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


def objective(d: ZXDiagram, policy: ReductionPolicy) -> Fraction:
    inj = sum(1 for s in d.spiders.values() if not s.is_pauli)
    had = sum(1 for e in d.edges.values() if e.tag is EdgeTag.HADAMARD)
    return policy.node_weight * len(d.spiders) + policy.hadamard_weight * had + policy.injection_weight * inj


@dataclass
class Reduction:
    diagram: ZXDiagram
    trace: RewriteTrace
    exhausted: bool = False  # step budget ran out before a fixed point


# rules the greedy search may pick from, in tie-break order
GREEDY_RULES = (
    Rule.SELF_LOOP_REMOVAL,
    Rule.HOPF,
    Rule.SPIDER_FUSION,
    Rule.IDENTITY_REMOVAL,
    Rule.HADAMARD_CANCEL,
    Rule.PHASE_COPY0,
    Rule.PI_COPY,
    Rule.BIALGEBRA,
    Rule.COLOR_CHANGE,
)


def _local_score(d: ZXDiagram, policy: ReductionPolicy):
    """(objective delta, edge delta, t delta, injection delta, protected ok)
    of the journaled edit, from touched items only."""
    tv, te = d.touched()
    dobj = Fraction(0)
    dt = dinj = 0
    meas_before: set = set()
    for v, (old, _) in tv.items():
        new = d.spiders.get(v)
        for sp, sign in ((old, -1), (new, 1)):
            if sp is None:
                continue
            dobj += sign * policy.node_weight
            if not sp.is_pauli:
                dobj += sign * policy.injection_weight
                dinj += sign
            if sp.is_odd:
                dt += sign
        if old is not None:
            meas_before |= {t for t in old.tags if t.startswith("meas:")}
    dedge = 0
    for e, old in te.items():
        new = d.edges.get(e)
        for ed, sign in ((old, -1), (new, 1)):
            if ed is None:
                continue
            dedge += sign
            if ed.tag is EdgeTag.HADAMARD:
                dobj += sign * policy.hadamard_weight
    # measurement leaves are outcome records: they must survive as leaves
    ok = True
    if meas_before:
        found: set = set()
        for v in tv:
            sp = d.spiders.get(v)
            if sp is None:
                continue
            mt = {t for t in sp.tags if t.startswith("meas:")}
            if mt and d.degree(v) != 1:
                ok = False
            found |= mt
        ok = ok and meas_before <= found
    return dobj, dedge, dt, dinj, ok


def _blocked(d: ZXDiagram, rule: Rule, site: tuple) -> bool:
    if rule is Rule.SPIDER_FUSION:
        edge = d.edges[site[0]]
        # two injections never merge: keeps T-count and every S/T site
        return not d.spiders[edge.a].is_pauli and not d.spiders[edge.b].is_pauli
    return False


def _tiebreak_key(seed: int):
    if seed == 0:
        return lambda site: site
    rng = random.Random(seed)
    salt = rng.getrandbits(64)
    return lambda site: (hash((salt,) + tuple(site)) & 0xFFFFFFFF, site)


def _greedy_step(d: ZXDiagram, policy: ReductionPolicy, rules, key) -> tuple | None:
    best = None
    for rank, rule in enumerate(rules):
        ok = MATCHERS[rule]
        for site in _candidates(d, rule):
            if not ok(d, site) or _blocked(d, rule, site):
                continue
            d.begin()
            REWRITERS[rule](d, site)
            dobj, dedge, dt, dinj, fine = _local_score(d, policy)
            d.rollback()
            if not fine or dt != 0 or dinj != 0:
                continue
            if not (dobj < 0 or (dobj == 0 and dedge < 0)):
                continue
            cand = ((dobj, dedge), rank, key(site), rule, site)
            if best is None or cand[:3] < best[:3]:
                best = cand
    return None if best is None else (best[3], best[4])


def reduce(d: ZXDiagram, policy: ReductionPolicy | None = None) -> Reduction:
    """Greedy best-improvement reduction followed by a Hadamard post-pass.

    A step is accepted only if it lowers the objective, or keeps it and
    removes edges. T-count, the number of injection spiders and every
    measurement leaf are held fixed.
    """
    policy = policy or ReductionPolicy()
    work = d.copy()
    trace = RewriteTrace()
    key = _tiebreak_key(policy.seed)

    def run(rules) -> bool:
        while len(trace) < policy.max_steps:
            pick = _greedy_step(work, policy, rules, key)
            if pick is None:
                return False
            trace.steps.append(apply_in_place(work, *pick))
        return True

    exhausted = run(GREEDY_RULES)
    if not exhausted:
        exhausted = _hadamard_pass(work, policy, trace, key, run)
    return Reduction(work, trace, exhausted)


def _hadamard_pass(work, policy, trace, key, run) -> bool:
    """Try colour changes that do not pay off alone but unlock fusions."""
    improved = True
    while improved and len(trace) < policy.max_steps:
        improved = False
        base = objective(work, policy)
        for (v,) in match_sites(work, Rule.COLOR_CHANGE):
            if not any(work.edges[e].tag is EdgeTag.HADAMARD for e in work.incident(v)):
                continue
            trial = work.copy()
            trial_trace = RewriteTrace()
            trial_trace.steps.append(apply_in_place(trial, Rule.COLOR_CHANGE, (v,)))
            while len(trace) + len(trial_trace) < policy.max_steps:
                pick = _greedy_step(trial, policy, GREEDY_RULES, key)
                if pick is None:
                    break
                trial_trace.steps.append(apply_in_place(trial, *pick))
            if objective(trial, policy) < base:
                work.__dict__.update(trial.__dict__)
                trace.steps.extend(trial_trace.steps)
                improved = True
                break
    return len(trace) >= policy.max_steps
