"""Pauli fault propagation by pushing π spiders.

A fault is a π of one colour placed on an edge or at a spider: red for an
X error, green for a Z error. It is pushed through the diagram with two
moves only. A π meeting a spider of its own colour fuses into it and leaves
again on one leg. A π meeting a spider of the other colour is copied onto
every other leg, negating the spider's phase on the way. The push ends once
every π sits on an output wire or has been absorbed by a measurement leaf,
which records a flipped outcome when the π fused into it.

Phase negation is exact for Pauli phases, turns ±π/2 into ∓π/2 (one more
fused π) and is recorded, not resolved, on T spiders.

The push runs forward in construction order: a fused π leaves towards its
latest neighbour, and an edge fault enters its later end.
"""
from __future__ import annotations

import io
import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .zx import Color, EdgeTag, ZXDiagram, ZXError


class Pauli(str, Enum):
    X = "X"
    Z = "Z"

    @property
    def color(self) -> Color:
        return Color.X if self is Pauli.X else Color.Z


class PauliError(ZXError):
    pass


@dataclass(frozen=True, order=True)
class FaultSite:
    kind: str  # "edge" or "spider"
    id: int
    pauli: Pauli

    def __post_init__(self) -> None:
        if self.kind not in ("edge", "spider"):
            raise PauliError(f"unknown site kind {self.kind!r}")
        object.__setattr__(self, "pauli", Pauli(self.pauli))

    @property
    def label(self) -> str:
        return f"{self.kind[0]}{self.id}:{self.pauli.value}"


@dataclass(frozen=True)
class FaultOutcome:
    output_flips: tuple[str, ...]  # per output: I, X, Z or Y
    detected_flips: tuple[int, ...]  # per measurement leaf, see measurement_leaves
    corrections: tuple[int, ...] = ()  # T spiders whose phase sign flipped
    input_flips: tuple[str, ...] = ()  # per input; only pushes that run backwards reach these

    @property
    def detectable(self) -> bool:
        return any(self.detected_flips)

    @property
    def pattern(self) -> str:
        return "".join(map(str, self.detected_flips))


def measurement_leaves(d: ZXDiagram) -> list[int]:
    """Degree-1 spiders carrying a measurement tag, in id order."""
    return [v for v in sorted(d.spiders)
            if d.degree(v) == 1 and any(t.startswith("meas:") for t in d.spiders[v].tags)]


def injection_spiders(d: ZXDiagram) -> list[int]:
    """Spiders holding an injected phase, ordered by injection index."""
    found = []
    for v, s in d.spiders.items():
        for t in s.tags:
            if t.startswith("inj:"):
                found.append((int(t.split(":", 1)[1]), v))
    return [v for _, v in sorted(found)]


def _seen_from(d: ZXDiagram, e: int, color: Color, end: int) -> Color:
    """Colour of a π on edge ``e`` (given as seen from e.a) viewed from ``end``."""
    edge = d.edges[e]
    if end != edge.a and edge.tag is EdgeTag.HADAMARD:
        return color.other
    return color


def _as_a_frame(d: ZXDiagram, e: int, color: Color, end: int) -> Color:
    return _seen_from(d, e, color, end)  # the map is an involution


def _potential(d: ZXDiagram, v: int) -> float:
    """Lower is later: spider ids follow construction order, which for a
    translated circuit is gate order and survives rewriting."""
    if v in d.outputs:
        return -math.inf
    if v in d.inputs:
        return math.inf
    return -v


def _site_leg(d: ZXDiagram, v: int) -> int:
    """The leg an opposite-colour fault at spider ``v`` arrives on: the one
    from its earliest neighbour."""
    return min(d.incident(v), key=lambda e: (-_potential(d, d.edges[e].other(v)), e))


class _Push:
    def __init__(self, d: ZXDiagram):
        for e, edge in d.edges.items():
            if edge.is_loop:
                raise PauliError(f"self-loop on spider {edge.a}; reduce the diagram first")
        self.d = d
        self.leaves = set(measurement_leaves(d))
        self.out_index = {b: i for i, b in enumerate(d.outputs)}
        self.in_index = {b: i for i, b in enumerate(d.inputs)}
        self.outputs = [[0, 0] for _ in d.outputs]  # (x, z) per output
        self.inputs = [[0, 0] for _ in d.inputs]
        self.flips: dict[int, int] = {v: 0 for v in self.leaves}
        self.corr: set[int] = set()
        # (edge, colour in the a-frame) -> vertex the π is heading into
        self.pending: dict[tuple[int, Color], int] = {}
        self.queue: deque = deque()

    def potential(self, v: int) -> float:
        return _potential(self.d, v)

    def place(self, e: int, color_a: Color, heading: int | None = None) -> None:
        """Put a π on edge ``e``; two equal π's on one edge cancel."""
        d = self.d
        edge = d.edges[e]
        for end in (edge.a, edge.b):
            if end in self.out_index:
                c = _seen_from(d, e, color_a, end)
                self.outputs[self.out_index[end]][0 if c is Color.X else 1] ^= 1
                return
        if heading is None:
            # enter the later end, fusing rather than copying on a tie
            ends = [v for v in (edge.a, edge.b) if v not in d.boundaries]
            if not ends:
                raise PauliError(f"edge {e} joins two inputs")
            heading = min(ends, key=lambda v: (self.potential(v), _seen_from(d, e, color_a, v) is not d.spiders[v].color, -v))
        if heading in self.in_index:
            c = _seen_from(d, e, color_a, heading)
            self.inputs[self.in_index[heading]][0 if c is Color.X else 1] ^= 1
            return
        key = (e, color_a)
        if key in self.pending:
            del self.pending[key]
            return
        self.pending[key] = heading
        self.queue.append(key)

    def fuse(self, v: int, entry: int | None = None) -> None:
        """A π of v's own colour sits inside spider v, having come in on
        leg ``entry``."""
        d = self.d
        if v in self.leaves:
            self.flips[v] ^= 1
            return
        legs = [e for e in d.incident(v) if e != entry] or d.incident(v)
        e = min(legs, key=lambda e: (self.potential(d.edges[e].other(v)), e))
        u = d.edges[e].other(v)
        self.place(e, _as_a_frame(d, e, d.spiders[v].color, v), heading=u)

    def enter(self, e: int, color_a: Color, v: int) -> None:
        d = self.d
        s = d.spiders[v]
        c = _seen_from(d, e, color_a, v)
        if c is s.color:
            self.fuse(v, e)
            return
        # copy through the legs we did not come from
        for f in d.incident(v):
            if f == e:
                continue
            u = d.edges[f].other(v)
            self.place(f, _as_a_frame(d, f, c, v), heading=u)
        if s.phase % 2:
            self.corr ^= {v}
        elif s.phase % 4 == 2:
            self.fuse(v)

    def run(self, limit: int) -> None:
        steps = 0
        while self.queue:
            key = self.queue.popleft()
            if key not in self.pending:
                continue
            v = self.pending.pop(key)
            steps += 1
            if steps > limit:
                raise PauliError("π propagation did not settle")
            self.enter(key[0], key[1], v)

    def outcome(self) -> FaultOutcome:
        names = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
        return FaultOutcome(
            tuple(names[tuple(p)] for p in self.outputs),
            tuple(self.flips[v] for v in sorted(self.leaves)),
            tuple(sorted(self.corr)),
            tuple(names[tuple(p)] for p in self.inputs),
        )


def _start(p: _Push, f: FaultSite) -> None:
    d = p.d
    color = f.pauli.color
    if f.kind == "edge":
        if f.id not in d.edges:
            raise PauliError(f"no edge {f.id}")
        p.place(f.id, color)
        return
    if f.id not in d.spiders:
        raise PauliError(f"no spider {f.id}")
    v = f.id
    if d.spiders[v].color is color:
        p.fuse(v)
        return
    e = _site_leg(d, v)
    p.enter(e, _as_a_frame(d, e, color, v), v)


def propagate(d: ZXDiagram, f: FaultSite) -> FaultOutcome:
    """Flip pattern of a single Pauli fault. ``d`` is not modified."""
    p = _Push(d)
    _start(p, f)
    p.run(limit=64 * (len(d.edges) + 1))
    return p.outcome()


def compose(a: FaultOutcome, b: FaultOutcome) -> FaultOutcome:
    """Pauli-frame product of two outcomes on the same diagram."""
    def mul(p: str, q: str) -> str:
        x = (p in "XY") != (q in "XY")
        z = (p in "ZY") != (q in "ZY")
        return "Y" if x and z else "X" if x else "Z" if z else "I"

    return FaultOutcome(
        tuple(map(mul, a.output_flips, b.output_flips)),
        tuple(i ^ j for i, j in zip(a.detected_flips, b.detected_flips)),
        tuple(sorted(set(a.corrections) ^ set(b.corrections))),
        tuple(map(mul, a.input_flips, b.input_flips)),
    )


def propagate_many(d: ZXDiagram, faults: Iterable[FaultSite]) -> FaultOutcome:
    """Joint outcome of simultaneous faults, composed frame by frame.

    Pushing several π's at once can settle on a different but equivalent
    frame (the two differ by a stabiliser of ``d``); composing the single
    pushes keeps the result linear in the fault set.
    """
    out = _Push(d).outcome()
    for f in faults:
        out = compose(out, propagate(d, f))
    return out


def syndrome_map(d: ZXDiagram, sites: Iterable[FaultSite]) -> dict[FaultSite, FaultOutcome]:
    out: dict[FaultSite, FaultOutcome] = {}
    bad = []
    for f in sites:
        try:
            out[f] = propagate(d, f)
        except PauliError as exc:
            bad.append(f"{f.label}: {exc}")
    if bad:
        raise PauliError("; ".join(bad))
    return out


def default_sites(d: ZXDiagram, injection_only: bool = False) -> list[FaultSite]:
    """Both Paulis at every injection spider, plus every internal edge."""
    sites = [FaultSite("spider", v, p) for v in injection_spiders(d) for p in Pauli]
    if not injection_only:
        for e in sorted(d.edges):
            edge = d.edges[e]
            if edge.a in d.boundaries or edge.b in d.boundaries:
                continue
            sites += [FaultSite("edge", e, p) for p in Pauli]
    return sites


@dataclass
class IndependenceReport:
    collisions: list[tuple[FaultSite, FaultSite]]
    undetectable: list[FaultSite]

    @property
    def ok(self) -> bool:
        return not self.collisions and not self.undetectable


def check_independence(m: dict[FaultSite, FaultOutcome]) -> IndependenceReport:
    """Detected-flip patterns must be nonzero and pairwise distinct."""
    by_pattern: dict[tuple, list[FaultSite]] = {}
    undetectable = []
    for f in sorted(m):
        o = m[f]
        if not o.detectable:
            undetectable.append(f)
            continue
        by_pattern.setdefault(o.detected_flips, []).append(f)
    collisions = []
    for group in by_pattern.values():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                collisions.append((group[i], group[j]))
    return IndependenceReport(sorted(collisions), undetectable)


def report_tsv(m: dict[FaultSite, FaultOutcome]) -> str:
    buf = io.StringIO()
    buf.write("site\tpauli\toutput_flips\tdetected_flips\tdetectable\tcorrections\n")
    for f in sorted(m):
        o = m[f]
        buf.write(f"{f.kind[0]}{f.id}\t{f.pauli.value}\t{''.join(o.output_flips) or '-'}\t{o.pattern or '-'}\t"
                  f"{'yes' if o.detectable else 'no'}\t{','.join(map(str, o.corrections)) or '-'}\n")
    return buf.getvalue()


# -- semantic check -----------------------------------------------------

def _insert_pi(d: ZXDiagram, e: int, color: Color, near: int) -> tuple[int, int]:
    """Split edge ``e`` with a π of ``color`` (as seen from ``near``) next to
    ``near``. Returns the new (near-side, far-side) edges."""
    edge = d.edges[e]
    far = edge.other(near)
    d.remove_edge(e)
    s = d.add_spider(color, 4)
    return d.add_edge(near, s), d.add_edge(s, far, edge.tag)


def faulty(d: ZXDiagram, faults: FaultSite | Iterable[FaultSite]) -> ZXDiagram:
    """``d`` with the faults' π's inserted, for checking against the oracle."""
    if isinstance(faults, FaultSite):
        faults = [faults]
    g = d.copy()
    # original edge -> {end vertex: edge currently touching that end}
    ends: dict[int, dict[int, int]] = {}

    def insert(e: int, color: Color, near: int) -> None:
        cur = ends.setdefault(e, {d.edges[e].a: e, d.edges[e].b: e})
        other = d.edges[e].other(near)
        a, b = _insert_pi(g, cur[near], color, near)
        if cur[near] == cur[other]:
            cur[other] = b
        cur[near] = a

    for f in faults:
        color = f.pauli.color
        if f.kind == "edge":
            insert(f.id, color, d.edges[f.id].a)
        elif d.spiders[f.id].color is color:
            g.set_phase(f.id, g.spiders[f.id].phase + 4)
        else:
            insert(_site_leg(d, f.id), color, f.id)
    return g


def expected(d: ZXDiagram, o: FaultOutcome) -> ZXDiagram:
    """``d`` with the outcome applied: output Paulis, flipped leaves and
    negated T phases."""
    g = d.copy()
    for v, bit in zip(sorted(measurement_leaves(d)), o.detected_flips):
        if bit:
            g.set_phase(v, g.spiders[v].phase + 4)
    for v in o.corrections:
        g.set_phase(v, -g.spiders[v].phase)
    for bounds, flips in ((d.outputs, o.output_flips), (d.inputs, o.input_flips)):
        for b, flip in zip(bounds, flips):
            for ch, color in (("X", Color.X), ("Z", Color.Z)):
                if flip == ch or flip == "Y":
                    e = g.incident(b)[0]
                    _insert_pi(g, e, color, b)
    return g
