"""ZX-diagram data model.

Spiders carry a colour and an integer phase in units of pi/4 (mod 8).
Hadamards are an edge tag, not a node. Boundaries are dedicated degree-1
vertices listed in ``inputs`` / ``outputs``; a bare wire is an edge joining
an input boundary straight to an output boundary.

Vertex and edge identifiers come from monotone counters and are never
reused inside one diagram, so rewrite traces stay resolvable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

import networkx as nx
from networkx.algorithms.isomorphism import MultiGraphMatcher


class Color(str, Enum):
    Z = "Z"  # green
    X = "X"  # red

    @property
    def other(self) -> "Color":
        return Color.X if self is Color.Z else Color.Z


class EdgeTag(str, Enum):
    PLAIN = "Plain"
    HADAMARD = "Hadamard"

    def toggled(self) -> "EdgeTag":
        return EdgeTag.HADAMARD if self is EdgeTag.PLAIN else EdgeTag.PLAIN


@dataclass(frozen=True)
class Spider:
    color: Color
    phase: int = 0
    # origin labels ("inj:3", "meas:5", ...) carried through fusion
    tags: frozenset = frozenset()

    @property
    def is_odd(self) -> bool:
        return self.phase % 2 == 1

    @property
    def is_pauli(self) -> bool:
        return self.phase % 4 == 0


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    tag: EdgeTag = EdgeTag.PLAIN

    def other(self, v: int) -> int:
        return self.b if v == self.a else self.a

    @property
    def is_loop(self) -> bool:
        return self.a == self.b


@dataclass(frozen=True)
class DiagramStats:
    z_count: int = 0
    x_count: int = 0
    hadamard_count: int = 0
    t_count: int = 0
    s_count: int = 0
    edge_count: int = 0


class ZXError(ValueError):
    pass


class ZXDiagram:
    def __init__(self) -> None:
        self.spiders: dict[int, Spider] = {}
        self.boundaries: set[int] = set()
        self.edges: dict[int, Edge] = {}
        self.inputs: list[int] = []
        self.outputs: list[int] = []
        self._incident: dict[int, list[int]] = {}
        self._next_vertex = 0
        self._next_edge = 0
        self._journal: dict | None = None

    # -- journal -------------------------------------------------------
    # Records the pre-image of every vertex/edge touched since begin(), so a
    # speculative rewrite can be scored and rolled back cheaply.
    def begin(self) -> None:
        self._journal = {"v": {}, "e": {}, "counters": (self._next_vertex, self._next_edge)}

    def commit(self) -> dict:
        j, self._journal = self._journal, None
        return j

    def rollback(self) -> None:
        j, self._journal = self._journal, None
        for e, old in j["e"].items():
            if old is None:
                self.edges.pop(e, None)
            else:
                self.edges[e] = old
        for v, (spider, inc) in j["v"].items():
            if spider is None:
                self.spiders.pop(v, None)
            else:
                self.spiders[v] = spider
            if inc is None:
                self._incident.pop(v, None)
            else:
                self._incident[v] = inc
        self._next_vertex, self._next_edge = j["counters"]

    def touched(self) -> tuple[dict, dict]:
        """(vertex pre-images, edge pre-images) recorded so far."""
        return self._journal["v"], self._journal["e"]

    def _tv(self, v: int) -> None:
        if self._journal is not None and v not in self._journal["v"]:
            inc = self._incident.get(v)
            self._journal["v"][v] = (self.spiders.get(v), None if inc is None else list(inc))

    def _te(self, e: int) -> None:
        if self._journal is not None and e not in self._journal["e"]:
            self._journal["e"][e] = self.edges.get(e)

    # -- construction -------------------------------------------------
    def add_spider(self, color: Color, phase: int = 0, tags: Iterable[str] = ()) -> int:
        v = self._next_vertex
        self._next_vertex += 1
        self._tv(v)
        self.spiders[v] = Spider(Color(color), phase % 8, frozenset(tags))
        self._incident[v] = []
        return v

    def add_boundary(self, kind: str) -> int:
        v = self._next_vertex
        self._next_vertex += 1
        self.boundaries.add(v)
        self._incident[v] = []
        if kind == "in":
            self.inputs.append(v)
        elif kind == "out":
            self.outputs.append(v)
        else:
            raise ZXError(f"unknown boundary kind {kind!r}")
        return v

    def add_edge(self, a: int, b: int, tag: EdgeTag = EdgeTag.PLAIN) -> int:
        for v in (a, b):
            if v not in self._incident:
                raise ZXError(f"no vertex {v}")
        e = self._next_edge
        self._next_edge += 1
        self._te(e)
        self._tv(a)
        self._tv(b)
        self.edges[e] = Edge(a, b, EdgeTag(tag))
        self._incident[a].append(e)
        if b != a:
            self._incident[b].append(e)
        return e

    def remove_edge(self, e: int) -> Edge:
        self._te(e)
        edge = self.edges[e]
        self._tv(edge.a)
        self._tv(edge.b)
        del self.edges[e]
        self._incident[edge.a].remove(e)
        if edge.b != edge.a:
            self._incident[edge.b].remove(e)
        return edge

    def remove_spider(self, v: int) -> Spider:
        for e in list(self._incident[v]):
            self.remove_edge(e)
        self._tv(v)
        del self._incident[v]
        return self.spiders.pop(v)

    def set_phase(self, v: int, phase: int) -> None:
        self._tv(v)
        s = self.spiders[v]
        self.spiders[v] = Spider(s.color, phase % 8, s.tags)

    def set_color(self, v: int, color: Color) -> None:
        self._tv(v)
        s = self.spiders[v]
        self.spiders[v] = Spider(color, s.phase, s.tags)

    def add_tags(self, v: int, tags: Iterable[str]) -> None:
        self._tv(v)
        s = self.spiders[v]
        self.spiders[v] = Spider(s.color, s.phase, s.tags | frozenset(tags))

    def set_edge_tag(self, e: int, tag: EdgeTag) -> None:
        self._te(e)
        old = self.edges[e]
        self.edges[e] = Edge(old.a, old.b, tag)

    def retarget_edge(self, e: int, old: int, new: int) -> None:
        """Move the ``old`` endpoint of edge ``e`` onto vertex ``new``."""
        edge = self.edges[e]
        a, b = edge.a, edge.b
        self.remove_edge(e)
        if a == b == old:
            a = b = new
        elif a == old:
            a = new
        elif b == old:
            b = new
        else:
            raise ZXError(f"edge {e} does not touch {old}")
        self._tv(a)
        self._tv(b)
        self.edges[e] = Edge(a, b, edge.tag)
        self._incident[a].append(e)
        if b != a:
            self._incident[b].append(e)
        self._incident[a].sort()
        self._incident[b].sort()

    # -- queries ------------------------------------------------------
    def vertices(self) -> Iterator[int]:
        return iter(sorted(self._incident))

    def incident(self, v: int) -> list[int]:
        return list(self._incident[v])

    def legs(self, v: int) -> list[int]:
        """Edge ids at ``v``, a self-loop listed twice."""
        out = []
        for e in self._incident[v]:
            out.append(e)
            if self.edges[e].is_loop:
                out.append(e)
        return out

    def degree(self, v: int) -> int:
        return len(self.legs(v))

    def neighbors(self, v: int) -> list[int]:
        return [self.edges[e].other(v) for e in self._incident[v]]

    def edges_between(self, u: int, v: int) -> list[int]:
        return [e for e in self._incident[u] if self.edges[e].other(u) == v]

    def is_boundary(self, v: int) -> bool:
        return v in self.boundaries

    def copy(self) -> "ZXDiagram":
        if self._journal is not None:
            raise ZXError("cannot copy a diagram with an open journal")
        new = ZXDiagram.__new__(ZXDiagram)
        new.spiders = dict(self.spiders)
        new.boundaries = set(self.boundaries)
        new.edges = dict(self.edges)
        new.inputs = list(self.inputs)
        new.outputs = list(self.outputs)
        new._incident = {v: list(inc) for v, inc in self._incident.items()}
        new._next_vertex = self._next_vertex
        new._next_edge = self._next_edge
        new._journal = None
        return new

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ZXDiagram):
            return NotImplemented
        return (
            self.spiders == other.spiders
            and self.boundaries == other.boundaries
            and self.edges == other.edges
            and self.inputs == other.inputs
            and self.outputs == other.outputs
        )

    def __repr__(self) -> str:
        return (
            f"ZXDiagram({len(self.spiders)} spiders, {len(self.edges)} edges, "
            f"{len(self.inputs)} in, {len(self.outputs)} out)"
        )

    # -- interchange --------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "spiders": [
                {"id": v, "color": s.color.value, "phase8": s.phase, "tags": sorted(s.tags)}
                for v, s in sorted(self.spiders.items())
            ],
            "edges": [
                {"id": e, "a": edge.a, "b": edge.b, "tag": edge.tag.value}
                for e, edge in sorted(self.edges.items())
            ],
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ZXDiagram":
        d = cls()
        for s in doc["spiders"]:
            v = int(s["id"])
            d.spiders[v] = Spider(Color(s["color"]), int(s["phase8"]), frozenset(s.get("tags", ())))
            d._incident[v] = []
        for kind, ids in (("in", doc["inputs"]), ("out", doc["outputs"])):
            for v in ids:
                v = int(v)
                if v in d._incident:
                    raise ZXError(f"boundary {v} collides with a spider id")
                d.boundaries.add(v)
                d._incident[v] = []
                (d.inputs if kind == "in" else d.outputs).append(v)
        d._next_vertex = max(d._incident, default=-1) + 1
        for i, e in enumerate(doc["edges"]):
            eid = int(e.get("id", i))
            a, b = int(e["a"]), int(e["b"])
            for v in (a, b):
                if v not in d._incident:
                    # keep dangling refs so validate() can report them
                    d._incident.setdefault(v, [])
            d.edges[eid] = Edge(a, b, EdgeTag(e["tag"]))
            d._incident[a].append(eid)
            if b != a:
                d._incident[b].append(eid)
            d._next_edge = max(d._next_edge, eid + 1)
        for v in d._incident:
            d._incident[v].sort()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ZXDiagram":
        return cls.from_dict(json.loads(text))


def stats(d: ZXDiagram) -> DiagramStats:
    z = sum(1 for s in d.spiders.values() if s.color is Color.Z)
    return DiagramStats(
        z_count=z,
        x_count=len(d.spiders) - z,
        hadamard_count=sum(1 for e in d.edges.values() if e.tag is EdgeTag.HADAMARD),
        t_count=sum(1 for s in d.spiders.values() if s.is_odd),
        s_count=sum(1 for s in d.spiders.values() if s.phase % 4 == 2),
        edge_count=len(d.edges),
    )


def validate(d: ZXDiagram) -> list[str]:
    """Return every invariant violation found; an empty list means ok."""
    problems: list[str] = []
    known = set(d.spiders) | d.boundaries
    for v, s in sorted(d.spiders.items()):
        if not isinstance(s.phase, int) or not 0 <= s.phase < 8:
            problems.append(f"spider {v}: phase out of range ({s.phase})")
        if v in d.boundaries:
            problems.append(f"vertex {v} is both spider and boundary")
    for e, edge in sorted(d.edges.items()):
        for v in (edge.a, edge.b):
            if v not in known:
                problems.append(f"edge {e}: dangling edge to {v}")
        if edge.is_loop and edge.a in d.boundaries:
            problems.append(f"edge {e}: self-loop on boundary {edge.a}")
    for v in sorted(d.boundaries):
        deg = sum(1 for edge in d.edges.values() if v in (edge.a, edge.b))
        if deg != 1:
            problems.append(f"boundary {v}: degree {deg}, expected 1")
    listed = d.inputs + d.outputs
    if len(set(listed)) != len(listed):
        problems.append("boundary listed more than once")
    if set(listed) != d.boundaries:
        problems.append("boundary set does not match inputs/outputs lists")
    for e, edge in d.edges.items():
        for v in (edge.a, edge.b):
            if v in d._incident and e not in d._incident[v]:
                problems.append(f"edge {e}: incidence index out of sync at {v}")
    return problems


def _as_multigraph(d: ZXDiagram) -> nx.MultiGraph:
    g = nx.MultiGraph()
    for v, s in d.spiders.items():
        g.add_node(v, label=(s.color.value, s.phase))
    for i, v in enumerate(d.inputs):
        g.add_node(v, label=("in", i))
    for i, v in enumerate(d.outputs):
        g.add_node(v, label=("out", i))
    for e, edge in d.edges.items():
        g.add_edge(edge.a, edge.b, tag=edge.tag.value)
    return g


def graph_isomorphic(a: ZXDiagram, b: ZXDiagram) -> bool:
    """Boundary-respecting isomorphism test preserving colour, phase and edge tags."""
    if stats(a) != stats(b) or len(a.inputs) != len(b.inputs) or len(a.outputs) != len(b.outputs):
        return False
    ga, gb = _as_multigraph(a), _as_multigraph(b)

    def edge_match(x: dict, y: dict) -> bool:
        return sorted(t["tag"] for t in x.values()) == sorted(t["tag"] for t in y.values())

    gm = MultiGraphMatcher(ga, gb, node_match=lambda x, y: x["label"] == y["label"], edge_match=edge_match)
    return gm.is_isomorphic()
