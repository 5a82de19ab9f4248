"""Reading a ZX-diagram as a braided defect structure.

Spiders become qubits: red spiders are primal defect pairs, green spiders
dual defect pairs. An edge between spiders of different colour is a braid,
an edge between spiders of the same colour is a junction, and a Hadamard
edge is a link through a Hadamard region whatever the colours.

Leaves and degree-2 spiders that sit between other spiders are not qubits
of their own: they become local operations, state preparations,
measurements or injection sites. Spiders touching a boundary always count
as qubits, since the qubit has to leave the structure.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .zx import Color, EdgeTag, ZXDiagram, ZXError, validate


class BNodeKind(str, Enum):
    PRIMAL = "PrimalQubit"
    DUAL = "DualQubit"
    INJECTION_S = "InjectionS"
    INJECTION_T = "InjectionT"
    LOCAL_OP = "LocalOp"
    STATE_INIT = "StateInit"
    MEASURE = "Measure"

    @property
    def is_qubit(self) -> bool:
        return self in (BNodeKind.PRIMAL, BNodeKind.DUAL)

    @property
    def is_injection(self) -> bool:
        return self in (BNodeKind.INJECTION_S, BNodeKind.INJECTION_T)


class BEdgeKind(str, Enum):
    BRAID = "Braid"
    JUNCTION = "Junction"
    HADAMARD_LINK = "HadamardLink"
    ATTACH = "Attach"  # qubit to its own injection pyramid


class Mode(str, Enum):
    BRAID_ONLY = "BraidOnly"
    HYBRID = "Hybrid"


class BraidError(ZXError):
    pass


@dataclass(frozen=True)
class BNode:
    id: int
    kind: BNodeKind
    src: int  # spider id
    color: Color


@dataclass(frozen=True)
class BEdge:
    a: int
    b: int
    kind: BEdgeKind
    src: int | None = None  # ZX edge id; None for attachments


@dataclass
class BraidStructure:
    bnodes: list[BNode] = field(default_factory=list)
    bedges: list[BEdge] = field(default_factory=list)
    # (bnode id or None, ZX edge id, "in"/"out", position): edges that end
    # on a boundary. A bare wire has no bnode.
    ports: list[tuple] = field(default_factory=list)
    mode: Mode = Mode.BRAID_ONLY
    # Hybrid only: qubit bnode -> (braid-region edges, surgery-region edges)
    splits: dict[int, tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=dict)

    def node(self, i: int) -> BNode:
        return self.bnodes[i]

    def qubits(self) -> list[BNode]:
        return [n for n in self.bnodes if n.kind.is_qubit]

    def incident(self, i: int) -> list[int]:
        return [k for k, e in enumerate(self.bedges) if i in (e.a, e.b)]

    def port_nodes(self) -> set[int]:
        return {p[0] for p in self.ports if p[0] is not None}

    def to_dict(self) -> dict:
        doc = {
            "bnodes": [{"id": n.id, "kind": n.kind.value, "src": n.src, "color": n.color.value} for n in self.bnodes],
            "bedges": [{"a": e.a, "b": e.b, "kind": e.kind.value, "src": e.src} for e in self.bedges],
            "ports": [{"bnode": p[0], "edge": p[1], "side": p[2], "index": p[3]} for p in self.ports],
            "mode": self.mode.value,
        }
        if self.splits:
            doc["splits"] = [{"bnode": k, "braid": list(v[0]), "surgery": list(v[1])} for k, v in sorted(self.splits.items())]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "BraidStructure":
        nodes = [BNode(n["id"], BNodeKind(n["kind"]), n["src"], Color(n.get("color", "Z"))) for n in doc["bnodes"]]
        edges = [BEdge(e["a"], e["b"], BEdgeKind(e["kind"]), e.get("src")) for e in doc["bedges"]]
        ports = [(p["bnode"], p["edge"], p["side"], p["index"]) for p in doc.get("ports", [])]
        splits = {s["bnode"]: (tuple(s["braid"]), tuple(s["surgery"])) for s in doc.get("splits", [])}
        return cls(nodes, edges, ports, Mode(doc.get("mode", "BraidOnly")), splits)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "BraidStructure":
        return cls.from_dict(json.loads(text))


def _injection_kind(phase: int) -> BNodeKind | None:
    if phase % 2:
        return BNodeKind.INJECTION_T
    if phase % 4 == 2:
        return BNodeKind.INJECTION_S
    return None


def _leaf_kind(d: ZXDiagram, v: int) -> BNodeKind:
    s = d.spiders[v]
    inj = _injection_kind(s.phase)
    if inj is not None:
        return inj
    if any(t.startswith("meas:") for t in s.tags):
        return BNodeKind.MEASURE
    if d.degree(v) <= 1:
        return BNodeKind.STATE_INIT
    return BNodeKind.LOCAL_OP


def zx_to_braid(d: ZXDiagram, mode: Mode | str = Mode.BRAID_ONLY) -> BraidStructure:
    """Deterministic translation; bnode ids follow ascending spider ids."""
    mode = Mode(mode)
    problems = validate(d)
    if problems:
        raise BraidError("invalid diagram: " + "; ".join(problems))
    for v, s in d.spiders.items():
        if not 0 <= s.phase < 8:
            raise BraidError(f"unsupported phase {s.phase} on spider {v}")

    b = BraidStructure(mode=mode)
    primary: dict[int, int] = {}
    for v in sorted(d.spiders):
        s = d.spiders[v]
        on_boundary = any(u in d.boundaries for u in d.neighbors(v))
        if d.degree(v) >= 3 or on_boundary:
            kind = BNodeKind.PRIMAL if s.color is Color.X else BNodeKind.DUAL
            primary[v] = len(b.bnodes)
            b.bnodes.append(BNode(len(b.bnodes), kind, v, s.color))
            inj = _injection_kind(s.phase)
            if inj is not None:
                # the pyramid pair hangs off the qubit it feeds
                k = len(b.bnodes)
                b.bnodes.append(BNode(k, inj, v, s.color))
                b.bedges.append(BEdge(primary[v], k, BEdgeKind.ATTACH))
        else:
            primary[v] = len(b.bnodes)
            b.bnodes.append(BNode(len(b.bnodes), _leaf_kind(d, v), v, s.color))

    for e in sorted(d.edges):
        edge = d.edges[e]
        ba, bb = edge.a in d.boundaries, edge.b in d.boundaries
        if ba or bb:
            for end, other in ((edge.a, edge.b), (edge.b, edge.a)):
                if end in d.boundaries:
                    side = "in" if end in d.inputs else "out"
                    idx = (d.inputs if side == "in" else d.outputs).index(end)
                    b.ports.append((primary.get(other), e, side, idx))
            continue
        if edge.tag is EdgeTag.HADAMARD:
            kind = BEdgeKind.HADAMARD_LINK
        elif d.spiders[edge.a].color is d.spiders[edge.b].color:
            kind = BEdgeKind.JUNCTION
        else:
            kind = BEdgeKind.BRAID
        b.bedges.append(BEdge(primary[edge.a], primary[edge.b], kind, e))

    if mode is Mode.HYBRID:
        for n in b.bnodes:
            if not n.kind.is_qubit:
                continue
            inc = b.incident(n.id)
            if len(inc) <= 4:
                continue
            # S1 division: same-colour links go to a surgery region
            braid = tuple(k for k in inc if b.bedges[k].kind is not BEdgeKind.JUNCTION)
            surgery = tuple(k for k in inc if b.bedges[k].kind is BEdgeKind.JUNCTION)
            if surgery:
                b.splits[n.id] = (braid, surgery)
    return b
