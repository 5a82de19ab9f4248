"""3D layouts of braided structures and their bounding-box volumes.

Coordinates live on a grid of pitch d/2. Two kinds of layout exist:

* ``direct_translate`` lays a circuit out gate by gate: one defect-pair lane
  per wire, 1.5 d deep and 1 d wide, with time running along z. Each gate
  kind holds its wires for a fixed time (``Calibration.durations``) and gates
  are scheduled as soon as their wires are free.
* ``layout`` packs a :class:`BraidStructure` into a box of d-sized voxels.
  Every bnode owns a connected set of voxels (its region); an edge is
  realised where the two regions share a voxel face. Regions may grow
  beyond their minimum size to reach a neighbour, which stands in for
  routing a pipe.

A voxel is 2x2x2 grid units and a defect is drawn along voxel centres, so
distinct defects in distinct voxels are always at least 2 grid units apart.
"""
from __future__ import annotations

import itertools
import json
import math
import random
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction

from .braid import BEdgeKind, BNodeKind, BraidStructure, Mode
from .circuit import Circuit, GateKind

PITCH = Fraction(1, 2)
RESCALE = Fraction(25, 16)
ENCLOSURE_WEIGHT = 2
COMPACT_CAP = 4  # compact probes stop at this multiple of the cell count

Voxel = tuple[int, int, int]


class LayoutError(ValueError):
    pass


class Search(str, Enum):
    EXHAUSTIVE = "exhaustive"
    ANNEALED = "anneal"


def _gate_class(kind: GateKind) -> str:
    if kind.is_init:
        return "init"
    if kind.is_measure:
        return "meas"
    if kind is GateKind.CNOT:
        return "cnot"
    if kind in (GateKind.T, GateKind.TDG):
        return "t"
    if kind in (GateKind.S, GateKind.SDG):
        return "s"
    if kind is GateKind.H:
        return "h"
    return "pauli"


@dataclass(frozen=True)
class Calibration:
    """Footprint constants, all in units of d.

    The defaults were fitted once so that the direct translation of the
    bundled distillation circuits has volumes 108 and 360; T gates carry
    their S-correction window, Pauli gates are tracked in the frame.
    """

    lane_depth: Fraction = Fraction(3, 2)
    lane_pitch: Fraction = Fraction(1)
    min_time: Fraction = Fraction(1)
    durations: tuple = (
        ("cnot", Fraction(1, 2)),
        ("t", Fraction(3)),
        ("s", Fraction(1)),
        ("h", Fraction(2)),
        ("init", Fraction(5, 2)),
        ("meas", Fraction(5, 2)),
        ("pauli", Fraction(0)),
    )
    # reduced layouts, in voxels
    faces_per_extra_cell: int = 4
    injection_cells: int = 2  # a pyramid pair
    t_correction_cells: int = 1
    local_cells: int = 1
    hadamard_cells: int = 1

    def duration(self, kind: GateKind) -> Fraction:
        return dict(self.durations)[_gate_class(kind)]


DEFAULT_CALIBRATION = Calibration()


@dataclass(frozen=True)
class Cell:
    """Axis-aligned pipe segment (or point) in grid units, owned by a defect."""

    defect: str
    x0: int
    y0: int
    z0: int
    x1: int
    y1: int
    z1: int

    def gap(self, o: "Cell") -> int:
        """L-infinity distance between the two segments."""
        g = 0
        for a0, a1, b0, b1 in ((self.x0, self.x1, o.x0, o.x1), (self.y0, self.y1, o.y0, o.y1), (self.z0, self.z1, o.z0, o.z1)):
            g = max(g, b0 - a1, a0 - b1)
        return g


@dataclass
class Layout3D:
    cells: list[Cell]
    bbox: tuple[int, int, int]  # grid units
    axes: tuple[str, str, str] = ("space", "space", "time")
    regions: dict[int, list[Voxel]] = field(default_factory=dict)
    links: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def dims(self) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(PITCH * n for n in self.bbox)

    def to_dict(self) -> dict:
        dx, dy, dz = self.bbox
        doc = {
            "pitch": float(PITCH),
            "cells": [{"defect": c.defect, "x0": c.x0, "y0": c.y0, "z0": c.z0, "x1": c.x1, "y1": c.y1, "z1": c.z1} for c in self.cells],
            "bbox": {"dx": dx, "dy": dy, "dz": dz},
            "axes": list(self.axes),
        }
        if self.regions:
            doc["regions"] = [{"bnode": k, "voxels": [list(p) for p in v]} for k, v in sorted(self.regions.items())]
        if self.links:
            doc["links"] = self.links
        if self.meta:
            doc["meta"] = self.meta
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Layout3D":
        if float(doc.get("pitch", 0.5)) != float(PITCH):
            raise LayoutError(f"unsupported pitch {doc.get('pitch')}")
        cells = [Cell(c["defect"], c["x0"], c["y0"], c["z0"], c["x1"], c["y1"], c["z1"]) for c in doc["cells"]]
        bb = doc["bbox"]
        regions = {r["bnode"]: [tuple(p) for p in r["voxels"]] for r in doc.get("regions", [])}
        return cls(cells, (bb["dx"], bb["dy"], bb["dz"]), tuple(doc.get("axes", ("space", "space", "time"))),
                   regions, list(doc.get("links", [])), dict(doc.get("meta", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Layout3D":
        return cls.from_dict(json.loads(text))


# -- volume accounting --------------------------------------------------

@dataclass(frozen=True)
class Orientation:
    time_axis: int
    timesteps: Fraction
    qubits: Fraction


@dataclass(frozen=True)
class VolumeReport:
    dims: tuple[Fraction, Fraction, Fraction]
    volume: Fraction
    rescaled_volume: Fraction
    orientations: tuple[Orientation, ...]

    @property
    def rescaled_display(self) -> int:
        """Rescaled volume rounded half up, as printed in reports."""
        return math.floor(self.rescaled_volume + Fraction(1, 2))

    def variants(self) -> set[tuple[Fraction, Fraction]]:
        return {(o.timesteps, o.qubits) for o in self.orientations}

    def to_dict(self) -> dict:
        return {
            "dims": [_num(x) for x in self.dims],
            "volume": _num(self.volume),
            "rescaled_volume": _num(self.rescaled_volume),
            "rescaled_display": self.rescaled_display,
            "orientations": [{"time_axis": "xyz"[o.time_axis], "timesteps": _num(o.timesteps), "qubits": _num(o.qubits)} for o in self.orientations],
        }


def _num(x: Fraction):
    return int(x) if x.denominator == 1 else float(x)


def volume(layout: Layout3D) -> VolumeReport:
    dims = layout.dims
    vol = dims[0] * dims[1] * dims[2]
    orients = []
    for t in range(3):
        others = [dims[i] for i in range(3) if i != t]
        orients.append(Orientation(t, dims[t], others[0] * others[1]))
    return VolumeReport(dims, vol, vol * RESCALE, tuple(orients))


# -- direct translation -------------------------------------------------

def schedule(c: Circuit, cal: Calibration = DEFAULT_CALIBRATION) -> tuple[Fraction, list[tuple]]:
    """As-soon-as-possible schedule: (makespan, [(gate, start, end)])."""
    busy = [Fraction(0)] * c.num_wires
    out = []
    for g in c.gates:
        start = max(busy[w] for w in g.targets)
        end = start + cal.duration(g.kind)
        for w in g.targets:
            busy[w] = end
        out.append((g, start, end))
    return max(busy, default=Fraction(0)), out


def direct_translate(c: Circuit, cal: Calibration = DEFAULT_CALIBRATION) -> Layout3D:
    makespan, _ = schedule(c, cal)
    span = max(makespan, cal.min_time)
    dx, dy, dz = (int(v / PITCH) for v in (cal.lane_depth, cal.lane_pitch * c.num_wires, span))
    lane = int(cal.lane_pitch / PITCH)
    cells = []
    for w in range(c.num_wires):
        y = w * lane + lane // 2
        cells.append(Cell(f"w{w}", dx // 2, y, 0, dx // 2, y, dz))
    meta = {"kind": "direct", "makespan": str(makespan)}
    return Layout3D(cells, (dx, dy, dz), ("space", "space", "time"), meta=meta)


# -- region requirements ------------------------------------------------

def region_sizes(b: BraidStructure, cal: Calibration = DEFAULT_CALIBRATION) -> dict[int, int]:
    """Minimum voxel count per bnode; 0 means folded into its neighbour."""
    deg = {n.id: 0 for n in b.bnodes}
    had = {n.id: 0 for n in b.bnodes}
    for e in b.bedges:
        if e.a == e.b:
            continue
        deg[e.a] += 1
        deg[e.b] += 1
        if e.kind is BEdgeKind.HADAMARD_LINK:
            had[min(e.a, e.b)] += 1
    sizes = {}
    for n in b.bnodes:
        k = n.kind
        if k.is_qubit:
            # a bar of L voxels offers 4L+2 faces, one per incident edge
            size = max(1, math.ceil(max(0, deg[n.id] - 2) / cal.faces_per_extra_cell))
        elif k.is_injection:
            size = cal.injection_cells + (cal.t_correction_cells if k is BNodeKind.INJECTION_T else 0)
        elif b.mode is Mode.HYBRID and deg[n.id] <= 1:
            size = 0  # a local operation inside its neighbour's pipe
        else:
            size = cal.local_cells
        sizes[n.id] = size + had[n.id] * cal.hadamard_cells
    return sizes


def _contact_requirements(b: BraidStructure, sizes: dict[int, int]) -> dict[int, dict[int, int]]:
    need: dict[int, dict[int, int]] = {n.id: {} for n in b.bnodes}
    for e in b.bedges:
        if e.a == e.b or sizes[e.a] == 0 or sizes[e.b] == 0:
            continue
        need[e.a][e.b] = need[e.a].get(e.b, 0) + 1
        need[e.b][e.a] = need[e.b].get(e.a, 0) + 1
    return need


# -- voxel boxes --------------------------------------------------------

class _Box:
    def __init__(self, dims: tuple[int, int, int]):
        self.dims = dims
        X, Y, Z = dims
        self.n = X * Y * Z
        self.coords = [(i, j, k) for i in range(X) for j in range(Y) for k in range(Z)]
        nb = []
        surface = []
        for i, j, k in self.coords:
            lst = []
            for di, dj, dk in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)):
                a, b_, c = i + di, j + dj, k + dk
                if 0 <= a < X and 0 <= b_ < Y and 0 <= c < Z:
                    lst.append((a * Y + b_) * Z + c)
            nb.append(tuple(lst))
            surface.append(i in (0, X - 1) or j in (0, Y - 1) or k in (0, Z - 1))
        self.nb = nb
        self.surface = surface


def _contacts(box: _Box, ra, rb_set) -> int:
    return sum(1 for p in ra for q in box.nb[p] if q in rb_set)


def _orient_cost(dims, w: Fraction):
    """Best (cost, time axis) for a box: qubits + w * timesteps."""
    best = None
    for t in range(3):
        others = [dims[i] for i in range(3) if i != t]
        cost = others[0] * others[1] + w * dims[t]
        if best is None or (cost, t) < best:
            best = (cost, t)
    return best


def _candidate_boxes(lower: int, upper: int, w: Fraction, max_aspect: int = 8):
    out = []
    for a in range(1, upper + 1):
        if a * a * a > upper:
            break
        for b_ in range(a, upper // a + 1):
            if a * b_ * b_ > upper:
                break
            for c in range(b_, upper // (a * b_) + 1):
                v = a * b_ * c
                if v < lower or c > max_aspect * a:
                    continue
                out.append(((v, _orient_cost((a, b_, c), w)[0], (a, b_, c)), (a, b_, c)))
    out.sort()
    return [dims for _, dims in out]


# -- exhaustive compact search ------------------------------------------

def _bars(box: _Box, anchor: int, size: int):
    """Straight bars of ``size`` voxels containing ``anchor``."""
    if size == 1:
        yield (anchor,)
        return
    X, Y, Z = box.dims
    i, j, k = box.coords[anchor]
    seen = set()
    for axis, extent in enumerate((X, Y, Z)):
        pos = (i, j, k)[axis]
        for start in range(pos - size + 1, pos + 1):
            if start < 0 or start + size > extent:
                continue
            cells = []
            for s in range(start, start + size):
                c = [i, j, k]
                c[axis] = s
                cells.append((c[0] * Y + c[1]) * Z + c[2])
            t = tuple(sorted(cells))
            if t not in seen:
                seen.add(t)
                yield t


def _exhaustive_box(b, sizes, need, ports, dims, limit):
    """Complete search for a placement with every contact realised by a
    face between fixed-size straight bars. Returns regions, False, or None
    when the node budget ran out."""
    box = _Box(dims)
    nodes = [i for i in sizes if sizes[i] > 0]
    order: list[int] = []
    seen: set = set()
    while len(order) < len(nodes):
        start = max((v for v in nodes if v not in seen), key=lambda v: (len(need[v]), sizes[v], -v))
        q = deque([start])
        while q:
            v = q.popleft()
            if v in seen:
                continue
            seen.add(v)
            order.append(v)
            q.extend(sorted((u for u in need[v] if u not in seen), key=lambda u: (-len(need[u]), u)))
    owner = [-1] * box.n
    regions: dict[int, tuple] = {}
    count = [0]
    X, Y, Z = dims
    first_anchors = [((i * Y) + j) * Z + k for i in range((X + 1) // 2) for j in range((Y + 1) // 2) for k in range((Z + 1) // 2)]

    def free_faces(reg) -> int:
        return sum(1 for p in reg for q in box.nb[p] if owner[q] == -1)

    def rec(idx: int) -> bool:
        count[0] += 1
        if count[0] > limit:
            raise TimeoutError
        if idx == len(order):
            return True
        v = order[idx]
        placed = [u for u in need[v] if u in regions]
        if placed:
            near = sorted({q for p in regions[placed[0]] for q in box.nb[p] if owner[q] == -1})
        elif idx == 0:
            near = first_anchors
        else:
            near = [p for p in range(box.n) if owner[p] == -1]
        tried = set()
        for anchor in near:
            for bar in _bars(box, anchor, sizes[v]):
                if bar in tried or any(owner[p] != -1 for p in bar):
                    continue
                tried.add(bar)
                if v in ports and not any(box.surface[p] for p in bar):
                    continue
                for p in bar:
                    owner[p] = v
                ok = all(_contacts(box, bar, set(regions[u])) >= need[v][u] for u in placed)
                if ok:
                    # every placed region must keep faces for its missing contacts
                    for u in placed + [v]:
                        reg = bar if u == v else regions[u]
                        missing = sum(m for w_, m in need[u].items() if w_ not in regions and w_ != v)
                        if free_faces(reg) < missing:
                            ok = False
                            break
                if ok:
                    regions[v] = bar
                    if rec(idx + 1):
                        return True
                    del regions[v]
                for p in bar:
                    owner[p] = -1
        return False

    try:
        found = rec(0)
    except TimeoutError:
        return None
    if not found:
        return False
    return {v: [box.coords[p] for p in reg] for v, reg in regions.items()}


# -- annealed placement -------------------------------------------------

class _Placer:
    """Simulated annealing over bar placements in a fixed box.

    Energy is the total contact shortfall: for each required contact, the
    L1 gap between the two bars (0 when they touch), plus one for each
    missing parallel contact and one per port bar off the box surface.
    Moves relocate a bar next to a neighbour, turn it, or swap two bars of
    equal length. Leftover gaps are closed afterwards by _Grower.
    """

    def __init__(self, dims, sizes, need, ports, rng):
        self.dims = dims
        self.sizes = sizes
        self.need = need
        self.ports = ports
        self.rng = rng
        self.nodes = sorted(v for v in sizes if sizes[v] > 0)
        self.occ: dict[Voxel, int] = {}
        self.bar: dict[int, tuple[Voxel, ...]] = {}
        self.stack = []

    # geometry
    def inside(self, p) -> bool:
        X, Y, Z = self.dims
        return 0 <= p[0] < X and 0 <= p[1] < Y and 0 <= p[2] < Z

    def make_bar(self, anchor, axis, size):
        cells = []
        for s in range(size):
            q = list(anchor)
            q[axis] += s
            cells.append(tuple(q))
        return tuple(cells)

    def on_surface(self, cells) -> bool:
        return any(c == 0 or c == n - 1 for p in cells for c, n in zip(p, self.dims))

    def pair_cost(self, a, b, mult) -> int:
        dist, faces = _dist_faces(a, b)
        if dist > 1:
            return (dist - 1) * mult
        return max(0, mult - faces)

    def shortfall(self, w) -> int:
        """Contacts of ``w`` still missing, counted with multiplicity."""
        s = 0
        bw = self.bar[w]
        for u, m in self.need[w].items():
            if u in self.bar:
                bu = self.bar[u]
                s += max(0, m - self._faces(bw, bu))
        return s

    def _faces(self, a, b) -> int:
        return _dist_faces(a, b)[1]

    def free_faces(self, w) -> int:
        X, Y, Z = self.dims
        occ = self.occ
        n = 0
        for q0, q1, q2 in (q for p in self.bar[w] for q in _face_nbrs(p)):
            if 0 <= q0 < X and 0 <= q1 < Y and 0 <= q2 < Z and (q0, q1, q2) not in occ:
                n += 1
        return n

    def pen(self, w) -> int:
        # a region with fewer free faces than missing contacts cannot be routed
        return ENCLOSURE_WEIGHT * max(0, self.shortfall(w) - self.free_faces(w))

    def local(self, S, A) -> int:
        e = 0
        for v in S:
            for u, m in self.need[v].items():
                if u in self.bar and (u not in S or u > v):
                    e += self.pair_cost(self.bar[v], self.bar[u], m)
            if v in self.ports and not self.on_surface(self.bar[v]):
                e += 1
        return e + sum(self.pen(w) for w in A)

    def affected(self, S, cell_sets) -> set:
        A = set(S)
        for v in S:
            A.update(u for u in self.need[v] if u in self.bar)
        for cells in cell_sets:
            for p in cells:
                for q in _face_nbrs(p):
                    w = self.occ.get(q)
                    if w is not None:
                        A.add(w)
        return A

    def node_cost(self, v, cells) -> int:
        e = 0
        for u, m in self.need[v].items():
            if u in self.bar:
                e += self.pair_cost(cells, self.bar[u], m)
        if v in self.ports and not self.on_surface(cells):
            e += 1
        return e

    def energy(self) -> int:
        return self.local(set(self.bar), set(self.bar))

    def fits(self, cells, v) -> bool:
        return all(self.inside(p) and self.occ.get(p, v) == v for p in cells)

    def put(self, v, cells):
        for p in self.bar.get(v, ()):
            del self.occ[p]
        self.bar[v] = cells
        for p in cells:
            self.occ[p] = v

    def swap(self, u, v):
        self.bar[u], self.bar[v] = self.bar[v], self.bar[u]
        for w in (u, v):
            for p in self.bar[w]:
                self.occ[p] = w

    # construction
    def initial(self, order) -> bool:
        X, Y, Z = self.dims
        every = [(i, j, k) for i in range(X) for j in range(Y) for k in range(Z)]
        for v in order:
            size = self.sizes[v]
            placed = [u for u in self.need[v] if u in self.bar]
            if placed:
                near = set()
                for u in placed:
                    for p in self.bar[u]:
                        for d in itertools.product((-2, -1, 0, 1, 2), repeat=3):
                            q = (p[0] + d[0], p[1] + d[1], p[2] + d[2])
                            if self.inside(q) and q not in self.occ:
                                near.add(q)
                cands = sorted(near) or [p for p in every if p not in self.occ]
            else:
                cands = [p for p in every if p not in self.occ]
            best = None
            for p in cands:
                for axis in range(3 if size > 1 else 1):
                    cells = self.make_bar(p, axis, size)
                    if not self.fits(cells, v):
                        continue
                    free = sum(1 for c in cells for q in _face_nbrs(c) if self.inside(q) and q not in self.occ)
                    key = (self.node_cost(v, cells), -free, cells)
                    if best is None or key < best[0]:
                        best = (key, cells)
            if best is None:
                return False
            self.put(v, best[1])
        return True

    # annealing
    def anneal(self, steps, t0=0.8, t1=0.02) -> int:
        rng = self.rng
        e = self.energy()
        nodes = self.nodes
        best = (e, dict(self.bar))
        for step in range(steps):
            if e < best[0]:
                best = (e, dict(self.bar))
            if e == 0:
                break
            temp = t0 * (t1 / t0) ** (step / max(1, steps - 1))
            v = rng.choice(nodes)
            size = self.sizes[v]
            old = self.bar[v]
            kind = rng.random()
            if kind < 0.2:
                # swap with an equal-length bar
                u = rng.choice(nodes)
                if u == v or self.sizes[u] != size:
                    continue
                ou = self.bar[u]
                S = (u, v)
                A = self.affected(S, (old, ou))
                before = self.local(S, A)
                self.swap(u, v)
                d = self.local(S, A) - before
                if d <= 0 or rng.random() < math.exp(-d / temp):
                    e += d
                else:
                    self.swap(u, v)
                continue
            nbrs = [u for u in self.need[v] if u in self.bar]
            if nbrs and kind < 0.85:
                ref = rng.choice(self.bar[rng.choice(nbrs)])
                p = tuple(c + rng.randint(-2, 2) for c in ref)
            else:
                p = tuple(rng.randrange(n) for n in self.dims)
            axis = rng.randrange(3) if size > 1 else 0
            if size > 1:
                p = tuple(c - (rng.randrange(size) if i == axis else 0) for i, c in enumerate(p))
            cells = self.make_bar(p, axis, size)
            if not self.fits(cells, v):
                continue
            S = (v,)
            A = self.affected(S, (old, cells))
            before = self.local(S, A)
            self.put(v, cells)
            d = self.local(S, A) - before
            if d <= 0 or rng.random() < math.exp(-d / temp):
                e += d
            else:
                self.put(v, old)
        if e > best[0]:
            e, bars = best
            self.bar = bars
            self.occ = {p: v for v, cells in bars.items() for p in cells}
        return e


class _Grower:
    """Annealing over voxel ownership, started from an annealed bar
    placement.

    Moves add a free voxel to a region, give one back, or take a border
    voxel from a neighbouring region, always keeping regions connected and
    at their minimum size. Energy is the contact shortfall of every
    required pair (the gap between the regions when they do not touch),
    ports off the surface, and a small charge per voxel beyond the
    minimum so abandoned growth is given back.
    """

    EXTRA = 0.25

    def __init__(self, dims, bars, sizes, need, ports, rng):
        self.box = _Box(dims)
        X, Y, Z = dims
        idx = lambda p: (p[0] * Y + p[1]) * Z + p[2]
        self.owner = [-1] * self.box.n
        self.reg: dict[int, set] = {}
        for v, cells in bars.items():
            self.reg[v] = {idx(p) for p in cells}
            for q in self.reg[v]:
                self.owner[q] = v
        self.sizes = sizes
        self.need = {v: {u: m for u, m in need[v].items() if u in bars} for v in bars}
        self.ports = {v for v in ports if v in bars}
        self.rng = rng
        self.nodes = sorted(bars)

    def _pair(self, a, b, m) -> int:
        nb = self.box.nb
        faces = 0
        for p in a:
            for q in nb[p]:
                if q in b:
                    faces += 1
        if faces:
            return max(0, m - faces)
        co = self.box.coords
        dist, _ = _dist_faces([co[p] for p in a], [co[q] for q in b])
        return (dist - 1) * m + m

    def node_energy(self, v, region=None) -> float:
        r = self.reg[v] if region is None else region
        e = 0.0
        for u, m in self.need[v].items():
            e += self._pair(r, self.reg[u], m)
        if v in self.ports and not any(self.box.surface[q] for q in r):
            e += 1
        return e + self.EXTRA * (len(r) - self.sizes[v])

    def energy(self) -> float:
        e = 0.0
        for v in self.nodes:
            r = self.reg[v]
            for u, m in self.need[v].items():
                if u > v:
                    e += self._pair(r, self.reg[u], m)
            if v in self.ports and not any(self.box.surface[q] for q in r):
                e += 1
            e += self.EXTRA * (len(r) - self.sizes[v])
        return e

    def deficit(self) -> int:
        return sum(1 for v in self.nodes for u, m in self.need[v].items() if u > v and self._pair(self.reg[v], self.reg[u], m)) + sum(
            1 for v in self.ports if not any(self.box.surface[q] for q in self.reg[v]))

    def _connected_without(self, r, q) -> bool:
        if len(r) <= 1:
            return False
        nb = self.box.nb
        rest = r - {q}
        start = next(iter(rest))
        seen = {start}
        stack = [start]
        while stack:
            p = stack.pop()
            for s in nb[p]:
                if s in rest and s not in seen:
                    seen.add(s)
                    stack.append(s)
        return len(seen) == len(rest)

    def _delta(self, changes) -> float:
        """Energy change for {node: new region}, touching only those nodes."""
        S = set(changes)
        old = {v: self.reg[v] for v in S}
        before = 0.0
        for v in S:
            before += self.node_energy(v)
            before -= sum(self._pair(self.reg[v], self.reg[u], m) for u, m in self.need[v].items() if u in S and u < v)
        for v, r in changes.items():
            self.reg[v] = r
        after = 0.0
        for v in S:
            after += self.node_energy(v)
            after -= sum(self._pair(self.reg[v], self.reg[u], m) for u, m in self.need[v].items() if u in S and u < v)
        for v, r in old.items():
            self.reg[v] = r
        return after - before

    def _commit(self, changes):
        for v, r in changes.items():
            for q in self.reg[v] - r:
                if self.owner[q] == v:
                    self.owner[q] = -1
            for q in r - self.reg[v]:
                self.owner[q] = v
            self.reg[v] = r

    def anneal(self, steps, t0=1.0, t1=0.05):
        rng = self.rng
        nb = self.box.nb
        e = self.energy()
        best = (e, {v: set(r) for v, r in self.reg.items()})
        for step in range(steps):
            if self.deficit() == 0 if step % 256 == 0 else False:
                break
            temp = t0 * (t1 / t0) ** (step / max(1, steps - 1))
            v = rng.choice(self.nodes)
            r = self.reg[v]
            border = [q for p in r for q in nb[p] if q not in r]
            if not border:
                continue
            kind = rng.random()
            if kind < 0.5:
                q = rng.choice(border)
                w = self.owner[q]
                if w < 0:
                    changes = {v: r | {q}}
                else:
                    rw = self.reg[w]
                    if len(rw) <= self.sizes[w] or not self._connected_without(rw, q):
                        continue
                    changes = {v: r | {q}, w: rw - {q}}
            else:
                if len(r) <= self.sizes[v]:
                    continue
                q = rng.choice(sorted(r))
                if not self._connected_without(r, q):
                    continue
                changes = {v: r - {q}}
            d = self._delta(changes)
            if d <= 0 or rng.random() < math.exp(-d / temp):
                self._commit(changes)
                e += d
                if e < best[0] - 1e-9:
                    best = (e, {v: set(r) for v, r in self.reg.items()})
        if self.deficit():
            self.owner = [-1] * self.box.n
            self.reg = best[1]
            for v, r in self.reg.items():
                for q in r:
                    self.owner[q] = v
        return self.deficit()

    def regions(self):
        return {v: [self.box.coords[q] for q in sorted(r)] for v, r in self.reg.items()}


def _dist_faces(a, b) -> tuple[int, int]:
    """Smallest L1 distance between two voxel sets, and the number of
    face-adjacent pairs."""
    best = 1 << 30
    faces = 0
    for p0, p1, p2 in a:
        for q0, q1, q2 in b:
            d = abs(p0 - q0) + abs(p1 - q1) + abs(p2 - q2)
            if d < best:
                best = d
            if d == 1:
                faces += 1
    return best, faces


def _face_nbrs(p):
    i, j, k = p
    return ((i + 1, j, k), (i - 1, j, k), (i, j + 1, k), (i, j - 1, k), (i, j, k + 1), (i, j, k - 1))


def _bfs_order(sizes, need) -> list[int]:
    nodes = [v for v in sizes if sizes[v] > 0]
    order: list[int] = []
    seen: set = set()
    while len(order) < len(nodes):
        start = max((v for v in nodes if v not in seen), key=lambda v: (len(need[v]), sizes[v], -v))
        q = deque([start])
        while q:
            v = q.popleft()
            if v in seen:
                continue
            seen.add(v)
            order.append(v)
            q.extend(sorted((u for u in need[v] if u not in seen), key=lambda u: (-len(need[u]), u)))
    return order


def _try_box(dims, sizes, need, ports, order, seed, steps, grow_steps, restarts):
    for r in range(restarts):
        rng = random.Random(f"{seed}:{dims}:{r}")
        pl = _Placer(dims, sizes, need, ports, rng)
        if not pl.initial(order):
            return None
        if pl.anneal(steps) == 0:
            return {v: list(c) for v, c in pl.bar.items()}
        if not grow_steps:
            continue
        g = _Grower(dims, pl.bar, sizes, need, ports, rng)
        if g.anneal(grow_steps) == 0:
            return g.regions()
    return None

# -- public entry -------------------------------------------------------

@dataclass(frozen=True)
class LayoutOptions:
    search: Search = Search.EXHAUSTIVE
    seed: int = 0
    time_axis_weight: Fraction = Fraction(1)
    exhaustive_max_qubits: int = 10
    exhaustive_node_limit: int = 2_000_000
    anneal_steps: int = 20_000
    grow_steps: int = 200_000
    shapes_per_probe: int = 3
    restarts: int = 4
    budget_nodes: int = 80  # step budgets cover this many regions, and scale linearly above it
    calibration: Calibration = DEFAULT_CALIBRATION

    def scaled(self, regions: int) -> "LayoutOptions":
        k = max(1.0, regions / self.budget_nodes)
        return replace(self, anneal_steps=int(self.anneal_steps * k), grow_steps=int(self.grow_steps * k))


def layout(b: BraidStructure, opts: LayoutOptions | None = None) -> Layout3D:
    """Pack ``b`` into the smallest box found.

    Structures with at most ``exhaustive_max_qubits`` qubit nodes are laid
    out compactly: straight bars of minimum length, every edge a face
    contact. Exhaustive search is a complete search over that space,
    seeded with the annealed result as an upper bound, so it never does
    worse than annealing. Larger structures, or small ones with no compact
    layout, are annealed with routed growth.
    """
    opts = opts or LayoutOptions()
    search = Search(opts.search)
    sizes = region_sizes(b, opts.calibration)
    opts = opts.scaled(sum(1 for v in sizes.values() if v > 0))
    need = _contact_requirements(b, sizes)
    ports = b.port_nodes()
    total = sum(sizes.values())
    if total == 0:
        return Layout3D([], (0, 0, 0), meta={"kind": "packed", "search": search.value})

    small = len(b.qubits()) <= opts.exhaustive_max_qubits
    found = None
    if small:
        found = _anneal_search(sizes, need, ports, total, opts, grow_steps=0, cap=COMPACT_CAP * total)
    routed = found is None
    if routed:
        found = _anneal_search(sizes, need, ports, total, opts, grow_steps=opts.grow_steps)
    dims, regions = found
    meta = {"kind": "packed", "search": "anneal", "regions": "routed" if routed else "compact"}
    if search is Search.EXHAUSTIVE:
        if small:
            upper = dims[0] * dims[1] * dims[2]
            complete = True
            for cand in _candidate_boxes(total, upper, opts.time_axis_weight):
                if cand == dims:
                    break
                got = _exhaustive_box(b, sizes, need, ports, cand, opts.exhaustive_node_limit)
                if got is None:
                    complete = False
                elif got:
                    dims, regions = cand, got
                    routed = False
                    break
            meta = {"kind": "packed", "search": "exhaustive", "complete": complete,
                    "regions": "routed" if routed else "compact"}
        else:
            meta["note"] = "too many qubit nodes for exhaustive search"
    return _finish(b, dims, regions, opts.time_axis_weight, meta)


def _anneal_search(sizes, need, ports, total, opts, grow_steps, cap=None):
    """Bisect over box volume; each probe anneals a few cube-like shapes.
    Returns (dims, regions), or None once probes pass ``cap`` voxels."""
    order = _bfs_order(sizes, need)
    steps = opts.anneal_steps
    cache: dict = {}

    def attempt(dims):
        if dims not in cache:
            cache[dims] = _try_box(dims, sizes, need, ports, order, opts.seed, steps, grow_steps, opts.restarts)
        return cache[dims] is not None

    def probe(vol_lo, vol_hi):
        shapes = [d for d in _candidate_boxes(vol_lo, vol_hi, opts.time_axis_weight, max_aspect=4)]
        shapes.sort(key=lambda d: (d[2] / d[0], d))
        for dims in shapes[: opts.shapes_per_probe]:
            if attempt(dims):
                return dims
        return None

    lo, hi = total, total
    found = None
    while found is None:
        hi = max(hi + 1, int(hi * 1.25))
        if cap is not None and hi > cap:
            return None
        found = probe(hi, int(hi * 1.1) + 1)
        if found is None:
            lo = hi
    # shrink: bisect between the last failure and the success
    best = found
    top = best[0] * best[1] * best[2]
    while top - lo > max(1, total // 40):
        mid = (lo + top) // 2
        got = probe(mid, top - 1)
        if got is None:
            lo = mid
        else:
            best = got
            top = got[0] * got[1] * got[2]
    # finish with the exact candidate list just below the best volume
    for dims in _candidate_boxes(total, top - 1, opts.time_axis_weight, max_aspect=4)[::-1][: opts.shapes_per_probe * 2]:
        v = dims[0] * dims[1] * dims[2]
        if v < lo:
            break
        if attempt(dims) and v < best[0] * best[1] * best[2]:
            best = dims
    return best, cache[best]


def _finish(b: BraidStructure, dims, regions, w, meta) -> Layout3D:
    _, t = _orient_cost(dims, w)
    # permute so the chosen time axis becomes z
    perm = [i for i in range(3) if i != t] + [t]
    regions = {v: sorted(tuple(p[i] for i in perm) for p in r) for v, r in regions.items()}
    X, Y, Z = (dims[i] for i in perm)
    names = {n.id: _defect_name(n) for n in b.bnodes}
    cells = []
    for v, r in sorted(regions.items()):
        rs = set(r)
        for p in r:
            g = tuple(2 * c + 1 for c in p)
            cells.append(Cell(names[v], *g, *g))
            for axis in range(3):
                q = list(p)
                q[axis] += 1
                if tuple(q) in rs:
                    h = tuple(2 * c + 1 for c in q)
                    cells.append(Cell(names[v], *g, *h))
    links = _assign_links(b, regions)
    return Layout3D(cells, (2 * X, 2 * Y, 2 * Z), ("space", "space", "time"), regions, links, meta)


def _defect_name(n) -> str:
    prefix = {BNodeKind.PRIMAL: "p", BNodeKind.DUAL: "d"}.get(n.kind, "o")
    return f"{prefix}{n.id}"


def _adjacent(p, q) -> bool:
    return sum(abs(a - b) for a, b in zip(p, q)) == 1


def _assign_links(b: BraidStructure, regions) -> list[dict]:
    used: set = set()
    links = []
    for k, e in enumerate(b.bedges):
        if e.a == e.b:
            links.append({"bedge": k, "kind": e.kind.value, "realised": "internal"})
            continue
        if e.a not in regions or e.b not in regions:
            links.append({"bedge": k, "kind": e.kind.value, "realised": "folded"})
            continue
        face = None
        rb = set(regions[e.b])
        for p in regions[e.a]:
            for axis in range(3):
                for s in (-1, 1):
                    q = list(p)
                    q[axis] += s
                    q = tuple(q)
                    if q in rb and frozenset((p, q)) not in used:
                        face = (p, q)
                        break
                if face:
                    break
            if face:
                break
        if face is None:
            raise LayoutError(f"bedge {k} ({e.a}-{e.b}) has no free contact face")
        used.add(frozenset(face))
        links.append({"bedge": k, "kind": e.kind.value, "realised": "face", "face": [list(face[0]), list(face[1])]})
    return links


# -- checks -------------------------------------------------------------

def check_spacing(l: Layout3D, min_gap: int = 2) -> list[str]:
    out = []
    X, Y, Z = l.bbox
    for c in l.cells:
        if not (0 <= c.x0 <= c.x1 <= X and 0 <= c.y0 <= c.y1 <= Y and 0 <= c.z0 <= c.z1 <= Z):
            out.append(f"cell of {c.defect} leaves the bounding box")
    cells = sorted(l.cells, key=lambda c: (c.x0, c.y0, c.z0))
    # sweep on x: only cells whose x ranges come within min_gap can clash
    active: list[Cell] = []
    for c in cells:
        active = [a for a in active if a.x1 + min_gap > c.x0]
        for a in active:
            if a.defect != c.defect and a.gap(c) < min_gap:
                out.append(f"defects {a.defect} and {c.defect} closer than {min_gap} grid units")
        active.append(c)
    return out


def check_layout(b: BraidStructure, l: Layout3D, cal: Calibration = DEFAULT_CALIBRATION) -> list[str]:
    """Spacing, region connectivity, minimum sizes and edge realisation."""
    out = check_spacing(l)
    sizes = region_sizes(b, cal)
    owner: dict = {}
    for v, r in l.regions.items():
        for p in r:
            if p in owner:
                out.append(f"voxel {p} shared by bnodes {owner[p]} and {v}")
            owner[p] = v
        if len(r) < sizes.get(v, 0):
            out.append(f"bnode {v} region smaller than {sizes[v]} voxels")
        if r and not _connected(r):
            out.append(f"bnode {v} region is not connected")
    for v, s in sizes.items():
        if s > 0 and v not in l.regions:
            out.append(f"bnode {v} not placed")
    ports = b.port_nodes()
    X, Y, Z = (n // 2 for n in l.bbox)
    for v in ports:
        r = l.regions.get(v, [])
        if r and not any(p[0] in (0, X - 1) or p[1] in (0, Y - 1) or p[2] in (0, Z - 1) for p in r):
            out.append(f"port bnode {v} does not reach the box surface")
    faces = set()
    for link in l.links:
        e = b.bedges[link["bedge"]]
        if link["realised"] != "face":
            continue
        p, q = (tuple(x) for x in link["face"])
        if not _adjacent(p, q) or owner.get(p) != e.a or owner.get(q) != e.b:
            out.append(f"bedge {link['bedge']} face does not join its endpoints")
        if frozenset((p, q)) in faces:
            out.append(f"face {p}-{q} used twice")
        faces.add(frozenset((p, q)))
    if l.regions and len(l.links) != len(b.bedges):
        out.append("not every bedge is realised")
    return out


def _connected(r) -> bool:
    rs = set(r)
    start = r[0]
    seen = {start}
    q = deque([start])
    while q:
        p = q.popleft()
        for axis in range(3):
            for s in (-1, 1):
                n = list(p)
                n[axis] += s
                n = tuple(n)
                if n in rs and n not in seen:
                    seen.add(n)
                    q.append(n)
    return len(seen) == len(rs)
