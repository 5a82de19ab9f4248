"""Clifford+T circuits: a line-based text format and translation to ZX.

Format (UTF-8, one statement per line, ``#`` starts a comment)::

    qubits 3
    init+ 0
    cnot 0 1        # control first
    t 1
    measx 0

Mnemonics: ``x z s sdg t tdg h <w>``, ``cnot <c> <t>``, ``init0 init+ <w>``,
``measz measx <w>``. Metadata may ride in comments as ``# @key value``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .zx import Color, EdgeTag, ZXDiagram


class GateKind(str, Enum):
    X = "x"
    Z = "z"
    S = "s"
    SDG = "sdg"
    T = "t"
    TDG = "tdg"
    H = "h"
    CNOT = "cnot"
    INIT_ZERO = "init0"
    INIT_PLUS = "init+"
    MEASURE_Z = "measz"
    MEASURE_X = "measx"

    @property
    def arity(self) -> int:
        return 2 if self is GateKind.CNOT else 1

    @property
    def is_init(self) -> bool:
        return self in (GateKind.INIT_ZERO, GateKind.INIT_PLUS)

    @property
    def is_measure(self) -> bool:
        return self in (GateKind.MEASURE_Z, GateKind.MEASURE_X)


# Z-axis phase gates, in units of pi/4
PHASE8 = {GateKind.S: 2, GateKind.SDG: 6, GateKind.T: 1, GateKind.TDG: 7, GateKind.Z: 4}


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    targets: tuple[int, ...]

    def __str__(self) -> str:
        return " ".join([self.kind.value, *map(str, self.targets)])


class CircuitError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f"line {line}" + (f", column {column}" if column else "") + ": " if line else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Circuit:
    num_wires: int
    gates: tuple[Gate, ...] = ()
    name: str = "circuit"
    # free-form "# @key value" headers; not part of equality
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        check_circuit(self)

    @property
    def initialized(self) -> dict[int, GateKind]:
        return {g.targets[0]: g.kind for g in self.gates if g.kind.is_init}

    @property
    def measured(self) -> dict[int, GateKind]:
        return {g.targets[0]: g.kind for g in self.gates if g.kind.is_measure}

    def count(self, *kinds: GateKind) -> int:
        return sum(1 for g in self.gates if g.kind in kinds)

    @property
    def t_count(self) -> int:
        return self.count(GateKind.T, GateKind.TDG)


def check_circuit(c: Circuit, lines: list[int] | None = None) -> None:
    if c.num_wires < 1:
        raise CircuitError("qubit count must be positive")
    started: set[int] = set()
    ended: set[int] = set()
    for i, g in enumerate(c.gates):
        line = lines[i] if lines else None
        if len(g.targets) != g.kind.arity:
            raise CircuitError(f"{g.kind.value} takes {g.kind.arity} operand(s)", line)
        if len(set(g.targets)) != len(g.targets):
            raise CircuitError(f"repeated operand in {g}", line)
        for w in g.targets:
            if not 0 <= w < c.num_wires:
                raise CircuitError(f"wire {w} out of range for {c.num_wires} qubits", line)
            if w in ended:
                raise CircuitError(f"{g.kind.value} on wire {w} after its measurement", line)
            if g.kind.is_init and w in started:
                raise CircuitError(f"init on wire {w} is not its first action", line)
            started.add(w)
            if g.kind.is_measure:
                ended.add(w)


def parse_circuit(text: str, name: str = "circuit") -> Circuit:
    num_wires = None
    gates: list[Gate] = []
    lines: list[int] = []
    meta: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body, _, comment = raw.partition("#")
        comment = comment.strip()
        if comment.startswith("@"):
            key, _, value = comment[1:].partition(" ")
            meta[key] = value.strip()
        words = body.split()
        if not words:
            continue
        col = raw.index(words[0]) + 1
        head = words[0].lower()
        if num_wires is None:
            if head != "qubits" or len(words) != 2:
                raise CircuitError("expected header 'qubits <n>'", lineno, col)
            num_wires = _int(words[1], lineno, raw)
            if num_wires < 1:
                raise CircuitError("qubit count must be positive", lineno, col)
            continue
        try:
            kind = GateKind(head)
        except ValueError:
            raise CircuitError(f"unknown gate mnemonic {words[0]!r}", lineno, col) from None
        if len(words) - 1 != kind.arity:
            raise CircuitError(f"{kind.value} takes {kind.arity} operand(s), got {len(words) - 1}", lineno, col)
        gates.append(Gate(kind, tuple(_int(w, lineno, raw) for w in words[1:])))
        lines.append(lineno)
    if num_wires is None:
        raise CircuitError("missing 'qubits <n>' header", 1, 1)
    partial = Circuit.__new__(Circuit)
    object.__setattr__(partial, "num_wires", num_wires)
    object.__setattr__(partial, "gates", tuple(gates))
    check_circuit(partial, lines)
    return Circuit(num_wires, tuple(gates), meta.get("name", name), meta)


def _int(word: str, lineno: int, raw: str) -> int:
    try:
        return int(word)
    except ValueError:
        raise CircuitError(f"expected integer, got {word!r}", lineno, raw.index(word) + 1) from None


def emit_circuit(c: Circuit) -> str:
    return "".join([f"qubits {c.num_wires}\n", *(f"{g}\n" for g in c.gates)])


def load_circuit(path) -> Circuit:
    from pathlib import Path

    p = Path(path)
    return parse_circuit(p.read_text(encoding="utf-8"), name=p.stem)


def circuit_to_zx(c: Circuit) -> ZXDiagram:
    """Translate a circuit gate by gate.

    Each wire keeps a "frontier" vertex and a pending edge tag (a Hadamard
    toggles the tag). Spiders get tags naming their origin: ``inj:<i>`` for
    the i-th S/Sdg/T/Tdg gate, ``init:<w>`` / ``meas:<w>`` for state
    preparation and measurement leaves, ``wire:<w>`` for everything.
    """
    d = ZXDiagram()
    frontier: dict[int, int | None] = {}
    pending: dict[int, EdgeTag] = {w: EdgeTag.PLAIN for w in range(c.num_wires)}
    inits = c.initialized
    for w in range(c.num_wires):
        frontier[w] = None if w in inits else d.add_boundary("in")
    inj = 0

    def attach(w: int, v: int) -> None:
        if frontier[w] is not None:
            d.add_edge(frontier[w], v, pending[w])
        pending[w] = EdgeTag.PLAIN
        frontier[w] = v

    for g in c.gates:
        k = g.kind
        if k is GateKind.CNOT:
            ctl, tgt = g.targets
            a = d.add_spider(Color.Z, 0, [f"wire:{ctl}", "cnot"])
            b = d.add_spider(Color.X, 0, [f"wire:{tgt}", "cnot"])
            attach(ctl, a)
            attach(tgt, b)
            d.add_edge(a, b)
            continue
        (w,) = g.targets
        if k is GateKind.H:
            pending[w] = pending[w].toggled()
        elif k in PHASE8:
            tags = [f"wire:{w}"]
            if k is not GateKind.Z:
                tags.append(f"inj:{inj}")
                inj += 1
            attach(w, d.add_spider(Color.Z, PHASE8[k], tags))
        elif k is GateKind.X:
            attach(w, d.add_spider(Color.X, 4, [f"wire:{w}"]))
        elif k is GateKind.INIT_PLUS:
            attach(w, d.add_spider(Color.Z, 0, [f"wire:{w}", f"init:{w}"]))
        elif k is GateKind.INIT_ZERO:
            attach(w, d.add_spider(Color.X, 0, [f"wire:{w}", f"init:{w}"]))
        elif k is GateKind.MEASURE_X:
            attach(w, d.add_spider(Color.Z, 0, [f"wire:{w}", f"meas:{w}"]))
            frontier[w] = None
        elif k is GateKind.MEASURE_Z:
            attach(w, d.add_spider(Color.X, 0, [f"wire:{w}", f"meas:{w}"]))
            frontier[w] = None
    for w in range(c.num_wires):
        if w in c.measured:
            continue
        out = d.add_boundary("out")
        d.add_edge(frontier[w], out, pending[w])
    return d
