"""Random diagram and circuit generators shared by the property tests."""
from __future__ import annotations

import random

from braidzx.circuit import Circuit, Gate, GateKind
from braidzx.zx import Color, EdgeTag, ZXDiagram

UNITARY_KINDS = [GateKind.X, GateKind.Z, GateKind.S, GateKind.SDG, GateKind.T, GateKind.TDG, GateKind.H, GateKind.CNOT]


def random_circuit(rng: random.Random, max_wires: int = 5, max_gates: int = 20, open_ends: bool = True) -> Circuit:
    n = rng.randint(1, max_wires)
    gates: list[Gate] = []
    inits = set()
    if open_ends:
        for w in range(n):
            if rng.random() < 0.25:
                gates.append(Gate(rng.choice([GateKind.INIT_ZERO, GateKind.INIT_PLUS]), (w,)))
                inits.add(w)
    for _ in range(rng.randint(0, max_gates - len(gates))):
        k = rng.choice(UNITARY_KINDS)
        if k is GateKind.CNOT:
            if n < 2:
                continue
            gates.append(Gate(k, tuple(rng.sample(range(n), 2))))
        else:
            gates.append(Gate(k, (rng.randrange(n),)))
    if open_ends:
        budget = max_gates - len(gates)
        for w in range(n):
            if budget > 0 and rng.random() < 0.25:
                gates.append(Gate(rng.choice([GateKind.MEASURE_Z, GateKind.MEASURE_X]), (w,)))
                budget -= 1
    return Circuit(n, tuple(gates[:max_gates]))


def random_diagram(rng: random.Random, max_spiders: int = 6, max_boundary: int = 8) -> ZXDiagram:
    """Arbitrary small open multigraph: parallel edges, loops, H tags."""
    d = ZXDiagram()
    n = rng.randint(1, max_spiders)
    vs = [d.add_spider(rng.choice([Color.Z, Color.X]), rng.choice([0, 0, 0, 4, 2, 6, 1, 7])) for _ in range(n)]
    for _ in range(rng.randint(n - 1, 2 * n + 1)):
        a, b = rng.choice(vs), rng.choice(vs)
        if a == b and rng.random() < 0.7:
            continue
        d.add_edge(a, b, EdgeTag.HADAMARD if rng.random() < 0.3 else EdgeTag.PLAIN)
    # small pi / phase-0 leaves and wires so copy rules find sites
    for _ in range(rng.randint(0, 3)):
        v = rng.choice(vs)
        p = d.add_spider(rng.choice([Color.Z, Color.X]), rng.choice([0, 4]))
        d.add_edge(p, v)
        if rng.random() < 0.5:
            d.add_edge(p, rng.choice(vs), EdgeTag.HADAMARD if rng.random() < 0.3 else EdgeTag.PLAIN)
    nb = rng.randint(0, max_boundary)
    for i in range(nb):
        kind = "in" if rng.random() < 0.5 else "out"
        bnd = d.add_boundary(kind)
        d.add_edge(bnd, rng.choice(list(d.spiders)), EdgeTag.HADAMARD if rng.random() < 0.2 else EdgeTag.PLAIN)
    return d
