"""Regenerate the bundled benchmark circuits in src/braidzx/data/.

Distillation circuits use the Bell-pair form: wire 0 carries the output,
wires 1..n hold a code block prepared in |0_L>, wire 0 fans out onto a
logical-X support, every code qubit takes one injected phase gate and is
read out in the X basis.

The arithmetic benchmarks are built from 15-gate Clifford+T Toffolis.
"""
from __future__ import annotations

import json
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "braidzx" / "data"


def toffoli(a: int, b: int, c: int) -> list[str]:
    return [
        f"h {c}", f"cnot {b} {c}", f"tdg {c}", f"cnot {a} {c}", f"t {c}", f"cnot {b} {c}",
        f"tdg {c}", f"cnot {a} {c}", f"t {b}", f"t {c}", f"h {c}", f"cnot {a} {b}",
        f"t {a}", f"tdg {b}", f"cnot {a} {b}",
    ]


def css_distillation(n_code: int, rows: list[list[int]], logical_x: list[int], phase: str) -> list[str]:
    """rows: X-stabiliser generators over code positions 1..n_code, each
    with a distinct pivot (its lowest position no other row touches)."""
    pivots = []
    for r in rows:
        piv = next(p for p in r if all(p not in o for o in rows if o is not r))
        pivots.append(piv)
    lines = ["init+ 0"]
    for q in range(1, n_code + 1):
        lines.append(f"init+ {q}" if q in pivots else f"init0 {q}")
    # edge-colour the pivot->target CNOTs into conflict-free rounds
    pending = [(p, q) for r, p in zip(rows, pivots) for q in r if q != p]
    while pending:
        busy: set = set()
        rest = []
        for p, q in pending:
            if p in busy or q in busy:
                rest.append((p, q))
                continue
            busy |= {p, q}
            lines.append(f"cnot {p} {q}")
        pending = rest
    lines += [f"cnot 0 {q}" for q in logical_x]
    lines += [f"{phase} {q}" for q in range(1, n_code + 1)]
    lines += [f"measx {q}" for q in range(1, n_code + 1)]
    return lines


def y_distillation() -> tuple[int, list[str]]:
    # Steane code: Hamming parity checks over positions 1..7
    rows = [[p for p in range(1, 8) if p >> j & 1] for j in range(3)]
    return 8, css_distillation(7, rows, [1, 2, 3], "s")


def a_distillation() -> tuple[int, list[str]]:
    # 15-qubit Reed-Muller code: X checks are the four bit-planes of 1..15
    rows = [[p for p in range(1, 16) if p >> j & 1] for j in range(4)]
    return 16, css_distillation(15, rows, list(range(1, 8)), "t")


def tof_4() -> tuple[int, list[str]]:
    # controls 0-3, target 4, ancillas 5-6
    c0, c1, c2, c3, t, a0, a1 = range(7)
    seq = [(c0, c1, a0), (c2, a0, a1), (c3, a1, t), (c2, a0, a1), (c0, c1, a0)]
    return 7, [g for s in seq for g in toffoli(*s)]


def barenco_tof_3() -> tuple[int, list[str]]:
    # controls 0-2, target 3, ancilla 4
    c0, c1, c2, t, a = range(5)
    seq = [(c2, a, t), (c0, c1, a), (c2, a, t), (c0, c1, a)]
    return 5, [g for s in seq for g in toffoli(*s)]


def mod5_4() -> tuple[int, list[str]]:
    # wire 4 ^= [x mod 5 == 0] for x = x0 x1 x2 x3, as an ESOP:
    # 1 + x0 + x1 + x2 + x3 + x0x1 + x0x3 + x2x1 + x2x3
    lines = ["x 4"] + [f"cnot {q} 4" for q in range(4)]
    for a, b in [(0, 1), (0, 3), (2, 1), (2, 3)]:
        lines += toffoli(a, b, 4)
    return 5, lines


def vbe_adder_3() -> tuple[int, list[str]]:
    # wires: c0=0 a0=1 b0=2 c1=3 a1=4 b1=5 c2=6 a2=7 b2=8 b3=9; b <- a + b
    c = [0, 3, 6]
    a = [1, 4, 7]
    b = [2, 5, 8, 9]
    cin = c + [b[3]]

    def carry(ci, ai, bi, co):
        return toffoli(ai, bi, co) + [f"cnot {ai} {bi}"] + toffoli(ci, bi, co)

    def carry_inv(ci, ai, bi, co):
        return toffoli(ci, bi, co) + [f"cnot {ai} {bi}"] + toffoli(ai, bi, co)

    def sum_(ci, ai, bi):
        return [f"cnot {ai} {bi}", f"cnot {ci} {bi}"]

    lines: list[str] = []
    for i in range(3):
        lines += carry(c[i], a[i], b[i], cin[i + 1])
    lines.append(f"cnot {a[2]} {b[2]}")
    lines += sum_(c[2], a[2], b[2])
    for i in (1, 0):
        lines += carry_inv(c[i], a[i], b[i], cin[i + 1])
        lines += sum_(c[i], a[i], b[i])
    return 10, lines


FIXTURES = {
    "y_distillation": (y_distillation, "Steane-code |Y> distillation, Bell-pair form; output on wire 0"),
    "a_distillation": (a_distillation, "15-qubit Reed-Muller |A> distillation, Bell-pair form; output on wire 0"),
    "barenco_tof_3": (barenco_tof_3, "3-control Toffoli, Barenco construction with one ancilla"),
    "mod5_4": (mod5_4, "wire 4 ^= [x mod 5 == 0] over wires 0-3, ESOP realisation"),
    "tof_4": (tof_4, "4-control Toffoli with two ancillas"),
    "vbe_adder_3": (vbe_adder_3, "3-bit VBE ripple-carry adder"),
}


def ccz_layout() -> dict:
    """Volume fixture for the rescaling check: a 2 x 2 x 14.5 box (58 d^3).

    The pipes are placeholders on a 4 x 4 x 29 grid; only the bounding box
    matters to the volume report.
    """
    cells = []
    for k, (x, y) in enumerate([(0, 0), (2, 0), (0, 2), (2, 2)]):
        cells.append({"defect": f"p{k}", "x0": x, "y0": y, "z0": 0, "x1": x, "y1": y, "z1": 29})
    cells.append({"defect": "d0", "x0": 1, "y0": 1, "z0": 4, "x1": 3, "y1": 3, "z1": 4})
    return {"pitch": 0.5, "cells": cells, "bbox": {"dx": 4, "dy": 4, "dz": 29},
            "axes": ["space", "space", "time"], "meta": {"kind": "fixture", "name": "ccz_factory"}}


def write_all() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    for name, (make, about) in FIXTURES.items():
        n, lines = make()
        t = sum(1 for ln in lines if ln.split()[0] in ("t", "tdg"))
        body = [f"# {about}", f"# @name {name}", f"# @gates {len(lines)}", f"# @tcount {t}", f"qubits {n}", *lines]
        (DATA / f"{name}.circ").write_text("\n".join(body) + "\n", encoding="utf-8")
        print(f"{name}: {n} wires, {len(lines)} gates, T={t}")
    doc = ccz_layout()
    (DATA / "ccz_factory_layout.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


if __name__ == "__main__":
    write_all()
