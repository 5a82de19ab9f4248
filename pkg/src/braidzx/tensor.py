"""Brute-force semantics for small diagrams and circuits.

``contract`` treats every spider as one binary variable read in its own
basis (Z spiders in the computational basis, X spiders in the +/- basis)
and every edge as a 2x2 factor between its end variables, so a diagram is a
pairwise factor graph. Variables are summed out one at a time, choosing the
elimination that creates the smallest intermediate factor.

``circuit_unitary`` multiplies gate matrices directly and never builds a
diagram; the two routes check each other.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, GateKind
from .zx import Color, EdgeTag, ZXDiagram, validate

LinearMap = np.ndarray  # shape (2**n_out, 2**n_in)

DEFAULT_CAP = 12
DEFAULT_TOL = 1e-9
MAX_INTERMEDIATE = 1 << 24

_R = 1 / np.sqrt(2)
_ID = np.eye(2, dtype=complex)
_HAD = np.array([[_R, _R], [_R, -_R]], dtype=complex)
# rows: computational basis |0>,|1>; columns: |+>,|->
_TO_X = _HAD


class OracleError(ValueError):
    pass


@dataclass
class _Factor:
    vars: tuple  # variable ids, one axis each
    table: np.ndarray


def _basis(color: Color | None) -> np.ndarray:
    """Columns are the basis vectors a variable of this kind ranges over."""
    return _TO_X if color is Color.X else _ID


def _edge_matrix(cu: Color | None, cv: Color | None, tag: EdgeTag) -> np.ndarray:
    middle = _HAD if tag is EdgeTag.HADAMARD else _ID
    # <basis_u(s)| middle |basis_v(t)>; all bases are real
    return _basis(cu).T @ middle @ _basis(cv)


def _color(d: ZXDiagram, v: int) -> Color | None:
    return None if v in d.boundaries else d.spiders[v].color


def contract(d: ZXDiagram, cap: int = DEFAULT_CAP, order: str = "greedy") -> LinearMap:
    """Linear map of ``d`` as a (2**outputs, 2**inputs) matrix, scalars dropped.

    ``order`` is ``"greedy"`` (smallest intermediate first) or ``"sequential"``
    (by vertex id); both give the same map up to rounding.
    """
    problems = validate(d)
    if problems:
        raise OracleError("invalid diagram: " + "; ".join(problems))
    n_in, n_out = len(d.inputs), len(d.outputs)
    if n_in + n_out > cap:
        raise OracleError(f"{n_in + n_out} boundary wires exceed the oracle cap of {cap}")

    factors: list[_Factor] = []
    for v, s in d.spiders.items():
        factors.append(_Factor((v,), np.array([1.0, np.exp(1j * np.pi * s.phase / 4)])))
    for e, edge in d.edges.items():
        m = _edge_matrix(_color(d, edge.a), _color(d, edge.b), edge.tag)
        if edge.is_loop:
            factors.append(_Factor((edge.a,), np.diag(m).copy()))
        else:
            factors.append(_Factor((edge.a, edge.b), m))

    # boundary vertices are the open indices; spiders get summed out
    internal = sorted(d.spiders)
    if order == "sequential":
        plan = list(internal)
    elif order == "greedy":
        plan = None
    else:
        raise OracleError(f"unknown contraction order {order!r}")

    remaining = set(internal)
    while remaining:
        if plan is not None:
            v = plan.pop(0)
        else:
            v = min(remaining, key=lambda u: (_merged_size(factors, u), u))
        remaining.discard(v)
        factors = _eliminate(factors, v)

    out_vars = tuple(d.outputs) + tuple(d.inputs)
    result = np.ones((), dtype=complex)
    res_vars: tuple = ()
    for f in factors:
        result, res_vars = _product(result, res_vars, f.table, f.vars)
    for v in out_vars:
        if v not in res_vars:  # unreachable for valid diagrams; keep shape sane
            result, res_vars = _product(result, res_vars, np.ones(2), (v,))
    perm = [res_vars.index(v) for v in out_vars]
    result = np.transpose(result, perm) if perm else result
    return np.asarray(result, dtype=complex).reshape(2 ** n_out, 2 ** n_in)


def _merged_size(factors: list[_Factor], v: int) -> int:
    vs: set = set()
    for f in factors:
        if v in f.vars:
            vs.update(f.vars)
    return 1 << max(len(vs) - 1, 0)


def _product(a: np.ndarray, av: tuple, b: np.ndarray, bv: tuple) -> tuple[np.ndarray, tuple]:
    allv = list(av) + [x for x in bv if x not in av]
    letters = {x: chr(ord("a") + i) if i < 26 else chr(ord("A") + i - 26) for i, x in enumerate(allv)}
    if len(allv) > 52:
        raise OracleError("intermediate tensor rank exceeds 52")
    spec = "".join(letters[x] for x in av) + "," + "".join(letters[x] for x in bv) + "->" + "".join(letters[x] for x in allv)
    return np.einsum(spec, a, b), tuple(allv)


def _eliminate(factors: list[_Factor], v: int) -> list[_Factor]:
    touching = [f for f in factors if v in f.vars]
    rest = [f for f in factors if v not in f.vars]
    table = np.ones((), dtype=complex)
    tv: tuple = ()
    for f in touching:
        table, tv = _product(table, tv, f.table, f.vars)
        if table.size > MAX_INTERMEDIATE:
            raise OracleError("intermediate tensor too large for dense contraction")
    if v in tv:
        table = table.sum(axis=tv.index(v))
        tv = tuple(x for x in tv if x != v)
    rest.append(_Factor(tv, table))
    return rest


def equivalent_up_to_scalar(a: LinearMap, b: LinearMap, tol: float = DEFAULT_TOL) -> bool:
    """True iff a == lam * b for some nonzero lam, judged after scaling.

    Both maps are normalised so their largest entry has modulus one, then
    lam is read off at the largest entry of ``b``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise OracleError(f"dimension mismatch {a.shape} vs {b.shape}")
    ma, mb = np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0)
    za, zb = ma <= tol, mb <= tol
    if za or zb:
        return za and zb
    a = a / ma
    b = b / mb
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    lam = a[k] / b[k]
    return bool(np.abs(a - lam * b).max() <= tol)


_GATE = {
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Z: np.diag([1, -1]).astype(complex),
    GateKind.S: np.diag([1, 1j]),
    GateKind.SDG: np.diag([1, -1j]),
    GateKind.T: np.diag([1, np.exp(1j * np.pi / 4)]),
    GateKind.TDG: np.diag([1, np.exp(-1j * np.pi / 4)]),
    GateKind.H: _HAD,
}
_STATE = {GateKind.INIT_ZERO: np.array([1, 0], dtype=complex), GateKind.INIT_PLUS: np.array([_R, _R], dtype=complex)}
_EFFECT = {GateKind.MEASURE_Z: np.array([1, 0], dtype=complex), GateKind.MEASURE_X: np.array([_R, _R], dtype=complex)}


def circuit_unitary(c: Circuit, max_wires: int = 16) -> LinearMap:
    """Gate-matrix product of ``c``; inits are isometries, measurements
    project onto the +1 outcome. Wire order: wire 0 is the most significant
    bit, matching the order of ``circuit_to_zx`` boundaries."""
    n = c.num_wires
    if n > max_wires:
        raise OracleError(f"{n} wires exceed the cap of {max_wires}")
    inits = c.initialized
    free = [w for w in range(n) if w not in inits]
    # tensor axes: n wire axes followed by one axis per free input
    psi = np.ones((), dtype=complex)
    for w in range(n):
        vec = _STATE[inits[w]] if w in inits else None
        if vec is None:
            psi = np.multiply.outer(psi, _ID)
        else:
            psi = np.multiply.outer(psi, vec)
    # axes currently interleaved: (w0[,in0], w1[,in1], ...); reorder
    axes: list = []
    for w in range(n):
        axes.append(("w", w))
        if w not in inits:
            axes.append(("i", w))
    order = [axes.index(("w", w)) for w in range(n)] + [axes.index(("i", w)) for w in free]
    psi = np.transpose(psi, order) if order else psi
    for g in c.gates:
        if g.kind.is_init or g.kind.is_measure:
            continue
        if g.kind is GateKind.CNOT:
            ctl, tgt = g.targets
            psi = psi.copy()
            sl = [slice(None)] * psi.ndim
            sl[ctl] = 1
            sub = psi[tuple(sl)]
            t_axis = tgt if tgt < ctl else tgt - 1
            psi[tuple(sl)] = np.flip(sub, axis=t_axis)
        else:
            (w,) = g.targets
            psi = np.moveaxis(np.tensordot(_GATE[g.kind], psi, axes=([1], [w])), 0, w)
    meas = c.measured
    for w in sorted(meas, reverse=True):
        psi = np.tensordot(_EFFECT[meas[w]].conj(), psi, axes=([0], [w]))
    n_out = n - len(meas)
    return psi.reshape(2 ** n_out, 2 ** len(free))
