import random

import numpy as np
import pytest

from braidzx.circuit import Circuit, Gate, GateKind, circuit_to_zx, load_circuit, parse_circuit
from braidzx.pipeline import fixture_path
from braidzx.tensor import OracleError, circuit_unitary, contract, equivalent_up_to_scalar
from braidzx.zx import Color, EdgeTag, Spider, ZXDiagram
from strategies import random_circuit, random_diagram

R = 1 / np.sqrt(2)
H = np.array([[R, R], [R, -R]])
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)


def one_spider(color: Color, phase: int) -> ZXDiagram:
    d = ZXDiagram()
    i, v, o = d.add_boundary("in"), d.add_spider(color, phase), d.add_boundary("out")
    d.add_edge(i, v)
    d.add_edge(v, o)
    return d


def test_green_pi_is_z():
    assert equivalent_up_to_scalar(contract(one_spider(Color.Z, 4)), np.diag([1, -1]))


def test_red_pi_is_x():
    assert equivalent_up_to_scalar(contract(one_spider(Color.X, 4)), np.array([[0, 1], [1, 0]]))


def test_cnot_diagram_is_cnot():
    assert equivalent_up_to_scalar(contract(circuit_to_zx(parse_circuit("qubits 2\ncnot 0 1"))), CNOT)


def test_hadamard_edge_alone():
    d = ZXDiagram()
    d.add_edge(d.add_boundary("in"), d.add_boundary("out"), EdgeTag.HADAMARD)
    assert np.allclose(contract(d), H)


def test_scalar_multiple_is_equivalent():
    m = np.random.default_rng(0).normal(size=(4, 4)) + 0j
    assert equivalent_up_to_scalar(m, 3j * m)


def test_cnot_is_not_cz():
    assert not equivalent_up_to_scalar(CNOT, CZ)


def test_zero_maps():
    z = np.zeros((2, 2))
    assert equivalent_up_to_scalar(z, z)
    assert not equivalent_up_to_scalar(z, np.eye(2))


def test_dimension_mismatch():
    with pytest.raises(OracleError):
        equivalent_up_to_scalar(np.eye(2), np.eye(4))


def test_cap_is_enforced():
    d = ZXDiagram()
    for _ in range(7):
        d.add_edge(d.add_boundary("in"), d.add_boundary("out"))
    with pytest.raises(OracleError, match="cap"):
        contract(d)
    assert contract(d, cap=14).shape == (128, 128)


def test_invalid_diagram_is_refused():
    d = one_spider(Color.Z, 0)
    v = next(iter(d.spiders))
    d.spiders[v] = Spider(Color.Z, 8)
    with pytest.raises(OracleError, match="invalid"):
        contract(d)


def test_hadamard_and_t_matrices():
    assert np.allclose(circuit_unitary(parse_circuit("qubits 1\nh 0")), H)
    assert np.allclose(circuit_unitary(parse_circuit("qubits 1\nt 0")), np.diag([1, np.exp(1j * np.pi / 4)]))


def test_circuit_unitary_wire_order():
    assert np.allclose(circuit_unitary(parse_circuit("qubits 2\ncnot 0 1")), CNOT)


def test_circuit_unitary_cap():
    with pytest.raises(OracleError):
        circuit_unitary(Circuit(3, ()), max_wires=2)


def test_unitarity_of_closed_circuits():
    rng = random.Random(8)
    for _ in range(50):
        u = circuit_unitary(random_circuit(rng, open_ends=False))
        assert np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() < 1e-10


def test_cross_oracle_sample():
    rng = random.Random(2)
    for _ in range(100):
        c = random_circuit(rng)
        assert equivalent_up_to_scalar(contract(circuit_to_zx(c)), circuit_unitary(c), 1e-9)


def test_y_fixture_cross_oracle():
    c = load_circuit(fixture_path("y_distillation"))
    m = contract(circuit_to_zx(c))
    ref = circuit_unitary(c)
    assert m.shape == ref.shape == (2, 1)
    assert np.abs(ref).max() > 0
    assert equivalent_up_to_scalar(m, ref, 1e-9)


def _normalised(m, ref):
    # divide by the entry where ``ref`` peaks, so ties pick the same index
    k = np.unravel_index(np.argmax(np.abs(ref)), ref.shape)
    return m / m[k]


def test_contraction_order_independence():
    rng = random.Random(6)
    for _ in range(80):
        d = random_diagram(rng)
        a, b = contract(d, order="greedy"), contract(d, order="sequential")
        if np.abs(a).max() < 1e-12:
            assert np.abs(b).max() < 1e-9
            continue
        assert np.abs(_normalised(a, a) - _normalised(b, a)).max() < 1e-10


def test_unknown_order():
    with pytest.raises(OracleError):
        contract(one_spider(Color.Z, 0), order="spiral")


def test_measurement_post_selects_plus_outcome():
    # |0> measured in Z keeps amplitude; |0> then X then measz gives zero
    assert np.abs(circuit_unitary(parse_circuit("qubits 1\ninit0 0\nmeasz 0"))).max() == pytest.approx(1)
    assert np.abs(circuit_unitary(parse_circuit("qubits 1\ninit0 0\nx 0\nmeasz 0"))).max() == pytest.approx(0)


def test_gate_kinds_all_covered():
    for k in GateKind:
        if k.arity == 1 and not (k.is_init or k.is_measure):
            c = Circuit(1, (Gate(k, (0,)),))
            assert equivalent_up_to_scalar(contract(circuit_to_zx(c)), circuit_unitary(c))
