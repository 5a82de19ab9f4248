import json
import random
from pathlib import Path

import pytest

from braidzx.circuit import circuit_to_zx, load_circuit, parse_circuit
from braidzx.pipeline import fixture_path
from braidzx.rewrite import reduce
from braidzx.zx import Color, DiagramStats, EdgeTag, Spider, ZXDiagram, ZXError, graph_isomorphic, stats, validate
from strategies import random_diagram

GOLDEN = Path(__file__).parent / "golden"


def relabel(d: ZXDiagram, rng: random.Random) -> ZXDiagram:
    """Same diagram with shuffled vertex and edge ids."""
    doc = d.to_dict()
    ids = [s["id"] for s in doc["spiders"]] + doc["inputs"] + doc["outputs"]
    new = rng.sample(range(100, 100 + 3 * len(ids)), len(ids))
    m = dict(zip(ids, new))
    for s in doc["spiders"]:
        s["id"] = m[s["id"]]
    edges = doc["edges"]
    rng.shuffle(edges)
    for i, e in enumerate(edges):
        e["id"], e["a"], e["b"] = i, m[e["a"]], m[e["b"]]
    doc["inputs"] = [m[v] for v in doc["inputs"]]
    doc["outputs"] = [m[v] for v in doc["outputs"]]
    return ZXDiagram.from_dict(doc)


def test_stats_of_t_gate():
    s = stats(circuit_to_zx(parse_circuit("qubits 1\nt 0")))
    assert s.t_count == 1 and s.hadamard_count == 0


def test_stats_of_a_distillation():
    assert stats(circuit_to_zx(load_circuit(fixture_path("a_distillation")))).t_count == 15


def test_stats_of_empty_diagram():
    assert stats(ZXDiagram()) == DiagramStats()


def test_stats_bound_and_purity():
    rng = random.Random(1)
    for _ in range(50):
        d = random_diagram(rng)
        s = stats(d)
        assert s.t_count <= s.z_count + s.x_count
        assert stats(d.copy()) == s


def test_validate_cnot_ok():
    assert validate(circuit_to_zx(parse_circuit("qubits 2\ncnot 0 1"))) == []


def test_validate_dangling_edge():
    d = circuit_to_zx(parse_circuit("qubits 2\ncnot 0 1"))
    doc = d.to_dict()
    doc["spiders"] = doc["spiders"][1:]
    problems = validate(ZXDiagram.from_dict(doc))
    assert any("dangling edge" in p for p in problems)


def test_validate_phase_out_of_range():
    d = ZXDiagram()
    v = d.add_spider(Color.Z)
    d.spiders[v] = Spider(Color.Z, 8)
    assert any("phase out of range" in p for p in validate(d))


def test_validate_reports_every_violation():
    d = ZXDiagram()
    v = d.add_spider(Color.Z)
    d.spiders[v] = Spider(Color.Z, 9)
    w = d.add_spider(Color.X)
    d.add_edge(v, w)
    doc = d.to_dict()
    doc["spiders"] = [s for s in doc["spiders"] if s["id"] != w]
    problems = validate(ZXDiagram.from_dict(doc))
    assert len(problems) >= 2


def test_multigraph_features_representable():
    d = ZXDiagram()
    a, b = d.add_spider(Color.Z), d.add_spider(Color.X)
    d.add_edge(a, b)
    d.add_edge(a, b, EdgeTag.HADAMARD)
    d.add_edge(a, a)
    assert validate(d) == []
    assert len(d.edges_between(a, b)) == 2


def test_json_round_trip_and_field_names():
    d = circuit_to_zx(load_circuit(fixture_path("y_distillation")))
    doc = json.loads(d.to_json())
    assert set(doc) == {"spiders", "edges", "inputs", "outputs"}
    assert {"id", "color", "phase8"} <= set(doc["spiders"][0])
    assert {"a", "b", "tag"} <= set(doc["edges"][0])
    back = ZXDiagram.from_json(d.to_json())
    assert back.to_json() == d.to_json()


def test_boundary_id_collision_rejected():
    doc = {"spiders": [{"id": 0, "color": "Z", "phase8": 0}], "edges": [], "inputs": [0], "outputs": []}
    with pytest.raises(ZXError):
        ZXDiagram.from_dict(doc)


def test_isomorphic_under_relabelling():
    rng = random.Random(5)
    for _ in range(30):
        d = random_diagram(rng)
        assert graph_isomorphic(d, relabel(d, rng))


def test_phase_difference_breaks_isomorphism():
    a, b = ZXDiagram(), ZXDiagram()
    for d, phase in ((a, 1), (b, 2)):
        i, o = d.add_boundary("in"), d.add_boundary("out")
        v = d.add_spider(Color.Z, phase)
        d.add_edge(i, v)
        d.add_edge(v, o)
    assert not graph_isomorphic(a, b)


def test_boundary_order_matters():
    a = circuit_to_zx(parse_circuit("qubits 2\ncnot 0 1"))
    b = circuit_to_zx(parse_circuit("qubits 2\ncnot 1 0"))
    assert not graph_isomorphic(a, b)


def test_isomorphism_is_symmetric_and_transitive():
    rng = random.Random(9)
    d = random_diagram(rng)
    e = relabel(d, rng)
    f = relabel(e, rng)
    assert graph_isomorphic(e, d) and graph_isomorphic(d, f)


def test_reduced_y_matches_golden():
    d = reduce(circuit_to_zx(load_circuit(fixture_path("y_distillation")))).diagram
    golden = ZXDiagram.from_json((GOLDEN / "y_reduced.json").read_text())
    assert graph_isomorphic(d, golden)


def test_ids_are_never_reused():
    d = ZXDiagram()
    v = d.add_spider(Color.Z)
    d.remove_spider(v)
    assert d.add_spider(Color.Z) != v


def test_transaction_rollback_restores_diagram():
    d = circuit_to_zx(parse_circuit("qubits 2\ncnot 0 1\nt 1"))
    before = d.to_json()
    d.begin()
    v = next(iter(d.spiders))
    d.set_phase(v, 3)
    for e in list(d.incident(v)):
        d.remove_edge(e)
    d.rollback()
    assert d.to_json() == before
