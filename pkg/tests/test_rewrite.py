import json
import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from braidzx.circuit import circuit_to_zx, load_circuit, parse_circuit
from braidzx.pipeline import FIXTURES, fixture_path
from braidzx.rewrite import (Divergence, NoMatch, ReductionPolicy, RewriteTrace, Rule, apply_in_place, apply_rule,
                             match_sites, objective, reduce, replay)
from braidzx.tensor import contract, equivalent_up_to_scalar
from braidzx.zx import Color, EdgeTag, ZXDiagram, graph_isomorphic, stats, validate
from strategies import random_circuit, random_diagram

GOLDEN = Path(__file__).parent / "golden"


def wire(d: ZXDiagram, *spiders: int, tag=EdgeTag.PLAIN) -> None:
    for a, b in zip(spiders, spiders[1:]):
        d.add_edge(a, b, tag)


def open_chain(*specs):
    """in - s0 - s1 - ... - out for (color, phase) specs."""
    d = ZXDiagram()
    i = d.add_boundary("in")
    vs = [d.add_spider(c, p) for c, p in specs]
    o = d.add_boundary("out")
    wire(d, i, *vs, o)
    return d, vs


def same_map(a: ZXDiagram, b: ZXDiagram) -> bool:
    return equivalent_up_to_scalar(contract(a), contract(b), 1e-9)


def test_fusion_adds_phases():
    d, (a, b) = open_chain((Color.Z, 1), (Color.Z, 2))
    (site,) = match_sites(d, Rule.SPIDER_FUSION)
    out, step = apply_rule(d, Rule.SPIDER_FUSION, site)
    (s,) = out.spiders.values()
    assert s.phase == 3 and s.color is Color.Z
    assert step.removed_spiders == (b,)
    assert same_map(d, out)


def test_identity_removal_splices():
    d, (v,) = open_chain((Color.Z, 0))
    out, _ = apply_rule(d, Rule.IDENTITY_REMOVAL, (v,))
    assert not out.spiders and len(out.edges) == 1
    assert out.inputs == d.inputs and out.outputs == d.outputs


def test_hopf_removes_doubled_pair():
    d = ZXDiagram()
    i, o1, o2 = d.add_boundary("in"), d.add_boundary("out"), d.add_boundary("out")
    g, r = d.add_spider(Color.Z), d.add_spider(Color.X)
    d.add_edge(i, g)
    d.add_edge(g, o1)
    d.add_edge(r, o2)
    d.add_edge(g, r)
    d.add_edge(g, r)
    assert match_sites(d, Rule.HOPF) == [(g, r)]
    out, step = apply_rule(d, Rule.HOPF, (g, r))
    assert out.edges_between(g, r) == []
    assert len(step.removed_edges) == 2
    assert same_map(d, out)


@pytest.mark.parametrize("legs", [1, 2, 3])
@pytest.mark.parametrize("alpha", [0, 1, 2, 5])
def test_pi_copy_negates_and_copies(legs, alpha):
    d = ZXDiagram()
    i = d.add_boundary("in")
    p = d.add_spider(Color.X, 4)
    v = d.add_spider(Color.Z, alpha)
    wire(d, i, p, v)
    for _ in range(legs):
        wire(d, v, d.add_boundary("out"))
    out, _ = apply_rule(d, Rule.PI_COPY, (p, v))
    assert out.spiders[v].phase == (-alpha) % 8
    pis = [s for s in out.spiders.values() if s.color is Color.X and s.phase == 4]
    assert len(pis) == legs
    assert same_map(d, out)


def test_chain_of_three_has_two_fusion_sites():
    d, _ = open_chain((Color.X, 0), (Color.X, 1), (Color.X, 4))
    assert len(match_sites(d, Rule.SPIDER_FUSION)) == 2


@pytest.mark.parametrize("rule", list(Rule))
def test_empty_diagram_has_no_sites(rule):
    assert match_sites(ZXDiagram(), rule) == []


def test_sites_are_sorted_and_deterministic():
    rng = random.Random(11)
    for _ in range(20):
        d = random_diagram(rng)
        for rule in Rule:
            sites = match_sites(d, rule)
            assert sites == sorted(sites)
            assert sites == match_sites(d.copy(), rule)


def test_no_match_raises():
    d, (v,) = open_chain((Color.Z, 1))
    with pytest.raises(NoMatch):
        apply_rule(d, Rule.IDENTITY_REMOVAL, (v,))


def test_reduce_never_fuses_two_odd_phases():
    d, _ = open_chain((Color.Z, 1), (Color.Z, 7))
    # the rule itself matches; the reducer refuses since T-count would drop
    assert len(match_sites(d, Rule.SPIDER_FUSION)) == 1
    red = reduce(d).diagram
    assert stats(red).t_count == 2


def test_color_change_and_hadamard_cancel():
    d, (v,) = open_chain((Color.X, 0))
    out, _ = apply_rule(d, Rule.COLOR_CHANGE, (v,))
    assert out.spiders[v].color is Color.Z
    assert all(e.tag is EdgeTag.HADAMARD for e in out.edges.values())
    assert match_sites(out, Rule.HADAMARD_CANCEL) == [(v,)]
    back, _ = apply_rule(out, Rule.HADAMARD_CANCEL, (v,))
    assert same_map(d, back) and not back.spiders


def test_hadamard_self_loop_adds_pi():
    d, (v,) = open_chain((Color.Z, 1))
    d.add_edge(v, v, EdgeTag.HADAMARD)
    (site,) = match_sites(d, Rule.SELF_LOOP_REMOVAL)
    out, _ = apply_rule(d, Rule.SELF_LOOP_REMOVAL, site)
    assert out.spiders[v].phase == 5
    assert same_map(d, out)


def test_bialgebra_is_sound():
    d = ZXDiagram()
    z, x = d.add_spider(Color.Z), d.add_spider(Color.X)
    d.add_edge(z, x)
    for v in (z, z, x, x):
        d.add_edge(v, d.add_boundary("out"))
    (site,) = match_sites(d, Rule.BIALGEBRA)
    out, _ = apply_rule(d, Rule.BIALGEBRA, site)
    assert len(out.spiders) == 4
    assert same_map(d, out)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(list(Rule)))
def test_every_rule_is_sound(seed, rule):
    rng = random.Random(seed)
    d = random_diagram(rng)
    sites = match_sites(d, rule)
    if not sites:
        return
    out, _ = apply_rule(d, rule, rng.choice(sites))
    assert validate(out) == []
    assert out.inputs == d.inputs and out.outputs == d.outputs
    assert same_map(d, out)


def test_cnot_pair_reduces_to_wires():
    d = circuit_to_zx(parse_circuit("qubits 2\ncnot 0 1\ncnot 0 1"))
    red = reduce(d).diagram
    assert len(red.spiders) <= 2
    assert same_map(d, red)


def test_y_reduction_keeps_injections():
    d = circuit_to_zx(load_circuit(fixture_path("y_distillation")))
    red = reduce(d).diagram
    s = stats(red)
    assert s.t_count == 0 and s.s_count == 7
    assert same_map(d, red)


def test_a_reduction_keeps_t_count():
    d = circuit_to_zx(load_circuit(fixture_path("a_distillation")))
    assert stats(reduce(d).diagram).t_count == 15


def test_objective_is_monotone_along_the_trace():
    d = circuit_to_zx(load_circuit(fixture_path("barenco_tof_3")))
    policy = ReductionPolicy()
    red = reduce(d, policy)
    work = d.copy()
    last = objective(work, policy)
    for step in red.trace.steps:
        apply_in_place(work, step.rule, step.site)
        now = objective(work, policy)
        assert now <= last
        last = now
    assert objective(red.diagram, policy) <= objective(d, policy)


def test_reduce_does_not_touch_its_input():
    d = circuit_to_zx(load_circuit(fixture_path("y_distillation")))
    before = d.to_json()
    reduce(d)
    assert d.to_json() == before


def test_reduce_is_deterministic():
    d = circuit_to_zx(load_circuit(fixture_path("mod5_4")))
    assert reduce(d).trace.to_json() == reduce(d).trace.to_json()


def test_step_budget_is_flagged():
    d = circuit_to_zx(load_circuit(fixture_path("y_distillation")))
    red = reduce(d, ReductionPolicy(max_steps=3))
    assert red.exhausted and len(red.trace) == 3


def test_weights_are_rationals():
    p = ReductionPolicy()
    assert (p.node_weight, p.hadamard_weight, p.injection_weight) == (Fraction(1), Fraction(1), Fraction(2))
    assert p.preserve_t_count


def test_random_circuits_keep_t_count_and_semantics():
    rng = random.Random(21)
    for _ in range(60):
        d = circuit_to_zx(random_circuit(rng))
        red = reduce(d).diagram
        assert stats(red).t_count == stats(d).t_count
        assert same_map(d, red)


def test_replay_reproduces_exactly():
    d = circuit_to_zx(load_circuit(fixture_path("y_distillation")))
    red = reduce(d)
    assert replay(d, red.trace).to_json() == red.diagram.to_json()


def test_empty_trace_replays_to_input():
    d = circuit_to_zx(parse_circuit("qubits 2\ncnot 0 1"))
    assert replay(d, RewriteTrace()).to_json() == d.to_json()


def test_replay_on_mutated_diagram_diverges():
    d = circuit_to_zx(load_circuit(fixture_path("y_distillation")))
    trace = reduce(d).trace
    mutated = d.copy()
    mutated.remove_edge(min(mutated.edges))
    with pytest.raises(Divergence):
        replay(mutated, trace)


def test_trace_json_round_trip_and_rule_names():
    d = circuit_to_zx(load_circuit(fixture_path("y_distillation")))
    trace = reduce(d).trace
    text = trace.to_json()
    assert RewriteTrace.from_json(text).to_json() == text
    names = {s["rule"] for s in json.loads(text)}
    assert names <= {r.value for r in Rule}


def test_trace_matches_golden():
    d = circuit_to_zx(load_circuit(fixture_path("y_distillation")))
    golden = RewriteTrace.from_json((GOLDEN / "y_trace.json").read_text())
    assert reduce(d).trace.to_json() == golden.to_json()
    assert graph_isomorphic(replay(d, golden), ZXDiagram.from_json((GOLDEN / "y_reduced.json").read_text()))


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_reductions_are_valid(name):
    d = circuit_to_zx(load_circuit(fixture_path(name)))
    red = reduce(d).diagram
    assert validate(red) == []
    assert stats(red).t_count == stats(d).t_count
