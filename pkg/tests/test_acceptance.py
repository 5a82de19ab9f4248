"""Acceptance checks, one group per criterion.

Run with ``pytest tests/test_acceptance.py`` (or execute this file); the
terminal summary prints one PASS/FAIL line per criterion. The benchmark
fixture runs every bundled circuit once, the determinism check runs them
again through the CLI, so the whole module takes a while on one core.
"""
import random
import sys
import time
from fractions import Fraction
from importlib import resources

import pytest

from braidzx.circuit import circuit_to_zx, load_circuit
from braidzx.cli import main
from braidzx.layout import Layout3D, LayoutOptions, Search, direct_translate, volume
from braidzx.pauli import FaultSite, Pauli, check_independence, injection_spiders, syndrome_map
from braidzx.pipeline import FIXTURES, PipelineConfig, VerifyFlags, fixture_path, reference_table, run_benchmarks, run_pipeline
from braidzx.rewrite import Rule, apply_rule, match_sites, reduce
from braidzx.tensor import circuit_unitary, contract, equivalent_up_to_scalar
from braidzx.zx import stats
from strategies import random_circuit, random_diagram

TOL = 1e-9
TABLE_CIRCUITS = ("barenco_tof_3", "mod5_4", "tof_4", "vbe_adder_3")


def criterion(n, title):
    return pytest.mark.criterion(n, title)


@pytest.fixture(scope="module")
def bench():
    return run_benchmarks(FIXTURES, seed=0)


@pytest.fixture(scope="module")
def bench_rows(bench):
    return {r.name: r for r in bench.rows}


@criterion(1, "rewrite soundness, 10000 fuzzed applications")
def test_c1_rewrite_soundness(record_property):
    rng = random.Random(0)
    rules = list(Rule)
    done = bad = 0
    start = time.perf_counter()
    while done < 10_000:
        d = random_diagram(rng, max_boundary=8)
        rule = rng.choice(rules)
        sites = match_sites(d, rule)
        if not sites:
            continue
        out, _ = apply_rule(d, rule, rng.choice(sites))
        if not equivalent_up_to_scalar(contract(out), contract(d), TOL):
            bad += 1
        done += 1
    took = time.perf_counter() - start
    record_property("detail", f"{done - bad}/{done} sound in {took:.0f}s")
    assert bad == 0
    assert took < 300


@criterion(2, "cross-oracle agreement, 1000 circuits")
def test_c2_cross_oracle(record_property):
    rng = random.Random(1)
    start = time.perf_counter()
    bad = sum(not equivalent_up_to_scalar(contract(circuit_to_zx(c)), circuit_unitary(c), TOL)
              for c in (random_circuit(rng, max_wires=5, max_gates=20) for _ in range(1000)))
    took = time.perf_counter() - start
    record_property("detail", f"{1000 - bad}/1000 agree in {took:.0f}s")
    assert bad == 0
    assert took < 120


@criterion(3, "baseline volumes 108 and 360")
@pytest.mark.parametrize("name, want", [("y_distillation", 108), ("a_distillation", 360)])
def test_c3_baseline_volume(name, want, record_property):
    got = volume(direct_translate(load_circuit(fixture_path(name)))).volume
    record_property("detail", f"{name} {got}")
    assert got == want


@criterion(4, "reduced Y volume <= 32 with both orientations")
def test_c4_reduced_y(record_property):
    start = time.perf_counter()
    art = run_pipeline(PipelineConfig(fixture_path("y_distillation"), layout=LayoutOptions(search=Search.EXHAUSTIVE),
                                      verify=VerifyFlags(True, True)))
    took = time.perf_counter() - start
    v = art.volume
    record_property("detail", f"volume {v.volume}, variants {sorted((str(t), str(q)) for t, q in v.variants())}")
    assert v.volume <= 32
    assert {(Fraction(4), Fraction(8)), (Fraction(2), Fraction(16))} <= v.variants()
    assert took < 600


@criterion(5, "reduced A volume <= 150")
def test_c5_reduced_a(bench_rows, record_property):
    r = bench_rows["a_distillation"]
    record_property("detail", f"volume {r.vol_opt} in {r.wall_time:.0f}s")
    assert not r.fallback
    assert r.vol_opt <= 150
    assert r.wall_time < 1800


@criterion(6, "reduction >= 40% on the four benchmark circuits")
@pytest.mark.parametrize("name", TABLE_CIRCUITS)
def test_c6_reduction_rate(name, bench_rows, record_property):
    r = bench_rows[name]
    record_property("detail", f"{name} {r.vol_init} -> {r.vol_opt} ({r.reduction_percent}%)")
    assert not r.fallback
    assert r.reduction_percent >= 40
    assert r.wall_time < 1800


@criterion(6, "reduction >= 40% on the four benchmark circuits")
@pytest.mark.parametrize("name", [
    *TABLE_CIRCUITS[:3],
    pytest.param("vbe_adder_3", marks=pytest.mark.xfail(
        strict=True, reason="direct translation gives 2002.5, reference 1995; see the decision ledger")),
])
def test_c6_vol_init_matches_reference(name, bench_rows, record_property):
    ref = Fraction(str(reference_table()[name]["vol_init"]))
    got = bench_rows[name].vol_init
    record_property("detail", f"{name} vol_init {got} (reference {ref})")
    assert got == ref


@criterion(7, "T-count conservation")
def test_c7_t_count(record_property):
    checked = 0
    for name in FIXTURES:
        d = circuit_to_zx(load_circuit(fixture_path(name)))
        assert stats(reduce(d).diagram).t_count == stats(d).t_count, name
        checked += 1
    rng = random.Random(7)
    for _ in range(500):
        d = circuit_to_zx(random_circuit(rng))
        assert stats(reduce(d).diagram).t_count == stats(d).t_count
        d = random_diagram(rng)
        assert stats(reduce(d).diagram).t_count == stats(d).t_count
        checked += 2
    record_property("detail", f"{checked} inputs")


@criterion(8, "Y syndrome independence before and after reduction")
@pytest.mark.parametrize("reduced", [False, True], ids=["before", "after"])
@pytest.mark.parametrize("pauli", list(Pauli), ids=lambda p: p.value)
def test_c8_syndromes(reduced, pauli, record_property):
    d = circuit_to_zx(load_circuit(fixture_path("y_distillation")))
    if reduced:
        d = reduce(d).diagram
    sites = [FaultSite("spider", v, pauli) for v in injection_spiders(d)]
    m = syndrome_map(d, sites)
    patterns = [o.detected_flips for o in m.values()]
    assert len(sites) == 7
    assert all(any(p) for p in patterns)
    assert len(set(patterns)) == 7
    assert check_independence(m).ok


@criterion(9, "CCZ rescaling 58 -> 90.625 -> 91")
def test_c9_rescaling(record_property):
    text = (resources.files("braidzx") / "data" / "ccz_factory_layout.json").read_text()
    v = volume(Layout3D.from_json(text))
    record_property("detail", f"{v.volume} -> {float(v.rescaled_volume)} -> {v.rescaled_display}")
    assert (v.volume, v.rescaled_volume, v.rescaled_display) == (58, Fraction(725, 8), 91)


@criterion(10, "byte-identical bench reports")
def test_c10_determinism(bench, tmp_path, monkeypatch, record_property):
    monkeypatch.delenv("BRAIDZX_SEED", raising=False)
    out = tmp_path / "bench.tsv"
    assert main(["bench", "--seed", "0", "--format", "tsv", "--out", str(out)]) == 0
    again = out.read_bytes()
    first = bench.to_tsv().encode()
    record_property("detail", f"{len(first)} bytes, {len(bench.rows)} rows")
    assert again == first


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
