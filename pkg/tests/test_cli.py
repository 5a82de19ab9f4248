import json

import pytest

from braidzx.cli import EXIT_OK, EXIT_STAGE, EXIT_USAGE, EXIT_VERIFY, main
from braidzx.pipeline import fixture_path


@pytest.fixture(scope="module")
def staged(tmp_path_factory):
    """Y taken stage by stage through the CLI."""
    d = tmp_path_factory.mktemp("stages")
    codes = [
        main(["parse", "--in", "y_distillation", "--out", str(d / "zx.json")]),
        main(["reduce", "--in", str(d / "zx.json"), "--out", str(d / "red.json"), "--trace", str(d / "trace.json")]),
        main(["verify", "--in", str(d / "zx.json"), "--against", str(d / "red.json"), "--circuit", "y_distillation",
              "--format", "json", "--out", str(d / "verify.json")]),
        main(["synth", "--in", str(d / "red.json"), "--out", str(d / "braid.json")]),
        main(["pack", "--in", str(d / "braid.json"), "--out", str(d / "layout.json")]),
        main(["report", "--in", str(d / "layout.json"), "--baseline", "y_distillation", "--format", "json",
              "--out", str(d / "report.json")]),
    ]
    return d, codes


def test_stages_succeed(staged):
    _, codes = staged
    assert codes == [EXIT_OK] * 6


def test_verify_output(staged):
    d, _ = staged
    doc = json.loads((d / "verify.json").read_text())
    assert doc["oracle"]["equivalent"] and doc["oracle"]["circuit_agrees"]
    assert doc["pauli"]["regressions"] == []


def test_report_output(staged):
    d, _ = staged
    doc = json.loads((d / "report.json").read_text())
    assert doc["layout"]["volume"] == 32
    assert doc["layout"]["rescaled_display"] == 50
    assert doc["direct"]["volume"] == 108


def test_report_formats(staged, capsys):
    d, _ = staged
    assert main(["report", "--in", str(d / "layout.json"), "--format", "md"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("| layout |")
    assert main(["report", "--in", str(d / "layout.json")]) == EXIT_OK
    assert "2x16" in capsys.readouterr().out


def test_run_subcommand(tmp_path, capsys):
    assert main(["run", "--in", "y_distillation", "--out", str(tmp_path), "--verify", "oracle,pauli"]) == EXIT_OK
    out = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
    assert out["vol_init"] == "108"
    assert (tmp_path / "summary.json").exists()


def test_corrupt_input_exits_with_stage_code(tmp_path):
    bad = tmp_path / "bad.circ"
    bad.write_text("qubits x\n")
    assert main(["parse", "--in", str(bad)]) == EXIT_STAGE
    assert main(["run", "--in", str(bad)]) == EXIT_STAGE


def test_missing_file_is_a_stage_failure(tmp_path):
    assert main(["parse", "--in", str(tmp_path / "missing.circ")]) == EXIT_STAGE


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == EXIT_USAGE
    assert main(["reduce", "--in", "x.json", "--no-preserve-tcount"]) == EXIT_USAGE
    assert main(["bench", "no_such_fixture"]) == EXIT_USAGE


def test_failed_equivalence_exits_with_verify_code(tmp_path):
    assert main(["parse", "--in", "y_distillation", "--out", str(tmp_path / "y.json")]) == EXIT_OK
    other = tmp_path / "cnot.circ"
    other.write_text("qubits 2\ncnot 0 1\n")
    assert main(["parse", "--in", str(other), "--out", str(tmp_path / "c.json")]) == EXIT_OK
    swapped = tmp_path / "swapped.circ"
    swapped.write_text("qubits 2\ncnot 1 0\n")
    assert main(["parse", "--in", str(swapped), "--out", str(tmp_path / "s.json")]) == EXIT_OK
    code = main(["verify", "--in", str(tmp_path / "c.json"), "--against", str(tmp_path / "s.json"),
                 "--verify", "oracle"])
    assert code == EXIT_VERIFY


def test_fixture_names_resolve():
    assert fixture_path("mod5_4").name == "mod5_4.circ"
