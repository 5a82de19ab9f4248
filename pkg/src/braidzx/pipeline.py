"""End-to-end driver: circuit text to packed defect layout, plus checks.

Stages run in a fixed order (parse, translate, reduce, verify, synth,
pack, report). A failing stage raises StageError carrying the stage name;
a failing check raises VerificationError. The benchmark harness runs one
pipeline per fixture and compares against bundled reference volumes.
"""
from __future__ import annotations

import io
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .braid import BraidStructure, Mode, zx_to_braid
from .circuit import Circuit, circuit_to_zx, load_circuit
from .layout import Layout3D, LayoutOptions, VolumeReport, direct_translate, layout, volume
from .pauli import FaultSite, Pauli, check_independence, default_sites, injection_spiders, report_tsv, syndrome_map
from .rewrite import Reduction, ReductionPolicy, RewriteTrace, reduce
from .tensor import DEFAULT_CAP, DEFAULT_TOL, OracleError, circuit_unitary, contract, equivalent_up_to_scalar
from .zx import ZXDiagram

log = logging.getLogger(__name__)

SEED_ENV = "BRAIDZX_SEED"
FIXTURES = ("y_distillation", "a_distillation", "barenco_tof_3", "mod5_4", "tof_4", "vbe_adder_3")
OVERSIZE_WARNING = "oracle skipped: exceeds cap"


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException | str):
        self.stage = stage
        super().__init__(f"{stage}: {cause}")


class VerificationError(RuntimeError):
    def __init__(self, check: str, detail: str):
        self.check = check
        super().__init__(f"{check} verification failed: {detail}")


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "").strip()
    if not raw:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class VerifyFlags:
    oracle: bool = False
    pauli: bool = False

    @classmethod
    def parse(cls, text: str) -> "VerifyFlags":
        words = {w.strip() for w in text.split(",") if w.strip()}
        unknown = words - {"oracle", "pauli"}
        if unknown:
            raise ValueError(f"unknown verification {', '.join(sorted(unknown))}")
        return cls("oracle" in words, "pauli" in words)


@dataclass(frozen=True)
class PipelineConfig:
    input: Path
    out_dir: Path | None = None
    policy: ReductionPolicy = field(default_factory=ReductionPolicy)
    layout: LayoutOptions = field(default_factory=LayoutOptions)
    verify: VerifyFlags = field(default_factory=VerifyFlags)
    seed: int = 0
    oracle_cap: int = DEFAULT_CAP
    mode: Mode = Mode.BRAID_ONLY

    def resolved(self) -> "PipelineConfig":
        """Copy with ``seed`` pushed into every stochastic stage."""
        return replace(self, policy=replace(self.policy, seed=self.seed), layout=replace(self.layout, seed=self.seed))


@dataclass
class OracleReport:
    checked: bool
    equivalent: bool | None = None
    circuit_agrees: bool | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return {"checked": self.checked, "equivalent": self.equivalent, "circuit_agrees": self.circuit_agrees, "note": self.note}


@dataclass
class PauliReport:
    before: dict[FaultSite, object]
    after: dict[FaultSite, object]
    independent_before: dict[str, bool]
    independent_after: dict[str, bool]

    @property
    def regressions(self) -> list[str]:
        return [p for p, ok in self.independent_before.items() if ok and not self.independent_after[p]]

    def to_dict(self) -> dict:
        return {"independent_before": self.independent_before, "independent_after": self.independent_after,
                "regressions": self.regressions}


@dataclass
class Artifacts:
    circuit: Circuit
    diagram: ZXDiagram
    reduction: Reduction
    braid: BraidStructure
    layout: Layout3D
    volume: VolumeReport
    baseline: VolumeReport
    t_count: int
    oracle: OracleReport | None = None
    pauli: PauliReport | None = None
    warnings: list[str] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)

    @property
    def reduced(self) -> ZXDiagram:
        return self.reduction.diagram

    @property
    def trace(self) -> RewriteTrace:
        return self.reduction.trace

    def summary(self) -> dict:
        doc = {
            "circuit": self.circuit.name,
            "t_count": self.t_count,
            "vol_init": _num(self.baseline.volume),
            "vol_opt": _num(self.volume.volume),
            "reduction_percent": _percent(self.baseline.volume, self.volume.volume),
            "rewrite_steps": len(self.trace),
            "volume": self.volume.to_dict(),
            "baseline": self.baseline.to_dict(),
            "layout_meta": self.layout.meta,
            "warnings": self.warnings,
        }
        if self.oracle is not None:
            doc["oracle"] = self.oracle.to_dict()
        if self.pauli is not None:
            doc["pauli"] = self.pauli.to_dict()
        return doc


def _num(x: Fraction):
    return int(x) if x.denominator == 1 else float(x)


def _percent(before: Fraction, after: Fraction) -> float:
    if before == 0:
        return 0.0
    return round(float((1 - after / before) * 100), 2)


def t_count(d: ZXDiagram) -> int:
    return sum(1 for s in d.spiders.values() if s.is_odd)


# -- verification -------------------------------------------------------

def oracle_check(c: Circuit, before: ZXDiagram, after: ZXDiagram, cap: int = DEFAULT_CAP,
                 tol: float = DEFAULT_TOL) -> OracleReport:
    wires = len(before.inputs) + len(before.outputs)
    if wires > cap:
        return OracleReport(False, note=OVERSIZE_WARNING)
    try:
        m0 = contract(before, cap=cap)
        m1 = contract(after, cap=cap)
        ref = circuit_unitary(c)
    except OracleError as exc:
        return OracleReport(False, note=f"oracle skipped: {exc}")
    return OracleReport(True, equivalent_up_to_scalar(m1, m0, tol), equivalent_up_to_scalar(m0, ref, tol))


def _independence(d: ZXDiagram) -> tuple[dict, dict[str, bool]]:
    m = syndrome_map(d, default_sites(d, injection_only=True))
    flags = {}
    for p in Pauli:
        part = {f: o for f, o in m.items() if f.pauli is p}
        flags[p.value] = bool(part) and check_independence(part).ok
    return m, flags


def pauli_check(before: ZXDiagram, after: ZXDiagram) -> PauliReport:
    """Single faults at the injection sites, per Pauli, before and after."""
    if len(injection_spiders(before)) != len(injection_spiders(after)):
        raise VerificationError("pauli", "injection sites were not preserved")
    mb, fb = _independence(before)
    ma, fa = _independence(after)
    return PauliReport(mb, ma, fb, fa)


# -- the pipeline -------------------------------------------------------

def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (VerificationError, StageError):
        raise
    except Exception as exc:  # anything else is reported against its stage
        raise StageError(name, exc) from exc


def run_pipeline(cfg: PipelineConfig) -> Artifacts:
    cfg = cfg.resolved()
    c = _stage("parse", load_circuit, cfg.input)
    d = _stage("translate", circuit_to_zx, c)
    red = _stage("reduce", reduce, d, cfg.policy)
    t0, t1 = t_count(d), t_count(red.diagram)
    if cfg.policy.preserve_t_count and t0 != t1:
        raise StageError("reduce", f"T-count changed from {t0} to {t1}")
    warnings = []
    if red.exhausted:
        warnings.append("reduction step budget exhausted")

    oracle = pauli = None
    if cfg.verify.oracle:
        oracle = _stage("verify", oracle_check, c, d, red.diagram, cfg.oracle_cap)
        if not oracle.checked:
            warnings.append(oracle.note)
            log.warning("%s: %s", c.name, oracle.note)
        elif not oracle.equivalent:
            raise VerificationError("oracle", "reduced diagram is not equivalent to the input")
        elif not oracle.circuit_agrees:
            raise VerificationError("oracle", "diagram disagrees with the circuit matrix")
    if cfg.verify.pauli:
        pauli = _stage("verify", pauli_check, d, red.diagram)
        if pauli.regressions:
            raise VerificationError("pauli", "syndrome independence lost for " + ", ".join(pauli.regressions))

    b = _stage("synth", zx_to_braid, red.diagram, cfg.mode)
    lay = _stage("pack", layout, b, cfg.layout)
    base = _stage("pack", direct_translate, c, cfg.layout.calibration)
    art = Artifacts(c, d, red, b, lay, volume(lay), volume(base), t1, oracle, pauli, warnings)
    if cfg.out_dir is not None:
        _stage("report", write_artifacts, art, Path(cfg.out_dir))
    return art


def write_artifacts(art: Artifacts, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    docs = {
        "zx.json": art.diagram.to_json(),
        "reduced.json": art.reduced.to_json(),
        "trace.json": art.trace.to_json(),
        "braid.json": art.braid.to_json(),
        "layout.json": art.layout.to_json(),
        "volume.json": json.dumps(art.volume.to_dict(), indent=1) + "\n",
        "summary.json": json.dumps(art.summary(), indent=1, sort_keys=True) + "\n",
    }
    if art.pauli is not None:
        docs["pauli_before.tsv"] = report_tsv(art.pauli.before)
        docs["pauli_after.tsv"] = report_tsv(art.pauli.after)
    written = []
    for name, text in docs.items():
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    art.files = written
    return written


# -- benchmarks ---------------------------------------------------------

def fixture_path(name: str) -> Path:
    path = Path(str(resources.files("braidzx") / "data" / f"{name}.circ"))
    if not path.is_file():
        raise FileNotFoundError(f"no fixture named {name!r}")
    return path


def reference_table() -> dict[str, dict]:
    text = (resources.files("braidzx") / "data" / "reference_volumes.json").read_text(encoding="utf-8")
    return {r["fixture"]: r for r in json.loads(text)["rows"]}


@dataclass(frozen=True)
class BenchmarkRow:
    name: str
    vol_init: Fraction
    vol_opt: Fraction
    t_count: int
    wall_time: float = 0.0
    search: str = ""
    fallback: bool = False  # packing lost to the direct translation

    @property
    def reduction_percent(self) -> float:
        return _percent(self.vol_init, self.vol_opt)


@dataclass
class BenchmarkTable:
    rows: list[BenchmarkRow]
    reference: dict[str, dict]
    seed: int = 0

    def drift(self, row: BenchmarkRow) -> bool:
        ref = self.reference.get(row.name)
        return ref is not None and Fraction(str(ref["vol_init"])) != row.vol_init

    def _records(self, timing: bool) -> list[dict]:
        out = []
        for r in self.rows:
            ref = self.reference.get(r.name, {})
            rec = {
                "circuit": r.name,
                "vol_init": _num(r.vol_init),
                "vol_opt": _num(r.vol_opt),
                "reduction_percent": r.reduction_percent,
                "t_count": r.t_count,
                "ref_vol_init": ref.get("vol_init"),
                "ref_vol_opt": ref.get("vol_opt"),
                "ref_reduction_percent": ref.get("reduction_percent"),
                "drift": self.drift(r),
                "search": r.search + (" fallback" if r.fallback else ""),
            }
            if timing:
                rec["wall_time_s"] = round(r.wall_time, 1)
            out.append(rec)
        return out

    def to_tsv(self, timing: bool = False) -> str:
        recs = self._records(timing)
        cols = list(recs[0]) if recs else list(self._header(timing))
        buf = io.StringIO()
        buf.write("\t".join(cols) + "\n")
        for rec in recs:
            buf.write("\t".join(_cell(rec[k]) for k in cols) + "\n")
        return buf.getvalue()

    def to_markdown(self, timing: bool = False) -> str:
        recs = self._records(timing)
        cols = list(recs[0]) if recs else list(self._header(timing))
        lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
        for rec in recs:
            cells = []
            for k in cols:
                v = rec[k]
                if k == "drift":
                    v = "DRIFT" if v else ""
                elif k == "ref_reduction_percent" and v is not None:
                    v = f"-{v}%"
                cells.append(_cell(v))
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"

    def to_json(self, timing: bool = False) -> str:
        return json.dumps({"seed": self.seed, "rows": self._records(timing)}, indent=1, sort_keys=True) + "\n"

    @staticmethod
    def _header(timing: bool):
        cols = ["circuit", "vol_init", "vol_opt", "reduction_percent", "t_count", "ref_vol_init", "ref_vol_opt",
                "ref_reduction_percent", "drift", "search"]
        return cols + ["wall_time_s"] if timing else cols

    def render(self, fmt: str, timing: bool = False) -> str:
        if fmt == "tsv":
            return self.to_tsv(timing)
        if fmt == "md":
            return self.to_markdown(timing)
        if fmt == "json":
            return self.to_json(timing)
        raise ValueError(f"unknown format {fmt!r}")


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def bench_one(name: str, seed: int = 0, opts: LayoutOptions | None = None) -> BenchmarkRow:
    """One fixture through the pipeline, no verification and no files."""
    start = time.perf_counter()
    cfg = PipelineConfig(fixture_path(name), layout=opts or LayoutOptions(), seed=seed)
    art = run_pipeline(cfg)
    v0, v1 = art.baseline.volume, art.volume.volume
    fallback = v1 > v0
    return BenchmarkRow(name, v0, min(v0, v1), art.t_count, time.perf_counter() - start,
                        str(art.layout.meta.get("search", "")), fallback)


def run_benchmarks(names: list[str] | tuple[str, ...], seed: int = 0, opts: LayoutOptions | None = None,
                   workers: int | None = None) -> BenchmarkTable:
    """Run each fixture in its own worker process; rows keep input order."""
    names = list(names)
    for n in names:
        fixture_path(n)
    if not names:
        return BenchmarkTable([], reference_table(), seed)
    workers = workers or min(len(names), os.cpu_count() or 1)
    if workers <= 1:
        rows = [bench_one(n, seed, opts) for n in names]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(bench_one, names, [seed] * len(names), [opts] * len(names)))
    return BenchmarkTable(rows, reference_table(), seed)
