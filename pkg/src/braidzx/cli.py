"""Command-line interface.

Each stage subcommand reads and writes the interchange files so stages can
be run one at a time; ``run`` chains them all and ``bench`` runs the
bundled fixture set. Exit codes: 0 success, 1 usage, 2 stage failure,
3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .braid import BraidStructure, Mode, zx_to_braid
from .circuit import circuit_to_zx, load_circuit
from .layout import Layout3D, LayoutOptions, Search, direct_translate, layout, volume
from .pipeline import (FIXTURES, PipelineConfig, StageError, VerificationError, VerifyFlags, default_seed,
                       fixture_path, oracle_check, pauli_check, run_benchmarks, run_pipeline)
from .pauli import report_tsv
from .rewrite import ReductionPolicy, reduce
from .tensor import OracleError, contract, equivalent_up_to_scalar
from .zx import ZXDiagram

EXIT_OK, EXIT_USAGE, EXIT_STAGE, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _input(text: str) -> Path:
    """A path, or the name of a bundled fixture."""
    p = Path(text)
    if p.exists() or text.endswith((".circ", ".json")):
        return p
    if text in FIXTURES:
        return fixture_path(text)
    return p


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def _read(path: Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _policy(args) -> ReductionPolicy:
    if args.preserve_tcount is False:
        raise UsageError("--no-preserve-tcount is not supported; T-count is always preserved")
    return ReductionPolicy(seed=args.seed)


def _layout_opts(args) -> LayoutOptions:
    return LayoutOptions(search=Search(args.orient), seed=args.seed)


# -- subcommands --------------------------------------------------------

def cmd_parse(args) -> int:
    try:
        c = load_circuit(args.input)
        d = circuit_to_zx(c)
    except Exception as exc:
        raise StageError("parse", exc) from exc
    _emit(d.to_json(), args.out)
    return EXIT_OK


def cmd_reduce(args) -> int:
    policy = _policy(args)
    try:
        d = ZXDiagram.from_json(_read(args.input))
        red = reduce(d, policy)
    except Exception as exc:
        raise StageError("reduce", exc) from exc
    _emit(red.diagram.to_json(), args.out)
    if args.trace:
        _emit(red.trace.to_json(), args.trace)
    return EXIT_OK


def cmd_verify(args) -> int:
    flags = VerifyFlags.parse(args.verify or "oracle,pauli")
    try:
        before = ZXDiagram.from_json(_read(args.input))
        after = ZXDiagram.from_json(_read(args.against)) if args.against else reduce(before).diagram
        circuit = load_circuit(args.circuit) if args.circuit else None
    except Exception as exc:
        raise StageError("verify", exc) from exc
    doc: dict = {}
    failed = []
    if flags.oracle:
        if circuit is None:
            try:
                ok = equivalent_up_to_scalar(contract(after), contract(before))
                doc["oracle"] = {"checked": True, "equivalent": ok}
            except OracleError as exc:
                doc["oracle"] = {"checked": False, "note": f"oracle skipped: {exc}"}
                print(doc["oracle"]["note"], file=sys.stderr)
        else:
            orep = oracle_check(circuit, before, after)
            doc["oracle"] = orep.to_dict()
            if not orep.checked:
                print(orep.note, file=sys.stderr)
        o = doc["oracle"]
        if o.get("checked") and not (o.get("equivalent") and o.get("circuit_agrees", True)):
            failed.append("oracle")
    rep = None
    if flags.pauli:
        try:
            rep = pauli_check(before, after)
        except VerificationError:
            raise
        except Exception as exc:
            raise StageError("verify", exc) from exc
        doc["pauli"] = rep.to_dict()
        if rep.regressions:
            failed.append("pauli")
    if args.format == "json":
        _emit(json.dumps(doc, indent=1, sort_keys=True) + "\n", args.out)
    elif rep is not None:
        _emit(report_tsv(rep.after), args.out)
    else:
        _emit("".join(f"{k}\t{json.dumps(v, sort_keys=True)}\n" for k, v in doc.items()), args.out)
    if failed:
        print("verification failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        d = ZXDiagram.from_json(_read(args.input))
        b = zx_to_braid(d, Mode.HYBRID if args.hybrid else Mode.BRAID_ONLY)
    except Exception as exc:
        raise StageError("synth", exc) from exc
    _emit(b.to_json(), args.out)
    return EXIT_OK


def cmd_pack(args) -> int:
    try:
        b = BraidStructure.from_json(_read(args.input))
        lay = layout(b, _layout_opts(args))
    except Exception as exc:
        raise StageError("pack", exc) from exc
    _emit(lay.to_json(), args.out)
    return EXIT_OK


def _volume_table(rows: list[tuple[str, dict]], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(dict(rows), indent=1, sort_keys=True) + "\n"
    cols = ["layout", "dims", "volume", "rescaled_volume", "rescaled_display", "variants"]
    recs = []
    for name, v in rows:
        variants = ",".join(f"{o['timesteps']}x{o['qubits']}" for o in v["orientations"])
        recs.append([name, "x".join(map(str, v["dims"])), v["volume"], v["rescaled_volume"], v["rescaled_display"], variants])
    if fmt == "md":
        lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
        lines += ["| " + " | ".join(map(str, r)) + " |" for r in recs]
        return "\n".join(lines) + "\n"
    return "\t".join(cols) + "\n" + "".join("\t".join(map(str, r)) + "\n" for r in recs)


def cmd_report(args) -> int:
    try:
        rows = [("layout", volume(Layout3D.from_json(_read(args.input))).to_dict())]
        if args.baseline:
            rows.append(("direct", volume(direct_translate(load_circuit(args.baseline))).to_dict()))
    except Exception as exc:
        raise StageError("report", exc) from exc
    _emit(_volume_table(rows, args.format), args.out)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = PipelineConfig(args.input, args.out, policy=_policy(args), layout=_layout_opts(args),
                         verify=VerifyFlags.parse(args.verify or ""), seed=args.seed,
                         mode=Mode.HYBRID if args.hybrid else Mode.BRAID_ONLY)
    art = run_pipeline(cfg)
    for w in art.warnings:
        print(f"warning: {w}", file=sys.stderr)
    s = art.summary()
    if args.format == "json":
        sys.stdout.write(json.dumps(s, indent=1, sort_keys=True) + "\n")
    else:
        keys = ["circuit", "t_count", "vol_init", "vol_opt", "reduction_percent", "rewrite_steps"]
        sys.stdout.write("".join(f"{k}\t{s[k]}\n" for k in keys))
    return EXIT_OK


def cmd_bench(args) -> int:
    names = args.names or list(FIXTURES)
    unknown = [n for n in names if n not in FIXTURES]
    if unknown:
        raise UsageError("unknown fixture " + ", ".join(unknown))
    opts = _layout_opts(args)
    table = run_benchmarks(names, seed=args.seed, opts=opts, workers=args.workers)
    _emit(table.render(args.format, timing=args.timing), args.out)
    for r in table.rows:
        print(f"{r.name}: {r.wall_time:.1f}s", file=sys.stderr)
    return EXIT_OK


# -- argument parsing ---------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="braidzx", description="ZX-based volume reduction of braided surface-code circuits.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, inp=True, fmt=None):
        if inp:
            sp.add_argument("--in", dest="input", type=_input, required=True)
        sp.add_argument("--out", type=Path)
        sp.add_argument("--seed", type=int, default=None)
        if fmt:
            sp.add_argument("--format", choices=fmt, default=fmt[0])

    def reduce_flags(sp):
        sp.add_argument("--strategy", choices=["greedy"], default="greedy")
        sp.add_argument("--preserve-tcount", action=argparse.BooleanOptionalAction, default=True)

    def orient(sp):
        sp.add_argument("--orient", choices=[s.value for s in Search], default=Search.EXHAUSTIVE.value)

    sp = sub.add_parser("parse", help="circuit text to ZX JSON")
    common(sp)
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("reduce", help="greedy reduction of a ZX JSON file")
    common(sp)
    reduce_flags(sp)
    sp.add_argument("--trace", type=Path, help="write the rewrite trace here")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("verify", help="oracle and Pauli checks of a reduction")
    common(sp, fmt=["tsv", "json"])
    sp.add_argument("--against", type=Path, help="reduced ZX JSON; reduced on the fly if omitted")
    sp.add_argument("--circuit", type=_input, help="source circuit for the cross-check")
    sp.add_argument("--verify", default="oracle,pauli")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("synth", help="ZX JSON to braid structure")
    common(sp)
    sp.add_argument("--hybrid", action="store_true", help="split high-degree qubits for surgery")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("pack", help="braid structure to 3D layout")
    common(sp)
    orient(sp)
    sp.set_defaults(func=cmd_pack)

    sp = sub.add_parser("report", help="volume report of a layout")
    common(sp, fmt=["tsv", "md", "json"])
    sp.add_argument("--baseline", type=_input, help="circuit whose direct translation is listed too")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("run", help="whole pipeline on one circuit")
    common(sp, fmt=["tsv", "json"])
    reduce_flags(sp)
    orient(sp)
    sp.add_argument("--verify", default="")
    sp.add_argument("--hybrid", action="store_true")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("bench", help="benchmark table over the bundled fixtures")
    common(sp, inp=False, fmt=["tsv", "md", "json"])
    orient(sp)
    sp.add_argument("names", nargs="*", help=f"fixtures (default: all of {', '.join(FIXTURES)})")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--timing", action="store_true", help="add a wall-time column (not reproducible)")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.seed is None:
            args.seed = default_seed()
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"braidzx: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"braidzx: stage {exc}", file=sys.stderr)
        return EXIT_STAGE
    except VerificationError as exc:
        print(f"braidzx: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (OSError, FileNotFoundError) as exc:
        print(f"braidzx: stage io: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
