"""Command-line front end: classify, simulate, chi-dump, and check.

Exit codes: 0 means the command ran (whatever the verdict — classification
results are data, not failures), 2 means a parse or usage error, and 3 means
simulation hit an undefined output without ``--allow-undef``.

JSON reports carry the top-level keys circuit, command, verdict, axioms,
witness, stats, and timing, serialized with sorted keys so identical inputs
produce byte-identical output regardless of ``--jobs``.  The timing key is
null in JSON for that reason; wall time is shown in text mode.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .circuits import (
    CircuitElement,
    SimulationError,
    causality_check,
    output_stream,
    read_soundness_check,
)
from .classifier import AntisymmetryWitness, AxiomReport, ReadSet, classify
from .dsl import ElaborationError, ParseError, load_circuit
from .signals import Alphabet, CausalSignal, Trace

UNDEF = "UNDEF"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Serialization helpers

def _signal_json(signal: CausalSignal) -> dict:
    return {"t": signal.t, "samples": list(signal.samples)}


def _reads_json(image: Optional[ReadSet]) -> Optional[list]:
    if image is None:
        return None
    return [{"channel": ref.channel, "tick": ref.tick} for ref in image.refs]


def _axioms_json(report: Optional[AxiomReport]) -> Optional[dict]:
    if report is None:
        return None
    anti = report.antisymmetry_witness
    trans = report.transitivity_witness
    return {
        "reflexive": report.reflexive,
        "antisymmetric": report.antisymmetric,
        "transitive": report.transitive,
        "reflexivity_witness": _reads_json(report.reflexivity_witness),
        "antisymmetry_witness": None if anti is None else [_reads_json(x) for x in anti],
        "transitivity_witness": None if trans is None else [_reads_json(x) for x in trans],
    }


def _witness_json(witness: Optional[AntisymmetryWitness]) -> Optional[dict]:
    if witness is None:
        return None
    return {
        "a0": _signal_json(witness.a0),
        "a1": _signal_json(witness.a1),
        "b0": _signal_json(witness.b0),
        "b1": _signal_json(witness.b1),
        "x_reads": _reads_json(witness.x_reads),
        "y_reads": _reads_json(witness.y_reads),
    }


def _dump_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _signal_text(signal: CausalSignal) -> str:
    return f"t={signal.t} samples={','.join(signal.samples)}"


def _reads_text(image: Optional[ReadSet]) -> str:
    return "undefined" if image is None else str(image)


# ---------------------------------------------------------------------------
# Circuit and stimulus loading

def _load_element(path: str) -> CircuitElement:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    try:
        return load_circuit(text)
    except ParseError as exc:
        raise UsageError(f"{path}:{exc.span.line}:{exc.span.column}: {exc.message}") from exc
    except ElaborationError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _read_stimulus(path: str, element: CircuitElement) -> tuple[Trace, dict[str, Trace]]:
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = [row for row in csv.reader(handle) if row]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise UsageError("stimulus file is empty")
    header = [cell.strip() for cell in rows[0]]
    if not header or header[0] != "tick":
        raise UsageError("stimulus header must start with 'tick'")
    columns = header[1:]
    expected = set(element.control_channels) | set(element.input_names)
    if set(columns) != expected:
        raise UsageError(
            f"stimulus columns {sorted(columns)} do not match circuit channels "
            f"{sorted(expected)}"
        )
    if len(set(columns)) != len(columns):
        raise UsageError("stimulus has a duplicate column")

    data: dict[str, list[str]] = {name: [] for name in columns}
    for i, row in enumerate(rows[1:]):
        cells = [cell.strip() for cell in row]
        if len(cells) != len(header):
            raise UsageError(f"stimulus row {i + 1} has {len(cells)} cells, expected {len(header)}")
        try:
            tick = int(cells[0])
        except ValueError:
            raise UsageError(f"stimulus row {i + 1} has non-integer tick {cells[0]!r}") from None
        if tick != i:
            raise UsageError(
                f"stimulus ticks must be contiguous from 0: row {i + 1} has tick {tick}"
            )
        for name, cell in zip(columns, cells[1:]):
            data[name].append(cell)
    if not data[columns[0]]:
        raise UsageError("stimulus must contain at least one row")

    control_symbols = [
        "/".join(data[channel][t] for channel in element.control_channels)
        for t in range(len(data[columns[0]]))
    ]
    for symbol in control_symbols:
        if symbol not in element.control_alphabet:
            raise UsageError(
                f"control value {symbol!r} is not in the circuit's control alphabet "
                f"{element.control_alphabet.values!r}"
            )
    control = Trace(element.control_alphabet, tuple(control_symbols))
    inputs = {}
    for name in element.input_names:
        tokens = tuple(data[name])
        inputs[name] = Trace(Alphabet(tuple(dict.fromkeys(tokens))), tokens)
    return control, inputs


# ---------------------------------------------------------------------------
# Subcommands

def _cmd_classify(args) -> int:
    element = _load_element(args.circuit)
    if args.horizon < 0:
        raise UsageError("--horizon must be >= 0")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    started = time.perf_counter()
    result = classify(element, args.horizon, jobs=args.jobs)
    elapsed = time.perf_counter() - started

    stats = {
        "horizon": result.stats.horizon,
        "signals": result.stats.signals,
        "relation_pairs": result.stats.relation_pairs,
        "distinct_read_sets": result.stats.distinct_read_sets,
        "excluded_undefined": result.stats.excluded_undefined,
        "degenerate_horizon": result.stats.degenerate_horizon,
    }
    if args.format == "json":
        report = {
            "circuit": element.name,
            "command": "classify",
            "verdict": result.verdict.value,
            "axioms": _axioms_json(result.axiom_report),
            "witness": _witness_json(result.witness),
            "stats": stats,
            "timing": None,
        }
        sys.stdout.write(_dump_json(report))
        return 0

    print(f"circuit: {element.name}")
    print("command: classify")
    print(f"verdict: {result.verdict.value}")
    if result.axiom_report is not None:
        report = result.axiom_report
        flags = " ".join(
            f"{name}={'yes' if ok else 'no'}"
            for name, ok in (
                ("reflexive", report.reflexive),
                ("antisymmetric", report.antisymmetric),
                ("transitive", report.transitive),
            )
        )
        print(f"axioms: {flags}")
    if result.witness is not None:
        witness = result.witness
        print("witness:")
        for label, signal in (
            ("a0", witness.a0), ("a1", witness.a1),
            ("b0", witness.b0), ("b1", witness.b1),
        ):
            print(f"  {label}: {_signal_text(signal)}")
        print(f"  x_reads: {witness.x_reads}")
        print(f"  y_reads: {witness.y_reads}")
    print(
        "stats: " + " ".join(f"{key}={value}" for key, value in stats.items())
    )
    print(f"timing: {elapsed:.3f}s")
    return 0


def _cmd_simulate(args) -> int:
    element = _load_element(args.circuit)
    control, inputs = _read_stimulus(args.stimulus, element)
    try:
        outputs = output_stream(element, control, inputs)
    except SimulationError as exc:
        raise UsageError(str(exc)) from exc
    if any(value is None for value in outputs) and not args.allow_undef:
        first = outputs.index(None)
        print(
            f"error: output undefined at tick {first}; rerun with --allow-undef "
            "to emit UNDEF entries",
            file=sys.stderr,
        )
        return 3
    lines = ["tick,output"]
    lines += [f"{t},{UNDEF if value is None else value}" for t, value in enumerate(outputs)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_chi_dump(args) -> int:
    element = _load_element(args.circuit)
    if element.reads is None:
        raise UsageError(f"circuit {element.name!r} has no restriction map to dump")
    tokens = [token.strip() for token in args.control.split(",")]
    if not tokens or any(not token for token in tokens):
        raise UsageError("--control must be a comma-separated list of control symbols")
    for token in tokens:
        if token not in element.control_alphabet:
            raise UsageError(
                f"control value {token!r} is not in the circuit's control alphabet "
                f"{element.control_alphabet.values!r}"
            )
    trace = Trace(element.control_alphabet, tuple(tokens))
    images = [
        element.reads(CausalSignal.from_samples(element.control_alphabet, tokens[: t + 1]))
        for t in range(len(tokens))
    ]
    if args.format == "json":
        report = {
            "circuit": element.name,
            "command": "chi-dump",
            "verdict": None,
            "axioms": None,
            "witness": None,
            "stats": {"ticks": len(trace)},
            "timing": None,
            "images": [_reads_json(image) for image in images],
        }
        sys.stdout.write(_dump_json(report))
        return 0
    for t, image in enumerate(images):
        print(f"{t}: {_reads_text(image)}")
    return 0


def _cmd_check(args) -> int:
    element = _load_element(args.circuit)
    if args.horizon < 1:
        raise UsageError("--horizon must be >= 1")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    causality = causality_check(element, args.horizon, args.trials, args.seed)
    if element.reads is not None:
        soundness = read_soundness_check(element, args.horizon, args.trials, args.seed)
        soundness_stats = {
            "trials": soundness.trials,
            "mutations": soundness.mutations,
            "undefined": soundness.undefined,
            "unmutable": soundness.unmutable,
            "violations": soundness.violations,
        }
        failed = causality.violations > 0 or soundness.violations > 0
    else:
        soundness_stats = {"skipped": "circuit has no restriction map"}
        failed = causality.violations > 0
    stats = {
        "horizon": args.horizon,
        "seed": args.seed,
        "causality": {
            "trials": causality.trials,
            "mutations": causality.mutations,
            "violations": causality.violations,
        },
        "read_soundness": soundness_stats,
    }
    verdict = "fail" if failed else "pass"
    if args.format == "json":
        report = {
            "circuit": element.name,
            "command": "check",
            "verdict": verdict,
            "axioms": None,
            "witness": None,
            "stats": stats,
            "timing": None,
        }
        sys.stdout.write(_dump_json(report))
        return 0
    print(f"circuit: {element.name}")
    print("command: check")
    print(f"verdict: {verdict}")
    print(
        "causality: "
        + " ".join(f"{key}={value}" for key, value in stats["causality"].items())
    )
    print(
        "read-soundness: "
        + " ".join(f"{key}={value}" for key, value in soundness_stats.items())
    )
    return 0


# ---------------------------------------------------------------------------
# Entry points

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kcir",
        description="Simulate and classify sequential circuits described in .kcir files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify a circuit as time-preserving or not")
    p.add_argument("--circuit", required=True, help="path to a .kcir file")
    p.add_argument("--horizon", type=int, default=4, help="highest tick enumerated")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for the search")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("simulate", help="run a circuit over a stimulus CSV")
    p.add_argument("--circuit", required=True)
    p.add_argument("--stimulus", required=True, help="CSV with tick and channel columns")
    p.add_argument("--out", help="write the trace CSV here instead of stdout")
    p.add_argument(
        "--allow-undef",
        action="store_true",
        help="emit UNDEF entries instead of failing on undefined outputs",
    )
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("chi-dump", help="print the read set of every control prefix")
    p.add_argument("--circuit", required=True)
    p.add_argument(
        "--control",
        required=True,
        help="comma-separated control symbols, e.g. '0,1,0,1' or 'A/-,B/A,-/B'",
    )
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=_cmd_chi_dump)

    p = sub.add_parser("check", help="randomized read-soundness and causality checks")
    p.add_argument("--circuit", required=True)
    p.add_argument("--horizon", type=int, default=4)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=_cmd_check)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
