"""Command-line front end: run, list, verify, export and bench."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace
from typing import Sequence

from .core import SafetyAutomaton, SymbolicTransducer, dump_json, format_biword, load_json
from .experiments import ExperimentSpec, SpecError, bench_suite, load_spec, registry
from .learner import LearnResult, Status, s4
from .ltl import FormulaError, StateLimitError
from .oracle import IrregularTeacher
from .verify import ContainmentReport, bounded_containment

CSV_COLUMNS = [
    "experiment", "sigma", "gamma", "mq", "smq", "scq",
    "h_exp", "h_gen", "splits", "states", "s4_seconds", "oracle_seconds",
]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_UNREALIZABLE = 2
EXIT_EXHAUSTED = 3


def _exit_code(status: Status) -> int:
    return {
        Status.SYNTHESIZED: EXIT_OK,
        Status.UNREALIZABLE: EXIT_UNREALIZABLE,
        Status.EXHAUSTED: EXIT_EXHAUSTED,
    }[status]


def csv_row(label: str, spec_teacher, result: LearnResult) -> dict:
    s = result.stats
    return {
        "experiment": label,
        "sigma": len(spec_teacher.inputs),
        "gamma": len(spec_teacher.outputs),
        "mq": s.mq,
        "smq": s.smq,
        "scq": s.scq,
        "h_exp": s.tables_explored,
        "h_gen": s.tables_generated,
        "splits": s.splits,
        "states": s.result_states if s.result_states is not None else "-",
        "s4_seconds": f"{s.learner_seconds:.4f}",
        "oracle_seconds": f"{s.oracle_seconds:.4f}",
    }


def _write_csv(path: str, rows: Sequence[dict], append: bool = False) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    exists = append and os.path.exists(path) and os.path.getsize(path) > 0
    with open(path, "a" if append else "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        if not exists:
            writer.writeheader()
        writer.writerows(rows)


def post_verify(spec: ExperimentSpec, teacher, transducer: SymbolicTransducer, depth: int | None) -> ContainmentReport:
    """Containment check of a result against the spec's target."""
    target = spec.automaton_target() if not isinstance(teacher, IrregularTeacher) else None
    if target is not None:
        if depth is None:
            depth = 2 * target.num_states * len(transducer.states)
        return bounded_containment(transducer, target, depth)
    if depth is None:
        depth = 2 * len(transducer.states) + teacher.extra_depth
    return bounded_containment(transducer, teacher, depth)


def _apply_params(spec: ExperimentSpec, params: Sequence[str]) -> ExperimentSpec:
    if not params:
        return spec
    values = dict(spec.params)
    for item in params:
        key, _, value = item.partition("=")
        if not value:
            raise SpecError(f"--param expects key=value, got {item!r}")
        values[key.strip()] = int(value)
    return replace(spec, params=values)


def _print_report(report: ContainmentReport) -> None:
    verdict = "holds" if report.holds else "fails"
    exact = "exact" if report.exact else "bounded"
    print(f"containment {verdict} (depth {report.depth}, {exact})")
    if report.witness is not None:
        print(f"witness: {format_biword(report.witness)}")


def cmd_run(args: argparse.Namespace) -> int:
    spec = _apply_params(load_spec(args.spec), args.param)
    teacher = spec.teacher()
    config = spec.learner_config(
        ce_mode=args.ce_mode,
        max_tables=args.max_tables,
        max_queries=args.max_queries,
        max_steps=args.max_steps,
        dedup=args.dedup,
        trace=args.trace,
    )
    result = s4(teacher, config)
    if args.trace:
        for line in result.trace:
            print(line)
    s = result.stats
    print(f"{spec.name}: {result.status.value}")
    print(
        f"mq={s.mq} smq={s.smq} scq={s.scq} h_exp={s.tables_explored} h_gen={s.tables_generated} "
        f"splits={s.splits} states={s.result_states if s.result_states is not None else '-'} "
        f"s4={s.learner_seconds:.3f}s oracle={s.oracle_seconds:.3f}s"
    )
    if args.csv:
        _write_csv(args.csv, [csv_row(spec.name, teacher, result)], append=True)
    if result.status is not Status.SYNTHESIZED:
        return _exit_code(result.status)
    os.makedirs(args.out, exist_ok=True)
    stem = os.path.join(args.out, spec.name)
    dump_json(result.transducer, stem + ".json")
    with open(stem + ".dot", "w", encoding="utf-8") as fh:
        fh.write(result.transducer.to_dot(spec.name))
    print(f"wrote {stem}.json and {stem}.dot")
    if args.no_verify:
        return EXIT_OK
    report = post_verify(spec, teacher, result.transducer, spec.verify_depth)
    _print_report(report)
    return EXIT_OK if report.holds else EXIT_FAIL


def cmd_list(args: argparse.Namespace) -> int:
    for spec in registry():
        extra = f" (n={spec.params['n']})" if spec.params else ""
        print(f"{spec.name}{extra}: {spec.description}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    transducer = load_json(args.transducer)
    if not isinstance(transducer, SymbolicTransducer):
        raise SpecError(f"{args.transducer} does not hold a transducer")
    spec = _apply_params(load_spec(args.spec), args.param)
    teacher = spec.teacher()
    if transducer.inputs != teacher.inputs or transducer.outputs != teacher.outputs:
        raise SpecError("transducer and spec use different alphabets")
    report = post_verify(spec, teacher, transducer, args.depth)
    _print_report(report)
    return EXIT_OK if report.holds else EXIT_FAIL


def cmd_export(args: argparse.Namespace) -> int:
    spec = _apply_params(load_spec(args.spec), args.param)
    automaton = spec.automaton_target()
    if not isinstance(automaton, SafetyAutomaton):
        raise SpecError(f"{spec.name} has no finite automaton target")
    dump_json(automaton, args.automaton)
    print(f"wrote {args.automaton} ({automaton.num_states} states, {len(automaton.live)} live)")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    suite = bench_suite(dedup=not args.no_dedup)
    if args.only:
        wanted = set(args.only)
        suite = [(label, spec) for label, spec in suite if label in wanted]
    elif not args.all:
        raise SpecError("bench needs --all or --only LABEL")
    rows = []
    worst = EXIT_OK
    for label, spec in suite:
        teacher = spec.teacher()
        result = s4(teacher, spec.learner_config(ce_mode=args.ce_mode, max_tables=args.max_tables))
        row = csv_row(label, teacher, result)
        rows.append(row)
        print(",".join(str(row[c]) for c in CSV_COLUMNS), flush=True)
        if result.status is Status.EXHAUSTED:
            worst = EXIT_EXHAUSTED
    _write_csv(args.csv, rows)
    print(f"wrote {args.csv}")
    if not args.no_plot:
        from .plotting import plot_bench

        figure = os.path.splitext(args.csv)[0] + ".png"
        plot_bench(rows, figure)
        print(f"wrote {figure}")
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="s4synth", description="Learn safe transducers from symbolic queries.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="learn a transducer for a spec file or builtin")
    run.add_argument("spec", help="spec file path or builtin name (experiment-1, 7-3, ...)")
    run.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    run.add_argument("--ce-mode", choices=["basic", "optimized"], default=None)
    run.add_argument("--max-tables", type=int, default=None)
    run.add_argument("--max-queries", type=int, default=None)
    run.add_argument("--max-steps", type=int, default=None)
    run.add_argument("--dedup", action="store_true", default=None, help="prune split children equal to an earlier table")
    run.add_argument("--trace", action="store_true", help="print one line per scheduler action")
    run.add_argument("--out", default="s4-out", help="directory for the JSON and DOT result")
    run.add_argument("--csv", default=None, help="append a statistics row to this CSV file")
    run.add_argument("--no-verify", action="store_true", help="skip the containment post-check")
    run.set_defaults(func=cmd_run)

    lst = sub.add_parser("list", help="list builtin experiments")
    lst.set_defaults(func=cmd_list)

    ver = sub.add_parser("verify", help="check a transducer JSON file against a spec")
    ver.add_argument("transducer")
    ver.add_argument("spec")
    ver.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    ver.add_argument("--depth", type=int, default=None)
    ver.set_defaults(func=cmd_verify)

    exp = sub.add_parser("export", help="write the compiled safety automaton of a spec")
    exp.add_argument("spec")
    exp.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    exp.add_argument("--automaton", required=True, metavar="OUT.json")
    exp.set_defaults(func=cmd_export)

    bench = sub.add_parser("bench", help="run the benchmark suite and write CSV plus a figure")
    bench.add_argument("--all", action="store_true")
    bench.add_argument("--only", nargs="+", default=None, metavar="LABEL")
    bench.add_argument("--csv", required=True)
    bench.add_argument("--ce-mode", choices=["basic", "optimized"], default=None)
    bench.add_argument("--max-tables", type=int, default=None)
    bench.add_argument("--no-plot", action="store_true")
    bench.add_argument("--no-dedup", action="store_true", help="keep duplicate tables in the split tree")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, FormulaError, StateLimitError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
