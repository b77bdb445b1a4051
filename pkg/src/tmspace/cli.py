"""Command-line pipeline over the library.

Subcommands: enumerate, run, rerun, sample, cleanse, analyze, compare,
report, calibrate.  Exit codes: 0 success, 1 usage error, 2 data or
consistency error.  Input ranges are written a..b (inclusive).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from . import analyzer, calibration, cleanser, compare, harness, rulecodec, simulator

USAGE_EXIT = 1
DATA_EXIT = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise _UsageError(message)


def _parse_range(text: str) -> Tuple[int, ...]:
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise ValueError(f"empty range {text!r}")
        return tuple(range(lo, hi + 1))
    return (int(text),)


def _parse_space(text: str) -> rulecodec.SpaceParams:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"space must be written s,k (got {text!r})")
    return rulecodec.SpaceParams(int(parts[0]), int(parts[1]))


def _parse_machines(text: str) -> List[int]:
    path = Path(text)
    if path.exists():
        return [int(line) for line in path.read_text().split()]
    out: List[int] = []
    for part in text.split(","):
        out.extend(_parse_range(part))
    return out


def _build_parser() -> _Parser:
    parser = _Parser(prog="tmspace", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="list rule numbers of a space")
    p.add_argument("--space", required=True)
    p.add_argument("--rules", default=None, help="range a..b (default: all)")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--tables", action="store_true", help="print transition tables")

    p = sub.add_parser("run", help="simulate machines and write a run store")
    p.add_argument("--space", required=True)
    p.add_argument("--bound", type=int, default=harness.DEFAULT_BOUND)
    p.add_argument("--inputs", default="0..20")
    p.add_argument("--rules", default=None, help="range a..b (default: all)")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("rerun", help="re-run chosen machines at a raised bound")
    p.add_argument("store")
    p.add_argument("--machines", required=True, help="a..b, comma list, or file")
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sample", help="random sample of a space")
    p.add_argument("--space", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--bound", type=int, default=harness.DEFAULT_BOUND)
    p.add_argument("--drop-trivial", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("cleanse", help="complete censored sequences, report fills")
    p.add_argument("store")
    p.add_argument(
        "--verification-bound", type=int, default=cleanser.VERIFICATION_BOUND
    )
    p.add_argument("--report", default=None, help="write the fill report CSV here")

    p = sub.add_parser("analyze", help="catalog functions and algorithms")
    p.add_argument("store")
    p.add_argument("--cleansed", action="store_true")
    p.add_argument(
        "--verification-bound", type=int, default=cleanser.VERIFICATION_BOUND
    )
    p.add_argument("--out", default=None, help="directory for CSV exports")

    p = sub.add_parser("compare", help="cross-space function comparison")
    p.add_argument("store_a")
    p.add_argument("store_b")
    p.add_argument("--out", default=None, help="directory for CSV exports")

    p = sub.add_parser("report", help="emit one table or plot")
    p.add_argument(
        "kind",
        choices=["histogram", "census", "functions", "algorithms", "sets", "overview"],
    )
    p.add_argument("store")
    p.add_argument("--cleansed", action="store_true")
    p.add_argument("--svg", action="store_true")
    p.add_argument("--out", default=None, help="output file (default: stdout)")

    p = sub.add_parser("calibrate", help="derive and check the rule-number layout")
    p.add_argument("--deep", action="store_true", help="include the deep-run anchor")
    return parser


def _cmd_enumerate(args: argparse.Namespace) -> int:
    params = _parse_space(args.space)
    if args.rules:
        lo, *rest = _parse_range(args.rules)
        hi = rest[-1] if rest else lo
        rules = range(lo, hi + 1)
    else:
        rules = rulecodec.enumerate_rules(params)
    count = 0
    for rule in rules:
        if args.limit is not None and count >= args.limit:
            break
        if args.tables:
            machine = rulecodec.decode(rule, params)
            entries = ", ".join(
                f"({q},{c})->({e.write},{e.move},{e.next_state})"
                for (q, c), e in sorted(machine.table.items())
            )
            print(f"{rule}: {entries}")
        else:
            print(rule)
        count += 1
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    params = _parse_space(args.space)
    if args.rules:
        machine_set: harness.MachineSet = harness.ExplicitList(
            tuple(_parse_machines(args.rules))
        )
    else:
        machine_set = harness.AllMachines()
    spec = harness.BatchSpec(
        params=params,
        inputs=tuple(_parse_range(args.inputs)),
        step_bound=args.bound,
        machine_set=machine_set,
        output_path=args.out,
    )
    store = harness.run_space(spec, jobs=args.jobs)
    records = sum(s["machines"] for s in store.metadata["shards"]) * len(store.inputs)
    print(f"{records} records in {store.path}")
    return 0


def _cmd_rerun(args: argparse.Namespace) -> int:
    store = harness.RunStore(args.store)
    machines = _parse_machines(args.machines)
    new_store = harness.rerun_subset(store, machines, args.bound, args.out)
    print(f"re-ran {len(machines)} machines at bound {args.bound} into {new_store.path}")
    return 0


def _cmd_sample(args: argparse.Namespace) -> int:
    params = _parse_space(args.space)
    store = harness.sample_space(
        params,
        count=args.count,
        seed=args.seed,
        output_path=args.out,
        drop_trivial=args.drop_trivial,
        step_bound=args.bound,
    )
    kept = sum(s["machines"] for s in store.metadata["shards"])
    print(f"kept {kept} of {args.count} sampled machines in {store.path}")
    return 0


def _cmd_cleanse(args: argparse.Namespace) -> int:
    store = harness.RunStore(args.store)
    analysis = analyzer.analyze(store, verification_bound=args.verification_bound)
    filled_sequences = 0
    for uid, fills in enumerate(analysis._uniq_filled):
        members = int((analysis._inverse == uid).sum())
        filled_sequences += members * sum(1 for positions in fills if positions)
    print(
        f"{len(analysis.functions)} functions after cleansing; "
        f"{filled_sequences} machine sequences received fills"
    )
    if args.report:
        rows = _cleansing_report(analysis)
        Path(args.report).write_text(rows)
        print(f"report written to {args.report}")
    return 0


def _cleansing_report(analysis: analyzer.SpaceAnalysis) -> str:
    completions = []
    kinds = (
        cleanser.SequenceKind.OUTPUT,
        cleanser.SequenceKind.RUNTIME,
        cleanser.SequenceKind.SPACE,
    )
    floor = analysis.store.step_bound
    for midx in range(analysis.rules.shape[0]):
        uid = int(analysis._inverse[midx])
        if not any(analysis._uniq_filled[uid]):
            continue
        rule = int(analysis.rules[midx])
        raw_rows = (
            analysis.table.decode_row(analysis._uniq_out[uid]),
            tuple(int(v) for v in analysis._uniq_rt[uid]),
            tuple(int(v) for v in analysis._uniq_sp[uid]),
        )
        rt_done = cleanser.complete(
            cleanser.SequenceProfile(
                raw_rows[1], cleanser.SequenceKind.RUNTIME, rule_number=rule
            ),
            floor=floor,
        )
        grants = set(rt_done.filled_positions)
        for kind, raw in zip(kinds, raw_rows):
            if kind is cleanser.SequenceKind.RUNTIME:
                completions.append(rt_done)
                continue
            profile = cleanser.SequenceProfile(raw, kind, rule_number=rule)
            completions.append(cleanser.complete(profile, allow=grants))
    return cleanser.report_rows(completions)


def _cmd_analyze(args: argparse.Namespace) -> int:
    store = harness.RunStore(args.store)
    analysis = analyzer.analyze(
        store, cleanse=args.cleansed, verification_bound=args.verification_bound
    )
    print(f"{len(analysis.functions)} functions, {len(analysis.algorithms)} algorithms")
    hist = analyzer.halting_histogram(analysis)
    print(
        f"halting fraction {hist.halting_fraction:.3f} "
        f"(<=100 steps: {hist.cumulative_fraction(100):.3f})"
    )
    prefix = analyzer.determinant_prefix(analysis.functions)
    print(f"functions separated by their first {prefix.length} outputs")
    sets = analyzer.definable_sets(analysis)
    closed = sum(1 for s in sets if s.complement_definable)
    print(f"{len(sets)} definable sets ({closed} with definable complements)")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "functions.csv").write_text(
            analyzer.export_functions_csv(analysis.functions)
        )
        (out / "algorithms.csv").write_text(
            analyzer.export_algorithms_csv(analysis.algorithms)
        )
        (out / "histogram.csv").write_text(analyzer.export_histogram_csv(hist))
        census = analyzer.runtime_sequence_census(analysis)
        (out / "census.csv").write_text(analyzer.export_census_csv(census))
        (out / "definable_sets.csv").write_text(
            analyzer.export_definable_sets_csv(sets)
        )
        overviews = [analyzer.function_overview(f) for f in analysis.functions]
        (out / "overview.csv").write_text(analyzer.export_overview_csv(overviews))
        print(f"exports written to {out}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    an_a = analyzer.analyze(harness.RunStore(args.store_a))
    an_b = analyzer.analyze(harness.RunStore(args.store_b))
    matches = compare.match_functions(an_a, an_b)
    print(f"{len(matches)} matched functions")
    report = compare.speedup_stats(matches)
    print(
        f"{report.functions_with_speedup} functions with a faster algorithm "
        f"in the second space ({report.speedup_fraction:.4f}); "
        f"{report.faster_algorithm_count} of {report.total_algorithms_b} algorithms faster"
    )
    if report.functions_with_speedup:
        print(f"mean speed-up factor {report.mean_speedup_factor:.4f}")
    factors = report.slowdown_factors()
    if factors:
        print(
            f"mean slow-down factor {report.mean_slowdown_factor:.2f}, "
            f"max {report.max_slowdown_factor:.6g}"
        )
    violations = compare.essential_speedup_violations(matches)
    print(f"essential speed-ups: {len(violations)}")
    dist_a = compare.class_distribution(an_a)
    dist_b = compare.class_distribution(an_b)
    corr = compare.class_correlation(dist_a, dist_b)
    print(f"class-distribution correlation {corr:.6f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "class_distribution.csv").write_text(
            compare.export_class_distribution_csv(
                {"space_a": dist_a, "space_b": dist_b}
            )
        )
        (out / "function_classes.csv").write_text(
            compare.export_function_classes_csv(matches)
        )
        print(f"exports written to {out}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    store = harness.RunStore(args.store)
    analysis = analyzer.analyze(store, cleanse=args.cleansed)
    if args.kind == "histogram":
        hist = analyzer.halting_histogram(analysis)
        text = (
            analyzer.svg_histogram(hist)
            if args.svg
            else analyzer.export_histogram_csv(hist)
        )
    elif args.kind == "census":
        census = analyzer.runtime_sequence_census(analysis)
        text = (
            analyzer.svg_census(census)
            if args.svg
            else analyzer.export_census_csv(census)
        )
    elif args.kind == "functions":
        text = analyzer.export_functions_csv(analysis.functions)
    elif args.kind == "algorithms":
        text = analyzer.export_algorithms_csv(analysis.algorithms)
    elif args.kind == "sets":
        text = analyzer.export_definable_sets_csv(analyzer.definable_sets(analysis))
    else:
        overviews = [analyzer.function_overview(f) for f in analysis.functions]
        text = analyzer.export_overview_csv(overviews)
    if args.out:
        Path(args.out).write_text(text)
        print(f"written to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    convention = calibration.check_convention(deep=args.deep)
    print("unique anchor-consistent layout confirmed:")
    print("  " + convention.describe())
    return 0


_COMMANDS = {
    "enumerate": _cmd_enumerate,
    "run": _cmd_run,
    "rerun": _cmd_rerun,
    "sample": _cmd_sample,
    "cleanse": _cmd_cleanse,
    "analyze": _cmd_analyze,
    "compare": _cmd_compare,
    "report": _cmd_report,
    "calibrate": _cmd_calibrate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, _UsageError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (RuntimeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
