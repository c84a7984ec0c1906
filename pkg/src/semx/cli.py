"""``semx`` command line: run, diff, analyze, aos, aos-table.

Exit status: 0 success, 1 runtime failure, 2 parse/validation/usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import analysis
from .frontend import WorldParseError, load_world
from .interp import EvalOutcome, Instance, evaluate, evaluate_matrix
from .lookup import Activation, Selection, StrategyConfig
from .model import ExtensionRef, ImportConfig, Signature

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

_STRATEGY = {"ext": Selection.EXTENSIONS_FIRST, "hrc": Selection.HIERARCHY_FIRST}


class UsageError(Exception):
    pass


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False)


def _value_json(value):
    if isinstance(value, Instance):
        return {"class": value.class_name, "fields": [_value_json(v) for v in value.fields]}
    return value


def format_dispatch(rec) -> str:
    head = f"{rec.step}. {rec.receiver_class}.{rec.selector}"
    if rec.resolved is None:
        return f"{head} -> <not understood>"
    return f"{head} -> {rec.resolved.class_name} [{rec.resolved.label}]"


def trace_text(outcome: EvalOutcome) -> str:
    lines = [format_dispatch(r) for r in outcome.dispatches]
    if outcome.error is not None:
        lines.append(f"!! {outcome.error}")
    elif outcome.result is not None:
        lines.append(f"=> {outcome.result}")
    return "\n".join(lines)


def trace_json(outcome: EvalOutcome) -> str:
    dispatches = []
    for rec in outcome.dispatches:
        resolved = None
        if rec.resolved is not None:
            resolved = {
                "class": rec.resolved.class_name,
                "extension": str(rec.resolved.extension),
                "package": rec.resolved.package,
            }
        dispatches.append({
            "n": rec.step,
            "receiverClass": rec.receiver_class,
            "selector": str(rec.selector),
            "activation": [str(e) for e in rec.active_extensions],
            "resolved": resolved,
        })
    error = None
    if outcome.error is not None:
        error = {"kind": outcome.error.kind, "message": outcome.error.message,
                 "stack": list(outcome.error.stack)}
    return _dump({"result": _value_json(outcome.result), "dispatches": dispatches,
                  "error": error})


def cell_label(outcome: EvalOutcome) -> str:
    if outcome.error is not None:
        return outcome.error.kind
    final = outcome.final
    if final is None or final.resolved is None:
        return "-"
    return f"{final.resolved.label}@{final.resolved.class_name}"


# -- commands ----------------------------------------------------------------

def cmd_run(args) -> int:
    world = load_world(args.file)
    cfg = StrategyConfig(
        Activation(args.activation), Selection(args.selection),
        ImportConfig(args.refinement_inheritance),
        cache_enabled=not args.no_cache, max_depth=args.max_depth,
    )
    outcome = evaluate(world, _script(world, args.script), cfg)
    print(trace_json(outcome) if args.trace == "json" else trace_text(outcome))
    return EXIT_OK if outcome.ok else EXIT_RUNTIME


def cmd_diff(args) -> int:
    world = load_world(args.file)
    matrix = evaluate_matrix(world, _script(world, args.script),
                             ImportConfig(args.refinement_inheritance))
    if args.format == "json":
        rows = {
            act.value: {sel.value: cell_label(matrix[act, sel]) for sel in Selection}
            for act in Activation
        }
        print(_dump(rows))
    else:
        labels = {k: cell_label(v) for k, v in matrix.items()}
        width = max(len(s) for s in list(labels.values()) + [s.value for s in Selection]) + 2
        print("activation".ljust(12) + "".join(s.value.ljust(width) for s in Selection).rstrip())
        for act in Activation:
            cells = "".join(labels[act, sel].ljust(width) for sel in Selection)
            print(act.value.ljust(12) + cells.rstrip())
    return EXIT_OK if all(o.ok for o in matrix.values()) else EXIT_RUNTIME


def cmd_analyze(args) -> int:
    world = load_world(args.file)
    if args.report == "stats":
        stats = analysis.world_stats(world).as_dict()
        if args.format == "json":
            print(_dump({k: float(v) for k, v in stats.items()}))
        else:
            for key, value in stats.items():
                print(f"{key}\t{float(value):.4f}\t{value.numerator}/{value.denominator}")
        return EXIT_OK

    overwrites = analysis.detect_overwrites(world)
    overrides = analysis.detect_overrides(world)
    if args.format == "json":
        print(_dump({
            "overwrites": [
                {"class": c.class_name, "selector": str(c.signature),
                 "extensions": [str(e) for e in c.extensions], "kind": c.kind}
                for c in overwrites
            ],
            "overrides": [
                {"lower": {"class": c.lower[0], "extension": str(c.lower[1])},
                 "upper": {"class": c.upper[0], "extension": str(c.upper[1])},
                 "selector": str(c.signature), "kind": c.kind}
                for c in overrides
            ],
        }))
    else:
        print(f"overwrites ({len(overwrites)}):")
        for c in overwrites:
            exts = ", ".join(map(str, c.extensions))
            print(f"  {c.class_name}.{c.signature}: {exts} [{c.kind}]")
        print(f"overrides ({len(overrides)}):")
        for c in overrides:
            print(f"  {c.lower[0]}.{c.signature} [{c.lower[1]}] overrides "
                  f"{c.upper[0]}.{c.signature} [{c.upper[1]}] [{c.kind}]")
    return EXIT_OK


def cmd_aos(args) -> int:
    world = load_world(args.file)
    receiver = args.receiver or args.cls
    try:
        sig = Signature.parse(args.selector)
        exts = tuple(ExtensionRef.parse(e) for e in args.exts.split(",") if e.strip())
        mess = analysis.MessageContext(receiver, sig, exts)
    except ValueError as err:
        raise UsageError(str(err)) from None
    selection = _STRATEGY[args.strategy]
    try:
        result = analysis.aos(world, mess, selection)
        brute = analysis.aos_bruteforce(world, mess, selection) if args.brute_force else None
    except (analysis.BaseMethodUndefined, analysis.PreconditionViolated) as err:
        raise UsageError(f"{type(err).__name__}: {err}") from None

    size_ok = result.size == result.formula_size
    brute_ok = brute is None or brute == result.locations
    if args.format == "json":
        doc = {
            "message": {"receiver": receiver, "selector": str(sig),
                        "extensions": [str(e) for e in mess.extensions]},
            "strategy": args.strategy,
            "base": {"class": result.base.class_name, "index": result.base.index,
                     "extension": str(result.base.extension)},
            "locations": [{"class": loc.class_name, "index": loc.index,
                           "extension": str(loc.extension)}
                          for loc in sorted(result.locations)],
            "size": result.size,
            "formulaSize": result.formula_size,
            "match": size_ok and brute_ok,
        }
        if brute is not None:
            doc["bruteForceSize"] = len(brute)
        print(_dump(doc))
    else:
        print(f"message: {receiver}.{sig} with <{', '.join(map(str, mess.extensions))}>")
        print(f"strategy: {args.strategy}")
        print(f"base: {result.base}")
        print(f"locations ({result.size}):")
        for loc in sorted(result.locations):
            print(f"  {loc}")
        print(f"enumerated size: {result.size}")
        print(f"formula size: {result.formula_size} ({'match' if size_ok else 'MISMATCH'})")
        if brute is not None:
            print(f"brute force: {len(brute)} ({'match' if brute_ok else 'MISMATCH'})")
    return EXIT_OK if size_ok and brute_ok else EXIT_RUNTIME


def cmd_aos_table(args) -> int:
    try:
        rows = analysis.dominance_table(args.subclasses, args.superclasses, args.max_exts)
    except ValueError as err:
        raise UsageError(str(err)) from None
    summary = analysis.dominance_summary(rows)
    if args.format == "json":
        print(_dump({
            "subclasses": float(args.subclasses), "superclasses": float(args.superclasses),
            "rows": [{"extCount": r.n_exts, "maxFavorableI": r.max_favorable_i} for r in rows],
            "summary": {"numerator": summary.numerator, "denominator": summary.denominator,
                        "value": float(summary)},
        }))
    else:
        print("ext_count\tmax_favorable_i")
        for r in rows:
            print(f"{r.n_exts}\t{r.max_favorable_i}")
        print(f"summary\t{_fraction(rows)}\t{float(summary):.4f}")
    if args.plot:
        from .plotting import plot_dominance
        span = range(1, args.sweep_max + 1)
        sweep = analysis.dominance_sweep(span, span, args.max_exts)
        plot_dominance(rows, sweep, args.plot,
                       title=f"Nsub={float(args.subclasses):g}, Nsup={float(args.superclasses):g}")
        print(f"figure written to {args.plot}", file=sys.stderr)
    return EXIT_OK


def _fraction(rows) -> str:
    # unreduced, as summed over the table
    return f"{sum(r.max_favorable_i for r in rows)}/{sum(r.n_exts for r in rows)}"


def _script(world, name):
    try:
        return world.find_script(name)
    except KeyError as err:
        raise UsageError(err.args[0]) from None


# -- argument parsing --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semx", description="Scoped extension method lookup and analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a script and print its dispatch trace")
    run.add_argument("file", help="world file or bundled fixture name")
    run.add_argument("--script", required=True)
    run.add_argument("--activation", choices=[a.value for a in Activation],
                     default=Activation.LEXICAL.value)
    run.add_argument("--selection", choices=[s.value for s in Selection],
                     default=Selection.HIERARCHY_FIRST.value)
    run.add_argument("--refinement-inheritance", action="store_true")
    run.add_argument("--no-cache", action="store_true")
    run.add_argument("--max-depth", type=_positive, default=1024)
    run.add_argument("--trace", choices=["text", "json"], default="text")
    run.set_defaults(func=cmd_run)

    diff = sub.add_parser("diff", help="final dispatch under all six strategy pairs")
    diff.add_argument("file")
    diff.add_argument("--script", required=True)
    diff.add_argument("--refinement-inheritance", action="store_true")
    diff.add_argument("--format", choices=["text", "json"], default="text")
    diff.set_defaults(func=cmd_diff)

    an = sub.add_parser("analyze", help="conflict or statistics report")
    an.add_argument("file")
    an.add_argument("--report", choices=["conflicts", "stats"], default="conflicts")
    an.add_argument("--format", choices=["text", "json"], default="text")
    an.set_defaults(func=cmd_analyze)

    aos = sub.add_parser("aos", help="accidental override space of one message")
    aos.add_argument("file")
    aos.add_argument("--class", dest="cls", required=True, help="receiver class")
    aos.add_argument("--receiver", help="alias for --class")
    aos.add_argument("--selector", required=True, help="name/arity")
    aos.add_argument("--exts", default="", help="comma-separated Pkg.Ext list; global is appended")
    aos.add_argument("--strategy", choices=sorted(_STRATEGY), default="hrc")
    aos.add_argument("--brute-force", action="store_true")
    aos.add_argument("--format", choices=["text", "json"], default="text")
    aos.set_defaults(func=cmd_aos)

    table = sub.add_parser("aos-table", help="hierarchy-first dominance table")
    table.add_argument("--subclasses", type=_nonneg_fraction, required=True)
    table.add_argument("--superclasses", type=_nonneg_fraction, required=True)
    table.add_argument("--max-exts", type=_positive, default=10)
    table.add_argument("--format", choices=["tsv", "json"], default="tsv")
    table.add_argument("--plot", metavar="PATH", help="also write a figure to PATH")
    table.add_argument("--sweep-max", type=_positive, default=10,
                       help="heatmap covers averages 1..N")
    table.set_defaults(func=cmd_aos_table)
    return parser


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _nonneg_fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WorldParseError as err:
        print(str(err), file=sys.stderr)
    except (UsageError, FileNotFoundError) as err:
        print(f"semx: error: {err}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
