"""Command-line interface.

Subcommands:
  analyze  run the abstract analysis of a model file and print bounds
  fuzz     replay concrete runs against an analysis and report violations
  compare  tabulate interval vs real-slope vs fps result widths

Exit codes: 0 success, 1 possible run-time error diagnosed, 2 usage or
parse error, 3 soundness violation found by fuzzing.

The widening threshold ladder can be overridden with the FPS_THRESHOLDS
environment variable (comma-separated decimal or hex floats).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import interval as ivl
from .analyzer import AnalysisReport, AnalyzeOptions, analyze
from .frontend import ModelError, load_model, lower_to_program
from .interval import Interval
from .oracle import fuzz_soundness

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2
EXIT_UNSOUND = 3


def _thresholds_from_env() -> tuple[float, ...] | None:
    raw = os.environ.get("FPS_THRESHOLDS")
    if not raw:
        return None
    vals = {0.0, math.inf, -math.inf}
    for tok in raw.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            if tok.lower().lstrip("+-").startswith("0x"):
                v = float.fromhex(tok)
            else:
                v = float(tok)
        except ValueError:
            raise SystemExit(f"FPS_THRESHOLDS: not a float: {tok!r}")
        if not math.isnan(v):
            vals.add(v)
    return tuple(sorted(vals))


def _fmt_interval(b: Interval) -> str:
    if b.is_bottom:
        return "(empty)"
    return f"[{b.lo:.17g}, {b.hi:.17g}]"


def _print_text_report(report: AnalysisReport, out) -> None:
    print(f"model:    {report.program.name}", file=out)
    print(f"domain:   {report.domain}", file=out)
    print(f"profile:  {report.profile}", file=out)
    print(f"steps:    {len(report.instants)}", file=out)
    for name in report.program.outputs:
        hull = report.window_hull.get(name)
        final = report.instants[-1].bounds.get(name) if report.instants else None
        print(f"output {name}:", file=out)
        if final is not None:
            print(f"  final instant: {_fmt_interval(final)}", file=out)
        if hull is not None:
            print(f"  window hull:   {_fmt_interval(hull)}", file=out)
        if report.limit is not None:
            print(f"  limit (t>=N):  {_fmt_interval(report.limit.bounds[name])}", file=out)
    if report.limit is not None:
        print(f"limit iterations: {report.limit_iterations}", file=out)
    seen = set()
    for d in report.diagnostics:
        line = d.render()
        if line not in seen:
            seen.add(line)
            print(f"diagnostic: {line}", file=out)


def _load(path: str):
    try:
        model = load_model(path)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    except ModelError as e:
        for msg in e.errors:
            print(f"error: {msg}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    return model, lower_to_program(model)


def _options(args, domain: str | None = None) -> AnalyzeOptions:
    return AnalyzeOptions(
        profile=args.precision,
        unroll=args.unroll,
        widen_delay=args.widen_delay,
        compute_limit=not args.no_limit,
        thresholds=_thresholds_from_env(),
        domain=domain if domain is not None else args.domain,
    )


def cmd_analyze(args) -> int:
    _, program = _load(args.model)
    report = analyze(program, _options(args))
    if args.format == "json":
        json.dump(report.to_json_dict(), sys.stdout, indent=2)
        print()
    else:
        _print_text_report(report, sys.stdout)
    if any(d.is_runtime_error for d in report.diagnostics):
        return EXIT_DIAGNOSTICS
    return EXIT_OK


def cmd_fuzz(args) -> int:
    _, program = _load(args.model)
    report = analyze(program, _options(args, domain="fps"))
    verdict = fuzz_soundness(program, report, samples=args.samples, seed=args.seed)
    if args.format == "json":
        json.dump(verdict.to_json_dict(), sys.stdout, indent=2)
        print()
    else:
        print(
            f"{verdict.model}: {len(verdict.violations)} violations "
            f"in {verdict.samples} samples ({verdict.checked_values} values checked)"
        )
        for v in verdict.violations:
            print(f"  {v.render()}")
    if not verdict.ok:
        return EXIT_UNSOUND
    if any(d.is_runtime_error for d in report.diagnostics):
        return EXIT_DIAGNOSTICS
    return EXIT_OK


def cmd_compare(args) -> int:
    _, program = _load(args.model)
    rows = []
    had_error = False
    for domain in ("interval", "real-slope", "fps"):
        try:
            report = analyze(program, _options(args, domain=domain))
        except Exception as e:  # the interval domain rejects gridless profiles
            rows.append((domain, f"unavailable: {e}", None))
            continue
        had_error |= any(d.is_runtime_error for d in report.diagnostics)
        hull = report.output_hull()
        rows.append((domain, _fmt_interval(hull), hull.width()))
    print(f"{'domain':<12} {'output hull':<60} width")
    for domain, text, width in rows:
        w = f"{width:.6g}" if width is not None else "-"
        print(f"{domain:<12} {text:<60} {w}")
    return EXIT_DIAGNOSTICS if had_error else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fpslopes",
        description="Guaranteed floating-point ranges for dataflow models.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("model", help="model file (.fps)")
        p.add_argument(
            "--precision",
            choices=["single", "double", "extended", "double-rounding"],
            default=None,
            help="override the model's precision profile",
        )
        p.add_argument("--unroll", type=int, default=None, help="override step count")
        p.add_argument("--widen-delay", type=int, default=3)
        p.add_argument("--no-limit", action="store_true", help="skip the t->inf instant")
        p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("analyze", help="compute guaranteed variable bounds")
    common(p)
    p.add_argument(
        "--domain",
        choices=["fps", "interval", "real-slope"],
        default="fps",
        help="value domain to run the model through",
    )
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fuzz", help="check the analysis against concrete runs")
    common(p)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("compare", help="tabulate domain precision")
    common(p)
    p.set_defaults(func=cmd_compare)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
