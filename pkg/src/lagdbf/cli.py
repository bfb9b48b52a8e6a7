"""Command line entry point: ``lagdbf bench`` and ``lagdbf trace``.

Any flag may also be set through an environment variable named
``LAGDBF_<FLAG>`` (upper case, dashes as underscores), for example
``LAGDBF_REALIZATIONS=10``.  Explicit flags take precedence.

Exit codes: 0 success, 1 usage error, 2 solver failure rate above 1%,
3 I/O error.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .exceptions import ConfigurationError, SolverError
from .harness import (
    ALGORITHMS,
    FAILURE_THRESHOLD,
    ExperimentSpec,
    aggregate_csv,
    emit_results,
    run_experiment,
    run_trace,
    to_json,
    trace_csv,
)
from .network import ENCODINGS, parse_arch

EXIT_OK, EXIT_USAGE, EXIT_FAILURES, EXIT_IO = 0, 1, 2, 3
ENV_PREFIX = "LAGDBF_"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_list(text, kind=float):
    """Comma list ``"0,10,30"`` or inclusive range ``"0:30:10"``."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
                raise ValueError
            start, stop, step = parts
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            values = [start + i * step for i in range(n)]
        else:
            values = [float(p) for p in text.split(",") if p.strip()]
        if not values:
            raise ValueError
        if kind is int:
            if any(v != int(v) for v in values):
                raise ValueError
            return [int(v) for v in values]
        return [round(v, 10) for v in values]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list or a:b:step range, got {text!r}")


def _int_list(text):
    return parse_list(text, int)


def _algos(text):
    algos = [a.strip().lower() for a in str(text).split(",") if a.strip()]
    bad = [a for a in algos if a not in ALGORITHMS]
    if bad or not algos:
        raise argparse.ArgumentTypeError(f"algorithms must be drawn from {','.join(ALGORITHMS)}")
    return algos


def _arch(text):
    try:
        return parse_arch(text)
    except ConfigurationError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _add_common(p, trace):
    p.add_argument("--algos", type=_algos, default="wmmse" if trace else "lagd,wmmse",
                   help="comma list from lagd,wmmse,gd,adam")
    p.add_argument("--users", type=_int_list, default="4")
    p.add_argument("--antennas", type=_int_list, default="4")
    p.add_argument("--snr-db", type=parse_list, default="10")
    p.add_argument("--realizations", type=int, default=1 if trace else 100)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--iters-lagd", type=int, default=500)
    p.add_argument("--iters-wmmse", type=int, default=50)
    p.add_argument("--iters-gd", type=int, default=500,
                   help="iterations of both gd and adam")
    p.add_argument("--gd-step", type=float, default=1e-2)
    p.add_argument("--adam-lr", type=float, default=1e-2)
    p.add_argument("--arch", type=_arch, default="40,40",
                   help="hidden layer widths, e.g. 40,40 or 10")
    p.add_argument("--theta-lr", type=float, default=1e-4)
    p.add_argument("--encoding", choices=ENCODINGS, default="flat")
    p.add_argument("--report", choices=("final", "best"), default="final")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None,
                   help="output directory (bench) or file (trace); stdout when omitted")


def build_parser():
    parser = _Parser(prog="lagdbf", description="MISO downlink beamforming benchmarks")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    bench = sub.add_parser("bench", help="Monte Carlo sweep over users, antennas and SNR")
    _add_common(bench, trace=False)
    bench.add_argument("--format", choices=("csv", "json"), default="csv")
    bench.add_argument("--timing", action="store_true",
                       help="record wall-clock times (output is then not reproducible)")
    bench.add_argument("--jobs", type=int, default=1, help="worker processes")
    bench.add_argument("--quiet", action="store_true")
    trace = sub.add_parser("trace", help="per-iteration WSR of one solve")
    _add_common(trace, trace=True)
    return parser


def _apply_env(parser, environ):
    """Override sub-parser defaults from ``LAGDBF_*`` variables."""
    for action in parser._subparsers._group_actions:
        for sub in action.choices.values():
            overrides = {}
            for a in sub._actions:
                if not a.option_strings or a.dest in ("help", "version"):
                    continue
                key = ENV_PREFIX + a.dest.upper()
                if key in environ:
                    if a.const is not None or a.nargs == 0:
                        overrides[a.dest] = environ[key].lower() in ("1", "true", "yes", "on")
                    else:
                        overrides[a.dest] = environ[key]
            sub.set_defaults(**overrides)


def spec_from_args(args):
    return ExperimentSpec(
        algorithms=args.algos, users=args.users, antennas=args.antennas, snr_db=args.snr_db,
        realizations=args.realizations, restarts=args.restarts, iters_lagd=args.iters_lagd,
        iters_wmmse=args.iters_wmmse, iters_gd=args.iters_gd, iters_adam=args.iters_gd,
        gd_step=args.gd_step, adam_lr=args.adam_lr, arch=args.arch, theta_lr=args.theta_lr,
        encoding=args.encoding, report_mode=args.report, seed=args.seed,
        timing=getattr(args, "timing", False))


def _bench(args):
    spec = spec_from_args(args)

    def progress(done, total):
        if not args.quiet:
            print(f"\r{done}/{total} realizations", end="", file=sys.stderr, flush=True)

    result = run_experiment(spec, jobs=args.jobs, progress=progress)
    if not args.quiet:
        print(file=sys.stderr)
    if args.out is None:
        sys.stdout.write(to_json(result) if args.format == "json" else aggregate_csv(result.rows))
    else:
        for path in emit_results(result, args.format, args.out):
            if not args.quiet:
                print(f"wrote {path}", file=sys.stderr)
    if result.failure_rate > FAILURE_THRESHOLD:
        print(f"error: {result.n_failed}/{len(result.records)} solves failed", file=sys.stderr)
        for record in result.records:
            if record.failed:
                print(f"  {record.algo} N={record.users} M={record.antennas} "
                      f"snr={record.snr_db} r={record.realization}: {record.error}",
                      file=sys.stderr)
        return EXIT_FAILURES
    return EXIT_OK


def _trace(args):
    spec = spec_from_args(args)
    try:
        result = run_trace(spec)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURES
    text = trace_csv(result)
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    return EXIT_OK


def main(argv=None, environ=None):
    parser = build_parser()
    _apply_env(parser, os.environ if environ is None else environ)
    args = parser.parse_args(argv)
    try:
        return _bench(args) if args.command == "bench" else _trace(args)
    except ConfigurationError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"{parser.prog}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
