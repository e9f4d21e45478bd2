"""``etpa`` command line.

Reports go to stdout in human form; ``--out PATH`` also writes the machine
form (key-value report, or CSV for ``simulate``). Exit codes: 0 success,
2 validation error, 3 computation domain error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import pipeline
from .config import dump_config, load_config
from .errors import DomainError, InsufficientDataError, ValidationError
from .tables import format_table, read_table

log = logging.getLogger("etpa")

EXIT_OK, EXIT_VALIDATION, EXIT_DOMAIN, EXIT_IO = 0, 2, 3, 4


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _emit(report, args):
    sys.stdout.write(report.to_human())
    if args.out:
        _write(args.out, report.to_text())


def cmd_predict(args):
    _emit(pipeline.run_predict(load_config(args.config), force_qef_one=args.qef_one), args)


def cmd_bound(args):
    _emit(pipeline.run_bound(load_config(args.config), args.threshold, args.threshold_err), args)


def cmd_fit(args):
    table = read_table(args.table)
    report, plot = pipeline.run_fit(table, args.fixed_exponent, args.dark)
    _emit(report, args)
    if args.plot_data:
        _write(args.plot_data, plot)


def cmd_simulate(args):
    cfg = load_config(args.config)
    table = pipeline.run_simulate(
        cfg, args.knob, values=args.values, start=args.start, stop=args.stop,
        points=args.points, spacing=args.spacing, seed=args.seed, duration=args.duration,
        auto_attenuate=args.auto_attenuate, workers=args.workers)
    text = format_table(table)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)


def cmd_klyshko(args):
    _emit(pipeline.run_klyshko(read_table(args.table), load_config(args.config)), args)


def cmd_show_config(args):
    text = dump_config(load_config(args.config))
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser():
    p = argparse.ArgumentParser(prog="etpa", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, config=True, out=True):
        sp = sub.add_parser(name, help=help_)
        if config:
            sp.add_argument("--config", metavar="PATH", default=None,
                            help="experiment config (default: bundled paper.cfg)")
        if out:
            sp.add_argument("--out", metavar="PATH", help="write machine-readable output here")
        sp.set_defaults(func=func)
        return sp

    sp = add("predict", cmd_predict, "ETPA rate prediction with uncertainties")
    sp.add_argument("--qef-one", action="store_true", help="force the enhancement factor to 1")

    sp = add("bound", cmd_bound, "upper bound on additional enhancement")
    sp.add_argument("--threshold", type=float, metavar="RATE", help="measured threshold [1/s]")
    sp.add_argument("--threshold-err", type=float, metavar="RATE", help="its uncertainty [1/s]")

    sp = add("fit", cmd_fit, "power-law fit of a measurement CSV", config=False)
    sp.add_argument("table", help="measurement CSV")
    sp.add_argument("--fixed-exponent", type=float, metavar="X")
    sp.add_argument("--dark", type=float, metavar="RATE",
                    help="dark rate [1/s] overriding the dark_counts column")
    sp.add_argument("--plot-data", metavar="PATH", help="write plot-data CSV here")

    sp = add("simulate", cmd_simulate, "Monte Carlo sweep written as a measurement CSV")
    sp.add_argument("--knob", choices=("pump", "attenuation"), default="pump")
    sp.add_argument("--start", type=float)
    sp.add_argument("--stop", type=float)
    sp.add_argument("--points", type=int)
    sp.add_argument("--values", type=_floats, help="explicit comma-separated sweep values")
    sp.add_argument("--spacing", choices=("log", "linear"), default="log")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--duration", type=float, help="seconds per point (default from config)")
    sp.add_argument("--auto-attenuate", type=float, metavar="RATE",
                    help="attenuate each pump point so singles stay below RATE [1/s]")
    sp.add_argument("--workers", type=int, default=1)

    sp = add("klyshko", cmd_klyshko, "pair-rate lower bound from a power sweep")
    sp.add_argument("table", help="measurement CSV with singles columns")

    add("show-config", cmd_show_config, "print the fully resolved config")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s", stream=sys.stderr)
    if args.command == "simulate" and args.values is None and None in (args.start, args.stop, args.points):
        print("error: simulate needs --values or all of --start, --stop, --points", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        log.info("running %s", args.command)
        args.func(args)
    except ValidationError as e:
        for msg in e.errors:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DomainError, InsufficientDataError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
