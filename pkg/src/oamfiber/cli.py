"""Command-line entry point: ``oamfiber <command> ...``."""
from __future__ import annotations

import argparse
import dataclasses
import sys

from . import harness
from .propagation import ScheduleMismatchError


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--trials", type=int, help="override the Monte Carlo trial count")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "svg"), default="csv")
    p.add_argument("--workers", type=int, default=1,
                   help="threads used to generate noise profiles")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oamfiber",
        description="OAM qubit dephasing in segmented fiber, with CPMG decoupling.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("simulate", "fidelity along the fiber"),
                        ("sweep-l", "end-of-fiber fidelity for every l"),
                        ("compare", "Monte Carlo vs closed-form report")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="flat TOML experiment configuration")
        _add_common(p)
    p = sub.add_parser("preset", help="run a figure preset")
    p.add_argument("name", choices=sorted(harness.PRESETS))
    _add_common(p)
    return parser


def _overrides(config, args):
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    return dataclasses.replace(config, **changes) if changes else config


def _output(text: str, args):
    if args.out:
        harness.write_text(args.out, text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "preset":
        config = harness.preset_config(args.name, args.trials, args.seed)
        runner = harness.sweep_l if args.name == "fig5" else harness.run_experiment
    else:
        config = _overrides(harness.load_config(args.config), args)
        runner = {"simulate": harness.run_experiment, "sweep-l": harness.sweep_l,
                  "compare": harness.compare_analytic}[args.command]
    result = runner(config, workers=args.workers)
    if args.command == "compare":
        if args.format != "csv":
            raise harness.ConfigError("format: compare reports are CSV only")
        _output(harness.comparison_to_csv(result), args)
        return 0
    if len(result) == 0:
        raise ValueError("experiment produced no rows")
    text = harness.curve_to_csv(result) if args.format == "csv" else harness.curve_to_svg(result)
    _output(text, args)
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except (ValueError, ScheduleMismatchError, OSError) as exc:
        print(f"oamfiber: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
