"""Command-line entry point.

Commands: `figure` (named report datasets, CSV plus a rendered PNG),
`threshold` (detector-efficiency threshold as JSON), `sweep` (grid runs
from an INI config), `validate` (oracle cross-checks).  Exit codes are
scriptable: 0 success or warn, 2 config error, 3 numerical failure,
4 unknown command.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bell import MonotonicityError, Scenario, threshold_eta2
from .figures import FIGURES, run_figure
from .fockspace import LossPlacement
from .sweep import ConfigError, parse_config, run_sweep
from .validate import run_validate

_USAGE = "usage: bellsim {figure,threshold,sweep,validate} [options]"
_FAMILIES = {"pol": "polarization", "ecs": "ecs", "ets": "ets"}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad arguments, which already matches the config
    # error code; this subclass only makes the failure an exception path in
    # tests instead of calling sys.exit from library code.
    def error(self, message):
        raise ConfigError(message)


def _cmd_figure(argv) -> int:
    parser = _Parser(prog="bellsim figure")
    parser.add_argument("name", choices=sorted(FIGURES))
    parser.add_argument("--out", default=None, help="output CSV path (default <name>.csv)")
    parser.add_argument("--jobs", type=int, default=0, help="worker processes (0 = all cores)")
    parser.add_argument("--no-plot", action="store_true", help="skip the PNG render")
    args = parser.parse_args(argv)
    csv_path = run_figure(args.name, out_path=args.out, jobs=args.jobs)
    print(f"wrote {csv_path}")
    if not args.no_plot:
        from .plotting import render_figure

        png_path = render_figure(csv_path)
        print(f"wrote {png_path}")
    return 0


def _cmd_threshold(argv) -> int:
    parser = _Parser(prog="bellsim threshold")
    parser.add_argument("--family", required=True, choices=sorted(_FAMILIES))
    parser.add_argument("--n", type=int, default=None)
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--V", type=float, default=None)
    parser.add_argument("--d", type=float, default=None)
    parser.add_argument("--eta1", type=float, default=1.0, help="loss before the rotation")
    parser.add_argument("--engine", choices=("closed_form", "oracle"), default="closed_form")
    parser.add_argument("--tol", type=float, default=1e-4)
    args = parser.parse_args(argv)
    if not 0.0 < args.tol <= 0.1:
        raise ConfigError(f"--tol must be in (0, 0.1], got {args.tol}")
    try:
        scenario = Scenario(
            _FAMILIES[args.family],
            LossPlacement(args.eta1, 1.0),
            engine=args.engine,
            n=args.n,
            alpha=args.alpha,
            V=args.V,
            d=args.d,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    eta_star = threshold_eta2(scenario, tol=args.tol)
    record = {
        "eta_star": eta_star,
        "status": "found" if eta_star is not None else "no_threshold",
        "tol": args.tol,
        "scenario": {
            "family": scenario.family,
            "engine": scenario.engine,
            "eta1": args.eta1,
            **{k: v for k, v in (("n", args.n), ("alpha", args.alpha), ("V", args.V), ("d", args.d)) if v is not None},
        },
    }
    print(json.dumps(record, sort_keys=True))
    return 0


def _cmd_sweep(argv) -> int:
    parser = _Parser(prog="bellsim sweep")
    parser.add_argument("--config", required=True, help="INI config file")
    args = parser.parse_args(argv)
    out = run_sweep(parse_config(args.config))
    print(f"wrote {out}")
    return 0


def _cmd_validate(argv) -> int:
    parser = _Parser(prog="bellsim validate")
    parser.add_argument("--corrupt", default=None, help=argparse.SUPPRESS)
    args = parser.parse_args(argv)
    code, results = run_validate(corrupt=args.corrupt)
    for r in results:
        print(f"{r.status:4s} {r.name:32s} {r.detail}")
    return code


_COMMANDS = {
    "figure": _cmd_figure,
    "threshold": _cmd_threshold,
    "sweep": _cmd_sweep,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(_USAGE, file=sys.stderr if not argv else sys.stdout)
        return 2 if not argv else 0
    command, rest = argv[0], argv[1:]
    if command not in _COMMANDS:
        print(f"bellsim: unknown command {command!r}", file=sys.stderr)
        print(_USAGE, file=sys.stderr)
        return 4
    try:
        return _COMMANDS[command](rest)
    except ConfigError as exc:
        print(f"bellsim: config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"bellsim: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
