"""Command-line entry point: ``rotorlab run | fit | sweep``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import config as cfg
from .errors import (BelowStallSpeed, BeyondStallClamp, ConfigError, DegenerateSamples,
                     InvalidParams, IterationDivergence, NoValidSamples, NonFiniteState,
                     NonMonotoneTime, OutOfRange, OutOfSpan, RankDeficientLog, SchemaMismatch,
                     SingularG, StepTooLarge, TooFewFrames, UnstableConfig)
from .scenario import run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4

_CONFIG_ERRORS = (ConfigError, InvalidParams, StepTooLarge, OutOfRange, UnstableConfig,
                  BelowStallSpeed, BeyondStallClamp, OutOfSpan)
_INPUT_ERRORS = (FileNotFoundError, SchemaMismatch, NonMonotoneTime, TooFewFrames,
                 RankDeficientLog, DegenerateSamples, NoValidSamples)
_NUMERIC_ERRORS = (NonFiniteState, IterationDivergence, SingularG, ArithmeticError)

FIT_KINDS = {"rates": "fit_rates", "planar": "fit_planar", "drag": "fit_drag"}
SWEEP_KINDS = {"bem": "bem_sweep", "power_curve": "power_curve"}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rotorlab",
                                 description="Rotor/fuselage dynamics, identification and "
                                             "energy-budget scenarios.")
    ap.add_argument("--output-root", help="directory for outputs "
                                          "(default: $ROTORLAB_OUTPUT_ROOT or ./rotorlab_out)")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario config")
    run.add_argument("config")

    fit = sub.add_parser("fit", help="fit a model to a CSV file")
    fit.add_argument("kind", choices=sorted(FIT_KINDS))
    fit.add_argument("data")
    fit.add_argument("--name", help="output subdirectory name")
    fit.add_argument("--rho", type=float, default=1.225, help="air density for drag fits")
    fit.add_argument("--cutoff", type=float, default=15.0,
                     help="rate filter cutoff (rad/s) when accelerations are derived")

    sweep = sub.add_parser("sweep", help="run a sweep from a config")
    sweep.add_argument("kind", choices=sorted(SWEEP_KINDS))
    sweep.add_argument("config")
    return ap


def _fit_scenario(args) -> cfg.Scenario:
    data = Path(args.data).resolve()
    kind = FIT_KINDS[args.kind]
    exp = {"log" if kind == "fit_rates" else "samples": str(data),
           "rho": repr(args.rho), "cutoff": repr(args.cutoff)}
    name = args.name or f"fit_{args.kind}_{data.stem}"
    s = cfg.Scenario(kind=kind, name=name, sections={"experiment": exp}, base_dir=data.parent,
                     output=name)
    cfg.validate(s)
    return s


def _sweep_scenario(args) -> cfg.Scenario:
    s = cfg.load_scenario(args.config)
    kind = SWEEP_KINDS[args.kind]
    if s.kind != kind:
        s.kind = kind
        cfg.validate(s)
    return s


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            s = cfg.load_scenario(args.config)
        elif args.command == "fit":
            s = _fit_scenario(args)
        else:
            s = _sweep_scenario(args)
        result = run_scenario(s, args.output_root)
    except _CONFIG_ERRORS as exc:
        print(f"rotorlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _INPUT_ERRORS as exc:
        print(f"rotorlab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _NUMERIC_ERRORS as exc:
        print(f"rotorlab: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"{s.kind}: wrote {result.directory}")
    for k, v in result.outputs.summary:
        print(f"  {k} = {v}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
