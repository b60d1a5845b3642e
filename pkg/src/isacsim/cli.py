"""Command-line entry point: run experiments, validate specs, oracle check."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .harness import load_spec, oracle_check, run_experiment, validate_spec


def _cmd_run(args: argparse.Namespace) -> int:
    spec = load_spec(args.spec)
    if args.trials is not None:
        spec = replace(spec, n_trials=args.trials)
    if args.seed is not None:
        spec = replace(spec, master_seed=args.seed)
    primary = run_experiment(spec, args.out, threads=args.threads)
    print(f"wrote {primary}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    with open(args.spec) as f:
        raw = json.load(f)
    from .harness import spec_from_dict

    spec = spec_from_dict(raw)
    validate_spec(spec)
    print(f"{args.spec}: valid ({spec.kind}, {spec.n_trials} trials)")
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    return 0 if oracle_check(verbose=True) else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="isacsim",
        description="Bistatic OFDM ISAC Monte Carlo experiment runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment spec")
    p_run.add_argument("spec", help="experiment spec JSON")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--trials", type=int, default=None, help="override n_trials")
    p_run.add_argument("--seed", type=int, default=None, help="override master seed")
    p_run.add_argument("--threads", type=int, default=1, help="trial-level worker threads")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="validate an experiment spec")
    p_val.add_argument("spec", help="experiment spec JSON")
    p_val.set_defaults(func=_cmd_validate)

    p_orc = sub.add_parser("oracle", help="noiseless on-grid end-to-end check")
    p_orc.set_defaults(func=_cmd_oracle)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
