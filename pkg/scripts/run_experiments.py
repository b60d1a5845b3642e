#!/usr/bin/env python3
"""Run the bundled desk-scale experiments into results/<name>/.

Each experiment writes results.csv (or profiles.csv) plus a manifest;
the frontend's isacplot renders figures from those CSVs.  Pass --full
for the 500-trial dense-grid profiles (hours, not minutes).
"""

import argparse
import sys
import time
from pathlib import Path

from isacsim.harness import load_spec, run_experiment

SPEC_DIR = Path(__file__).parent / "specs"
NAMES = ["rcs_sweep", "pilot_sweep", "range_profiles", "tradeoff", "iteration_study"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results", help="output root directory")
    parser.add_argument("--full", action="store_true", help="publication-scale profiles (500 trials, dense grids)")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--only", nargs="*", choices=NAMES, default=None)
    args = parser.parse_args()

    spec_dir = SPEC_DIR / "full" if args.full else SPEC_DIR
    out_root = Path(args.out)
    for name in args.only or NAMES:
        spec = load_spec(str(spec_dir / f"{name}.json"))
        t0 = time.monotonic()
        primary = run_experiment(spec, out_root / name, threads=args.threads)
        print(f"{name}: {primary} ({time.monotonic() - t0:.0f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
