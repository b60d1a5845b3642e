#!/usr/bin/env python3
"""Regenerate the experiment spec JSONs under scripts/specs/.

Desk-scale specs run in minutes on one core; the full/ profiles use 500
noise trials and denser grids for publication-quality curves.
"""

import json
from pathlib import Path

from isacsim.harness import ExperimentSpec, spec_to_dict
from isacsim.scenario import db_to_linear, reference_scenario

SPEC_DIR = Path(__file__).parent / "specs"


def write(spec: ExperimentSpec, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(spec_to_dict(spec), f, indent=2)
        f.write("\n")
    print(f"wrote {path}")


def build(n_trials: int, dense: bool) -> dict[str, ExperimentSpec]:
    base = reference_scenario()
    rcs_grid = (tuple(range(-16, 25, 2)) if dense
                else (-14.0, -10.0, -6.0, -2.0, 2.0, 6.0, 10.0, 14.0, 18.0, 22.0))
    rho_grid = (tuple(float(r) for r in (1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 30, 50))
                if dense else (1.0, 2.0, 3.0, 5.0, 7.5, 10.0, 15.0, 20.0, 30.0, 50.0))
    trade_grid = (tuple(float(r) for r in range(0, 101, 5)) if dense
                  else (0.0, 2.0, 5.0, 10.0, 20.0, 35.0, 50.0, 75.0, 100.0))
    iter_grid = (tuple(range(-24, 25, 2)) if dense
                 else (-22.0, -18.0, -14.0, -10.0, -4.0, 4.0, 10.0, 16.0, 20.0, 24.0))
    two_dbsm = base.with_target_rcs(1, db_to_linear(2.0))
    return {
        "rcs_sweep": ExperimentSpec(
            kind="rcs_sweep", scenario=base,
            sweep_variable="target_rcs_dbsm", sweep_grid=rcs_grid,
            schemes=("pilot_only", "data_aided", "genie"),
            estimators=("LMMSE", "MF", "RF"),
            n_trials=n_trials, master_seed=1,
        ),
        "pilot_sweep": ExperimentSpec(
            kind="pilot_sweep", scenario=two_dbsm,
            sweep_variable="rho", sweep_grid=rho_grid,
            schemes=("pilot_only", "data_aided", "genie"),
            estimators=("LMMSE", "MF", "RF"),
            n_trials=n_trials, master_seed=1,
        ),
        "range_profiles": ExperimentSpec(
            kind="range_profile", scenario=two_dbsm, rho=2.0,
            schemes=("pilot_only", "data_aided", "genie"),
            estimators=("LMMSE",),
            n_trials=20, master_seed=1,
        ),
        "tradeoff": ExperimentSpec(
            kind="tradeoff", scenario=base,
            sweep_variable="rho", sweep_grid=trade_grid,
            schemes=("pilot_only", "data_aided", "genie"),
            estimators=("LMMSE",),
            constellations=("QPSK", "1024QAM"),
            n_trials=n_trials, master_seed=1,
        ),
        "iteration_study": ExperimentSpec(
            kind="iteration_study", scenario=base.with_tx_power(10.0),
            sweep_variable="target_rcs_dbsm", sweep_grid=iter_grid,
            schemes=("data_aided",), estimators=("LMMSE",),
            n_trials=n_trials, master_seed=1,
        ),
        "single_run": ExperimentSpec(
            kind="single_run", scenario=base,
            schemes=("pilot_only", "data_aided", "genie"),
            estimators=("LMMSE",),
            n_trials=1, master_seed=1,
        ),
    }


def main() -> None:
    for name, spec in build(n_trials=200, dense=False).items():
        write(spec, SPEC_DIR / f"{name}.json")
    for name, spec in build(n_trials=500, dense=True).items():
        write(spec, SPEC_DIR / "full" / f"{name}.json")


if __name__ == "__main__":
    main()
