"""Residual excitation vs the phase at which the shaking stops.

Cuts the drive abruptly at a sweep of end phases (measured from the
velocity extremum) and compares against a smooth ramp-down.  Stopping
at the velocity extremum deposits the most energy; the ramp-down
control sets the floor.
"""

import argparse
import dataclasses
import math
import pathlib
import time

from shakenbec import (
    DriveSpec,
    Envelope,
    EnsembleConfig,
    Grid,
    LatticeParams,
    Trajectory,
    TwaRunConfig,
    ensemble_run,
)
from shakenbec.output import write_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--g", type=float, default=5.0)
    ap.add_argument("--k0", type=float, default=1.25)
    ap.add_argument("--omega", type=float, default=12.5)
    ap.add_argument("--n0", type=float, default=100.0)
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--phases", type=int, default=8, help="end phases over [0, pi)")
    ap.add_argument("--ramp-up", type=int, default=2)
    ap.add_argument("--hold", type=int, default=6)
    ap.add_argument("--ramp-down", type=int, default=3)
    ap.add_argument("--post-hold", type=int, default=6)
    ap.add_argument("--realizations", type=int, default=6)
    ap.add_argument("--seed", type=int, default=4)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("results"))
    args = ap.parse_args()

    grid = Grid(args.n, args.n, 1, lz=1.0)
    p = LatticeParams(j=1.0, g=args.g, n0=args.n0)
    base = DriveSpec(Trajectory.LINEAR_X, args.k0, args.omega)
    ens = EnsembleConfig(
        n_realizations=args.realizations, master_seed=args.seed,
        bootstrap_resamples=50,
    )

    def run(env: Envelope, extra: int):
        drive = dataclasses.replace(base, envelope=env)
        cfg = TwaRunConfig(steps_per_period=128, post_hold_periods=extra)
        res = ensemble_run(grid, drive, p, cfg, ens, workers=args.workers)
        return float(res.n_ex[env.total_periods]), float(res.n_ex[-1])

    rows = []
    t0 = time.time()
    for k in range(args.phases):
        phase = k * math.pi / args.phases
        env = Envelope(
            ramp_up=args.ramp_up, hold=args.hold,
            abrupt_stop=True, end_phase=phase,
        )
        n_stop, n_final = run(env, args.post_hold)
        rows.append(["abrupt", phase, n_stop, n_final])
        print(f"phase {phase:.3f}: n_ex at stop {n_stop:.4f}, final {n_final:.4f}")
    env = Envelope(ramp_up=args.ramp_up, hold=args.hold, ramp_down=args.ramp_down)
    n_stop, n_final = run(env, args.post_hold + 1 - args.ramp_down)
    rows.append(["ramped", None, n_stop, n_final])
    print(f"ramp-down over {args.ramp_down} periods: final {n_final:.4f} "
          f"[{time.time() - t0:.1f}s total]")

    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "stop_phase_sweep.csv"
    write_csv(
        path, ["protocol", "end_phase_rad", "n_ex_at_stop", "n_ex_final"], rows
    )
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
