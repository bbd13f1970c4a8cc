"""Command-line front end: `simulate` and `tune`.

Both commands read one YAML configuration file and write flat CSV/text
files into the output directory.  Exit status 0 on success, 1 with a
diagnostic on stderr for configuration or I/O problems.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import moea, tuning
from .config import ConfigError, RunConfig, load_config
from .dynamics import N_JOINTS
from .simulation import simulate, write_joint_tracking_csvs, \
    write_trajectory_csv


def _outdir(cfg: RunConfig, override) -> Path:
    out = Path(override) if override else Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(cfg: RunConfig, out_override=None, tracking=False) -> int:
    model = cfg.load_model()
    sim = cfg.simulation
    q0 = cfg.trajectory.q_initial + sim.initial_offset_rad
    result = simulate(model, cfg.gains, cfg.trajectory, sim.dt_control,
                      sim.dt_integration, q0=q0)
    out = _outdir(cfg, out_override)
    write_trajectory_csv(result, out / "trajectory.csv")
    if tracking:
        write_joint_tracking_csvs(result, out)

    lines = [f"samples: {len(result.t)}",
             f"diverged: {'yes' if result.diverged else 'no'}"]
    err = np.abs(result.q_des - result.q)
    for j in range(N_JOINTS):
        lines.append(
            f"joint {j+1}: iae={result.iae[j]:.6g} rad*samples  "
            f"max|e|={np.degrees(err[:, j].max()):.6g} deg  "
            f"final|e|={np.degrees(err[-1, j]):.6g} deg")
    text = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


def cmd_tune(cfg: RunConfig, out_override=None, seed_override=None) -> int:
    model = cfg.load_model()
    sim = cfg.simulation
    opt = cfg.optimizer
    seed = opt.seed if seed_override is None else seed_override
    objective = tuning.make_objective(model, cfg.trajectory, sim.dt_control,
                                      sim.dt_integration,
                                      opt.initial_offset_rad)
    t0 = time.perf_counter()
    result = moea.evolve(objective, tuning.GENE_COUNT,
                         tuning.OBJECTIVE_COUNT, opt.gene_lower,
                         opt.gene_upper, opt.population, opt.generations,
                         config=opt.operators, seed=seed)
    elapsed = time.perf_counter() - t0

    out = _outdir(cfg, out_override)
    moea.write_archive_csv(result, out / "archive.csv")
    moea.write_front_csv(result, out / "front.csv")

    gen0 = np.array([ind.objectives for ind in result.snapshots[0]])
    front = np.array([ind.objectives for ind in result.front])
    lines = [f"generations: {opt.generations}  population: {opt.population}"
             f"  seed: {seed}  operators: {opt.operators.family}",
             f"evaluations: {result.evaluations}",
             f"elapsed: {elapsed:.4f} s"]
    for j in range(tuning.OBJECTIVE_COUNT):
        lines.append(
            f"objective {j+1} (joint {j+1} iae): best={front[:, j].min():.6g}"
            f"  initial-population median={np.median(gen0[:, j]):.6g}")
    text = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="armtune",
        description="Simulate a computed-torque-controlled 6R arm and tune "
                    "its PD gains by multi-objective search.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate",
                           help="run the closed loop once and report errors")
    p_sim.add_argument("--config", required=True, help="YAML run config")
    p_sim.add_argument("--out", help="output directory (default from config)")
    p_sim.add_argument("--tracking", action="store_true",
                       help="also write per-joint desired-vs-actual files")

    p_tune = sub.add_parser("tune", help="optimize the 12 controller gains")
    p_tune.add_argument("--config", required=True, help="YAML run config")
    p_tune.add_argument("--seed", type=int, help="override the config seed")
    p_tune.add_argument("--out", help="output directory (default from config)")

    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out, args.tracking)
        return cmd_tune(cfg, args.out, args.seed)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
