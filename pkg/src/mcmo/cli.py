"""Command-line entry point: ``mcmo optimize | analyze | experiment | airfoil-geom``.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, RunConfig, build_problem, config_from_dict, read_mapping
from .engine import Trainer
from .pareto import DecompositionGrid, hv_avg_arrays

logger = logging.getLogger("mcmo")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _load(args) -> RunConfig:
    data = read_mapping(args.config) if args.config else {}
    if isinstance(data, dict) and "config" in data and "version" in data:
        data = data["config"]          # a run manifest
    data = dict(data or {})
    training = dict(data.get("training") or {})
    if getattr(args, "seed", None) is not None:
        training["seed"] = args.seed
    if getattr(args, "episodes", None) is not None:
        training["episodes"] = args.episodes
    if getattr(args, "cells", None) is not None:
        training["analysis_cells"] = args.cells
    if getattr(args, "reference", None) is not None:
        training["hv_reference"] = list(args.reference)
    data["training"] = training
    if getattr(args, "output", None):
        data["output_dir"] = args.output
    return config_from_dict(data)


def _problem_info(problem) -> dict:
    return {
        "name": problem.name,
        "decision_space": problem.decision_space.to_dict(),
        "condition_space": problem.condition_space.to_dict(),
        "objective_count": problem.objective_count,
        "reference_point": None if problem.reference_point is None else list(problem.reference_point),
    }


def cmd_optimize(args) -> int:
    cfg = _load(args)
    problem = build_problem(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_manifest(cfg.to_dict(), _problem_info(problem), out / io.MANIFEST_FILE)
    trainer = Trainer(problem, cfg.training, cfg.conditions)
    interval = cfg.training.checkpoint_interval

    def checkpoint(t, _record):
        if interval and t.episode % interval == 0:
            io.save_checkpoint(t, out / "checkpoints")

    try:
        trainer.train(callback=checkpoint)
    finally:
        p, d, m = problem.n_conditions, problem.n_decisions, problem.objective_count
        io.write_records(trainer.records, out / io.RECORDS_FILE, p, d, m)
        io.write_hv_history(trainer.history.episodes, trainer.history.hv_avg, out / io.HV_FILE)
    io.save_checkpoint(trainer, out / "checkpoints")
    if m == 2:
        io.write_fronts(trainer.records, trainer.analysis_grid, out / io.FRONTS_FILE)
    failed = sum(r.failed for r in trainer.records)
    print(f"{trainer.episode} episodes, {failed} failed evaluations -> {out}")
    if trainer.history.hv_avg:
        print(f"final HV_avg {trainer.history.hv_avg[-1]:.6g}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    run = Path(args.run_dir)
    manifest = io.read_manifest(run / io.MANIFEST_FILE)
    cfg = config_from_dict(manifest["config"])
    problem = build_problem(cfg) if cfg.problem != "airfoil-external" else None
    if problem is None:
        from .airfoil.problem import condition_space
        space = condition_space()
    else:
        space = problem.condition_space
    records, (p, d, m) = io.read_records(run / io.RECORDS_FILE)
    if m != 2:
        raise ConfigError("analyze supports two-objective runs only")
    n_cells = args.cells if args.cells is not None else cfg.training.analysis_cells
    reference = args.reference if args.reference is not None else cfg.training.hv_reference
    if reference is None:
        raise ConfigError("--reference is required: the run has no reference point")
    grid = DecompositionGrid(space, n_cells)
    out = Path(args.output) if args.output else run / f"analysis_N{n_cells}"
    out.mkdir(parents=True, exist_ok=True)
    io.write_fronts(records, grid, out / io.FRONTS_FILE)
    ok = [r for r in records if not r.failed]
    C = np.vstack([r.condition_raw for r in ok]) if ok else np.empty((0, p))
    F = np.vstack([r.objectives for r in ok]) if ok else np.empty((0, m))
    report = hv_avg_arrays(C, F, grid, reference)
    io.write_hv_report(grid, report.per_cell, out / io.HV_REPORT_FILE)
    print(f"N={n_cells} reference={tuple(float(v) for v in reference)} HV_avg {report.hv_avg:.10g} -> {out}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    from .experiment import compare
    from .kursawe import KursaweOracle, prescribed_conditions

    cfg = _load(args)
    if cfg.problem != "kursawe":
        raise ConfigError("problem: the experiment runs on kursawe only")
    opts = cfg.experiment
    n_conditions = args.n_conditions or opts.n_conditions
    repetitions = args.repetitions or opts.repetitions
    problem = build_problem(cfg)
    conditions = prescribed_conditions(n_conditions)
    oracle = KursaweOracle(opts.oracle_samples, cfg.training.seed, opts.oracle_refine_rounds)
    targets = [opts.hv_target_fraction * oracle.hypervolume(t, cfg.training.hv_reference)
               for t in conditions]
    report = compare(problem, cfg.training, conditions[:, None], targets, repetitions,
                     opts.sc_budget, opts.mc_budget)
    out = Path(cfg.output_dir)
    report.write(out)
    summary = report.summary()
    for case in ("sc", "mc"):
        s = summary[case]
        flag = "" if s["all_reached"] else "  (censored runs present)"
        print(f"{case.upper()}: mean {s['mean']:.1f}  min {s['min']}  max {s['max']}{flag}")
    return EXIT_OK


def cmd_airfoil_geom(args) -> int:
    from .airfoil.geometry import KTParams, kt_transform, trailing_edge_angle, write_coordinates

    params = KTParams(args.mu_x, args.mu_y, args.beta, args.alpha).validate()
    geometry = kt_transform(params, args.n_points)
    path = write_coordinates(geometry, args.out, name=args.name)
    print(f"{geometry.n_points} points, trailing-edge angle "
          f"{trailing_edge_angle(geometry):.4f} deg -> {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mcmo", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def run_flags(p):
        p.add_argument("-c", "--config", help="JSON or YAML config, or a run manifest")
        p.add_argument("-o", "--output", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--episodes", type=int)
        p.add_argument("--cells", type=int, help="analysis cell count N")
        p.add_argument("--reference", type=float, nargs=2, metavar=("R1", "R2"))

    p = sub.add_parser("optimize", help="train and write a run directory")
    run_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("analyze", help="re-extract fronts and HV from a run directory")
    p.add_argument("run_dir")
    p.add_argument("--cells", type=int)
    p.add_argument("--reference", type=float, nargs=2, metavar=("R1", "R2"))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("experiment", help="compare SC and MC evaluation counts on Kursawe")
    run_flags(p)
    p.add_argument("--n-conditions", type=int)
    p.add_argument("--repetitions", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("airfoil-geom", help="write Karman-Trefftz airfoil coordinates")
    p.add_argument("--mu-x", type=float, required=True)
    p.add_argument("--mu-y", type=float, required=True)
    p.add_argument("--beta", type=float, required=True, help="trailing-edge angle, degrees")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--n-points", type=int, default=200)
    p.add_argument("--name")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_airfoil_geom)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, io.RecordsParseError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # runtime failures: solver, numerics, I/O
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
