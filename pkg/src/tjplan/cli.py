"""Command-line interface: generate, train, plan, bench, inspect."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from tjplan.bench import BenchProblem, bench_compare, trajectory_csv, trajectory_svg
from tjplan.config import load_config
from tjplan.data import (
    generate_dataset,
    load_dataset,
    record_to_samples,
    sample_path,
)
from tjplan.model import (
    ModelConfig,
    TrainSettings,
    history_csv,
    init_params,
    load_model,
    save_model,
    train,
)
from tjplan.plan import (
    PlanRequest,
    cold_start,
    plan,
    warm_start_from_model,
)
from tjplan.spline.serialize import dumps, trajectory_to_dict
from tjplan.spline.types import WaypointPath


def _parse_lengths(text: str) -> list:
    return [int(v) for v in text.split(",") if v]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tjplan",
        description="Two-stage time-jerk optimal trajectory planning.",
        epilog="Config file path defaults to $TJPLAN_CONFIG. "
               "CSV schema version 1: see the bench subcommand help.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a solved-trajectory dataset")
    gen.add_argument("--n", type=int, default=2000, help="samples to attempt")
    gen.add_argument("--lengths", default="6:48",
                     help="inclusive waypoint-count range LO:HI")
    gen.add_argument("--lambda", dest="lam", type=float, default=None)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--jobs", type=int, default=1)
    gen.add_argument("--config", default=None)
    gen.add_argument("--out", required=True, help="dataset path stem")

    tr = sub.add_parser("train", help="train the warm-start model on a dataset")
    tr.add_argument("--dataset", required=True)
    tr.add_argument("--out", required=True, help="model file path")
    tr.add_argument("--dim", type=int, default=32)
    tr.add_argument("--heads", type=int, default=8)
    tr.add_argument("--layers", type=int, default=6,
                    help="encoder layers in each stack")
    tr.add_argument("--dropout", type=float, default=0.1)
    tr.add_argument("--max-waypoints", type=int, default=None)
    tr.add_argument("--epochs", type=int, default=50)
    tr.add_argument("--batch-size", type=int, default=32)
    tr.add_argument("--learning-rate", type=float, default=1e-3)
    tr.add_argument("--weight-decay", type=float, default=1e-4)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--history", default=None, help="training-curve CSV path")

    pl = sub.add_parser("plan", help="plan one trajectory")
    pl.add_argument("--waypoints-file", required=True,
                    help="JSON file with an IxK waypoint matrix")
    pl.add_argument("--lambda", dest="lam", type=float, default=None)
    pl.add_argument("--model", default=None, help="model file for a warm start")
    pl.add_argument("--cold", action="store_true",
                    help="use the heuristic cold start")
    pl.add_argument("--config", default=None)
    pl.add_argument("--out", default=None, help="result JSON path (default stdout)")

    be = sub.add_parser(
        "bench",
        help="paired cold vs warm benchmark",
        epilog="Writes <out>.csv (rows: " \
               "problem,length,method,pair_hash,converged,feasible,iterations,"
               "objective,jerk,duration), <out>_aggregates.csv, and "
               "<out>_timings.csv (wall times, non-deterministic).",
    )
    be.add_argument("--model", default=None)
    be.add_argument("--lengths", default="6,12,24,48")
    be.add_argument("--n", type=int, default=5, help="problems per length")
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--jobs", type=int, default=1)
    be.add_argument("--methods", default="cold-sqp,warm-sqp")
    be.add_argument("--config", default=None)
    be.add_argument("--out", required=True, help="report path prefix")

    ins = sub.add_parser("inspect", help="render a dataset trajectory")
    ins.add_argument("--dataset", required=True)
    ins.add_argument("--index", type=int, required=True)
    ins.add_argument("--out", required=True, help="output path prefix")
    return parser


def _cmd_generate(args) -> int:
    cfg = load_config(args.config)
    lo, hi = (int(v) for v in args.lengths.split(":"))
    lam = cfg.lam if args.lam is None else args.lam
    manifest = generate_dataset(
        args.n, (lo, hi), cfg.limits, lam, args.seed, args.out, jobs=args.jobs,
    )
    print(dumps({
        "total": manifest.total,
        "attempted": manifest.attempted,
        "splits": manifest.split_counts,
    }))
    return 0


def _cmd_train(args) -> int:
    records, manifest = load_dataset(args.dataset, validate=False)
    joints = records[0].joint_count
    max_waypoints = args.max_waypoints or max(r.waypoint_count for r in records)
    config = ModelConfig(
        joints=joints, max_waypoints=max_waypoints, dim=args.dim,
        heads=args.heads, context_layers=args.layers,
        source_layers=args.layers, dropout=args.dropout,
    )
    train_samples = [
        s for r in records if r.split == "train"
        for s in record_to_samples(r, config)
    ]
    val_samples = [
        s for r in records if r.split == "validation"
        for s in record_to_samples(r, config)
    ]
    settings = TrainSettings(
        learning_rate=args.learning_rate, weight_decay=args.weight_decay,
        batch_size=args.batch_size, epochs=args.epochs,
    )
    params, history = train(
        train_samples, val_samples, config, settings,
        np.random.default_rng(args.seed),
    )
    save_model(params, config, args.out)
    if args.history:
        Path(args.history).write_text(history_csv(history))
    print(dumps({
        "epochs": len(history),
        "best_validation_loss": min(h["validation_loss"] for h in history),
        "model": str(args.out),
    }))
    return 0


def _cmd_plan(args) -> int:
    cfg = load_config(args.config)
    waypoints = np.asarray(json.loads(Path(args.waypoints_file).read_text()))
    path = WaypointPath(waypoints)
    lam = cfg.lam if args.lam is None else args.lam
    request = PlanRequest(
        path, cfg.limits, lam,
        collocation_density=cfg.collocation_density, margin=cfg.margin,
    )
    if args.model and not args.cold:
        params, model_config = load_model(args.model)
        init = warm_start_from_model(params, model_config, path, cfg.limits)
        method = "warm-sqp"
    else:
        init = cold_start(path, cfg.limits)
        method = "cold-sqp"
    result = plan(request, init, cfg.solver)
    payload = {
        "status": result.solver.status.value,
        "converged": result.converged,
        "method": method,
        "iterations": sum(a.solver.iterations for a in result.attempts),
        "objective": result.objective,
        "jerk": result.jerk,
        "duration": result.duration,
        "feasibility": {
            "min_kinematic_slack": result.feasibility.min_kinematic_slack,
            "max_boundary_residual": result.feasibility.max_boundary_residual,
            "max_interpolation_residual":
                result.feasibility.max_interpolation_residual,
        },
        "trajectory": trajectory_to_dict(result.trajectory),
    }
    text = dumps(payload) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_bench(args) -> int:
    cfg = load_config(args.config)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    params = config = None
    if args.model:
        params, config = load_model(args.model)
    lengths = _parse_lengths(args.lengths)
    problems = []
    for i, length in enumerate(
        length for length in lengths for _ in range(args.n)
    ):
        rng = np.random.default_rng([args.seed, i])
        problems.append(
            BenchProblem(sample_path(length, cfg.limits, rng), cfg.limits, cfg.lam)
        )
    report = bench_compare(
        problems, params, config, cfg.solver, jobs=args.jobs, methods=methods
    )
    out = Path(args.out)
    out.with_suffix(".csv").write_text(report.rows_csv())
    Path(str(out) + "_aggregates.csv").write_text(report.aggregates_csv())
    Path(str(out) + "_timings.csv").write_text(report.timings_csv())
    print(dumps(report.summary()))
    return 0


def _cmd_inspect(args) -> int:
    records, _ = load_dataset(args.dataset, validate=False)
    if not 0 <= args.index < len(records):
        raise IndexError(
            f"record index {args.index} out of range 0..{len(records) - 1}"
        )
    traj = records[args.index].trajectory()
    out = Path(args.out)
    out.with_suffix(".svg").write_text(trajectory_svg(traj))
    out.with_suffix(".csv").write_text(trajectory_csv(traj))
    print(dumps({"svg": str(out.with_suffix('.svg')),
                 "csv": str(out.with_suffix('.csv'))}))
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "train": _cmd_train,
    "plan": _cmd_plan,
    "bench": _cmd_bench,
    "inspect": _cmd_inspect,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
