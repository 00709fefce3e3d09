"""Command-line entry point.

One binary, subcommand style: sim / eval / descend / export / solve /
cluster / bench.  Every subcommand prints exactly one machine-readable
report (JSON by default, ``--format csv`` for a flat table) to stdout;
diagnostics go to stderr.  Exit codes: 0 success, 1 validation/usage
error, 2 resource-limit termination with the partial result written.

CORRSCHED_SEED is the seed fallback when --seed is not given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from corrsched import bench as bench_mod
from corrsched import model
from corrsched.descent import coordinate_descent, round_to_hard
from corrsched.heuristics import DISSIMILARITIES, best_of_restarts
from corrsched.linearize import build_pilp, export_lp
from corrsched.model import ParseError, ShapeError, ValidationError
from corrsched.objective import network_collision_probability, pairwise_bound
from corrsched.sim import (
    ActivationModel,
    SimulationSpec,
    estimate_joint_activation,
    generate_layout,
    save_layout,
)
from corrsched.solver import SolverError, SolverOptions, brute_force, solve_exact

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RESOURCE_LIMIT = 2


class _Parser(argparse.ArgumentParser):
    """argparse that follows the exit-code contract (usage errors -> 1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def _log(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _resolve_seed(value) -> int:
    if value is not None:
        return value
    return int(os.environ.get("CORRSCHED_SEED", "0"))


def _emit(args, report: dict) -> None:
    if args.format == "csv":
        keys = list(report)

        def cell(v):
            if isinstance(v, (list, tuple)):
                return ";".join(str(x) for x in v)
            return str(v)

        sys.stdout.write(",".join(keys) + "\n")
        sys.stdout.write(",".join(cell(report[k]) for k in keys) + "\n")
    else:
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")


def _load_matrix_checked(path) -> model.JointActivationMatrix:
    a = model.load_matrix(path)
    violations = model.validate_matrix(a)
    fatal = [v for v in violations if v.rule in ("symmetry", "range")]
    if fatal:
        raise ValidationError(f"{path}: {fatal[0]}")
    if violations:  # consistency issues are advisory
        print(
            f"warning: {path}: {len(violations)} consistency violation(s) "
            f"(e.g. {violations[0]}); diagonal marginals may be unset",
            file=sys.stderr,
        )
    return a


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sim(args) -> int:
    seed = _resolve_seed(args.seed)
    layout = generate_layout(args.devices, args.density, seed)
    t0 = time.perf_counter()
    a = estimate_joint_activation(
        layout, ActivationModel(args.decay_length), SimulationSpec(args.steps, seed)
    )
    _log(args, f"simulated {args.steps} alarm rounds in {time.perf_counter() - t0:.2f} s")
    if args.out_matrix:
        model.save_matrix(a, args.out_matrix)
    if args.out_layout:
        save_layout(layout, args.out_layout)
    _emit(
        args,
        {
            "devices": args.devices,
            "density": args.density,
            "lambda": args.decay_length,
            "steps": args.steps,
            "seed": seed,
            "region_radius": layout.region_radius,
            "out_matrix": str(args.out_matrix) if args.out_matrix else None,
            "out_layout": str(args.out_layout) if args.out_layout else None,
        },
    )
    return EXIT_OK


def _schedule_from_args(args, a) -> model.ScheduleMatrix:
    if args.schedule:
        e = model.load_schedule(args.schedule)
    else:
        assignment = model.load_assignment(args.assignment)
        l = args.channels or (int(assignment.channel_of.max()) + 1)
        e = model.assignment_to_schedule(assignment, l)
    if e.rows != a.dim:
        raise ValidationError(f"schedule has {e.rows} rows but the matrix is {a.dim}x{a.dim}")
    violations = model.validate_schedule(e)
    if violations:
        raise ValidationError(str(violations[0]))
    return e


def _cmd_eval(args) -> int:
    a = _load_matrix_checked(args.matrix)
    e = _schedule_from_args(args, a)
    report = network_collision_probability(a, e)
    if args.append_csv:
        path = Path(args.append_csv)
        line = "%.17g,%.17g,%s\n" % (
            report.network_average,
            report.pairwise_bound,
            ";".join("%.17g" % p for p in report.per_channel),
        )
        if not path.exists():
            path.write_text("network_average,pairwise_bound,per_channel\n" + line)
        else:
            with path.open("a") as fh:
                fh.write(line)
    _emit(args, report.to_dict())
    return EXIT_OK


def _cmd_descend(args) -> int:
    a = _load_matrix_checked(args.matrix)
    e = _schedule_from_args(args, a)
    before = pairwise_bound(a, e)
    hard = round_to_hard(a, e)
    result = coordinate_descent(a, hard, max_sweeps=args.max_sweeps, l=e.cols)
    after = pairwise_bound(a, model.assignment_to_schedule(result, e.cols))
    if args.out:
        model.save_assignment(result, args.out)
    _emit(
        args,
        {
            "objective_start": before,
            "objective": after,
            "channels": e.cols,
            "assignment": [int(c) for c in result.channel_of],
            "out": str(args.out) if args.out else None,
        },
    )
    return EXIT_OK


def _cmd_export(args) -> int:
    a = _load_matrix_checked(args.matrix)
    m = build_pilp(a, args.channels, reduced=args.reduced)
    Path(args.out).write_text(export_lp(m))
    _emit(
        args,
        {
            "variables": len(m.variables),
            "constraints": len(m.constraints),
            "reduced": bool(args.reduced),
            "out": str(args.out),
        },
    )
    return EXIT_OK


def _cmd_solve(args) -> int:
    a = _load_matrix_checked(args.matrix)
    if args.brute_force:
        result = brute_force(a, args.channels)
    else:
        warm = model.load_assignment(args.warm_start) if args.warm_start else None
        opts = SolverOptions(
            gap_tolerance=args.gap,
            time_limit=args.time_limit,
            node_limit=args.node_limit,
            initial_incumbent=warm,
        )
        result = solve_exact(a, args.channels, opts)
    if args.log_incumbents:
        lines = ["elapsed_s,objective"]
        lines += ["%.6f,%.17g" % (t, obj) for t, obj in result.incumbent_log]
        Path(args.log_incumbents).write_text("\n".join(lines) + "\n")
    if args.out:
        model.save_assignment(result.assignment, args.out)
    _emit(
        args,
        {
            "objective": result.objective,
            "lower_bound": result.lower_bound,
            "gap": result.gap,
            "nodes_explored": result.nodes_explored,
            "status": result.status,
            "assignment": [int(c) for c in result.assignment.channel_of],
        },
    )
    if result.status != "optimal":
        _log(args, f"stopped at {result.status}; best incumbent reported")
        return EXIT_RESOURCE_LIMIT
    return EXIT_OK


def _cmd_cluster(args) -> int:
    a = _load_matrix_checked(args.matrix)
    seed = _resolve_seed(args.seed)
    assignment, state = best_of_restarts(
        a,
        args.channels,
        seed=seed,
        restarts=args.restarts,
        method=args.method,
        dissimilarity=args.dissimilarity,
    )
    objective = pairwise_bound(a, model.assignment_to_schedule(assignment, args.channels))
    if args.out:
        model.save_assignment(assignment, args.out)
    _emit(
        args,
        {
            "method": args.method,
            "seed": seed,
            "restarts": args.restarts,
            "medoids": list(state.medoids),
            "cost": state.cost,
            "objective": objective,
            "assignment": [int(c) for c in assignment.channel_of],
            "out": str(args.out) if args.out else None,
        },
    )
    return EXIT_OK


def _cmd_bench(args) -> int:
    spec = bench_mod.ExperimentSpec.from_json(Path(args.spec).read_text())
    t0 = time.perf_counter()
    path = bench_mod.run_experiment(args.experiment, spec, args.out, threads=args.threads)
    _log(args, f"experiment {args.experiment} finished in {time.perf_counter() - t0:.2f} s")
    n_rows = len(path.read_text().splitlines()) - 1
    _emit(args, {"experiment": args.experiment, "rows": n_rows, "csv": str(path)})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> _Parser:
    parser = _Parser(
        prog="corrsched",
        description="Channel scheduling for IoT networks with spatially correlated activation",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress stderr diagnostics")
    parser.add_argument(
        "--format", choices=("json", "csv"), default="json", help="stdout report format"
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker threads where the module contract permits (bench grids)",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("sim", help="simulate alarms and estimate the joint activation matrix")
    p.add_argument("--devices", type=int, required=True)
    p.add_argument("--density", type=float, default=0.2, help="devices per m^2")
    p.add_argument("--lambda", dest="decay_length", type=float, default=3.0,
                   help="activation decay length in meters")
    p.add_argument("--steps", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-matrix", default=None)
    p.add_argument("--out-layout", default=None)
    p.set_defaults(func=_cmd_sim)

    p = sub.add_parser("eval", help="evaluate the collision model for a schedule")
    p.add_argument("--matrix", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--schedule")
    g.add_argument("--assignment")
    p.add_argument("--channels", type=int, default=None)
    p.add_argument("--append-csv", default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("descend", help="round to hard and locally improve a schedule")
    p.add_argument("--matrix", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--schedule")
    g.add_argument("--assignment")
    p.add_argument("--channels", type=int, default=None)
    p.add_argument("--max-sweeps", type=int, default=100)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_descend)

    p = sub.add_parser("export", help="export the gate-linearized integer program")
    p.add_argument("--matrix", required=True)
    p.add_argument("--channels", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--reduced", action="store_true", help="2-row gate variant without y")
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("solve", help="exact branch-and-bound (or brute force) minimization")
    p.add_argument("--matrix", required=True)
    p.add_argument("--channels", type=int, required=True)
    p.add_argument("--gap", type=float, default=0.01)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--brute-force", action="store_true")
    p.add_argument("--warm-start", default=None, help="assignment CSV used as incumbent")
    p.add_argument("--log-incumbents", default=None, help="write elapsed_s,objective CSV")
    p.add_argument("--out", default=None, help="write the assignment CSV")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("cluster", help="K-Medoids baselines")
    p.add_argument("--matrix", required=True)
    p.add_argument("--channels", type=int, required=True)
    p.add_argument("--method", choices=("kmedoids", "kmedoids-pp"), default="kmedoids-pp")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--dissimilarity", choices=DISSIMILARITIES, default="A")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("bench", help="desk-scale experiment reproductions")
    p.add_argument("--experiment", choices=sorted(bench_mod.EXPERIMENTS), required=True)
    p.add_argument("--spec", required=True, help="ExperimentSpec JSON file")
    p.add_argument("--out", required=True, help="output directory for CSV")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) is None:
        parser.print_usage(sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except (ValidationError, ParseError, ShapeError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
