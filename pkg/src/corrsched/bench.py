"""Desk-scale reproductions of the reference experiment shapes.

Four experiments, each emitting CSV rows for plotting: anytime incumbent
traces, bound tightness (P_c and F at the exact optimum) over N x L,
average collision probability versus channel count, and versus the
activation decay length.  Grids are desk-scale by design -- the point is
trend reproduction with an exact solver in the loop, not magnitude parity
with large solver runs.

Per-trial randomness derives from ``seed + trial``; identical specs and
seeds reproduce byte-identical CSV except for elapsed-time columns.
"""

from __future__ import annotations

import json
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from corrsched.descent import coordinate_descent
from corrsched.heuristics import kmedoids, kmedoids_pp
from corrsched.model import Assignment, JointActivationMatrix, ValidationError
from corrsched.objective import assignment_collision_report
from corrsched.sim import ActivationModel, SimulationSpec, generate_layout, estimate_joint_activation
from corrsched.solver import SolverOptions, solve_exact

METHODS = ("exact", "kmedoids", "kmedoids-pp", "descent-polished")
SWEEPS = ("N", "L", "lambda")


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a sweep variable, its values, and fixed parameters."""

    sweep_variable: str
    sweep_values: tuple
    n_devices: int = 12
    n_channels: int = 3
    density: float = 0.2
    decay_length: float = 3.0
    steps: int = 100_000
    seed: int = 1
    gap_tolerance: float = 0.0
    methods: tuple = ("exact", "kmedoids-pp")
    trials: int = 1
    channel_grid: tuple | None = None  # bound-tightness experiment only
    time_limit: float | None = None

    def __post_init__(self):
        if self.sweep_variable not in SWEEPS:
            raise ValidationError(f"sweep_variable must be one of {SWEEPS}")
        if not self.sweep_values:
            raise ValidationError("sweep_values must be non-empty")
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.channel_grid is not None:
            object.__setattr__(self, "channel_grid", tuple(self.channel_grid))
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        for m in self.methods:
            if m not in METHODS:
                raise ValidationError(f"unknown method {m!r}; use a subset of {METHODS}")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        doc = json.loads(text)
        if "lambda" in doc and "decay_length" not in doc:
            doc["decay_length"] = doc.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown spec fields: {sorted(unknown)}")
        return cls(**doc)

    def to_json(self) -> str:
        doc = {f.name: getattr(self, f.name) for f in fields(self)}
        for key in ("sweep_values", "methods", "channel_grid"):
            if doc[key] is not None:
                doc[key] = list(doc[key])
        return json.dumps(doc, indent=2) + "\n"


def _fmt_cell(v) -> str:
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def rows_to_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _warn_if_trivial(n: int, l: int) -> None:
    if l >= n:
        warnings.warn(
            f"L={l} >= N={n}: every device fits alone on a channel and the "
            "optimal collision probability is trivially 0",
            stacklevel=3,
        )


def _instance(spec: ExperimentSpec, n: int, decay: float, seed: int) -> JointActivationMatrix:
    layout = generate_layout(n, spec.density, seed)
    return estimate_joint_activation(
        layout, ActivationModel(decay), SimulationSpec(spec.steps, seed)
    )


def _method_assignment(
    method: str, a: JointActivationMatrix, l: int, spec: ExperimentSpec, seed: int
) -> Assignment:
    if method == "exact":
        opts = SolverOptions(gap_tolerance=spec.gap_tolerance, time_limit=spec.time_limit)
        return solve_exact(a, l, opts).assignment
    if method == "kmedoids":
        return kmedoids(a, l, seed=seed)[0]
    if method == "kmedoids-pp":
        return kmedoids_pp(a, l, seed=seed)[0]
    if method == "descent-polished":
        start, _ = kmedoids_pp(a, l, seed=seed)
        return coordinate_descent(a, start, l=l)
    raise ValidationError(f"unknown method {method!r}")


def _map(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_anytime(spec: ExperimentSpec, threads: int = 1):
    """Best-known objective over time at the fixed (N, L) point.

    The exact solver contributes its full incumbent trail (strictly
    decreasing objectives); each heuristic contributes the single
    (elapsed, F) point of its completion.
    """
    n, l = spec.n_devices, spec.n_channels
    _warn_if_trivial(n, l)
    a = _instance(spec, n, spec.decay_length, spec.seed)
    header = ["method", "elapsed_s", "objective"]
    rows = []
    for method in spec.methods:
        if method == "exact":
            opts = SolverOptions(gap_tolerance=spec.gap_tolerance, time_limit=spec.time_limit)
            result = solve_exact(a, l, opts)
            rows += [("exact", elapsed, obj) for elapsed, obj in result.incumbent_log]
        else:
            t0 = time.perf_counter()
            assignment = _method_assignment(method, a, l, spec, spec.seed)
            elapsed = time.perf_counter() - t0
            report = assignment_collision_report(a, assignment, l)
            rows.append((method, elapsed, report.pairwise_bound))
    return header, rows


def run_bound_tightness(spec: ExperimentSpec, threads: int = 1):
    """P_c and F evaluated at the exact optimum over an N x L grid."""
    if spec.sweep_variable != "N":
        raise ValidationError("bound tightness sweeps N; set sweep_variable='N'")
    l_values = spec.channel_grid or (spec.n_channels,)

    def point(nl):
        n, l = nl
        a = _instance(spec, n, spec.decay_length, spec.seed)
        res = solve_exact(a, l, SolverOptions(gap_tolerance=spec.gap_tolerance))
        rep = assignment_collision_report(a, res.assignment, l)
        return (n, l, rep.network_average, rep.pairwise_bound)

    grid = [(int(n), int(l)) for n in spec.sweep_values for l in l_values]
    for n, l in grid:
        _warn_if_trivial(n, l)
    rows = _map(point, grid, threads)
    return ["N", "L", "P_c", "F"], rows


def run_pc_vs_L(spec: ExperimentSpec, threads: int = 1):
    """Average collision probability per method as the channel count grows."""
    if spec.sweep_variable != "L":
        raise ValidationError("this experiment sweeps L; set sweep_variable='L'")
    n = spec.n_devices
    trial_seeds = [spec.seed + t for t in range(spec.trials)]
    instances = _map(
        lambda s: _instance(spec, n, spec.decay_length, s), trial_seeds, threads
    )

    def point(args):
        l, method = args
        values = [
            assignment_collision_report(
                a, _method_assignment(method, a, l, spec, s), l
            ).network_average
            for a, s in zip(instances, trial_seeds)
        ]
        return (l, method, float(np.mean(values)))

    grid = [(int(l), m) for l in spec.sweep_values for m in spec.methods]
    for l, _ in grid:
        _warn_if_trivial(n, l)
    rows = _map(point, grid, threads)
    return ["L", "method", "P_c"], rows


def run_pc_vs_lambda(spec: ExperimentSpec, threads: int = 1):
    """Average collision probability per method as activation decay grows.

    The device layout is fixed (drawn once from the spec seed); the joint
    activation matrix is re-estimated per decay value and trial.
    """
    if spec.sweep_variable != "lambda":
        raise ValidationError("this experiment sweeps lambda; set sweep_variable='lambda'")
    n, l = spec.n_devices, spec.n_channels
    _warn_if_trivial(n, l)
    layout = generate_layout(n, spec.density, spec.seed)
    trial_seeds = [spec.seed + t for t in range(spec.trials)]

    def matrices(decay):
        return [
            estimate_joint_activation(
                layout, ActivationModel(decay), SimulationSpec(spec.steps, s)
            )
            for s in trial_seeds
        ]

    per_decay = _map(matrices, [float(v) for v in spec.sweep_values], threads)

    rows = []
    for decay, mats in zip(spec.sweep_values, per_decay):
        for method in spec.methods:
            values = [
                assignment_collision_report(
                    a, _method_assignment(method, a, l, spec, s), l
                ).network_average
                for a, s in zip(mats, trial_seeds)
            ]
            rows.append((float(decay), method, float(np.mean(values))))
    return ["lambda", "method", "P_c"], rows


EXPERIMENTS = {
    "anytime": run_anytime,
    "bound": run_bound_tightness,
    "vs-L": run_pc_vs_L,
    "vs-lambda": run_pc_vs_lambda,
}


def run_experiment(name: str, spec: ExperimentSpec, out_dir, threads: int = 1) -> Path:
    """Run one experiment and write <out_dir>/<name>.csv; returns the path."""
    if name not in EXPERIMENTS:
        raise ValidationError(f"unknown experiment {name!r}; use one of {sorted(EXPERIMENTS)}")
    header, rows = EXPERIMENTS[name](spec, threads=threads)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.csv"
    path.write_text(rows_to_csv(header, rows))
    return path
