"""Acceptance suite: one test per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -rA`` to get one line per
criterion (the -v test line and a printed PASS summary with timings).
Criteria 1-6 are oracle/property checks; criterion 7 runs the shipped
desk-scale benchmark grids; criterion 8 checks end-to-end determinism.
"""

import itertools
import time

import numpy as np
import pytest

from conftest import DATA, random_activation_matrix, random_soft_schedule

from corrsched.bench import ExperimentSpec, run_experiment
from corrsched.descent import round_to_hard
from corrsched.linearize import (
    assignment_to_point,
    build_pilp,
    evaluate_pilp_point,
    verify_gate,
)
from corrsched.model import (
    Assignment,
    assignment_to_schedule,
    load_matrix,
    matrix_to_json,
)
from corrsched.objective import (
    network_collision_probability,
    pairwise_bound,
    trace_objective,
)
from corrsched.sim import (
    ActivationModel,
    SimulationSpec,
    estimate_joint_activation,
    generate_layout,
    load_layout,
    quadrature_joint_activation,
)
from corrsched.solver import SolverOptions, brute_force, solve_exact


def _report(criterion: str, elapsed: float, budget: float, detail: str = ""):
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {criterion}: PASS in {elapsed:.1f}s (budget {budget:.0f}s){suffix}")
    assert elapsed <= budget


def hard_f(a, assignment, l):
    return pairwise_bound(a, assignment_to_schedule(assignment, l))


def test_criterion_1_exact_solver_matches_brute_force_on_500_instances():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20251)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 11))
        l = int(rng.integers(2, 5))
        a = random_activation_matrix(rng, n)
        bf = brute_force(a, l)
        ex = solve_exact(a, l, SolverOptions(gap_tolerance=0.0))
        assert ex.status == "optimal"
        if bf.objective != ex.objective:
            rel = abs(bf.objective - ex.objective) / max(abs(bf.objective), 1e-300)
            worst = max(worst, rel)
            assert rel <= 1e-12
    _report("1 exact-solver correctness", time.perf_counter() - t0, 60.0,
            f"max rel deviation {worst:.1e}")


def test_criterion_2_pairwise_bound_dominates_and_tightens_with_channels(tmp_path):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20252)
    for _ in range(1000):
        n = int(rng.integers(2, 11))
        l = int(rng.integers(1, 5))
        a = random_activation_matrix(rng, n)
        e = random_soft_schedule(rng, n, l)
        rep = network_collision_probability(a, e)
        assert rep.pairwise_bound - rep.network_average >= -1e-12
    spec = ExperimentSpec.from_json((DATA / "spec_bound.json").read_text())
    path = run_experiment("bound", spec, tmp_path)
    rows = [line.split(",") for line in path.read_text().splitlines()[1:]]
    by_n = {}
    for n_str, l_str, pc_str, f_str in rows:
        pc, f = float(pc_str), float(f_str)
        assert f >= pc - 1e-12
        by_n.setdefault(int(n_str), []).append((int(l_str), (f - pc) / f if f > 0 else 0.0))
    for n, gaps in by_n.items():
        gaps.sort()
        assert all(b <= a + 1e-12 for (_, a), (_, b) in zip(gaps, gaps[1:])), f"N={n}"
    _report("2 pairwise bound (Lemma 1)", time.perf_counter() - t0, 30.0)


def test_criterion_3_rounding_never_increases_objective_and_is_idempotent():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20253)
    for _ in range(1000):
        n = int(rng.integers(2, 11))
        l = int(rng.integers(1, 5))
        a = random_activation_matrix(rng, n)
        e = random_soft_schedule(rng, n, l)
        hard = round_to_hard(a, e)
        assert hard_f(a, hard, l) <= pairwise_bound(a, e) + 1e-12
        again = round_to_hard(a, assignment_to_schedule(hard, l))
        assert np.array_equal(hard.channel_of, again.channel_of)
    _report("3 rounding witness (Lemma 2)", time.perf_counter() - t0, 30.0)


def test_criterion_4_pilp_reformulation_is_exact():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20254)
    for e1, e2 in itertools.product((0, 1), repeat=2):
        assert verify_gate(e1, e2) == max(e1 + e2 - 1, 0)
    for n in range(2, 7):
        for l in range(1, 4):
            a = random_activation_matrix(rng, n)
            m = build_pilp(a, l)
            assert len(m.variables) == l * n * n
            for channels in itertools.product(range(l), repeat=n):
                x = Assignment(np.array(channels))
                feasible, obj = evaluate_pilp_point(m, assignment_to_point(x, l))
                assert feasible
                f = hard_f(a, x, l)
                assert abs(obj - f) <= 1e-12 * max(1.0, abs(f))
    _report("4 PILP fidelity", time.perf_counter() - t0, 20.0)


def test_criterion_5_trace_form_equals_pair_expansion():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20255)
    for _ in range(100):
        n = int(rng.integers(2, 13))
        l = int(rng.integers(1, 6))
        a = random_activation_matrix(rng, n)
        e = random_soft_schedule(rng, n, l)
        f1 = pairwise_bound(a, e)
        f2 = trace_objective(a, e)
        assert abs(f1 - f2) <= 1e-12 * max(abs(f1), 1e-300)
    _report("5 objective identity", time.perf_counter() - t0, 10.0)


def test_criterion_6_simulation_calibration_against_quadrature():
    t0 = time.perf_counter()
    layout = load_layout(DATA / "layout3.csv")
    model = ActivationModel(3.0)
    steps = 10**6
    a = estimate_joint_activation(layout, model, SimulationSpec(steps, seed=42))
    q = quadrature_joint_activation(layout, model, 512)
    se = np.sqrt(q.entries * (1 - q.entries) / steps)
    deviations = np.abs(a.entries - q.entries) / se
    assert deviations.max() <= 3.0
    prev = None
    for lam in (1.0, 2.0, 3.0, 4.0, 5.0, 6.0):
        off = quadrature_joint_activation(layout, ActivationModel(lam), 256).entries
        off = off[~np.eye(3, dtype=bool)]
        if prev is not None:
            assert (off >= prev - 1e-15).all()
        prev = off
    _report("6 simulation calibration", time.perf_counter() - t0, 120.0,
            f"max deviation {deviations.max():.2f} sigma")


def test_criterion_7_desk_scale_trend_reproduction(tmp_path):
    t0 = time.perf_counter()

    # (a) optimal-F rescaling bound on the shipped fixtures
    for name in ("fixture_n8.json", "fixture_n10.json", "fixture_n12.json"):
        a = load_matrix(DATA / name)
        prev = None
        for l in (2, 3, 4, 5):
            f_star = solve_exact(a, l, SolverOptions(gap_tolerance=0.0)).objective
            if prev is not None:
                assert f_star <= prev * (l - 1) / l + 1e-12, name
            prev = f_star

    # shipped grids: vs-L, vs-lambda, anytime
    spec_l = ExperimentSpec.from_json((DATA / "spec_vs_l.json").read_text())
    rows_l = [
        line.split(",")
        for line in run_experiment("vs-L", spec_l, tmp_path).read_text().splitlines()[1:]
    ]
    exact = {int(l): float(pc) for l, m, pc in rows_l if m == "exact"}
    heur = {int(l): float(pc) for l, m, pc in rows_l if m == "kmedoids-pp"}
    lvals = sorted(exact)
    # (a) exact P_c non-increasing in L
    assert all(exact[b] <= exact[a] + 1e-15 for a, b in zip(lvals, lvals[1:]))
    # (c) exact never worse than the heuristic, pointwise
    assert all(exact[l] <= heur[l] + 1e-15 for l in lvals)

    spec_lam = ExperimentSpec.from_json((DATA / "spec_vs_lambda.json").read_text())
    rows_lam = [
        line.split(",")
        for line in run_experiment("vs-lambda", spec_lam, tmp_path).read_text().splitlines()[1:]
    ]
    ex_lam = {float(v): float(pc) for v, m, pc in rows_lam if m == "exact"}
    he_lam = {float(v): float(pc) for v, m, pc in rows_lam if m == "kmedoids-pp"}
    lams = sorted(ex_lam)
    # (b) P_c non-decreasing in the decay length for both methods
    assert all(ex_lam[b] >= ex_lam[a] - 1e-15 for a, b in zip(lams, lams[1:]))
    assert all(he_lam[b] >= he_lam[a] - 1e-15 for a, b in zip(lams, lams[1:]))
    # (c) again, pointwise
    assert all(ex_lam[v] <= he_lam[v] + 1e-15 for v in lams)

    spec_any = ExperimentSpec.from_json((DATA / "spec_anytime.json").read_text())
    t_any = time.perf_counter()
    path = run_experiment("anytime", spec_any, tmp_path)
    assert time.perf_counter() - t_any <= spec_any.time_limit
    trail = [
        float(line.split(",")[2])
        for line in path.read_text().splitlines()[1:]
        if line.startswith("exact,")
    ]
    assert trail and all(b < a for a, b in zip(trail, trail[1:]))

    _report("7 trend reproduction", time.perf_counter() - t0, 600.0)


def test_criterion_8_determinism_end_to_end(tmp_path):
    t0 = time.perf_counter()

    # byte-identical matrices
    def simulate():
        layout = generate_layout(6, 0.2, seed=77)
        a = estimate_joint_activation(layout, ActivationModel(3.0), SimulationSpec(50_000, 77))
        return matrix_to_json(a)

    assert simulate() == simulate()

    # identical assignments and objectives
    a12 = load_matrix(DATA / "fixture_n12.json")
    r1 = solve_exact(a12, 3, SolverOptions(gap_tolerance=0.0))
    r2 = solve_exact(a12, 3, SolverOptions(gap_tolerance=0.0))
    assert np.array_equal(r1.assignment.channel_of, r2.assignment.channel_of)
    assert r1.objective == r2.objective and r1.nodes_explored == r2.nodes_explored

    # byte-identical bench CSV (no elapsed column in vs-L output)
    spec = ExperimentSpec(
        sweep_variable="L", sweep_values=(3, 4), n_devices=8, steps=20_000, seed=5, trials=2
    )
    c1 = run_experiment("vs-L", spec, tmp_path / "a").read_text()
    c2 = run_experiment("vs-L", spec, tmp_path / "b").read_text()
    assert c1 == c2

    # anytime CSV identical once the elapsed column is dropped
    spec_any = ExperimentSpec(
        sweep_variable="N", sweep_values=(8,), n_devices=8, n_channels=3,
        steps=20_000, seed=5, methods=("exact", "kmedoids-pp"),
    )
    strip = lambda text: [
        (r.split(",")[0], r.split(",")[2]) for r in text.splitlines()[1:]
    ]
    a1 = run_experiment("anytime", spec_any, tmp_path / "c").read_text()
    a2 = run_experiment("anytime", spec_any, tmp_path / "d").read_text()
    assert strip(a1) == strip(a2)

    _report("8 determinism", time.perf_counter() - t0, 120.0)
