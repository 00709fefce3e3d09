"""Backend parity: the compiled and pure kernels must agree bit-for-bit."""

import itertools
import math
import os
import time

import numpy as np
import pytest

from conftest import random_activation_matrix

from corrsched._kernels import BACKEND, available_backends, _pure
from corrsched.solver import canonical_assignment_count

BACKENDS = available_backends()


def _random_offdiag(rng, n):
    return random_activation_matrix(rng, n).entries


@pytest.mark.skipif(
    os.environ.get("CORRSCHED_KERNEL", "").lower() == "pure",
    reason="pure kernel forced via CORRSCHED_KERNEL",
)
def test_compiled_backend_is_available_and_selected():
    assert "compiled" in BACKENDS, "extension failed to build"
    assert BACKEND == "compiled"


def test_canonical_count_matches_enumeration():
    def leaves(n, l):
        def rec(depth, used):
            if depth == n:
                return 1
            total = used * rec(depth + 1, used)
            if used < l:
                total += rec(depth + 1, used + 1)
            return total

        return rec(0, 0)

    for n in range(1, 9):
        for l in range(1, 5):
            assert canonical_assignment_count(n, l) == leaves(n, l)
    # N=10, L=4: sum of Stirling numbers S(10, 1..4)
    assert canonical_assignment_count(10, 4) == 1 + 511 + 9330 + 34105


@pytest.mark.skipif("compiled" not in BACKENDS, reason="no compiled kernel")
class TestParity:
    def test_bit_identical_results(self):
        comp = BACKENDS["compiled"]
        rng = np.random.default_rng(29)
        for _ in range(120):
            n, l = int(rng.integers(2, 10)), int(rng.integers(1, 5))
            a = _random_offdiag(rng, n)
            for use_bound, factor in ((False, 1.0), (True, 1.0), (True, 0.95)):
                p = _pure.search_assignments(a, l, use_bound, factor, None, 0.0, 0, 0.0)
                c = comp.search_assignments(a, l, use_bound, factor, None, 0.0, 0, 0.0)
                assert p[0] == c[0]  # channels
                assert p[1] == c[1]  # raw objective, bit-equal
                assert p[2] == c[2]  # open bound
                assert p[3] == c[3]  # node count
                assert p[4] == c[4]  # status

    def test_parity_with_warm_start(self):
        comp = BACKENDS["compiled"]
        rng = np.random.default_rng(31)
        for _ in range(40):
            n, l = int(rng.integers(3, 9)), int(rng.integers(2, 4))
            a = _random_offdiag(rng, n)
            warm = [0] * n
            raw = sum(a[i][k] for i in range(n) for k in range(i + 1, n))
            p = _pure.search_assignments(a, l, True, 1.0, warm, raw, 0, 0.0)
            c = comp.search_assignments(a, l, True, 1.0, warm, raw, 0, 0.0)
            assert p[:5] == c[:5]

    def test_parity_under_node_limit(self):
        comp = BACKENDS["compiled"]
        rng = np.random.default_rng(37)
        a = _random_offdiag(rng, 9)
        for limit in (9, 25, 100):
            p = _pure.search_assignments(a, 3, True, 1.0, None, 0.0, limit, 0.0)
            c = comp.search_assignments(a, 3, True, 1.0, None, 0.0, limit, 0.0)
            assert p[:5] == c[:5]
            assert p[4] == "node_limit"


class TestKernelContract:
    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_full_enumeration_visits_every_canonical_assignment(self, name):
        kern = BACKENDS[name]
        rng = np.random.default_rng(41)
        for _ in range(20):
            n, l = int(rng.integers(2, 8)), int(rng.integers(1, 4))
            a = _random_offdiag(rng, n)
            _, _, _, nodes, status, _ = kern.search_assignments(
                a, l, False, 1.0, None, 0.0, 0, 0.0
            )
            # internal nodes + leaves of the canonical tree
            def tree_nodes(depth, used):
                if depth == n:
                    return 0
                total = 0
                for j in range(min(used + 1, l)):
                    total += 1 + tree_nodes(depth + 1, used + (1 if j == used else 0))
                return total

            assert status == "optimal"
            assert nodes == tree_nodes(0, 0)

    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_exhaustive_minimum_matches_bruteforce_by_hand(self, name):
        kern = BACKENDS[name]
        rng = np.random.default_rng(43)
        for _ in range(30):
            n, l = int(rng.integers(2, 7)), int(rng.integers(1, 4))
            a = _random_offdiag(rng, n)
            best, raw, _, _, _, _ = kern.search_assignments(
                a, l, False, 1.0, None, 0.0, 0, 0.0
            )
            values = {}
            for channels in itertools.product(range(l), repeat=n):
                values[channels] = sum(
                    a[i][k]
                    for i in range(n)
                    for k in range(i + 1, n)
                    if channels[i] == channels[k]
                )
            target = min(values.values())
            assert raw == pytest.approx(target, rel=1e-12, abs=1e-15)
            assert values[tuple(best)] == pytest.approx(target, rel=1e-12, abs=1e-15)

    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_time_limit_aborts_with_honest_bound(self, name):
        kern = BACKENDS[name]
        rng = np.random.default_rng(47)
        a = _random_offdiag(rng, 14)
        t0 = time.perf_counter()
        best, raw, open_raw, nodes, status, _ = kern.search_assignments(
            a, 4, True, 1.0, None, math.inf, 0, 0.05
        )
        elapsed = time.perf_counter() - t0
        if status == "time_limit":  # a fast machine may just finish
            assert elapsed < 5.0
            assert open_raw <= raw + 1e-12 or best is not None

    def test_incumbent_log_strictly_decreasing(self):
        rng = np.random.default_rng(53)
        for name, kern in BACKENDS.items():
            a = _random_offdiag(rng, 8)
            _, _, _, _, _, log = kern.search_assignments(a, 3, False, 1.0, None, 0.0, 0, 0.0)
            values = [raw for _, raw in log]
            assert all(b < a_ for a_, b in zip(values, values[1:]))
            times = [t for t, _ in log]
            assert all(b >= a_ for a_, b in zip(times, times[1:]))
