"""Compares the compiled search kernel against the pure-Python fallback.

Runs brute-force enumeration and branch-and-bound on a grid of random
instances with both backends, checks they return identical results, and
prints a timing table.  Usage:

    python benchmarks/kernel_benchmark.py [--repeats 3] [--csv out.csv]
"""

import argparse
import sys
import time

import numpy as np

from corrsched._kernels import available_backends


def random_instance(rng, n):
    x = rng.random((n, n))
    x = (x + x.T) / 2.0
    np.fill_diagonal(x, 0.0)
    return x


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3, help="min-of-k timing")
    parser.add_argument("--csv", default=None, help="also write the table as CSV")
    args = parser.parse_args(argv)

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled kernel not built; nothing to compare", file=sys.stderr)
        return 1
    pure, comp = backends["pure"], backends["compiled"]

    grid = [
        ("brute-force", 10, 3, False),
        ("brute-force", 12, 3, False),
        ("brute-force", 12, 4, False),
        ("branch-and-bound", 14, 3, True),
        ("branch-and-bound", 16, 4, True),
        ("branch-and-bound", 18, 4, True),
    ]
    rng = np.random.default_rng(0)
    header = f"{'mode':18} {'N':>3} {'L':>2} {'nodes':>10} {'pure [s]':>10} {'compiled [s]':>13} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    rows = []
    for mode, n, l, use_bound in grid:
        a = random_instance(rng, n)
        t_pure, r_pure = time_call(
            lambda: pure.search_assignments(a, l, use_bound, 1.0, None, 0.0, 0, 0.0),
            args.repeats,
        )
        t_comp, r_comp = time_call(
            lambda: comp.search_assignments(a, l, use_bound, 1.0, None, 0.0, 0, 0.0),
            args.repeats,
        )
        if (r_pure[0], r_pure[1], r_pure[3]) != (r_comp[0], r_comp[1], r_comp[3]):
            print(f"BACKEND MISMATCH on {mode} N={n} L={l}", file=sys.stderr)
            return 1
        speedup = t_pure / t_comp if t_comp > 0 else float("inf")
        print(
            f"{mode:18} {n:>3} {l:>2} {r_comp[3]:>10} {t_pure:>10.4f} {t_comp:>13.4f} {speedup:>7.1f}x"
        )
        rows.append((mode, n, l, r_comp[3], t_pure, t_comp, speedup))
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("mode,n,l,nodes,pure_s,compiled_s,speedup\n")
            for row in rows:
                fh.write(",".join(str(v) for v in row) + "\n")
        print(f"\nwrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
