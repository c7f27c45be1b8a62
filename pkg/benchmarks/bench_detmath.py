"""Compare the pure-Python math kernels against the compiled twin.

Both backends are imported directly so one process can time them side by
side.  Workloads are fixed-seed arrays; timings are best-of-5 over batches
large enough to dwarf the harness overhead.

Usage: python benchmarks/bench_detmath.py [-n CALLS]
"""

import argparse
import random
import time

from lockstep.detmath import _reference

try:
    from lockstep.detmath import _kernels
except ImportError:
    _kernels = None


def best_of(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_unary(fn, xs):
    def run():
        for x in xs:
            fn(x)

    return best_of(5, run)


def bench_mix(fn, n):
    def run():
        state = 0x9E3779B97F4A7C15
        for _ in range(n):
            _, state = fn(state)

    return best_of(5, run)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("-n", type=int, default=200_000, help="calls per kernel")
    args = parser.parse_args()

    rng = random.Random(1)
    angles = [rng.uniform(-10.0, 10.0) for _ in range(args.n)]
    exps = [rng.uniform(-20.0, 20.0) for _ in range(args.n)]
    logs = [rng.uniform(1e-8, 1e8) for _ in range(args.n)]

    jobs = [
        ("det_sin", "det_sin", angles),
        ("det_cos", "det_cos", angles),
        ("det_tan", "det_tan", angles),
        ("det_exp", "det_exp", exps),
        ("det_ln", "det_ln", logs),
    ]

    print(f"{args.n} calls per kernel, best of 5")
    header = f"{'kernel':<10} {'python':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for label, name, xs in jobs:
        py = bench_unary(getattr(_reference, name), xs)
        if _kernels is None:
            print(f"{label:<10} {py * 1e9 / args.n:>10.0f}ns {'(absent)':>12}")
            continue
        cc = bench_unary(getattr(_kernels, name), xs)
        print(
            f"{label:<10} {py * 1e9 / args.n:>10.0f}ns"
            f" {cc * 1e9 / args.n:>10.0f}ns {py / cc:>8.1f}x"
        )

    py = bench_mix(_reference.mix64, args.n)
    if _kernels is None:
        print(f"{'mix64':<10} {py * 1e9 / args.n:>10.0f}ns {'(absent)':>12}")
    else:
        cc = bench_mix(_kernels.mix64, args.n)
        print(
            f"{'mix64':<10} {py * 1e9 / args.n:>10.0f}ns"
            f" {cc * 1e9 / args.n:>10.0f}ns {py / cc:>8.1f}x"
        )

    if _kernels is None:
        print("\ncompiled backend not built; install with the extension to compare")


if __name__ == "__main__":
    main()
