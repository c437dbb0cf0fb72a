#!/usr/bin/env python3
"""Time the numba kernels against the pure-numpy fallback.

Runs each hot kernel on both backends at a few sizes and prints a table.
The first numba call includes JIT compilation; a warmup call is timed
separately so the steady-state numbers are comparable.

Usage: python benchmarks/benchmark_kernels.py [--trials N] [--repeats K]
"""

import argparse
import os
import time

import numpy as np

from cointoss import kernels


def timed(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def run_backend(backend, trials, repeats):
    os.environ["COINTOSS_KERNELS"] = backend
    rng = np.random.default_rng(0)
    rows = {}

    p_bit0 = np.array([5 / 6, 5 / 6])
    p_pass = np.array([[0.9, 0.5], [0.9, 0.5]])
    u3 = [rng.random(trials) for _ in range(3)]
    kernels.alice_trials(p_bit0, p_pass, *u3)  # warmup / compile
    rows["alice_trials"], check_a = timed(
        lambda: kernels.alice_trials(p_bit0, p_pass, *u3), repeats
    )

    cum = np.cumsum(np.array([0.25, 0.25, 0.25, 0.25]))
    p_bit0_m = np.array([1.0, 1.0, 0.0, 1.0])
    u2 = [rng.random(trials) for _ in range(2)]
    kernels.bob_trials(cum, p_bit0_m, *u2)
    rows["bob_trials"], check_b = timed(
        lambda: kernels.bob_trials(cum, p_bit0_m, *u2), repeats
    )

    kernels.objective_grid_scan(40)
    rows["grid_scan(100)"], check_g = timed(
        lambda: kernels.objective_grid_scan(100), repeats
    )
    return rows, (check_a, check_b, round(check_g[0], 12))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=1_000_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = ["numpy"] + (["numba"] if kernels.NUMBA_AVAILABLE else [])
    results = {}
    checks = {}
    for backend in backends:
        results[backend], checks[backend] = run_backend(backend, args.trials, args.repeats)

    print(f"trials={args.trials}, best of {args.repeats} runs\n")
    print(f"{'kernel':<16}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name in results[backends[0]]:
        line = f"{name:<16}"
        for backend in backends:
            line += f"{results[backend][name] * 1e3:>10.2f}ms"
        if len(backends) == 2:
            ratio = results["numpy"][name] / results["numba"][name]
            line += f"{ratio:>9.1f}x"
        print(line)

    if len(backends) == 2 and checks["numpy"] != checks["numba"]:
        raise SystemExit(f"backend results diverge: {checks}")
    print("\nresults identical across backends:", checks[backends[0]])


if __name__ == "__main__":
    main()
