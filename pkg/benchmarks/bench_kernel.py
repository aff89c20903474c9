"""Benchmark of the compiled Monte Carlo kernel against the pure-numpy
fallback.

The kernel computes, per run and per step of the closed-loop polynomial
task, the self-normalized squared error and the log-determinant ratio —
the inner loop of every large coverage experiment. Run as::

    python3 benchmarks/bench_kernel.py [n_runs]
"""

import sys
import time

import numpy as np

from snmbounds import _accel
from snmbounds.experiments import EX1_CW, EX1_THETA_STAR, ex1_prior_gram
from snmbounds.rng import RngStream

HORIZON = 20
REPEATS = 5


def make_inputs(n_runs: int):
    noise = np.empty((n_runs, HORIZON))
    phases = np.empty(n_runs)
    rng = RngStream(0)
    for r in range(n_runs):
        g = rng.substream(r).generator()
        phases[r] = g.uniform(0.0, 2.0 * np.pi)
        noise[r] = g.normal(0.0, EX1_CW, size=HORIZON)
    return noise, phases


def bench(fn, *args) -> float:
    best = float("inf")
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    n_runs = int(sys.argv[1]) if len(sys.argv) > 1 else 10_000
    theta = np.array(EX1_THETA_STAR)
    P = ex1_prior_gram()
    z = -P @ theta
    noise, phases = make_inputs(n_runs)
    args = (noise, phases, theta, P, z)

    t_fb = bench(_accel.poly_selfnorm_stats_fallback, *args)
    print(f"fallback (numpy):  {t_fb * 1e3:8.1f} ms  ({n_runs} runs x {HORIZON} steps)")
    if _accel.BACKEND == "compiled":
        t_c = bench(_accel.poly_selfnorm_stats, *args)
        print(f"compiled (cython): {t_c * 1e3:8.1f} ms")
        print(f"speedup:           {t_fb / t_c:8.1f}x")
        ref = _accel.poly_selfnorm_stats_fallback(*args)
        out = _accel.poly_selfnorm_stats(*args)
        err = max(
            float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))
            for a, b in zip(out, ref)
        )
        print(f"max relative deviation between backends: {err:.2e}")
    else:
        print("compiled backend not available; only the fallback was timed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
