#!/usr/bin/env python3
"""Benchmark the compiled stepping kernel against the numpy fallback.

Runs identical workloads through both backends, reports wall times and
the speedup, and verifies that the results are bit-for-bit identical.

    python benchmarks/bench_backends.py [--n N]
"""

import argparse
import time

import numpy as np

from levyexit import backend
from levyexit.domain import Box, Interval
from levyexit.levy import AlphaStable, NoJumps
from levyexit.sde import Coefficients, Policy, SimulationSpec, batch_simulate

WORKLOADS = {
    "brownian exit (d=1, dt=1e-4)": dict(
        domain=Interval(-1, 1), policy=Policy.constant(0.0),
        coeffs=Coefficients.make(1, 1, s0=1.0), levy=NoJumps(1),
        dt=1e-4, horizon=50.0, x0=[0.0], ell=0.0),
    "controlled drift+diffusion (d=1, dt=1e-4)": dict(
        domain=Interval(-1, 1),
        policy=Policy.clamped_affine(0.0, (0.5,), -1.0, 1.0),
        coeffs=Coefficients.make(1, 1, b1=1.0, s0=0.4, s1=0.2),
        levy=NoJumps(1), dt=1e-4, horizon=50.0, x0=[0.2], ell=1.0),
    "stable jumps in a box (d=2, dt=1e-3)": dict(
        domain=Box((-1, -1), (1, 1)), policy=Policy.constant(0.0, dim=2),
        coeffs=Coefficients.make(2, 0, b1=(1.0, 0.0)),
        levy=AlphaStable(0.5, 2), dt=1e-3, horizon=50.0,
        x0=[0.0, 0.0], ell=1.0),
}


def run(n):
    if "cython" not in backend.available_backends():
        print("compiled kernel not available; nothing to compare")
        return
    print(f"{'workload':45s} {'python':>9s} {'cython':>9s} "
          f"{'speedup':>8s}  identical")
    for name, kw in WORKLOADS.items():
        kw = dict(kw)
        x0 = kw.pop("x0")
        ell = kw.pop("ell")
        results = {}
        times = {}
        for be in ("python", "cython"):
            spec = SimulationSpec(backend=be, **kw)
            t0 = time.perf_counter()
            results[be] = batch_simulate(spec, x0, n, seed=7, ell=ell)
            times[be] = time.perf_counter() - t0
        a, b = results["python"], results["cython"]
        same = (np.array_equal(a.tau, b.tau)
                and np.array_equal(a.cost, b.cost)
                and np.array_equal(a.exit_x[~a.censored],
                                   b.exit_x[~b.censored]))
        print(f"{name:45s} {times['python']:8.2f}s {times['cython']:8.2f}s "
              f"{times['python'] / times['cython']:7.1f}x  {same}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=4000,
                    help="trajectories per workload")
    run(ap.parse_args().n)
