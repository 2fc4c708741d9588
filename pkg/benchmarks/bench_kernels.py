"""Compare the compiled propagation kernel against the pure-numpy fallback.

The kernel backend is chosen at import time from the TDSPEC_PURE_NUMPY
environment variable, so each backend is timed in a child process. Run:

    python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time

CASES = [
    {"n_defects": 1, "t_end_ns": 200.0},
    {"n_defects": 2, "t_end_ns": 200.0},
    {"n_defects": 3, "t_end_ns": 100.0},
    {"n_defects": 4, "t_end_ns": 100.0},
]
REPEATS = 3


def run_case(case: dict) -> dict:
    import numpy as np

    from tdspec import DrivePulse, EnsembleSpec, TlsParams, evolve
    from tdspec._kernels import PURE_NUMPY

    n = case["n_defects"]
    defects = tuple(
        TlsParams(epsilon=0.0, delta=3.0e9 + 0.5e9 * j) for j in range(n)
    )
    j = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            j[a, b] = j[b, a] = 5.0e7
    spec = EnsembleSpec(defects=defects, couplings=j, gamma=2.0e6)
    pulse = DrivePulse(carrier=4.0e9, amplitude=1.0e8, duration=50e-9)
    t_end = case["t_end_ns"] * 1e-9

    evolve(spec, pulse, t_end=5e-9)  # warm up (jit compile, allocator)
    best = float("inf")
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        evolve(spec, pulse, t_end=t_end)
        best = min(best, time.perf_counter() - t0)
    return {
        "backend": "numpy" if PURE_NUMPY else "numba",
        "n_defects": n,
        "t_end_ns": case["t_end_ns"],
        "seconds": best,
    }


def child_main() -> None:
    case = json.loads(os.environ["BENCH_CASE"])
    print(json.dumps(run_case(case)))


def parent_main() -> None:
    rows = []
    for backend, env_val in (("numba", "0"), ("numpy", "1")):
        for case in CASES:
            env = dict(os.environ)
            env["TDSPEC_PURE_NUMPY"] = env_val
            env["BENCH_CASE"] = json.dumps(case)
            out = subprocess.run(
                [sys.executable, __file__, "--child"],
                env=env,
                capture_output=True,
                text=True,
                check=True,
            )
            rows.append(json.loads(out.stdout.strip().splitlines()[-1]))

    print(f"{'backend':>8} {'N':>3} {'t_end (ns)':>11} {'best (s)':>10}")
    for r in rows:
        print(f"{r['backend']:>8} {r['n_defects']:>3} {r['t_end_ns']:>11.0f} {r['seconds']:>10.3f}")
    by_key = {}
    for r in rows:
        by_key.setdefault((r["n_defects"], r["t_end_ns"]), {})[r["backend"]] = r["seconds"]
    print()
    for (n, t), pair in sorted(by_key.items()):
        if "numba" in pair and "numpy" in pair:
            print(f"N={n}: numpy/numba speed ratio {pair['numpy'] / pair['numba']:.2f}x")


if __name__ == "__main__":
    if "--child" in sys.argv:
        child_main()
    else:
        parent_main()
