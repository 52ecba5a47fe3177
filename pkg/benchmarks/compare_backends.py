"""Compare the JIT and pure-numpy kernel backends.

Runs every measurement twice in subprocesses, once with
RIEOPT_BACKEND=numpy and once with RIEOPT_BACKEND=numba, and prints
per-call medians side by side.  Compilation happens in a warmup pass,
so the numba column reports steady-state cost only.

    python3 benchmarks/compare_backends.py [--repeats 9]
"""

import argparse
import json
import os
import statistics
import subprocess
import sys
import time

CASES = [
    # (label, kernel group, size)
    ("sphere exp/log/dist", "sphere", 100),
    ("sphere exp/log/dist", "sphere", 1000),
    ("sphere exp/log/dist", "sphere", 10000),
    ("mobius add + ball dist", "poincare", 100),
    ("mobius add + ball dist", "poincare", 1000),
    ("mobius add + ball dist", "poincare", 10000),
    ("lorentz exp/dist", "lorentz", 1000),
    ("loewner matrix", "loewner", 10),
    ("loewner matrix", "loewner", 50),
    ("loewner matrix", "loewner", 100),
    ("laplace chain, 500 steps", "chain", 100),
]


def build_workload(group, size, rng):
    import numpy as np
    from rieopt import kernels

    if group == "sphere":
        x = rng.standard_normal(size)
        x /= np.linalg.norm(x)
        v = rng.standard_normal(size)
        v -= (x @ v) * x
        v *= 0.3 / np.linalg.norm(v)
        y = kernels.sphere_exp(x, v)

        def work():
            kernels.sphere_exp(x, v)
            kernels.sphere_log(x, y)
            kernels.sphere_dist(x, y)
        return work

    if group == "poincare":
        x = 0.3 * rng.standard_normal(size) / np.sqrt(size)
        y = 0.3 * rng.standard_normal(size) / np.sqrt(size)

        def work():
            kernels.mobius_add(x, y)
            kernels.poincare_dist(x, y)
        return work

    if group == "lorentz":
        space = 0.2 * rng.standard_normal(size - 1)
        x = np.concatenate([[np.sqrt(1.0 + space @ space)], space])
        v = rng.standard_normal(size)
        v = kernels.lorentz_project(x, v)
        v *= 0.3 / np.sqrt(max(kernels.lorentz_inner(v, v), 1e-30))
        y = kernels.lorentz_exp(x, v)

        def work():
            kernels.lorentz_exp(x, v)
            kernels.lorentz_dist(x, y)
        return work

    if group == "loewner":
        vals = rng.uniform(0.5, 3.0, size)
        logs = np.log(vals)
        exps = np.exp(vals)

        def work():
            kernels.loewner_matrix(vals, exps, 0)  # exp weights
            kernels.loewner_matrix(vals, logs, 1)  # log weights
        return work

    if group == "chain":
        x = rng.standard_normal(size)
        x /= np.linalg.norm(x)
        normals = rng.standard_normal((501, size))
        unifs = rng.uniform(size=501)

        def work():
            kernels.sphere_laplace_chain(x, normals, unifs, 0.5, 0.25)
        return work

    raise ValueError(group)


def worker(repeats):
    import numpy as np

    from rieopt.backend import BACKEND

    results = []
    for label, group, size in CASES:
        rng = np.random.default_rng(0)
        work = build_workload(group, size, rng)
        work()  # compile + touch caches outside the timed region
        # pick a call count that makes one sample ~20 ms
        t0 = time.perf_counter()
        work()
        single = max(time.perf_counter() - t0, 1e-7)
        calls = max(3, min(5000, int(0.02 / single)))
        samples = []
        for _ in range(repeats):
            start = time.perf_counter()
            for _ in range(calls):
                work()
            samples.append((time.perf_counter() - start) / calls)
        results.append({
            "label": label,
            "size": size,
            "median_us": statistics.median(samples) * 1e6,
        })
    json.dump({"backend": BACKEND, "results": results}, sys.stdout)


def launch(backend, repeats):
    env = dict(os.environ, RIEOPT_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, __file__, "--worker", "--repeats", str(repeats)],
        env=env, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"{backend} worker failed:\n{proc.stderr}")
    return json.loads(proc.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=9)
    parser.add_argument("--worker", action="store_true",
                        help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        worker(args.repeats)
        return

    numpy_run = launch("numpy", args.repeats)
    numba_run = launch("numba", args.repeats)
    print(f"{'case':28s} {'size':>6s} {'numpy (us)':>12s} "
          f"{'numba (us)':>12s} {'speedup':>8s}")
    for a, b in zip(numpy_run["results"], numba_run["results"]):
        ratio = a["median_us"] / b["median_us"]
        print(f"{a['label']:28s} {a['size']:6d} {a['median_us']:12.2f} "
              f"{b['median_us']:12.2f} {ratio:7.1f}x")


if __name__ == "__main__":
    main()
