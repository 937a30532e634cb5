"""Time the compiled kernels against the numpy fallback and check they agree.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 12]

Prints one CSV row per kernel: best-of-``repeat`` wall time for each
backend, the speedup, and the largest absolute difference in the results.
"""

import argparse
import sys
import time

import numpy as np

from nsgreedy import kernels
from nsgreedy.instances import coverage_power_table
from nsgreedy.visibility import IntensityProfile
from nsgreedy.visibility.analytic import feed_pieces


def best_time(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def diff(a, b):
    a = np.atleast_1d(np.asarray(a[:1] if isinstance(a, tuple) else a, dtype=float))
    b = np.atleast_1d(np.asarray(b[:1] if isinstance(b, tuple) else b, dtype=float))
    return float(np.max(np.abs(a - b)))


def cases(n):
    rng = np.random.default_rng(7)
    table = coverage_power_table(rng, n)
    mu = IntensityProfile(1.0, (0.0, 0.25, 0.5, 0.75), (0.05, 0.4, 0.1, 0.02))
    gam = IntensityProfile(1.0, (0.0, 1 / 3, 2 / 3), (6.0, 1.5, 12.0))
    edges, m, g = feed_pieces(mu, gam, 10.0)
    t = np.linspace(0.0, 10.0, 2000)
    ev = np.sort(rng.uniform(0, 10.0, 20000))
    flags = (rng.random(ev.size) < 0.1).astype(np.int64)
    return [
        ("gamma_scan", lambda k: k.gamma_scan(table, n, 1e-12)),
        ("alpha_scan", lambda k: k.alpha_scan(table, n, 1e-12)),
        ("monotone_scan", lambda k: k.monotone_scan(table, n)),
        ("expected_top_k_batch", lambda k: k.expected_top_k_batch(t, edges, m, g, 10, 0)),
        ("replay_top_k", lambda k: k.replay_top_k(ev, flags, 10, 2.0, 10.0)),
    ]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--n", type=int, default=12, help="ground-set size for the scans")
    args = p.parse_args(argv)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy backend is available", file=sys.stderr)
    print("kernel,python_s,cython_s,speedup,max_abs_diff")
    for name, call in cases(args.n):
        tp, outp = best_time(lambda: call(backends["python"]), args.repeat)
        if "cython" in backends:
            tc, outc = best_time(lambda: call(backends["cython"]), args.repeat)
            print(f"{name},{tp:.6f},{tc:.6f},{tp / tc:.2f},{diff(outp, outc):.3g}")
        else:
            print(f"{name},{tp:.6f},,,")


if __name__ == "__main__":
    main()
