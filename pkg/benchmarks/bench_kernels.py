"""Timing comparison of the compiled kernels against the numpy fallbacks.

Runs both backends on the same inputs and reports best-of-N wall times plus
the agreement between the two results. The workloads mirror what the library
actually submits: a full-box node-count sweep at the default shooting grid
spacing, and angle-average accumulations at small and large basis sizes.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""
import argparse
import time

import numpy as np

from ancoh._kernels import _pure

try:
    from ancoh._kernels import _core
except ImportError:
    _core = None


def best_of(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def numerov_case(rng):
    # one bisection sweep of a 20-level quartic run: ~16k points, 20 energies
    x = np.linspace(-8.0, 8.0, 16001)
    v = 0.5 * x * x + 0.05 * x**4
    energies = np.linspace(0.5, 45.0, 20)
    return "numerov sweep 16001x20", (v, energies, x[1] - x[0])


def cesaro_case(dim, n_nodes, rng):
    c = rng.random(dim)
    c /= np.linalg.norm(c)
    r = np.sort(rng.random(dim)) * dim
    nodes = np.sort(rng.random(n_nodes)) * 2.0 * np.pi * 64
    w = np.full(n_nodes, 1.0 / n_nodes)
    return f"cesaro dim={dim} nodes={n_nodes}", (c, r, nodes, w)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(7)
    cases = [
        ("numerov_count_nodes", numerov_case(rng)),
        ("cesaro_accumulate", cesaro_case(25, 384, rng)),
        ("cesaro_accumulate", cesaro_case(25, 12288, rng)),
        ("cesaro_accumulate", cesaro_case(129, 16384, rng)),
    ]

    if _core is None:
        print("compiled extension not importable; timing the fallback only")

    hdr = f"{'case':34s} {'pure':>10s} {'compiled':>10s} {'speedup':>8s}  agreement"
    print(hdr)
    print("-" * len(hdr))
    for name, (label, inputs) in cases:
        t_pure, out_pure = best_of(getattr(_pure, name), inputs, args.repeats)
        if _core is None:
            print(f"{label:34s} {t_pure * 1e3:9.2f}ms {'-':>10s} {'-':>8s}")
            continue
        t_core, out_core = best_of(getattr(_core, name), inputs, args.repeats)
        dev = np.max(np.abs(np.asarray(out_pure) - np.asarray(out_core)))
        print(
            f"{label:34s} {t_pure * 1e3:9.2f}ms {t_core * 1e3:9.2f}ms "
            f"{t_pure / t_core:7.1f}x  max dev {dev:.2e}"
        )


if __name__ == "__main__":
    main()
