"""Compare the compiled kernel core against the numpy fallback.

Run after an editable install:

    python benchmarks/bench_kernels.py [--size 200000] [--repeats 5]

Prints per-kernel timings for both backends and the speedup ratio.  The
workloads mirror the package's hot loops: cone margins over eigenvalue
batches (arity 2 and 3 on 4-tuples), full symmetric-polynomial tables, and
2x2 Hermitian eigenvalue fields.
"""

import argparse
import itertools
import time

import numpy as np

from dhym._kernels import _fallback

try:
    from dhym._kernels import _core
except ImportError:
    _core = None


def bench(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=200000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    vals = rng.uniform(0.1, 6.0, size=(args.size, 4))
    pairs = np.array(list(itertools.combinations(range(4), 2)), dtype=np.int64)
    triples = np.array(list(itertools.combinations(range(4), 3)), dtype=np.int64)
    cpair = np.array([1.0, 0.0, -4.0])
    ctriple = np.array([1.0, 0.0, -4.0, 6.9])
    a, b = rng.uniform(1, 4, args.size), rng.uniform(1, 4, args.size)
    p, q = rng.uniform(-1, 1, args.size), rng.uniform(-1, 1, args.size)

    workloads = [
        ("sigma_all (m,4)", "sigma_all", (vals,)),
        ("pair margins", "subset_margins", (vals, pairs, cpair)),
        ("triple margins", "subset_margins", (vals, triples, ctriple)),
        ("eigh2 fields", "eigh2_batch", (a, b, p, q)),
    ]

    print(f"batch size {args.size}, best of {args.repeats}")
    print(f"{'kernel':<16} {'fallback':>10} {'compiled':>10} {'speedup':>8}")
    for label, name, work in workloads:
        t_fb = bench(getattr(_fallback, name), work, args.repeats)
        if _core is None:
            print(f"{label:<16} {t_fb * 1e3:9.2f}ms {'n/a':>10} {'n/a':>8}")
            continue
        t_c = bench(getattr(_core, name), work, args.repeats)
        print(f"{label:<16} {t_fb * 1e3:9.2f}ms {t_c * 1e3:9.2f}ms {t_fb / t_c:7.1f}x")


if __name__ == "__main__":
    main()
