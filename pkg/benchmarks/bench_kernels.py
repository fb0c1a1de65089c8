"""Compare the numba and numpy sampling kernels.

Each case draws ``--count`` trees of order ``--n`` and reduces them to one statistic.
Both backends read the same random stream, so their outputs must agree exactly; the
script checks that before reporting nanoseconds per digit and the speedup.

    python3 benchmarks/bench_kernels.py --n 10000 --count 2000
"""
import argparse
import json
import time

import numpy as np

from brtree._kernels import (STAT_AT_LEAST, STAT_BRANCHES, STAT_DEPTH, STAT_EXACTLY,
                             STAT_POSITION, get_backend)
from brtree.rng import derive_key, digit_thresholds
from brtree.shuffle import ProbabilityVector

CASES = [
    ("branches", STAT_BRANCHES, 0),
    ("atleast:1", STAT_AT_LEAST, 1),
    ("atleast:2", STAT_AT_LEAST, 2),
    ("atleast:8", STAT_AT_LEAST, 8),
    ("exactly:1", STAT_EXACTLY, 1),
    ("depth", STAT_DEPTH, 0),
    ("position", STAT_POSITION, 0),
]


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--a", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--urt", action="store_true", help="continuous keys instead of digits")
    ap.add_argument("--json", help="also write the table here")
    args = ap.parse_args()

    m = args.n - 1
    thr = digit_thresholds(ProbabilityVector.uniform(args.a).weights)
    key = derive_key(2024, 0)
    fast, slow = get_backend("numba"), get_backend("numpy")
    if fast.NAME != "numba":
        print("numba is unavailable; only the numpy backend will be timed")

    def run(backend, code, k):
        return lambda: backend.sample_statistic(key, args.count, m, thr, code, k, 0, args.a, args.urt)

    # compile outside the timed region
    for _, code, k in CASES:
        fast.sample_statistic(key, 2, m, thr, code, k, 0, args.a, args.urt)

    cells = args.count * m
    rows = []
    print(f"n={args.n} count={args.count} a={args.a} urt={args.urt}")
    print(f"{'statistic':<12}{'numba ns/digit':>16}{'numpy ns/digit':>16}{'speedup':>10}")
    for name, code, k in CASES:
        t_fast, (v_fast, e1) = best_of(run(fast, code, k), args.repeat)
        t_slow, (v_slow, e2) = best_of(run(slow, code, k), 1)
        if e1 or e2 or not np.array_equal(v_fast, v_slow):
            raise SystemExit(f"{name}: backends disagree (errors {e1}, {e2})")
        row = {"statistic": name, "numba_ns": 1e9 * t_fast / cells,
               "numpy_ns": 1e9 * t_slow / cells, "speedup": t_slow / t_fast}
        rows.append(row)
        print(f"{name:<12}{row['numba_ns']:>16.2f}{row['numpy_ns']:>16.2f}{row['speedup']:>10.1f}")

    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"n": args.n, "count": args.count, "a": args.a, "urt": args.urt,
                       "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
