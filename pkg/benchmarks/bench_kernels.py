"""Benchmark the jitted kernels against their pure-numpy fallbacks.

Runs both implementations of each hot kernel on representative workloads,
reports best-of-N wall times, the speedup, and the largest deviation between
the two paths (they evaluate the same quadrature rules, so deviations sit at
rounding level).

Usage:
    python benchmarks/bench_kernels.py [--repeats 5] [--csv PATH]
"""

import argparse
import csv
import time

import numpy as np

from semipert import kernels
from semipert.matrixlab import expm, random_system


def best_time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def volterra_workload():
    M = 2000
    dt = 2.0 / M
    s = np.linspace(0.0, 2.0, M + 1)
    a = 1.0 / (1.0 + s ** 2)
    kdn = 0.1 * np.clip(s, 0.0, 1.0)
    atom_w = np.array([0.4])
    atom_c = np.array([1.0])
    return (a, kdn, atom_w, atom_c, dt)


def series_workload():
    rng = np.random.default_rng(31415)
    sys_ = random_system(rng, max_dim=8)
    t = 2.0
    M = 4096
    h = t / M
    E1 = expm(sys_.A, h)
    E2 = E1 @ E1
    Eh = expm(sys_.A, 0.5 * h)
    return (E2, E1, Eh, sys_.B, sys_.S0, h, M, 30)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--csv", type=str, default=None)
    args = parser.parse_args()

    try:
        nb = kernels.numba_kernels()
    except ImportError:
        nb = None
        print("numba unavailable; timing the numpy path only")

    rows = []
    workloads = [
        ("volterra_march", volterra_workload(), kernels.volterra_march_numpy,
         None if nb is None else nb["volterra_march"]),
        ("series_table", series_workload(), kernels.series_table_numpy,
         None if nb is None else nb["series_table"]),
    ]
    print(f"{'kernel':<16} {'numpy (s)':>12} {'numba (s)':>12} {'speedup':>9} "
          f"{'max |delta|':>12}")
    for name, payload, fn_np, fn_nb in workloads:
        out_np = fn_np(*payload)
        t_np = best_time(lambda: fn_np(*payload), args.repeats)
        if fn_nb is None:
            print(f"{name:<16} {t_np:>12.4f} {'-':>12} {'-':>9} {'-':>12}")
            rows.append((name, t_np, float("nan"), float("nan"), float("nan")))
            continue
        out_nb = fn_nb(*payload)  # first call may compile
        t_nb = best_time(lambda: fn_nb(*payload), args.repeats)
        if isinstance(out_np, tuple):
            delta = max(float(np.max(np.abs(a - b))) for a, b in zip(out_np, out_nb))
        else:
            delta = float(np.max(np.abs(out_np - out_nb)))
        print(f"{name:<16} {t_np:>12.4f} {t_nb:>12.4f} {t_np / t_nb:>9.2f} "
              f"{delta:>12.2e}")
        rows.append((name, t_np, t_nb, t_np / t_nb, delta))

    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("kernel", "numpy_s", "numba_s", "speedup", "max_delta"))
            writer.writerows(rows)
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
