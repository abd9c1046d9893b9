"""Compare the compiled and pure-Python lattice-sum kernels.

Run with ``python3 benchmarks/bench_kernels.py [--repeat R] [--csv PATH]``.
Reports the best wall time of each implementation, the speed-up, and
the largest absolute difference between their outputs.
"""

from __future__ import annotations

import argparse
import csv
import sys
import timeit

import numpy as np

from fraclap.grid import make_grid, sample
from fraclap.kernels import compiled_impl, python_impl
from fraclap.operators import _stencil

CASES = [(1, 512), (1, 2048), (1, 8192), (2, 64), (2, 128)]


def bench(dim: int, n: int, repeat: int, beta: float = 1.0) -> dict:
    grid = make_grid(dim, n, 20.0)
    psi = sample("gaussian:1,2", grid).values
    st = _stencil(grid, beta, 4 * grid.spacing, "taylor-window")
    row = {"dim": dim, "n": n, "offsets": len(st.weights)}
    ref = python_impl(psi, st.offsets, st.weights)
    row["python_s"] = min(timeit.repeat(lambda: python_impl(psi, st.offsets, st.weights), number=1, repeat=repeat))
    if compiled_impl is not None:
        out = compiled_impl(psi, st.offsets, st.weights)
        row["compiled_s"] = min(timeit.repeat(lambda: compiled_impl(psi, st.offsets, st.weights), number=1, repeat=repeat))
        row["speedup"] = row["python_s"] / row["compiled_s"]
        row["max_abs_diff"] = float(np.max(np.abs(out - ref)))
    return row


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--csv", help="also write the table as CSV")
    args = ap.parse_args(argv)
    if compiled_impl is None:
        print("compiled kernel not built; timing the Python fallback only", file=sys.stderr)
    rows = [bench(d, n, args.repeat) for d, n in CASES]
    print(f"{'dim':>3} {'n':>6} {'offsets':>8} {'python[s]':>10} {'compiled[s]':>12} {'speedup':>8} {'max|diff|':>10}")
    for r in rows:
        print(f"{r['dim']:>3} {r['n']:>6} {r['offsets']:>8} {r['python_s']:>10.4f} "
              f"{r.get('compiled_s', float('nan')):>12.4f} {r.get('speedup', float('nan')):>8.1f} "
              f"{r.get('max_abs_diff', float('nan')):>10.2e}")
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
