"""Time the compiled kernels against the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py [--n 2000] [--repeat 5]``.
Both implementations are checked for agreement before timing.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from coordperc.kernels import available

KERNELS = ("reach_corner", "reach_depth", "reach_grid", "nonoriented_reaches")


def _inputs(n: int, M: int, seed: int):
    rng = np.random.default_rng(seed)
    xs = rng.integers(1, M + 1, size=n, dtype=np.int32)
    ys = rng.integers(1, M + 1, size=n, dtype=np.int32)
    return xs, ys


def _same(a, b) -> bool:
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--M", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    impls = available()
    xs, ys = _inputs(args.n, args.M, args.seed)
    values = np.random.default_rng(args.seed + 1).integers(1, 101, size=50 * args.n, dtype=np.int32)
    cases = {name: (xs, ys) for name in KERNELS}
    cases["level1_cuts"] = (values, 10, 1, 0)

    print(f"n={args.n} M={args.M} repeat={args.repeat}")
    print(f"{'kernel':<22}" + "".join(f"{k:>12}" for k in impls) + f"{'speedup':>10}")
    for name, call_args in cases.items():
        results = {k: getattr(mod, name)(*call_args) for k, mod in impls.items()}
        ref = results["python"]
        if not all(_same(ref, r) for r in results.values()):
            raise SystemExit(f"{name}: implementations disagree")
        times = {
            k: min(timeit.repeat(lambda m=mod: getattr(m, name)(*call_args), number=1, repeat=args.repeat))
            for k, mod in impls.items()
        }
        row = f"{name:<22}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values())
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
