"""Compare the compiled kernels with the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--b 2000] [--repeat 5]

Times each hot kernel on inputs shaped like a desk-scale run (n=400, K=71)
and then one full ``build_lr_matrix`` call per family with each backend.
"""

import argparse
import time

import numpy as np

import simboot.engine as engine
from simboot import DgpSpec, ModelGrid, RngSpec, build_lr_matrix, flat_mean, sample_dataset
from simboot._backend import BACKEND, get_kernels
from simboot.linalg import PIVOT_RTOL


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(n, K, B, rng):
    a = rng.normal(size=(K * B, 3, 3))
    a = a @ np.swapaxes(a, 1, 2) + 0.1 * np.eye(3)
    g = rng.normal(size=(K * B, 3))
    sym_args = (a[:, 0, 0], a[:, 0, 1], a[:, 0, 2], a[:, 1, 1], a[:, 1, 2], a[:, 2, 2],
                g[:, 0], g[:, 1], g[:, 2], PIVOT_RTOL)
    ys = np.sort(rng.normal(size=n))
    taus = np.arange(1, K + 1) / (K + 1)
    theta = ys[np.ceil(taus * n).astype(int) - 1]
    qt_args = (ys, rng.exponential(size=(B, n)), taus, theta, np.searchsorted(ys, theta))
    s = rng.exponential(size=(K, B))
    union_args = (s, np.quantile(s, 0.99, axis=1))
    return {
        f"sym3_quadform  ({K * B} systems)": ("sym3_quadform", sym_args),
        f"qt_lr_batch    (K={K}, B={B})": ("qt_lr_batch", qt_args),
        f"union_count    (K={K}, B={B})": ("union_count", union_args),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=400)
    parser.add_argument("--k", type=int, default=71)
    parser.add_argument("--b", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if BACKEND != "cython":
        print("compiled core not built; only the fallback can be timed")
        names = ["python"]
    else:
        names = ["cython", "python"]

    rng = np.random.default_rng(0)
    print(f"{'kernel':40s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for label, (fn_name, fn_args) in kernel_cases(args.n, args.k, args.b, rng).items():
        t = [best_of(lambda: getattr(get_kernels(nm), fn_name)(*fn_args), args.repeat) for nm in names]
        _report(label, t)

    grids = {
        "lc": (DgpSpec(args.n), ModelGrid.equidistant("lc", args.k, 0.3), "gauss"),
        "lq": (DgpSpec(args.n), ModelGrid.equidistant("lq", args.k, 0.3), "gauss"),
        "qt": (DgpSpec(args.n, flat_mean(5.0)), ModelGrid.equidistant("qt", args.k, 0.3), "exp"),
    }
    active = engine._kernels
    try:
        for fam, (dgp, grid, scheme) in grids.items():
            data = sample_dataset(dgp, RngSpec(1), 0)
            t = []
            for nm in names:
                engine._kernels = get_kernels(nm)
                t.append(best_of(lambda: build_lr_matrix(data, grid, args.b, scheme, RngSpec(2)), max(1, args.repeat // 2)))
            _report(f"build_lr_matrix {fam} (B={args.b})", t)
    finally:
        engine._kernels = active


def _report(label, times):
    line = f"{label:40s}" + "".join(f"{t * 1e3:10.1f}ms" for t in times)
    if len(times) == 2:
        line += f"  {times[1] / times[0]:9.1f}x"
    print(line)


if __name__ == "__main__":
    main()
