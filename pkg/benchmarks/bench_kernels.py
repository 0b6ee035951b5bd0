"""Compare the compiled and pure-Python tridiagonal kernels.

Usage: python3 benchmarks/bench_kernels.py [--sizes 255 2047 8191] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from parex import _kernels_py

try:
    from parex import _kernels as _compiled
except ImportError:
    _compiled = None


def system(n):
    h = 1.0 / (n + 1)
    mass_d, mass_o = np.full(n, 2 * h / 3), np.full(n - 1, h / 6)
    stiff_d, stiff_o = np.full(n, 2 / h), np.full(n - 1, -1 / h)
    return mass_d, mass_o, stiff_d, stiff_o


def cases(impl, n, substeps):
    mass_d, mass_o, stiff_d, stiff_o = system(n)
    delta = 1e-2
    diag, off = mass_d / delta + stiff_d, mass_o / delta + stiff_o
    fac = impl.factor(diag, off)
    rng = np.random.default_rng(0)
    v = rng.normal(size=n)
    loads = rng.normal(size=(substeps, n))
    gq, wl, wr = (rng.normal(size=(n + 1, 5)) for _ in range(3))
    return {
        "factor": lambda: impl.factor(diag, off),
        "solve": lambda: impl.solve(fac, v),
        "matvec": lambda: impl.matvec(stiff_d, stiff_o, v),
        f"euler_chain x{substeps}": lambda: impl.euler_chain(fac, stiff_d, stiff_o, v, loads),
        "hat_load": lambda: impl.hat_load(gq, wl, wr),
    }


def best_us(fn, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number * 1e6


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[255, 2047, 8191])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--substeps", type=int, default=10)
    args = ap.parse_args()
    backends = [("python", _kernels_py)]
    if _compiled is not None:
        backends.insert(0, ("cython", _compiled))
    else:
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':<18}{'n':>7}" + "".join(f"{name + ' us':>14}" for name, _ in backends)
          + ("   speedup" if len(backends) == 2 else ""))
    for n in args.sizes:
        timings = [{k: best_us(f, args.repeat) for k, f in cases(impl, n, args.substeps).items()}
                   for _, impl in backends]
        for kernel in timings[0]:
            row = f"{kernel:<18}{n:>7}" + "".join(f"{t[kernel]:>14.1f}" for t in timings)
            if len(timings) == 2:
                row += f"{timings[1][kernel] / timings[0][kernel]:>9.1f}x"
            print(row)


if __name__ == "__main__":
    main()
