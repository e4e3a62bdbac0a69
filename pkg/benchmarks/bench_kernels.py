"""Time the compiled and numpy kernels on a learning-block-sized workload.

Run with ``python3 benchmarks/bench_kernels.py [--samples N] [--repeats R]``.
"""

import argparse
import timeit

import numpy as np

from subarray_dpd import _kernels_py

try:
    from subarray_dpd import _kernels_ext
except ImportError:
    _kernels_ext = None


def workload(samples: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    x = (rng.standard_normal(samples) + 1j * rng.standard_normal(samples)) / np.sqrt(2)
    ph_orders = np.arange(1, 12, 2)
    taps = rng.standard_normal((ph_orders.size, 4)) + 1j * rng.standard_normal((ph_orders.size, 4))
    dpd_orders = np.arange(3, 10, 2)
    memory = np.full(dpd_orders.size, 3)
    return x, ph_orders, taps, dpd_orders, memory


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)
    x, ph_orders, taps, dpd_orders, memory = workload(args.samples)
    impls = {"python": _kernels_py}
    if _kernels_ext is not None:
        impls["cython"] = _kernels_ext
    else:
        print("compiled extension not available; timing the numpy kernels only")
    best = {}
    for name, impl in impls.items():
        jobs = {
            "snl_basis": lambda: impl.snl_basis(x, dpd_orders, memory, 0, x.size),
            "ph_eval": lambda: impl.ph_eval(x, ph_orders, taps),
        }
        for job, fn in jobs.items():
            best[name, job] = min(timeit.repeat(fn, number=1, repeat=args.repeats))
    print(f"{'kernel':10s} {'backend':8s} {'best [s]':>10s}")
    for (name, job), t in sorted(best.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        print(f"{job:10s} {name:8s} {t:10.4f}")
    if "cython" in impls:
        for job in ("snl_basis", "ph_eval"):
            print(f"{job}: compiled speed-up {best['python', job] / best['cython', job]:.2f}x")
        a = _kernels_py.ph_eval(x, ph_orders, taps)
        b = _kernels_ext.ph_eval(x, ph_orders, taps)
        print(f"max backend difference (ph_eval): {np.max(np.abs(a - b)):.1e}")


if __name__ == "__main__":
    main()
