"""Compare the numba and numpy variants of the hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is run once to trigger compilation, then timed; the best of
``--repeat`` runs is reported together with the largest disagreement
between the two backends.
"""
import argparse
import time

import numpy as np

from dirichlet_ops import _accel


def best_time(fn, repeat):
    fn()
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    rng = np.random.default_rng(0)
    idx = np.arange(1, 4097, dtype=float)
    log_n = np.log(idx)
    coeffs = rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)
    s = 0.5 + 1j * np.linspace(-100, 100, 2000)
    ia = np.arange(1, 2001, dtype=np.int64)
    freqs = np.log(np.array([2.0, 3.0, 5.0]))
    targets = np.array([0.3, 1.0, 2.0])
    return {
        "dirichlet_sum  (4096 terms x 2000 pts)": (
            lambda: _accel._dirichlet_sum_nb(log_n, coeffs, s),
            lambda: _accel._dirichlet_sum_np(log_n, coeffs, s),
            lambda a, b: float(np.max(np.abs(a - b)))),
        "line_max_abs   (256 terms x 1e5 pts)": (
            lambda: _accel._line_max_abs_nb(log_n[:256], coeffs[:256], 0.1 + 0j, 1e-3j, 100_000),
            lambda: _accel._line_max_abs_np(log_n[:256], coeffs[:256], 0.1 + 0j, 1e-3j, 100_000),
            lambda a, b: abs(a[0] - b[0])),
        "pair_enum      (2000 x 2000, limit 1e5)": (
            lambda: _accel._pair_enum_nb(ia, ia, np.int64(100_000)),
            lambda: _accel._pair_enum_np(ia, ia, np.int64(100_000)),
            lambda a, b: float(np.any(a[0] != b[0]) or np.any(a[1] != b[1]))),
        "kronecker_scan (3 freqs, 4e6 steps)": (
            lambda: _accel._kronecker_scan_nb(freqs, targets, 1e-4, 0.0, 5e-5, 4_000_000),
            lambda: _accel._kronecker_scan_np(freqs, targets, 1e-4, 0.0, 5e-5, 4_000_000),
            lambda a, b: float(a != b)),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not _accel.HAVE_NUMBA:
        print("numba backend unavailable (DIRICHLET_OPS_DISABLE_NUMBA set or numba missing)")
        return
    print(f"{'kernel':42s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s} {'max diff':>10s}")
    for name, (nb, np_, diff) in cases().items():
        t_nb = best_time(nb, args.repeat)
        t_np = best_time(np_, args.repeat)
        print(f"{name:42s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f} {diff(nb(), np_()):10.2e}")


if __name__ == "__main__":
    main()
