"""Benchmark the compiled CRP Gibbs kernel against the numpy fallback.

Run: python3 benchmarks/bench_gibbs.py
"""

import time

import numpy as np

from swipeguard import _crp_py
from swipeguard.models import dp_mixture as dpm

try:
    from swipeguard import _crp as _crp_native
except ImportError:
    _crp_native = None


def dataset(n, d, seed):
    rng = np.random.default_rng(seed)
    half = n // 2
    a = rng.normal(-2.0, 1.0, size=(half, d))
    b = rng.normal(2.0, 1.0, size=(n - half, d))
    return [row for row in np.concatenate([a, b])]


def time_backend(kernel, data, hyper, repeats=5):
    best = np.inf
    for seed in range(repeats):
        start = time.perf_counter()
        state = dpm.train_dpgmm(data, hyper, seed=seed, kernel=kernel)
        best = min(best, time.perf_counter() - start)
    return best, state


def main():
    hyper = dpm.DPHyperParams(alpha=1.0, sigma_y_sq=1.0)
    print(f"{'case':>14} {'python':>10} {'compiled':>10} {'speedup':>8}  agree")
    for n, d in ((20, 10), (40, 70), (100, 70), (200, 140)):
        data = dataset(n, d, seed=n + d)
        t_py, s_py = time_backend(_crp_py, data, hyper)
        if _crp_native is None:
            print(f"{f'n={n} d={d}':>14} {t_py:>9.4f}s {'—':>10} {'—':>8}")
            continue
        t_c, s_c = time_backend(_crp_native, data, hyper)
        agree = np.array_equal(s_py.assignments, s_c.assignments)
        print(
            f"{f'n={n} d={d}':>14} {t_py:>9.4f}s {t_c:>9.4f}s {t_py / t_c:>7.1f}x  {agree}"
        )


if __name__ == "__main__":
    main()
