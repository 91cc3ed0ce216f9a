"""Benchmark the hot kernels: numba vs numpy.

Run with ``python benchmarks/bench_kernels.py``. Each pair is checked for
agreement before timings are printed.
"""

import time

import numpy as np

from ofdm_mismatch import kernels
from ofdm_mismatch.admm_x import FilterQuadratic


def benchmark(func, *args, n_warmup=2, n_iter=20):
    """Mean wall time of ``func(*args)`` in ms."""
    for _ in range(n_warmup):
        func(*args)
    start = time.perf_counter()
    for _ in range(n_iter):
        func(*args)
    return (time.perf_counter() - start) / n_iter * 1000


def sweep_runner(sweep, s0, free, m, pen):
    def go():
        s = s0.copy()
        ms = m @ s
        sweep(s, free, m, ms, 1.0, pen)
        return s

    return go


def main():
    rng = np.random.default_rng(0)
    print(f"{'kernel':<10}{'N':>6}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for n in (64, 256, 512):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        h = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        m = FilterQuadratic(h).m
        s0 = np.exp(2j * np.pi * rng.random(n))
        free = np.arange(n, dtype=np.int64)
        pen = 0.1 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))

        cases = [
            ("xcorr", kernels.xcorr_numpy, kernels.xcorr_numba, (x, h)),
            ("gram", kernels.gram_numpy, kernels.gram_numba, (x,)),
            (
                "bcd_sweep",
                sweep_runner(kernels.bcd_sweep_numpy, s0, free, m, pen),
                sweep_runner(kernels.bcd_sweep_numba, s0, free, m, pen),
                (),
            ),
        ]
        for name, f_np, f_nb, args in cases:
            if not np.allclose(f_np(*args), f_nb(*args), atol=1e-8):
                print(f"  WARNING: {name} results differ at N={n}")
            t_np = benchmark(f_np, *args)
            t_nb = benchmark(f_nb, *args)
            print(f"{name:<10}{n:>6}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
