#!/usr/bin/env python3
"""Benchmark the compiled beampattern kernel against the numpy fallback,
plus the zero-padding FFT path against direct matched filtering.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

import rfda
from rfda.kernels import HAVE_COMPILED, reference_rho_pointwise, rho_pointwise
from rfda.processing import build_observing_matrix, canonical_grid, matched_filter, zero_padding_2dfft


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_rho():
    print("rho_pointwise: compiled kernel vs numpy fallback")
    print(f"  compiled extension available: {HAVE_COMPILED}")
    rng = np.random.default_rng(0)
    cases = [(2000, 64, 441), (10000, 128, 25), (500, 256, 1024)]
    print(f"  {'trials':>7} {'N':>4} {'offsets':>8} {'compiled':>10} {'numpy':>10} {'ratio':>7}")
    for trials, n, g in cases:
        m = rng.normal(0, 5, (trials, n))
        q = rng.uniform(-0.5, 0.5, g)
        p = rng.uniform(-0.5, 0.5, g)
        t_ext = best_of(lambda: rho_pointwise(m, q, p), repeats=3) if HAVE_COMPILED else float("nan")
        t_ref = best_of(lambda: reference_rho_pointwise(m, q, p), repeats=3)
        ratio = t_ref / t_ext if HAVE_COMPILED else float("nan")
        print(f"  {trials:>7} {n:>4} {g:>8} {t_ext:>9.3f}s {t_ref:>9.3f}s {ratio:>6.2f}x")


def bench_fft_path():
    print("\nmatched filter: zero-padding 2D-FFT vs direct inner products (N=256, M=128)")
    cfg = rfda.ArrayConfig(256, 0.025, 3e9, 1e6)
    dist = rfda.DiscreteUniform(128)
    draw = rfda.sample_frequencies(dist, 256, 1)
    grid = canonical_grid(cfg, 128)
    obs = build_observing_matrix(cfg, draw, grid)
    theta, r = grid.point(grid.flat_index(17, 40))
    echo = rfda.synthesize_echoes(cfg, draw, rfda.TargetScene.single(theta, r), 0.01, 2)
    t_direct = best_of(lambda: matched_filter(echo, obs))
    t_fft = best_of(lambda: zero_padding_2dfft(echo.samples[:, 0], draw, 128))
    print(f"  direct: {t_direct * 1e3:8.2f} ms   fft: {t_fft * 1e3:8.2f} ms   "
          f"speedup {t_direct / t_fft:.1f}x (dictionary build excluded)")


if __name__ == "__main__":
    bench_rho()
    bench_fft_path()
