"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the LSTONE_DISABLE_NUMBA flag does not
matter here.  Each kernel is warmed up once (numba compiles on first call)
and results are checked for equality before timing.
"""
import argparse
import time

import numpy as np

from lstone import make_random, make_thresholds
from lstone._kernels import _numba as nb
from lstone._kernels import _numpy as npk


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    classes = [make_random(12, 64, seed=s) for s in range(4)] + [make_thresholds(40)]

    def ldim_all(mod):
        def run():
            return [mod.LdimTable(c.ones, len(c)).ldim(c.full_mask) for c in classes]
        return run

    def soa_all(mod):
        def run():
            return [mod.LdimTable(c.ones, len(c)).soa_labels(c.full_mask).tolist() for c in classes]
        return run

    h = rng.integers(0, 2, 64).astype(np.uint8)
    xs = rng.integers(0, 64, 1_000_000).astype(np.int64)
    ys = h[xs].copy()
    ys[-1] ^= 1

    big = make_random(16, 2000, seed=1)
    counts = rng.integers(0, 100, big.m).astype(np.int64)
    uniforms = rng.random((200, 4096))

    yield "ldim (5 classes, 64 hyps)", ldim_all(npk), ldim_all(nb)
    yield "soa labels (5 classes)", soa_all(npk), soa_all(nb)
    yield "first_mismatch (1e6)", lambda: npk.first_mismatch(h, xs, ys, 0), lambda: nb.first_mismatch(h, xs, ys, 0)
    yield "pattern_count (2000x16)", lambda: npk.pattern_count(big.matrix), lambda: nb.pattern_count(big.matrix)
    yield "masses (2000x16)", lambda: npk.masses(big.matrix, counts).tolist(), lambda: nb.masses(big.matrix, counts).tolist()
    yield "retain_batch (200x4096)", lambda: npk.retain_batch(4096, 100, uniforms).tolist(), \
        lambda: nb.retain_batch(4096, 100, uniforms).tolist()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':28s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}")
    for name, f_np, f_nb in cases():
        a, b = f_np(), f_nb()  # warm-up and parity
        assert a == b, f"backends disagree on {name}"
        t_np, t_nb = best_of(f_np, args.repeat), best_of(f_nb, args.repeat)
        print(f"{name:28s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
