"""Benchmark the numba kernels against the pure-numpy fallback.

Runs every hot kernel on realistic stream sizes and prints per-call times
for both backends plus the first-call (JIT compile) cost. Usage:

    python benchmarks/bench_kernels.py [--packets 100000] [--subcarriers 52]
"""

import argparse
import time

import numpy as np

from lofi._kernels import numpy_backend

try:
    from lofi._kernels import numba_backend
except ImportError:
    numba_backend = None


def timed(func, args, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = func(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def make_stream(packets, subcarriers, loss=0.15, seed=0):
    rng = np.random.default_rng(seed)
    keep = rng.random(packets) > loss
    keep[[0, -1]] = True
    ts = (np.arange(packets) / 100.0)[keep]
    n = ts.shape[0]
    rssi = rng.normal(-45.0, 3.0, size=n)
    amp = np.ascontiguousarray(rng.uniform(0.2, 4.0, size=(n, subcarriers)))
    phase = np.ascontiguousarray(rng.uniform(-np.pi, np.pi, size=(n, subcarriers)))
    return ts, rssi, amp, phase


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--packets", type=int, default=100_000)
    parser.add_argument("--subcarriers", type=int, default=52)
    args = parser.parse_args()

    ts, rssi, amp, phase = make_stream(args.packets, args.subcarriers)
    lost = numpy_backend.count_lost_batch(ts, 100.0)
    labels = np.arange(0.0, ts[-1] + 1.0, 1 / 26.0)
    rng = np.random.default_rng(1)
    q = rng.normal(size=(200, args.subcarriers ** 2))
    t = rng.normal(size=(1000, args.subcarriers ** 2))

    cases = [
        ("count_lost_batch", (ts, 100.0)),
        ("unwrap_phase", (phase,)),
        ("fill_gaps", (ts, rssi, amp, phase, lost)),
        ("nearest_indices", (ts, labels)),
        ("pairwise_sq_dists", (q, t)),
    ]

    print(f"{ts.shape[0]} packets x {args.subcarriers} subcarriers, "
          f"{int(lost.sum())} lost; times are best of 5")
    header = f"{'kernel':<20} {'numpy':>12} {'numba':>12} {'speedup':>9} {'jit 1st call':>13}"
    print(header)
    print("-" * len(header))

    for name, call_args in cases:
        t_np, _ = timed(getattr(numpy_backend, name), call_args)
        if numba_backend is None:
            print(f"{name:<20} {t_np * 1e3:>10.2f}ms {'n/a':>12} {'n/a':>9} {'n/a':>13}")
            continue
        fn = getattr(numba_backend, name)
        t0 = time.perf_counter()
        fn(*call_args)  # includes compilation (or cache load) on first call
        first = time.perf_counter() - t0
        t_nb, _ = timed(fn, call_args)
        print(f"{name:<20} {t_np * 1e3:>10.2f}ms {t_nb * 1e3:>10.2f}ms "
              f"{t_np / t_nb:>8.1f}x {first * 1e3:>11.1f}ms")

    if numba_backend is None:
        print("\nnumba not importable; only the fallback was measured")


if __name__ == "__main__":
    main()
