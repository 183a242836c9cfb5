"""Benchmark the compiled kernels against their pure-numpy fallbacks.

Run:  python benchmarks/bench_kernels.py
The fallback path can also be forced package-wide with NLBEAM_DISABLE_NUMBA=1.
"""

import random
import string
import time

import numpy as np

from nlbeam._kernels import USE_NUMBA, _bin_mean_py, _edit_distance_py


def _time(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_edit_distance(length=2000):
    rng = random.Random(0)
    a = np.array(
        [ord(rng.choice(string.ascii_lowercase)) for _ in range(length)], dtype=np.int32
    )
    b = np.array(
        [ord(rng.choice(string.ascii_lowercase)) for _ in range(length)], dtype=np.int32
    )
    rows = [("numpy", _time(_edit_distance_py, a, b))]
    if USE_NUMBA:
        from nlbeam._kernels import _edit_distance_nb

        _edit_distance_nb(a[:8], b[:8])  # compile outside the timed region
        assert int(_edit_distance_nb(a, b)) == _edit_distance_py(a, b)
        rows.append(("numba", _time(_edit_distance_nb, a, b)))
    return rows


def bench_bin_mean(n=4_000_000, nbins=400):
    rng = np.random.default_rng(0)
    values = rng.random(n)
    bins = rng.integers(0, nbins, size=n)
    rows = [("numpy", _time(_bin_mean_py, values, bins, nbins))]
    if USE_NUMBA:
        from nlbeam._kernels import _bin_mean_nb

        _bin_mean_nb(values[:8], bins[:8], nbins)
        s1, c1 = _bin_mean_nb(values, bins, nbins)
        s2, c2 = _bin_mean_py(values, bins, nbins)
        assert np.allclose(s1, s2) and np.array_equal(c1, c2)
        rows.append(("numba", _time(_bin_mean_nb, values, bins, nbins)))
    return rows


def main():
    print(f"numba available and enabled: {USE_NUMBA}")
    for name, rows in (
        ("edit_distance (2000x2000 chars)", bench_edit_distance()),
        ("bin_mean (4M values, 400 bins)", bench_bin_mean()),
    ):
        print(f"\n{name}")
        base = rows[0][1]
        for impl, seconds in rows:
            speedup = base / seconds
            print(f"  {impl:<6} {seconds * 1e3:9.2f} ms   ({speedup:5.1f}x vs numpy)")


if __name__ == "__main__":
    main()
