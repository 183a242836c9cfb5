"""Numeric inner loops, compiled with numba unless NLBEAM_DISABLE_NUMBA is set.

Both the jitted and the pure-numpy implementations are importable so the
benchmark can compare them; the public names (``edit_distance_kernel``,
``bin_mean_kernel``) point at whichever path is active.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("NLBEAM_DISABLE_NUMBA", "") not in ("1", "true", "yes")


def _edit_distance_py(a: np.ndarray, b: np.ndarray) -> int:
    """Levenshtein distance between two int32 code sequences, O(len(a)*len(b))."""
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    prev = np.arange(m + 1, dtype=np.int64)
    cur = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        cur[0] = i
        # vectorized row update is not possible for the running minimum,
        # so fall back to minimum over the three classic moves per cell
        sub = prev[:-1] + (b != a[i - 1])
        np.minimum(sub, prev[1:] + 1, out=cur[1:])
        for j in range(1, m + 1):
            if cur[j - 1] + 1 < cur[j]:
                cur[j] = cur[j - 1] + 1
        prev, cur = cur, prev
    return int(prev[m])


def _bin_mean_py(values: np.ndarray, bin_idx: np.ndarray, nbins: int):
    """Per-bin sum and count for flat value/bin-index arrays."""
    sums = np.bincount(bin_idx, weights=values, minlength=nbins)
    counts = np.bincount(bin_idx, minlength=nbins)
    return sums, counts.astype(np.int64)


if USE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _edit_distance_nb(a, b):  # pragma: no cover - exercised via wrapper
        n, m = len(a), len(b)
        if n == 0:
            return m
        if m == 0:
            return n
        prev = np.arange(m + 1)
        cur = np.empty(m + 1, dtype=np.int64)
        for i in range(1, n + 1):
            cur[0] = i
            ai = a[i - 1]
            for j in range(1, m + 1):
                cost = 0 if b[j - 1] == ai else 1
                best = prev[j - 1] + cost
                if prev[j] + 1 < best:
                    best = prev[j] + 1
                if cur[j - 1] + 1 < best:
                    best = cur[j - 1] + 1
                cur[j] = best
            prev, cur = cur, prev
        return prev[m]

    @njit(cache=True)
    def _bin_mean_nb(values, bin_idx, nbins):  # pragma: no cover
        sums = np.zeros(nbins, dtype=np.float64)
        counts = np.zeros(nbins, dtype=np.int64)
        for k in range(values.shape[0]):
            b = bin_idx[k]
            sums[b] += values[k]
            counts[b] += 1
        return sums, counts

    def edit_distance_kernel(a: np.ndarray, b: np.ndarray) -> int:
        return int(_edit_distance_nb(a, b))

    def bin_mean_kernel(values, bin_idx, nbins):
        return _bin_mean_nb(values, bin_idx, nbins)
else:
    edit_distance_kernel = _edit_distance_py
    bin_mean_kernel = _bin_mean_py
