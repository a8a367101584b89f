"""Compiled inner loops for path aggregation and disparity selection.

These mirror the numpy reference in ``matching`` operation for operation, so
results are bit-identical to it.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _step_into(prev, row, p1, p2, q, cur):
    n_levels = prev.shape[0]
    m = prev[0]
    for k in range(1, n_levels):
        if prev[k] < m:
            m = prev[k]
    for k in range(n_levels):
        q[k] = prev[k] - m
    for k in range(n_levels):
        b = min(q[k], p2)
        if k > 0:
            b = min(b, q[k - 1] + p1)
        if k < n_levels - 1:
            b = min(b, q[k + 1] + p1)
        cur[k] = row[k] + b


@njit(cache=True, nogil=True)
def accumulate_path(costs, dx, dy, p1, p2, total):
    """Add the path-(dx, dy) aggregated costs into ``total`` in place."""
    h, w, n_levels = costs.shape
    q = np.empty(n_levels)
    if dy == 0:
        prev = np.empty((h, n_levels))
        cur = np.empty((h, n_levels))
        for t in range(w):
            x = t if dx > 0 else w - 1 - t
            for y in range(h):
                if t == 0:
                    for k in range(n_levels):
                        cur[y, k] = costs[y, x, k]
                else:
                    _step_into(prev[y], costs[y, x], p1, p2, q, cur[y])
                for k in range(n_levels):
                    total[y, x, k] += cur[y, k]
            prev, cur = cur, prev
    else:
        prev = np.empty((w, n_levels))
        cur = np.empty((w, n_levels))
        for t in range(h):
            y = t if dy > 0 else h - 1 - t
            for x in range(w):
                xp = x - dx
                if t == 0 or xp < 0 or xp >= w:
                    for k in range(n_levels):
                        cur[x, k] = costs[y, x, k]
                else:
                    _step_into(prev[xp], costs[y, x], p1, p2, q, cur[x])
                for k in range(n_levels):
                    total[y, x, k] += cur[x, k]
            prev, cur = cur, prev


@njit(cache=True, nogil=True)
def select(costs, min_disp, subpixel, uniqueness_ratio, out):
    h, w, n_levels = costs.shape
    for y in range(h):
        for x in range(w):
            c = costs[y, x]
            kb = 0
            best = c[0]
            for k in range(1, n_levels):
                if c[k] < best:
                    best = c[k]
                    kb = k
            d = float(min_disp + kb)
            if subpixel and 0 < kb < n_levels - 1:
                lo = c[kb - 1]
                hi = c[kb + 1]
                denom = lo + hi - 2.0 * best
                if denom > 0:
                    d += (lo - hi) / (2.0 * denom)
            if uniqueness_ratio > 0:
                second = np.inf
                for k in range(n_levels):
                    if abs(k - kb) > 1 and c[k] < second:
                        second = c[k]
                if second <= best * (1.0 + uniqueness_ratio):
                    d = np.nan
            out[y, x] = d
