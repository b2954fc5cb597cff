"""Shared numeric helpers: blocked Euclidean distances and worker limits."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

# Rows per block in blocked distance computations. Sized so a block of
# distances to ~2k centroids stays comfortably inside cache-friendly
# territory even at D = 4096.
BLOCK_ROWS = 2048


def worker_count() -> int:
    """Worker cap from ALSEL_THREADS (0 or unset = one per CPU)."""
    raw = os.environ.get("ALSEL_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def sq_norms(x: np.ndarray) -> np.ndarray:
    """Row-wise squared norms, accumulated in float64."""
    x = np.asarray(x)
    return np.einsum("ij,ij->i", x, x, dtype=np.float64)


def _block_sq_dists(block64, c64, bn2, cn2):
    # expanded form ||a||^2 + ||c||^2 - 2 a.c; clamp cancellation noise
    d2 = bn2[:, None] + cn2[None, :] - 2.0 * (block64 @ c64.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def nearest_centroids(x: np.ndarray, centroids: np.ndarray):
    """Assign each row of x to its nearest centroid (ties: lowest index).

    Returns (assignments int64, squared distance to the assigned centroid).
    Work is blocked over rows; blocks run on up to worker_count() threads.
    Identical inputs give identical outputs regardless of thread count.
    """
    c64 = np.ascontiguousarray(centroids, dtype=np.float64)
    cn2 = sq_norms(c64)
    n = x.shape[0]
    assign = np.empty(n, dtype=np.int64)
    mind2 = np.empty(n, dtype=np.float64)

    def do_block(start: int):
        stop = min(start + BLOCK_ROWS, n)
        b64 = np.asarray(x[start:stop], dtype=np.float64)
        d2 = _block_sq_dists(b64, c64, sq_norms(b64), cn2)
        a = d2.argmin(axis=1)
        assign[start:stop] = a
        mind2[start:stop] = d2[np.arange(stop - start), a]

    starts = range(0, n, BLOCK_ROWS)
    workers = min(worker_count(), max(1, len(starts)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(do_block, starts))
    else:
        for s in starts:
            do_block(s)
    return assign, mind2


def distances_to_point(x: np.ndarray, point: np.ndarray) -> np.ndarray:
    """Euclidean distances from every row of x to one point, in float64."""
    p64 = np.asarray(point, dtype=np.float64)
    pn2 = float(p64 @ p64)
    n = x.shape[0]
    out = np.empty(n, dtype=np.float64)
    for start in range(0, n, BLOCK_ROWS):
        stop = min(start + BLOCK_ROWS, n)
        b64 = np.asarray(x[start:stop], dtype=np.float64)
        d2 = sq_norms(b64) + pn2 - 2.0 * (b64 @ p64)
        np.maximum(d2, 0.0, out=d2)
        out[start:stop] = np.sqrt(d2)
    return out


def cross_distance_sums(x: np.ndarray, refs: np.ndarray) -> np.ndarray:
    """Sum over refs of Euclidean distance from each row of x.

    Equivalent to stacking distances_to_point over every reference row, but
    blocked over both sides so the full distance matrix never materialises.
    """
    r64 = np.ascontiguousarray(refs, dtype=np.float64)
    if r64.ndim != 2:
        raise ValueError("refs must be 2-D")
    rn2 = sq_norms(r64)
    n = x.shape[0]
    sums = np.zeros(n, dtype=np.float64)
    for start in range(0, n, BLOCK_ROWS):
        stop = min(start + BLOCK_ROWS, n)
        b64 = np.asarray(x[start:stop], dtype=np.float64)
        d2 = _block_sq_dists(b64, r64, sq_norms(b64), rn2)
        sums[start:stop] = np.sqrt(d2).sum(axis=1)
    return sums
