"""Seeded k-means++ / Lloyd clustering over image embeddings.

This is the relaxation used by the cluster-then-pick selection strategy:
the candidate set is split into exactly K non-empty clusters, so one image
can be drawn from each. Runs are deterministic given (data, K, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .utils import distances_to_point, nearest_centroids

DEFAULT_MAX_ITERS = 100
DEFAULT_TOL = 1e-4

# Full reassignment passes attempted while repairing empty clusters before
# falling back to forced placement (only reachable with duplicate points).
_MAX_REPAIR_PASSES = 4


@dataclass(frozen=True)
class Partition:
    """A disjoint cover of the input rows into K non-empty clusters."""

    assignments: np.ndarray  # cluster id per input row
    centroids: np.ndarray  # (K, D) float64
    objective: float  # sum of squared distances to assigned centroids
    iterations_run: int

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == cluster)


def kmeanspp_init(embeddings, k: int, seed) -> np.ndarray:
    """k-means++ seeding: first centroid uniform, then proportional to the
    squared distance to the nearest centroid chosen so far.

    seed may be an integer or an already-constructed numpy Generator.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    n = x.shape[0]
    _check_k(k, n)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    taken = np.zeros(n, dtype=bool)
    taken[chosen[0]] = True
    d2 = distances_to_point(x, x[chosen[0]]) ** 2
    for step in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # all remaining mass is on duplicates of chosen points
            idx = int(rng.choice(np.flatnonzero(~taken)))
        chosen[step] = idx
        taken[idx] = True
        np.minimum(d2, distances_to_point(x, x[idx]) ** 2, out=d2)
    return x[chosen].copy()


def kmeans(
    embeddings,
    k: int,
    seed,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> Partition:
    """Lloyd iterations from k-means++ seeding.

    Stops when the largest centroid movement (Euclidean) drops below tol or
    after max_iters update cycles. The returned assignments always refer to
    the returned centroids, every cluster is non-empty, and the objective is
    non-increasing across iterations.
    """
    x = np.ascontiguousarray(embeddings, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError(f"embeddings must be 2-D, got shape {x.shape}")
    n = x.shape[0]
    _check_k(k, n)
    if not np.all(np.isfinite(x)):
        raise ValidationError("embeddings contain non-finite values")

    rng = np.random.default_rng(seed)
    centroids = kmeanspp_init(x, k, rng)
    assign, mind2, centroids = _assign_with_repair(x, centroids)
    objective = float(mind2.sum())

    iterations = 0
    for it in range(1, max_iters + 1):
        new_centroids = _centroid_means(x, assign, k)
        movement = float(
            np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        )
        assign, mind2, centroids = _assign_with_repair(x, new_centroids)
        new_objective = float(mind2.sum())
        # Lloyd guarantees monotone descent; tolerate only fp round-off
        assert new_objective <= objective * (1.0 + 1e-12) + 1e-9, (
            f"objective increased: {objective} -> {new_objective}"
        )
        objective = new_objective
        iterations = it
        if movement < tol:
            break
    return Partition(assign, centroids, objective, iterations)


def _check_k(k: int, n: int) -> None:
    if k < 1:
        raise ValidationError(f"K must be >= 1, got {k}")
    if k > n:
        raise ValidationError(f"K = {k} exceeds the {n} candidate rows")


def _centroid_means(x: np.ndarray, assign: np.ndarray, k: int) -> np.ndarray:
    # group rows by cluster with one stable sort, then segment-sum
    order = np.argsort(assign, kind="stable")
    counts = np.bincount(assign, minlength=k)
    starts = np.zeros(k, dtype=np.int64)
    starts[1:] = np.cumsum(counts)[:-1]
    sums = np.add.reduceat(x[order], starts, axis=0)
    return sums / counts[:, None]


def _assign_with_repair(x: np.ndarray, centroids: np.ndarray):
    """Nearest-centroid assignment plus empty-cluster repair.

    Each repair pass turns the farthest points (from clusters that can spare
    one) into singleton centroids for the empty slots, then reassigns. The
    result has no empty cluster and the repair never increases the objective.
    """
    centroids = np.array(centroids, dtype=np.float64)
    k = centroids.shape[0]
    assign, mind2 = nearest_centroids(x, centroids)
    for _ in range(_MAX_REPAIR_PASSES):
        empties = np.flatnonzero(np.bincount(assign, minlength=k) == 0)
        if empties.size == 0:
            return assign, mind2, centroids
        for empty, donor in zip(empties, _donors(assign, mind2, k, empties.size)):
            centroids[empty] = x[donor]
        assign, mind2 = nearest_centroids(x, centroids)

    # duplicate-point pathology: ties at distance zero keep a slot empty;
    # place donors directly (their distance to the forced slot is 0 anyway)
    empties = np.flatnonzero(np.bincount(assign, minlength=k) == 0)
    if empties.size:
        for empty, donor in zip(empties, _donors(assign, mind2, k, empties.size)):
            centroids[empty] = x[donor]
            assign[donor] = empty
            mind2[donor] = 0.0
    return assign, mind2, centroids


def _donors(assign, mind2, k, needed):
    """Farthest points whose clusters keep at least one member, ties broken
    towards the lowest row index."""
    counts = np.bincount(assign, minlength=k)
    donors = []
    for idx in np.argsort(-mind2, kind="stable"):
        if len(donors) == needed:
            break
        c = assign[idx]
        if counts[c] >= 2:
            donors.append(int(idx))
            counts[c] -= 1
    if len(donors) < needed:  # cannot happen while K <= N
        raise ValidationError("not enough points to populate all clusters")
    return donors
