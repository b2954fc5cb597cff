"""Pure scoring kernels: image uncertainty, embedding diversity, and the
per-detection entropy/margin scores used by the baseline strategies.

All operations are stateless and accumulate in float64 regardless of the
input dtype.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .types import PROBS_SUM_TOL, Detection


@dataclass(frozen=True)
class EmptyDetectionPolicy:
    """Uncertainty assigned to an image with no detections.

    The mean-of-(1 - score) definition is undefined on an empty detection
    set; the default constant 0.0 treats such images as carrying no
    uncertainty signal. value=1.0 gives the opposite reading (a silent
    detector is maximally uncertain).
    """

    value: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValidationError(f"empty-detection value {self.value} outside [0, 1]")


def image_uncertainty(
    detections: Sequence[Detection],
    policy: EmptyDetectionPolicy = EmptyDetectionPolicy(),
) -> float:
    """Mean of (1 - score) over the image's detections.

    Empty detection sets return the policy constant.
    """
    if not detections:
        return policy.value
    total = 0.0
    for det in detections:
        s = float(det.score)
        if not 0.0 <= s <= 1.0:
            raise ValidationError(f"detection score {s} outside [0, 1]")
        total += 1.0 - s
    return total / len(detections)


def mean_embedding_distance(query, refs) -> float:
    """Mean Euclidean distance from a query embedding to a reference set.

    refs is a non-empty 2-D array (one reference per row) or a sequence of
    vectors of the same dimension as query.
    """
    q = np.asarray(query, dtype=np.float64)
    r = np.asarray(refs, dtype=np.float64)
    if r.ndim == 1 and r.size and q.ndim == 1:
        r = r.reshape(1, -1)
    if r.size == 0:
        raise ValidationError("reference set is empty")
    if q.ndim != 1 or r.ndim != 2 or r.shape[1] != q.shape[0]:
        raise ValidationError(
            f"dimension mismatch: query {q.shape}, refs {r.shape}"
        )
    return float(np.linalg.norm(r - q, axis=1).mean())


def _check_distribution(probs) -> np.ndarray:
    if probs is None:
        raise ValidationError("class-probability distribution is missing")
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError("probs must be a non-empty vector")
    if np.any(p < 0.0):
        raise ValidationError("probs entries must be >= 0")
    if abs(float(p.sum()) - 1.0) > PROBS_SUM_TOL:
        raise ValidationError(f"probs sum {p.sum():.8f} differs from 1")
    return p


def detection_entropy(probs) -> float:
    """Shannon entropy (natural log) of a class distribution; 0*ln 0 := 0."""
    p = _check_distribution(probs)
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum())


def detection_margin_uncertainty(probs) -> float:
    """1 - (best minus second-best class probability)."""
    p = _check_distribution(probs)
    if p.size < 2:
        raise ValidationError("margin needs at least 2 classes")
    top2 = np.partition(p, -2)[-2:]
    return float(1.0 - (top2[1] - top2[0]))


def aggregate(values: Iterable[float], mode: str, empty_value: float = 0.0) -> float:
    """Combine per-detection scores into one image score."""
    vals = [float(v) for v in values]
    if not vals:
        return float(empty_value)
    if mode == "min":
        return min(vals)
    if mode == "max":
        return max(vals)
    if mode == "sum":
        return float(sum(vals))
    if mode == "avg":
        return float(sum(vals)) / len(vals)
    raise ValidationError(f"unknown aggregation mode {mode!r}")
