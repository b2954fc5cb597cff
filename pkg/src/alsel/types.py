"""Domain types for detection pools and selection results.

An embedding matrix is represented as a plain 2-D numpy array (one row per
image); there is no wrapper class. All types here are immutable after
construction — pool labelling state changes only by building a new Pool via
:meth:`Pool.with_labelled`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError

PROBS_SUM_TOL = 1e-6


@dataclass(frozen=True)
class Detection:
    """One detector output: a box, a confidence score, and a class.

    bbox is (x, y, width, height) in pixels. probs, when present, is the
    detector's class-probability distribution over all classes; the reported
    class_id must attain its maximum.
    """

    bbox: tuple[float, float, float, float]
    score: float
    class_id: int
    probs: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    detections: tuple[Detection, ...]
    embedding_index: int
    labelled: bool = False


@dataclass(frozen=True)
class Pool:
    """A labelled/unlabelled image pool plus its embedding matrix.

    images[i].embedding_index addresses a row of embeddings. The labelled
    and unlabelled sets are disjoint and cover all images by construction
    (each record carries exactly one status flag).
    """

    images: tuple[ImageRecord, ...]
    embeddings: np.ndarray
    num_classes: int
    _index_by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        images = tuple(self.images)
        object.__setattr__(self, "images", images)
        emb = np.asarray(self.embeddings)
        emb.setflags(write=False)
        object.__setattr__(self, "embeddings", emb)
        object.__setattr__(
            self, "_index_by_id", {r.image_id: i for i, r in enumerate(images)}
        )

    def __len__(self) -> int:
        return len(self.images)

    def record(self, image_id: str) -> ImageRecord:
        try:
            return self.images[self._index_by_id[image_id]]
        except KeyError:
            raise ValidationError(f"unknown image_id {image_id!r}") from None

    def labelled_ids(self) -> list[str]:
        return [r.image_id for r in self.images if r.labelled]

    def unlabelled_ids(self) -> list[str]:
        return [r.image_id for r in self.images if not r.labelled]

    def with_labelled(self, image_ids: Sequence[str]) -> "Pool":
        """Return a new Pool with the given (currently unlabelled) ids labelled."""
        moving = set(image_ids)
        unknown = moving - set(self._index_by_id)
        if unknown:
            raise ValidationError(f"unknown image ids: {sorted(unknown)}")
        for iid in moving:
            if self.images[self._index_by_id[iid]].labelled:
                raise ValidationError(f"image {iid!r} is already labelled")
        images = tuple(
            ImageRecord(r.image_id, r.detections, r.embedding_index, True)
            if r.image_id in moving
            else r
            for r in self.images
        )
        return Pool(images, self.embeddings, self.num_classes)


@dataclass(frozen=True)
class SelectionResult:
    """An ordered labelling batch plus the per-pick audit trail.

    audit has one entry per selected id, in pick order. Entries are dicts
    with keys id/u/v/z/cluster; values not applicable to the method are None
    (e.g. cluster for the greedy method, v and z for pure-uncertainty picks).
    """

    method: str
    iteration: int
    selected: tuple[str, ...]
    audit: tuple[Mapping, ...]
    alpha_used: float | None = None

    def __post_init__(self):
        if len(self.audit) != len(self.selected):
            raise ValidationError("audit length must equal selected length")


@dataclass(frozen=True)
class AlphaState:
    """Current diversity weight and the iteration that produced it."""

    value: float
    iteration: int = 0

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValidationError(f"alpha {self.value} outside [0, 1]")


def _validate_detection(det: Detection, num_classes: int, where: str) -> list[str]:
    problems = []
    if len(det.bbox) != 4:
        problems.append(f"{where}: bbox must have 4 entries")
    else:
        _, _, w, h = det.bbox
        if w < 0 or h < 0:
            problems.append(f"{where}: bbox width/height must be >= 0")
    if not 0.0 <= det.score <= 1.0:
        problems.append(f"{where}: score {det.score} outside [0, 1]")
    if not 0 <= det.class_id < num_classes:
        problems.append(
            f"{where}: class_id {det.class_id} outside [0, {num_classes})"
        )
    if det.probs is not None:
        p = np.asarray(det.probs, dtype=np.float64)
        if p.ndim != 1 or p.size != num_classes:
            problems.append(
                f"{where}: probs has {p.size} entries, expected {num_classes}"
            )
            return problems
        if np.any(p < 0.0) or np.any(p > 1.0):
            problems.append(f"{where}: probs entries outside [0, 1]")
        if abs(float(p.sum()) - 1.0) > PROBS_SUM_TOL:
            problems.append(f"{where}: probs sum {p.sum():.8f} differs from 1")
        # class_id must attain the maximum (ties are fine either way)
        elif 0 <= det.class_id < p.size and p[det.class_id] < p.max():
            problems.append(
                f"{where}: class_id {det.class_id} does not attain max of probs"
            )
    return problems


def validate_pool(pool: Pool) -> list[str]:
    """Check every type invariant; return one message per violation.

    An empty list means the pool is well formed. Nothing is raised: callers
    decide whether violations are fatal.
    """
    problems: list[str] = []
    emb = np.asarray(pool.embeddings)
    if emb.ndim != 2:
        problems.append(f"embeddings must be 2-D, got shape {emb.shape}")
        return problems
    n_rows = emb.shape[0]
    if emb.size and not np.all(np.isfinite(emb)):
        bad = int(np.argwhere(~np.isfinite(emb))[0][0])
        problems.append(f"embeddings contain non-finite values (first at row {bad})")
    if pool.num_classes < 1:
        problems.append(f"num_classes must be >= 1, got {pool.num_classes}")

    seen: set[str] = set()
    for rec in pool.images:
        if rec.image_id in seen:
            problems.append(f"duplicate image_id {rec.image_id!r}")
        seen.add(rec.image_id)
        if not 0 <= rec.embedding_index < n_rows:
            problems.append(
                f"image {rec.image_id!r}: embedding_index {rec.embedding_index} "
                f"outside [0, {n_rows})"
            )
        for j, det in enumerate(rec.detections):
            problems.extend(
                _validate_detection(
                    det, pool.num_classes, f"image {rec.image_id!r} detection {j}"
                )
            )
    return problems
