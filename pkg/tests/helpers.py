"""Small builders shared by the test modules."""

from __future__ import annotations

import numpy as np

from alsel import Detection, ImageRecord, Pool


def safe_probs(class_id: int, top: float, num_classes: int) -> tuple[float, ...]:
    """A valid distribution whose arg-max sits at class_id with mass top."""
    assert top >= 1.0 / num_classes, "top mass below uniform cannot win arg-max"
    if num_classes == 1:
        return (1.0,)
    rest = (1.0 - top) / (num_classes - 1)
    return tuple(top if c == class_id else rest for c in range(num_classes))


def det(
    score: float,
    class_id: int = 0,
    num_classes: int | None = None,
    top: float | None = None,
    bbox=(0.0, 0.0, 1.0, 1.0),
) -> Detection:
    """Detection builder; pass num_classes to attach a probs vector."""
    probs = None
    if num_classes is not None:
        mass = top if top is not None else max(float(score), 1.0 / num_classes)
        probs = safe_probs(class_id, mass, num_classes)
    return Detection(tuple(float(b) for b in bbox), float(score), class_id, probs)


def make_pool(
    embeddings,
    detections=None,
    labelled=(),
    num_classes: int = 1,
    ids=None,
) -> Pool:
    """Pool over the given embedding rows.

    detections maps image index (or id) to a detection list; ids default
    to img000, img001, ...
    """
    embeddings = np.asarray(embeddings, dtype=np.float32)
    n = embeddings.shape[0]
    if ids is None:
        ids = [f"img{i:03d}" for i in range(n)]
    detections = detections or {}
    labelled = set(labelled)
    records = []
    for i, iid in enumerate(ids):
        dets = detections.get(iid, detections.get(i, ()))
        records.append(
            ImageRecord(iid, tuple(dets), i, labelled=iid in labelled or i in labelled)
        )
    return Pool(tuple(records), embeddings, num_classes)


def random_scored_pool(rng: np.random.Generator, n: int, dim: int, n_labelled: int = 0):
    """Random embeddings plus random per-image uncertainty scores.

    Returns (pool, uncertainties dict over unlabelled ids).
    """
    emb = rng.normal(size=(n, dim)).astype(np.float32)
    labelled = rng.choice(n, size=n_labelled, replace=False) if n_labelled else ()
    pool = make_pool(emb, labelled=set(int(i) for i in np.atleast_1d(labelled)))
    uncertainties = {iid: float(rng.uniform()) for iid in pool.unlabelled_ids()}
    return pool, uncertainties
