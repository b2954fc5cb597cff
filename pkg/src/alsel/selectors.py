"""Batch selection strategies.

Two embedding-aware methods — cluster-then-pick and greedy
uncertainty/diversity blending — plus the score-only baseline families
(random, top-uncertainty, entropy aggregation, margin aggregation).

Every selector returns a SelectionResult with exactly
min(budget, #unlabelled) distinct ids and a per-pick audit record. Ties are
broken everywhere towards the lowest image_id, which makes runs reproducible
and lets tests compare against brute-force re-scoring pick by pick.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import scoring
from .clustering import kmeans
from .errors import EmptyPoolError, ValidationError
from .types import AlphaState, ImageRecord, Pool, SelectionResult
from .utils import cross_distance_sums, sq_norms

METHODS = (
    "method1",
    "method2",
    "random",
    "uncert",
    "roy-min",
    "roy-max",
    "roy-sum",
    "brust-sum",
    "brust-avg",
    "brust-max",
)

DIVERSITY_NORMS = ("none", "max")


@dataclass(frozen=True)
class SelectorConfig:
    """Knobs shared by the selection strategies.

    diversity_norm "max" divides each candidate's diversity by the largest
    diversity among the remaining candidates at every greedy step, so the
    blend weight acts on comparable [0, 1] scales; "none" blends the raw
    mean distance. Tie-breaks are fixed (lowest image_id) and the blend
    weight is always clamped to [0, 1].
    """

    budget: int
    seed: int = 0
    alpha0: float = 0.5
    diversity_norm: str = "max"
    empty_policy: scoring.EmptyDetectionPolicy = scoring.EmptyDetectionPolicy()

    def __post_init__(self):
        if self.budget < 1:
            raise ValidationError(f"budget must be >= 1, got {self.budget}")
        if not 0.0 <= self.alpha0 <= 1.0:
            raise ValidationError(f"alpha0 {self.alpha0} outside [0, 1]")
        if self.diversity_norm not in DIVERSITY_NORMS:
            raise ValidationError(
                f"diversity_norm must be one of {DIVERSITY_NORMS}"
            )


class RunningDistanceSums:
    """Incrementally maintained Σ-of-distances from candidates to a
    growing reference set.

    Distances are computed with cached squared norms in float64; the sums
    therefore match a from-scratch recomputation of the mean-distance
    diversity up to accumulation round-off.
    """

    def __init__(self, candidates: np.ndarray, refs: np.ndarray | None = None):
        x = np.ascontiguousarray(candidates, dtype=np.float64)
        if x.ndim != 2:
            raise ValidationError("candidates must be a 2-D array")
        self._x = x
        self._norms2 = sq_norms(x)
        self.sums = np.zeros(x.shape[0], dtype=np.float64)
        self.count = 0
        if refs is not None and len(refs):
            refs = np.asarray(refs, dtype=np.float64)
            if refs.ndim != 2 or refs.shape[1] != x.shape[1]:
                raise ValidationError(
                    f"reference dimension {refs.shape} does not match "
                    f"candidates {x.shape}"
                )
            self.sums = cross_distance_sums(x, refs)
            self.count = refs.shape[0]

    def add(self, ref) -> None:
        p = np.asarray(ref, dtype=np.float64)
        if p.shape != (self._x.shape[1],):
            raise ValidationError(
                f"reference dimension {p.shape} does not match candidates "
                f"of dim {self._x.shape[1]}"
            )
        d2 = self._norms2 + float(p @ p) - 2.0 * (self._x @ p)
        np.maximum(d2, 0.0, out=d2)
        self.sums += np.sqrt(d2)
        self.count += 1

    def means(self) -> np.ndarray:
        if self.count == 0:
            raise ValidationError("no reference vectors added yet")
        return self.sums / self.count


def update_alpha(alpha: AlphaState, budget: int, n_unlabelled: int) -> AlphaState:
    """Decrement the diversity weight by budget / (2 * #unlabelled), clamped."""
    if n_unlabelled < 1:
        raise ValidationError("n_unlabelled must be >= 1")
    if budget < 0:
        raise ValidationError("budget must be >= 0")
    value = alpha.value - budget / (2.0 * n_unlabelled)
    return AlphaState(min(max(value, 0.0), 1.0), alpha.iteration + 1)


def _candidates(pool: Pool) -> list[ImageRecord]:
    cands = sorted(
        (r for r in pool.images if not r.labelled), key=lambda r: r.image_id
    )
    if not cands:
        raise EmptyPoolError("no unlabelled images to select from")
    return cands


def _uncertainty_vector(
    cands: Sequence[ImageRecord], uncertainties: Mapping[str, float]
) -> np.ndarray:
    u = np.empty(len(cands), dtype=np.float64)
    for i, rec in enumerate(cands):
        try:
            u[i] = uncertainties[rec.image_id]
        except KeyError:
            raise ValidationError(
                f"no uncertainty score for unlabelled image {rec.image_id!r}"
            ) from None
    return u


def select_method1(
    pool: Pool,
    uncertainties: Mapping[str, float],
    budget: int,
    seed: int,
) -> SelectionResult:
    """Cluster-then-pick: k-means over unlabelled embeddings with
    K = min(budget, #unlabelled), then the highest-uncertainty image of
    each cluster."""
    cands = _candidates(pool)
    u = _uncertainty_vector(cands, uncertainties)
    k = min(budget, len(cands))
    rows = pool.embeddings[[r.embedding_index for r in cands]]
    part = kmeans(rows, k, seed)

    # group candidate indices by cluster; stable sort keeps each group in
    # ascending candidate order, i.e. ascending image_id
    order = np.argsort(part.assignments, kind="stable")
    counts = np.bincount(part.assignments, minlength=k)
    bounds = np.concatenate([[0], np.cumsum(counts)])

    selected, audit = [], []
    for c in range(k):
        members = order[bounds[c]:bounds[c + 1]]
        pick = int(members[np.argmax(u[members])])  # first max = lowest id
        selected.append(cands[pick].image_id)
        audit.append(
            {
                "id": cands[pick].image_id,
                "u": float(u[pick]),
                "v": None,
                "z": None,
                "cluster": c,
            }
        )
    return SelectionResult("method1", 0, tuple(selected), tuple(audit))


def select_method2(
    pool: Pool,
    uncertainties: Mapping[str, float],
    alpha: AlphaState,
    budget: int,
    config: SelectorConfig,
) -> SelectionResult:
    """Greedy blended selection.

    The first pick is the most uncertain image. Every later pick maximises
    (1 - alpha) * u + alpha * v where v is the mean embedding distance to
    the reference set (all labelled images plus the picks made so far),
    maintained incrementally and optionally divided by the running maximum
    over the remaining candidates.
    """
    cands = _candidates(pool)
    u = _uncertainty_vector(cands, uncertainties)
    n = len(cands)
    budget_eff = min(budget, n)
    a = alpha.value

    rows = pool.embeddings[[r.embedding_index for r in cands]]
    labelled_rows = pool.embeddings[
        [r.embedding_index for r in pool.images if r.labelled]
    ]
    state = RunningDistanceSums(rows, labelled_rows if len(labelled_rows) else None)

    taken = np.zeros(n, dtype=bool)
    selected, audit = [], []
    for step in range(budget_eff):
        if step == 0:
            pick = int(np.argmax(np.where(taken, -np.inf, u)))
            v_pick = float(state.means()[pick]) if state.count else None
            z_pick = None
        else:
            v = state.means()
            v_masked = np.where(taken, -np.inf, v)
            if config.diversity_norm == "max":
                vmax = float(v_masked.max())
                v_used = v / vmax if vmax > 0.0 else np.zeros_like(v)
            else:
                v_used = v
            z = (1.0 - a) * u + a * v_used
            pick = int(np.argmax(np.where(taken, -np.inf, z)))
            v_pick = float(v[pick])
            z_pick = float(z[pick])
        taken[pick] = True
        selected.append(cands[pick].image_id)
        audit.append(
            {
                "id": cands[pick].image_id,
                "u": float(u[pick]),
                "v": v_pick,
                "z": z_pick,
                "cluster": None,
            }
        )
        state.add(rows[pick])
    return SelectionResult(
        "method2", 0, tuple(selected), tuple(audit), alpha_used=a
    )


def select_random(pool: Pool, budget: int, seed: int) -> SelectionResult:
    """Uniform sample without replacement from the unlabelled ids."""
    cands = _candidates(pool)
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(cands), size=min(budget, len(cands)), replace=False)
    selected = tuple(cands[int(i)].image_id for i in idx)
    audit = tuple(
        {"id": iid, "u": None, "v": None, "z": None, "cluster": None}
        for iid in selected
    )
    return SelectionResult("random", 0, selected, audit)


def _top_by_score(
    method: str, cands: Sequence[ImageRecord], scores: np.ndarray, budget: int
) -> SelectionResult:
    order = np.argsort(-scores, kind="stable")[: min(budget, len(cands))]
    selected, audit = [], []
    for i in order:
        selected.append(cands[int(i)].image_id)
        audit.append(
            {
                "id": cands[int(i)].image_id,
                "u": float(scores[int(i)]),
                "v": None,
                "z": None,
                "cluster": None,
            }
        )
    return SelectionResult(method, 0, tuple(selected), tuple(audit))


def select_top_uncertainty(
    pool: Pool, uncertainties: Mapping[str, float], budget: int
) -> SelectionResult:
    """Top-budget images by uncertainty score."""
    cands = _candidates(pool)
    return _top_by_score("uncert", cands, _uncertainty_vector(cands, uncertainties), budget)


def _require_probs(rec: ImageRecord) -> None:
    for det in rec.detections:
        if det.probs is None:
            raise ValidationError(
                f"image {rec.image_id!r}: detection lacks the class-probability "
                "distribution required by this selector"
            )


def select_roy(pool: Pool, budget: int, aggregator: str) -> SelectionResult:
    """Entropy-based baseline: aggregate per-detection class entropies
    (min, max, or sum) into an image score; images without detections
    score 0."""
    if aggregator not in ("min", "max", "sum"):
        raise ValidationError(f"aggregator must be min|max|sum, got {aggregator!r}")
    cands = _candidates(pool)
    scores = np.empty(len(cands), dtype=np.float64)
    for i, rec in enumerate(cands):
        _require_probs(rec)
        ent = [scoring.detection_entropy(d.probs) for d in rec.detections]
        scores[i] = scoring.aggregate(ent, aggregator, empty_value=0.0)
    return _top_by_score(f"roy-{aggregator}", cands, scores, budget)


def select_brust(pool: Pool, budget: int, aggregator: str) -> SelectionResult:
    """Margin-based baseline: aggregate per-detection 1-(best minus
    second-best) scores (sum, avg, or max); empty images score 0."""
    if aggregator not in ("sum", "avg", "max"):
        raise ValidationError(f"aggregator must be sum|avg|max, got {aggregator!r}")
    if pool.num_classes < 2:
        raise ValidationError("margin-based selection needs at least 2 classes")
    cands = _candidates(pool)
    scores = np.empty(len(cands), dtype=np.float64)
    for i, rec in enumerate(cands):
        _require_probs(rec)
        margins = [scoring.detection_margin_uncertainty(d.probs) for d in rec.detections]
        scores[i] = scoring.aggregate(margins, aggregator, empty_value=0.0)
    return _top_by_score(f"brust-{aggregator}", cands, scores, budget)


def run_selector(
    method: str,
    pool: Pool,
    uncertainties: Mapping[str, float] | None,
    config: SelectorConfig,
    alpha: AlphaState | None = None,
) -> SelectionResult:
    """Dispatch a method tag to its selector."""
    if method == "method1":
        return select_method1(pool, uncertainties, config.budget, config.seed)
    if method == "method2":
        if alpha is None:
            alpha = AlphaState(config.alpha0)
        return select_method2(pool, uncertainties, alpha, config.budget, config)
    if method == "random":
        return select_random(pool, config.budget, config.seed)
    if method == "uncert":
        return select_top_uncertainty(pool, uncertainties, config.budget)
    if method.startswith("roy-"):
        return select_roy(pool, config.budget, method.removeprefix("roy-"))
    if method.startswith("brust-"):
        return select_brust(pool, config.budget, method.removeprefix("brust-"))
    raise ValidationError(f"unknown method {method!r}; valid: {', '.join(METHODS)}")
