"""Outer selection loop and a synthetic stand-in detector.

run_loop drives train -> score -> select -> label rounds against any
DetectorAdapter. The synthetic pool builder fabricates a camera-structured
embedding space with latent objects, and the synthetic adapter scores those
objects as a function of how well the labelled set covers each camera and
class, so selection strategies can be compared end to end without a real
detector. A replay adapter serves pre-recorded per-iteration detection
files instead.

Determinism contract: identical (params, config, seed) give identical
reports. All randomness flows from explicit seeds; the synthetic detector
derives one stream per (labelled set, image) pair so results do not depend
on inference order.
"""

from __future__ import annotations

import hashlib
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import AlselError, MissingDataError, ValidationError
from .scoring import image_uncertainty
from .selectors import SelectorConfig, run_selector, update_alpha
from .types import (
    AlphaState,
    Detection,
    ImageRecord,
    Pool,
    SelectionResult,
    validate_pool,
)


class DetectorAdapter(ABC):
    """Behavioral contract between the loop and a detector.

    The loop only ever hands over labelled ids and asks for detections on
    unlabelled images; nothing else about the detector crosses this
    boundary.
    """

    @abstractmethod
    def infer(self, labelled_ids: Sequence[str], image_id: str) -> list[Detection]:
        """Detections for one image, given the current labelled set."""

    @abstractmethod
    def notify_trained(self, labelled_ids: Sequence[str]) -> None:
        """Signal that a training round on labelled_ids has completed."""

    def quality(self, labelled_ids: Sequence[str]) -> float | None:
        """Optional pool-quality proxy in [0, 1]; None if unavailable."""
        return None


@dataclass(frozen=True)
class LoopConfig:
    """Loop-level protocol knobs.

    seed_fraction and budget_fraction are resolved against the pool size
    at run time (rounded, floored at 1). selector carries strategy knobs;
    its budget field is overridden per iteration so the final batch may be
    partial.
    """

    method: str
    seed: int = 0
    seed_fraction: float = 0.10
    budget_fraction: float = 0.05
    num_iterations: int = 6
    selector: SelectorConfig = field(
        default_factory=lambda: SelectorConfig(budget=1)
    )

    def __post_init__(self):
        for name, frac in (
            ("seed_fraction", self.seed_fraction),
            ("budget_fraction", self.budget_fraction),
        ):
            if not 0.0 < frac <= 1.0:
                raise ValidationError(f"{name} {frac} outside (0, 1]")
        if self.num_iterations < 0:
            raise ValidationError("num_iterations must be >= 0")
        if self.seed_fraction + self.num_iterations * self.budget_fraction > 1.0 + 1e-12:
            raise ValidationError(
                "seed_fraction + num_iterations * budget_fraction exceeds 1"
            )


@dataclass(frozen=True)
class IterationRecord:
    """One row of a run report.

    iteration 0 is the seed round (no selection). labelled_count is the
    cumulative count after this round's batch joined the labelled set.
    wall_time is informational only and excluded from serialized reports.
    """

    iteration: int
    labelled_count: int
    batch_size: int
    alpha: float | None
    quality: float | None
    wall_time: float
    selection: SelectionResult | None


@dataclass(frozen=True)
class RunReport:
    records: tuple[IterationRecord, ...]
    summary: dict

    def __post_init__(self):
        prev = None
        for rec in self.records:
            if prev is not None and rec.labelled_count != prev.labelled_count + rec.batch_size:
                raise ValidationError(
                    f"iteration {rec.iteration}: labelled count "
                    f"{rec.labelled_count} does not extend {prev.labelled_count} "
                    f"by batch size {rec.batch_size}"
                )
            prev = rec


def stratified_seed_sample(
    pool: Pool,
    n: int,
    seed: int,
    classes: Mapping[str, int] | None = None,
) -> list[str]:
    """Seed sample guaranteed to hit every class present in `classes`.

    classes maps image_id to a class label where known (latent truth in
    simulator mode); one image is drawn uniformly per distinct class, the
    remainder uniformly without replacement from everything else. With
    classes=None the whole draw is uniform.
    """
    candidates = sorted(r.image_id for r in pool.images if not r.labelled)
    if n > len(candidates):
        raise ValidationError(
            f"seed size {n} exceeds {len(candidates)} unlabelled images"
        )
    if n < 1:
        raise ValidationError("seed size must be >= 1")
    rng = np.random.default_rng(seed)
    if not classes:
        idx = rng.choice(len(candidates), size=n, replace=False)
        return [candidates[int(i)] for i in idx]

    strata: dict[int, list[str]] = {}
    for iid in candidates:
        if iid in classes:
            strata.setdefault(classes[iid], []).append(iid)
    if n < len(strata):
        raise ValidationError(
            f"seed size {n} below the {len(strata)} classes present"
        )
    picks = []
    for cls in sorted(strata):
        members = strata[cls]
        picks.append(members[int(rng.integers(len(members)))])
    taken = set(picks)
    rest = [iid for iid in candidates if iid not in taken]
    extra = rng.choice(len(rest), size=n - len(picks), replace=False)
    picks.extend(rest[int(i)] for i in extra)
    return picks


# --- synthetic pool -------------------------------------------------------


@dataclass(frozen=True)
class SyntheticPoolParams:
    """Shape and detector-skill parameters of the synthetic benchmark pool.

    Embeddings are camera centers plus isotropic Gaussian noise;
    center_separation is the expected distance between two camera centers
    and noise_scale the per-coordinate deviation within a camera. Object
    classes are skewed (weight proportional to 1/(1+c)^2) so rare classes
    reward targeted selection. Detector skill grows with camera and class
    coverage of the labelled set, saturating as n/(n+saturation).
    """

    num_cameras: int = 20
    images_per_camera: int = 100
    num_classes: int = 7
    embedding_dim: int = 64
    center_separation: float = 40.0
    noise_scale: float = 1.0
    mean_objects: float = 2.0
    base_quality: float = 0.20
    camera_gain: float = 0.35
    class_gain: float = 0.35
    saturation: float = 12.0
    score_noise: float = 0.05
    probes_per_camera: int = 5

    def __post_init__(self):
        positive = {
            "num_cameras": self.num_cameras,
            "images_per_camera": self.images_per_camera,
            "num_classes": self.num_classes,
            "embedding_dim": self.embedding_dim,
            "center_separation": self.center_separation,
            "mean_objects": self.mean_objects,
            "saturation": self.saturation,
            "probes_per_camera": self.probes_per_camera,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValidationError(f"{name} must be positive, got {value}")
        for name, value in (
            ("noise_scale", self.noise_scale),
            ("base_quality", self.base_quality),
            ("camera_gain", self.camera_gain),
            ("class_gain", self.class_gain),
            ("score_noise", self.score_noise),
        ):
            if value < 0:
                raise ValidationError(f"{name} must be >= 0, got {value}")
        if self.base_quality + self.camera_gain + self.class_gain > 1.0:
            raise ValidationError(
                "base_quality + camera_gain + class_gain must be <= 1"
            )


@dataclass(frozen=True)
class LatentObject:
    class_id: int
    x: float
    y: float


@dataclass(frozen=True)
class SyntheticPool:
    """A Pool plus the latent ground truth behind it.

    cameras/objects key latent structure by image_id; classes maps each
    image with at least one object to its first object's class (used for
    stratified seeding). probes are held-out (camera, class) pairs whose
    noise-free detector score defines the quality proxy.
    """

    pool: Pool
    cameras: dict[str, int]
    classes: dict[str, int]
    objects: dict[str, tuple[LatentObject, ...]]
    probes: tuple[tuple[int, int], ...]
    params: SyntheticPoolParams


def _class_weights(num_classes: int) -> np.ndarray:
    w = 1.0 / (1.0 + np.arange(num_classes)) ** 2
    return w / w.sum()


def synthetic_pool(params: SyntheticPoolParams, seed: int) -> SyntheticPool:
    """Build a camera-clustered pool with latent objects, deterministically."""
    rng = np.random.default_rng(seed)
    m, per, dim = params.num_cameras, params.images_per_camera, params.embedding_dim
    n = m * per

    # expected distance between two N(0, s^2 I) points is s*sqrt(2*dim)
    center_std = params.center_separation / np.sqrt(2.0 * dim)
    centers = rng.normal(0.0, center_std, size=(m, dim))

    embeddings = np.empty((n, dim), dtype=np.float32)
    weights = _class_weights(params.num_classes)
    images: list[ImageRecord] = []
    cameras: dict[str, int] = {}
    classes: dict[str, int] = {}
    objects: dict[str, tuple[LatentObject, ...]] = {}
    row = 0
    for cam in range(m):
        noise = rng.normal(0.0, params.noise_scale, size=(per, dim))
        for j in range(per):
            iid = f"cam{cam:03d}_img{j:04d}"
            embeddings[row] = centers[cam] + noise[j]
            count = int(rng.poisson(params.mean_objects))
            objs = tuple(
                LatentObject(
                    int(rng.choice(params.num_classes, p=weights)),
                    float(rng.uniform(0.0, 100.0)),
                    float(rng.uniform(0.0, 100.0)),
                )
                for _ in range(count)
            )
            cameras[iid] = cam
            objects[iid] = objs
            if objs:
                classes[iid] = objs[0].class_id
            images.append(ImageRecord(iid, (), row))
            row += 1

    probes = tuple(
        (cam, k % params.num_classes)
        for k, cam in enumerate(
            c for c in range(m) for _ in range(params.probes_per_camera)
        )
    )
    pool = Pool(tuple(images), embeddings, params.num_classes)
    return SyntheticPool(pool, cameras, classes, objects, probes, params)


def _digest(text: str) -> int:
    return int.from_bytes(
        hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "little"
    )


def _coverage(n: int, h: float) -> float:
    return n / (n + h)


class SyntheticDetectorAdapter(DetectorAdapter):
    """Oracle detector over a synthetic pool.

    Each latent object is scored q0 + a*cov_cam + b*cov_cls + eps (clamped
    to [0, 1]) where the coverages count labelled images from the same
    camera, respectively labelled images containing the object's class,
    saturating as n/(n+h). The object is emitted as a detection with
    probability equal to its score. eps is Gaussian, seeded per
    (labelled set, image) so results are independent of call order.
    """

    def __init__(self, bundle: SyntheticPool, base_seed: int = 0):
        self._bundle = bundle
        self._base_seed = base_seed
        self._cached_key: tuple[str, ...] | None = None
        self._cam_counts: np.ndarray | None = None
        self._cls_counts: np.ndarray | None = None
        self._labelled_digest = 0

    def _prepare(self, labelled_ids: Sequence[str]) -> None:
        key = tuple(sorted(set(labelled_ids)))
        if key == self._cached_key:
            return
        p = self._bundle.params
        cam_counts = np.zeros(p.num_cameras, dtype=np.int64)
        cls_counts = np.zeros(p.num_classes, dtype=np.int64)
        for iid in key:
            if iid not in self._bundle.cameras:
                raise ValidationError(f"unknown image id {iid!r} in labelled set")
            cam_counts[self._bundle.cameras[iid]] += 1
            present = {obj.class_id for obj in self._bundle.objects[iid]}
            for cls in present:
                cls_counts[cls] += 1
        self._cached_key = key
        self._cam_counts = cam_counts
        self._cls_counts = cls_counts
        self._labelled_digest = _digest("\n".join(key))

    def notify_trained(self, labelled_ids: Sequence[str]) -> None:
        self._prepare(labelled_ids)

    def _object_score(self, cam: int, cls: int, eps: float) -> float:
        p = self._bundle.params
        s = (
            p.base_quality
            + p.camera_gain * _coverage(int(self._cam_counts[cam]), p.saturation)
            + p.class_gain * _coverage(int(self._cls_counts[cls]), p.saturation)
            + eps
        )
        return min(max(s, 0.0), 1.0)

    def infer(self, labelled_ids: Sequence[str], image_id: str) -> list[Detection]:
        self._prepare(labelled_ids)
        bundle = self._bundle
        if image_id not in bundle.cameras:
            raise ValidationError(f"unknown image id {image_id!r}")
        p = bundle.params
        cam = bundle.cameras[image_id]
        rng = np.random.default_rng(
            np.random.SeedSequence(
                [self._base_seed, self._labelled_digest, _digest(image_id)]
            )
        )
        out: list[Detection] = []
        for obj in bundle.objects[image_id]:
            eps = float(rng.normal(0.0, p.score_noise)) if p.score_noise else 0.0
            s = self._object_score(cam, obj.class_id, eps)
            if float(rng.random()) >= s:
                continue  # missed object
            if p.num_classes == 1:
                probs = (1.0,)
            else:
                # the true class must carry the arg-max probability; when s
                # falls below the uniform level the row collapses to uniform
                rest = (1.0 - s) / (p.num_classes - 1)
                if rest > s:
                    probs = (1.0 / p.num_classes,) * p.num_classes
                else:
                    probs = tuple(
                        s if c == obj.class_id else rest
                        for c in range(p.num_classes)
                    )
            out.append(
                Detection((obj.x, obj.y, 1.0, 1.0), s, obj.class_id, probs)
            )
        return out

    def quality(self, labelled_ids: Sequence[str]) -> float | None:
        """Mean noise-free object score over the held-out probe set."""
        self._prepare(labelled_ids)
        scores = [
            self._object_score(cam, cls, 0.0) for cam, cls in self._bundle.probes
        ]
        return float(np.mean(scores))


def synthetic_detector(
    bundle: SyntheticPool,
    labelled_ids: Sequence[str],
    image_id: str,
    base_seed: int = 0,
) -> list[Detection]:
    """One-shot functional form of SyntheticDetectorAdapter.infer."""
    return SyntheticDetectorAdapter(bundle, base_seed).infer(labelled_ids, image_id)


# --- replay adapter -------------------------------------------------------


class ReplayAdapter(DetectorAdapter):
    """Serves pre-recorded detections, one file per training round.

    Files are named iter_0001.jsonl, iter_0002.jsonl, ... in the replay
    directory. The cursor starts at 0; each notify_trained advances it and
    requires the file for the new round to exist. Images absent from a
    file yield no detections.
    """

    def __init__(self, directory: str | Path):
        self._dir = Path(directory)
        if not self._dir.is_dir():
            raise MissingDataError(f"replay directory {self._dir} does not exist")
        self._cursor = 0
        self._current: dict[str, list[Detection]] | None = None

    @property
    def iteration_cursor(self) -> int:
        return self._cursor

    def _path(self, iteration: int) -> Path:
        return self._dir / f"iter_{iteration:04d}.jsonl"

    def notify_trained(self, labelled_ids: Sequence[str]) -> None:
        from .io import read_detections

        nxt = self._cursor + 1
        path = self._path(nxt)
        if not path.is_file():
            raise MissingDataError(
                f"no detections file for iteration {nxt}: expected {path}"
            )
        self._current = read_detections(path)
        self._cursor = nxt

    def infer(self, labelled_ids: Sequence[str], image_id: str) -> list[Detection]:
        if self._current is None:
            raise MissingDataError(
                "replay adapter has no active round; call notify_trained first"
            )
        return list(self._current.get(image_id, []))


def replay_adapter(directory: str | Path) -> ReplayAdapter:
    return ReplayAdapter(directory)


# --- the loop itself ------------------------------------------------------


def _attach_detections(
    pool: Pool, detections: Mapping[str, list[Detection]]
) -> Pool:
    images = tuple(
        replace(rec, detections=tuple(detections[rec.image_id]))
        if rec.image_id in detections
        else rec
        for rec in pool.images
    )
    return Pool(images, pool.embeddings, pool.num_classes)


def _iteration_seed(base: int, iteration: int) -> int:
    return int(
        np.random.SeedSequence([base, iteration]).generate_state(1, np.uint64)[0]
    )


def run_loop(
    pool: Pool,
    adapter: DetectorAdapter,
    config: LoopConfig,
    classes: Mapping[str, int] | None = None,
) -> RunReport:
    """Run the seeded selection loop and return its report.

    Each round: notify the adapter of the labelled set, infer on every
    unlabelled image, score, select with the configured method, move the
    batch to the labelled set, and (for the blended method) decrement the
    diversity weight using the unlabelled count observed at selection
    time. Round 1 selects with the configured starting weight.
    """
    problems = validate_pool(pool)
    if problems:
        raise ValidationError("invalid pool: " + "; ".join(problems))
    total = len(pool.images)
    n_seed = max(1, round(config.seed_fraction * total))
    budget = max(1, round(config.budget_fraction * total))

    t0 = time.perf_counter()
    seed_ids = stratified_seed_sample(pool, n_seed, config.seed, classes)
    work = pool.with_labelled(seed_ids)
    labelled = sorted(work.labelled_ids())
    alpha = AlphaState(config.selector.alpha0, 0)
    records = [
        IterationRecord(
            iteration=0,
            labelled_count=len(labelled),
            batch_size=len(labelled),
            alpha=None,
            quality=adapter.quality(labelled),
            wall_time=time.perf_counter() - t0,
            selection=None,
        )
    ]

    for i in range(1, config.num_iterations + 1):
        t0 = time.perf_counter()
        unlabelled = sorted(work.unlabelled_ids())
        if not unlabelled:
            break
        try:
            adapter.notify_trained(labelled)
            detections = {iid: adapter.infer(labelled, iid) for iid in unlabelled}
        except AlselError as exc:
            raise type(exc)(f"adapter failed at iteration {i}: {exc}") from exc
        scored = _attach_detections(work, detections)
        uncertainties = {
            iid: image_uncertainty(detections[iid], config.selector.empty_policy)
            for iid in unlabelled
        }
        n_before = len(unlabelled)
        cfg_i = replace(
            config.selector,
            budget=min(budget, n_before),
            seed=_iteration_seed(config.seed, i),
        )
        result = run_selector(config.method, scored, uncertainties, cfg_i, alpha=alpha)
        result = replace(result, iteration=i)
        work = work.with_labelled(result.selected)
        labelled = sorted(work.labelled_ids())
        if config.method == "method2":
            alpha = update_alpha(alpha, budget, n_before)
        records.append(
            IterationRecord(
                iteration=i,
                labelled_count=len(labelled),
                batch_size=len(result.selected),
                alpha=result.alpha_used,
                quality=adapter.quality(labelled),
                wall_time=time.perf_counter() - t0,
                selection=result,
            )
        )

    qualities = [r.quality for r in records[1:]]
    auc = float(np.mean(qualities)) if qualities and None not in qualities else None
    summary = {
        "method": config.method,
        "pool_size": total,
        "num_classes": pool.num_classes,
        "seed_size": n_seed,
        "budget": budget,
        "iterations_run": len(records) - 1,
        "final_labelled_count": records[-1].labelled_count,
        "final_quality": records[-1].quality,
        "auc_quality": auc,
    }
    return RunReport(tuple(records), summary)
