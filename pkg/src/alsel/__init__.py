"""Model-agnostic batch selection for object-detection labelling campaigns.

The library scores an unlabelled pool using only detector outputs
(boxes, confidences, class probabilities) and a fixed embedding per
image, then picks annotation batches that balance uncertainty and
diversity. It ships two embedding-aware strategies (cluster-then-pick
and a greedy blend with a decaying diversity weight), score-only
baselines, a synthetic loop simulator for end-to-end comparisons, and
bit-stable file formats plus a CLI for running selections on disk.
"""

from .benchmark import StudyResult, relative_margin, run_study
from .cli import alpha_schedule, main
from .clustering import Partition, kmeans, kmeanspp_init
from .errors import (
    AlselError,
    EmptyPoolError,
    FormatError,
    MissingDataError,
    ValidationError,
)
from .io import (
    read_detections,
    read_embeddings,
    read_id_list,
    read_report,
    read_selection,
    write_detections,
    write_embeddings,
    write_id_list,
    write_report,
    write_selection,
)
from .loop import (
    DetectorAdapter,
    IterationRecord,
    LatentObject,
    LoopConfig,
    ReplayAdapter,
    RunReport,
    SyntheticDetectorAdapter,
    SyntheticPool,
    SyntheticPoolParams,
    replay_adapter,
    run_loop,
    stratified_seed_sample,
    synthetic_detector,
    synthetic_pool,
)
from .scoring import (
    EmptyDetectionPolicy,
    aggregate,
    detection_entropy,
    detection_margin_uncertainty,
    image_uncertainty,
    mean_embedding_distance,
)
from .selectors import (
    DIVERSITY_NORMS,
    METHODS,
    RunningDistanceSums,
    SelectorConfig,
    run_selector,
    select_brust,
    select_method1,
    select_method2,
    select_random,
    select_roy,
    select_top_uncertainty,
    update_alpha,
)
from .types import (
    AlphaState,
    Detection,
    ImageRecord,
    Pool,
    SelectionResult,
    validate_pool,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaState",
    "AlselError",
    "Detection",
    "DetectorAdapter",
    "DIVERSITY_NORMS",
    "EmptyDetectionPolicy",
    "EmptyPoolError",
    "FormatError",
    "ImageRecord",
    "IterationRecord",
    "LatentObject",
    "LoopConfig",
    "METHODS",
    "MissingDataError",
    "Partition",
    "Pool",
    "ReplayAdapter",
    "RunReport",
    "RunningDistanceSums",
    "SelectionResult",
    "SelectorConfig",
    "StudyResult",
    "SyntheticDetectorAdapter",
    "SyntheticPool",
    "SyntheticPoolParams",
    "ValidationError",
    "aggregate",
    "alpha_schedule",
    "detection_entropy",
    "detection_margin_uncertainty",
    "image_uncertainty",
    "kmeans",
    "kmeanspp_init",
    "main",
    "mean_embedding_distance",
    "read_detections",
    "read_embeddings",
    "read_id_list",
    "read_report",
    "read_selection",
    "relative_margin",
    "replay_adapter",
    "run_loop",
    "run_selector",
    "run_study",
    "select_brust",
    "select_method1",
    "select_method2",
    "select_random",
    "select_roy",
    "select_top_uncertainty",
    "stratified_seed_sample",
    "synthetic_detector",
    "synthetic_pool",
    "update_alpha",
    "validate_pool",
    "write_detections",
    "write_embeddings",
    "write_id_list",
    "write_report",
    "write_selection",
]
