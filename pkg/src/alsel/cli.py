"""Command-line surface.

Four subcommands: `select` runs one batch selection over on-disk pools,
`simulate` runs the full synthetic loop from a config document,
`alpha-schedule` prints the diversity-weight decay sequence, and `stats`
summarizes a pool. All randomness is derived from explicit --seed flags;
outputs are byte-stable across identical invocations.

Exit codes: 0 success, 2 validation/format problems, 1 I/O problems.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import io
from .errors import MissingDataError, ValidationError
from .loop import (
    LoopConfig,
    SyntheticDetectorAdapter,
    SyntheticPoolParams,
    run_loop,
    synthetic_pool,
)
from .scoring import EmptyDetectionPolicy, image_uncertainty
from .selectors import DIVERSITY_NORMS, METHODS, SelectorConfig, run_selector
from .types import AlphaState, ImageRecord, Pool, validate_pool
from .utils import sq_norms


def _load_pool(
    embeddings_path: str,
    ids_path: str,
    detections_path: str,
    labelled: set[str] | None = None,
) -> Pool:
    matrix, ids = io.read_embeddings(embeddings_path, ids_path)
    detections = io.read_detections(detections_path)
    known = set(ids)
    for iid in detections:
        if iid not in known:
            raise ValidationError(
                f"detections file mentions unknown image {iid!r}"
            )
    if labelled is not None:
        for iid in labelled:
            if iid not in known:
                raise ValidationError(f"labelled list mentions unknown image {iid!r}")
    num_classes = 1
    for dets in detections.values():
        for det in dets:
            num_classes = max(num_classes, det.class_id + 1)
            if det.probs is not None:
                num_classes = max(num_classes, len(det.probs))
    records = tuple(
        ImageRecord(
            iid,
            tuple(detections.get(iid, ())),
            row,
            labelled=labelled is not None and iid in labelled,
        )
        for row, iid in enumerate(ids)
    )
    pool = Pool(records, matrix, num_classes)
    problems = validate_pool(pool)
    if problems:
        raise ValidationError("invalid pool: " + "; ".join(problems))
    return pool


def _cmd_select(args: argparse.Namespace) -> int:
    labelled = set(io.read_id_list(args.labelled))
    pool = _load_pool(args.embeddings, args.ids, args.detections, labelled)
    policy = EmptyDetectionPolicy(args.empty_u)
    config = SelectorConfig(
        budget=args.budget,
        seed=args.seed,
        alpha0=args.alpha,
        diversity_norm=args.diversity_norm,
        empty_policy=policy,
    )
    unlabelled = pool.unlabelled_ids()
    if args.budget > len(unlabelled):
        print(
            f"warning: budget {args.budget} exceeds {len(unlabelled)} unlabelled "
            "images; selecting all of them",
            file=sys.stderr,
        )
    uncertainties = {
        iid: image_uncertainty(pool.record(iid).detections, policy)
        for iid in unlabelled
    }
    result = run_selector(
        args.method, pool, uncertainties, config, alpha=AlphaState(args.alpha)
    )
    io.write_selection(result, args.out)
    return 0


def _take_fields(doc: dict, cls) -> dict:
    names = {f.name for f in fields(cls)}
    unknown = set(doc) - names
    if unknown:
        raise ValidationError(
            f"unknown {cls.__name__} keys: {', '.join(sorted(unknown))}"
        )
    return dict(doc)


def _cmd_simulate(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {args.config}: invalid JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ValidationError("config must be a JSON object")
    if "method" not in doc:
        raise ValidationError("config requires a 'method' key")
    pool_doc = doc.pop("pool", {})
    if not isinstance(pool_doc, dict):
        raise ValidationError("config 'pool' must be an object")
    params = SyntheticPoolParams(**_take_fields(pool_doc, SyntheticPoolParams))

    seed = int(doc.pop("seed", 0))
    selector = SelectorConfig(
        budget=1,
        seed=seed,
        alpha0=float(doc.pop("alpha0", 0.5)),
        diversity_norm=str(doc.pop("diversity_norm", "max")),
        empty_policy=EmptyDetectionPolicy(float(doc.pop("empty_u", 0.0))),
    )
    config = LoopConfig(
        method=str(doc.pop("method")),
        seed=seed,
        seed_fraction=float(doc.pop("seed_fraction", 0.10)),
        budget_fraction=float(doc.pop("budget_fraction", 0.05)),
        num_iterations=int(doc.pop("num_iterations", 6)),
        selector=selector,
    )
    if doc:
        raise ValidationError(f"unknown config keys: {', '.join(sorted(doc))}")
    if config.method not in METHODS:
        raise ValidationError(
            f"unknown method {config.method!r}; valid: {', '.join(METHODS)}"
        )
    bundle = synthetic_pool(params, seed)
    adapter = SyntheticDetectorAdapter(bundle, base_seed=seed)
    report = run_loop(bundle.pool, adapter, config, classes=bundle.classes)
    io.write_report(report, args.out)
    return 0


def alpha_schedule(
    alpha0: float, budget: int, pool_size: int, seed_size: int, iterations: int
) -> list[float]:
    """Iterate the diversity-weight decrement over a shrinking pool."""
    if not 0.0 <= alpha0 <= 1.0:
        raise ValidationError(f"alpha0 {alpha0} outside [0, 1]")
    if budget < 1 or iterations < 1:
        raise ValidationError("budget and iterations must be >= 1")
    if not 0 < seed_size < pool_size:
        raise ValidationError(
            f"need 0 < seed size ({seed_size}) < pool size ({pool_size})"
        )
    out = []
    alpha, unlabelled = alpha0, pool_size - seed_size
    for step in range(1, iterations + 1):
        if unlabelled < 1:
            raise ValidationError(f"pool exhausted before step {step}")
        alpha = min(max(alpha - budget / (2.0 * unlabelled), 0.0), 1.0)
        out.append(alpha)
        unlabelled -= budget
    return out


def _cmd_alpha_schedule(args: argparse.Namespace) -> int:
    values = alpha_schedule(
        args.alpha0, args.budget, args.pool_size, args.seed_size, args.iterations
    )
    for value in values:
        print(value)
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    pool = _load_pool(args.embeddings, args.ids, args.detections)
    policy = EmptyDetectionPolicy()
    mean_u = float(
        np.mean([image_uncertainty(r.detections, policy) for r in pool.images])
    )
    n = pool.embeddings.shape[0]
    k = min(1000, n)
    rng = np.random.default_rng(args.seed)
    rows = rng.choice(n, size=k, replace=False)
    sub = np.asarray(pool.embeddings[np.sort(rows)], dtype=np.float64)
    if k < 2:
        mean_dist = 0.0
    else:
        norms = sq_norms(sub)
        d2 = norms[:, None] + norms[None, :] - 2.0 * (sub @ sub.T)
        np.maximum(d2, 0.0, out=d2)
        mean_dist = float(np.sqrt(d2).sum() / (k * (k - 1)))
    doc = {
        "count": n,
        "dim": int(pool.embeddings.shape[1]),
        "num_classes": pool.num_classes,
        "mean_uncertainty": mean_u,
        "mean_pairwise_distance": mean_dist,
        "subsample": k,
    }
    print(json.dumps(doc, sort_keys=True, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alsel",
        description="Batch selection for object-detection labelling campaigns.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sel = sub.add_parser("select", help="run one batch selection over an on-disk pool")
    sel.add_argument("--method", required=True, choices=METHODS)
    sel.add_argument("--detections", required=True)
    sel.add_argument("--embeddings", required=True)
    sel.add_argument("--ids", required=True)
    sel.add_argument("--labelled", required=True, help="text file of labelled ids")
    sel.add_argument("--budget", required=True, type=int)
    sel.add_argument("--seed", required=True, type=int)
    sel.add_argument("--alpha", type=float, default=0.5)
    sel.add_argument("--diversity-norm", choices=DIVERSITY_NORMS, default="max")
    sel.add_argument("--empty-u", type=float, default=0.0)
    sel.add_argument("--out", required=True)
    sel.set_defaults(func=_cmd_select)

    sim = sub.add_parser("simulate", help="run the synthetic selection loop")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=_cmd_simulate)

    sched = sub.add_parser(
        "alpha-schedule", help="print the diversity-weight decay sequence"
    )
    sched.add_argument("--alpha0", required=True, type=float)
    sched.add_argument("--budget", required=True, type=int)
    sched.add_argument("--pool-size", required=True, type=int)
    sched.add_argument("--seed-size", required=True, type=int)
    sched.add_argument("--iterations", required=True, type=int)
    sched.set_defaults(func=_cmd_alpha_schedule)

    st = sub.add_parser("stats", help="summarize a pool")
    st.add_argument("--detections", required=True)
    st.add_argument("--embeddings", required=True)
    st.add_argument("--ids", required=True)
    st.add_argument("--seed", type=int, default=0)
    st.set_defaults(func=_cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MissingDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
