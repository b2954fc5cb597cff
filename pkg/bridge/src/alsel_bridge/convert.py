"""Third-party detector dumps to the detections JSON-lines schema."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

# probs whose sum strays from 1 by at most this much are renormalised;
# anything further off is treated as junk and the row is dropped
PROBS_RENORM_TOL = 1e-3

SUPPORTED_FORMATS = ("coco", "flat-jsonl")


@dataclass(frozen=True)
class ConvertSummary:
    """Outcome counts for one conversion run."""

    format: str
    images: int
    detections: int
    rejected: int
    renormalized: int


@dataclass(frozen=True)
class _Row:
    image_id: str
    bbox: tuple[float, float, float, float]
    score: float
    class_id: int
    probs: tuple[float, ...] | None


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _bbox(value, where: str) -> tuple[float, float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 4:
        raise ValueError(f"{where}: bbox must hold exactly 4 numbers")
    return tuple(_number(v, f"{where}: bbox entry") for v in value)


def _class_id(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{where}: class id must be an integer")
    return value


def _parse_coco(path: Path) -> Iterator[_Row]:
    """COCO results array: [{image_id, category_id, bbox, score}, ...]."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON: {exc.msg}") from None
    if not isinstance(payload, list):
        raise ValueError(f"{path}: expected a top-level array of result objects")
    for i, entry in enumerate(payload):
        where = f"{path}: result {i}"
        if not isinstance(entry, dict):
            raise ValueError(f"{where}: expected an object")
        try:
            image_id = entry["image_id"]
            bbox = entry["bbox"]
            score = entry["score"]
            category = entry["category_id"]
        except KeyError as exc:
            raise ValueError(f"{where}: missing field {exc.args[0]!r}") from None
        yield _Row(
            str(image_id),
            _bbox(bbox, where),
            _number(score, f"{where}: score"),
            _class_id(category, where),
            None,
        )


def _parse_flat_jsonl(path: Path) -> Iterator[_Row]:
    """One detection per line: {image, bbox, score, class_id, probs?}."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}: line {lineno}"
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{where}: invalid JSON: {exc.msg}") from None
            if not isinstance(doc, dict):
                raise ValueError(f"{where}: expected an object")
            try:
                image = doc["image"]
                bbox = doc["bbox"]
                score = doc["score"]
                class_id = doc["class_id"]
            except KeyError as exc:
                raise ValueError(f"{where}: missing field {exc.args[0]!r}") from None
            if not isinstance(image, str):
                raise ValueError(f"{where}: image must be a string")
            probs = doc.get("probs")
            if probs is not None:
                if not isinstance(probs, list):
                    raise ValueError(f"{where}: probs must be a list")
                probs = tuple(_number(p, f"{where}: probs entry") for p in probs)
            yield _Row(
                image,
                _bbox(bbox, where),
                _number(score, f"{where}: score"),
                _class_id(class_id, where),
                probs,
            )


_PARSERS = {"coco": _parse_coco, "flat-jsonl": _parse_flat_jsonl}


def _screen(row: _Row) -> tuple[_Row, bool] | None:
    """Apply the value-range rules; None means the row is dropped.

    Range violations reject the single row rather than the whole file:
    detectors emit the occasional junk box and a conversion should survive
    it. Structural problems (missing fields, wrong types) still raise in
    the parsers above.
    """
    if not 0.0 <= row.score <= 1.0:
        return None
    if row.bbox[2] < 0.0 or row.bbox[3] < 0.0:
        return None
    if row.class_id < 0:
        return None
    probs = row.probs
    renormed = False
    if probs is not None:
        if row.class_id >= len(probs) or any(p < 0.0 for p in probs):
            return None
        total = sum(probs)
        if abs(total - 1.0) > PROBS_RENORM_TOL:
            return None
        if total != 1.0:
            probs = tuple(p / total for p in probs)
            renormed = True
        # the reported class must attain the max; scaling preserves argmax
        if probs[row.class_id] < max(probs):
            return None
    return _Row(row.image_id, row.bbox, row.score, row.class_id, probs), renormed


def convert_detections(
    src_path: str | Path, format_tag: str, out_path: str | Path
) -> ConvertSummary:
    """Convert a detector dump at src_path into the JSON-lines schema.

    Rows with out-of-range values (score outside [0, 1], negative box
    sides, negative class ids, probs that cannot be renormalised or whose
    argmax contradicts the class id) are dropped and counted. Output lines
    are sorted by image id, one image per line, detections in source order.
    """
    try:
        parser = _PARSERS[format_tag]
    except KeyError:
        supported = ", ".join(SUPPORTED_FORMATS)
        raise ValueError(
            f"unsupported format tag {format_tag!r}: supported tags are {supported}"
        ) from None
    by_image: dict[str, list[dict]] = {}
    detections = 0
    rejected = 0
    renormalized = 0
    for row in parser(Path(src_path)):
        screened = _screen(row)
        if screened is None:
            rejected += 1
            continue
        row, renormed = screened
        renormalized += renormed
        doc = {"bbox": list(row.bbox), "score": row.score, "class_id": row.class_id}
        if row.probs is not None:
            doc["probs"] = list(row.probs)
        by_image.setdefault(row.image_id, []).append(doc)
        detections += 1
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        for iid in sorted(by_image):
            line = {"image_id": iid, "detections": by_image[iid]}
            fh.write(json.dumps(line, sort_keys=True) + "\n")
    return ConvertSummary(
        format=format_tag,
        images=len(by_image),
        detections=detections,
        rejected=rejected,
        renormalized=renormalized,
    )
