"""File formats: binary embeddings, detection JSON-lines, selection and
report documents, and plain id lists.

Embeddings live in a small binary container (magic "EMB1", little-endian
u32 version/count/dim header, float32 row-major payload) with ids in a
text sidecar, one per line, same order. Everything else is JSON with
sorted keys so outputs are diffable and byte-stable across runs; floats
round-trip exactly through repr. Report timing fields are deliberately
not serialized, keeping identical runs byte-identical.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import FormatError, ValidationError
from .loop import RunReport
from .types import Detection, SelectionResult, _validate_detection

MAGIC = b"EMB1"
VERSION = 1
_HEADER = struct.Struct("<4sIII")


def _ids_path(path: Path, ids_path: str | Path | None) -> Path:
    return Path(ids_path) if ids_path is not None else Path(str(path) + ".ids")


def write_embeddings(
    matrix: np.ndarray,
    ids: Sequence[str],
    path: str | Path,
    ids_path: str | Path | None = None,
) -> None:
    """Write a float32 embedding matrix and its id sidecar.

    The sidecar defaults to `<path>.ids`. Ids must be unique, one per
    matrix row, and newline-free.
    """
    path = Path(path)
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValidationError(f"embedding matrix must be 2-D, got shape {matrix.shape}")
    n, d = matrix.shape
    if len(ids) != n:
        raise ValidationError(f"{len(ids)} ids for {n} matrix rows")
    if len(set(ids)) != len(ids):
        raise ValidationError("ids must be unique")
    for iid in ids:
        if "\n" in iid or "\r" in iid:
            raise ValidationError(f"id {iid!r} contains a line break")
    payload = np.ascontiguousarray(matrix, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, d))
        fh.write(payload.tobytes())
    text = "".join(iid + "\n" for iid in ids)
    _ids_path(path, ids_path).write_text(text, encoding="utf-8", newline="\n")


def read_embeddings(
    path: str | Path, ids_path: str | Path | None = None
) -> tuple[np.ndarray, list[str]]:
    """Inverse of write_embeddings; returns (float32 matrix, ids)."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise FormatError(
            f"truncated header: need {_HEADER.size} bytes, found {len(blob)}",
            path=path,
            offset=len(blob),
        )
    magic, version, n, d = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", path=path, offset=0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", path=path, offset=4)
    expected = _HEADER.size + 4 * n * d
    if len(blob) != expected:
        raise FormatError(
            f"expected {expected} bytes for {n}x{d} float32, found {len(blob)}",
            path=path,
            offset=min(expected, len(blob)),
        )
    matrix = (
        np.frombuffer(blob, dtype="<f4", offset=_HEADER.size)
        .reshape(n, d)
        .astype(np.float32, copy=True)
    )
    sidecar = _ids_path(path, ids_path)
    if not sidecar.is_file():
        raise FormatError("id sidecar missing", path=sidecar)
    text = sidecar.read_text(encoding="utf-8")
    ids = text.split("\n")
    if ids and ids[-1] == "":
        ids.pop()
    if len(ids) != n:
        raise FormatError(
            f"sidecar holds {len(ids)} ids but the matrix has {n} rows",
            path=sidecar,
        )
    return matrix, ids


def _detection_doc(det: Detection) -> dict:
    doc = {
        "bbox": list(det.bbox),
        "score": det.score,
        "class_id": det.class_id,
    }
    if det.probs is not None:
        doc["probs"] = list(det.probs)
    return doc


def _require_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where} must be a number")
    return float(value)


def _detection_from_doc(doc: dict, where: str) -> Detection:
    if not isinstance(doc, dict):
        raise ValidationError(f"{where}: entry must be an object")
    try:
        bbox = doc["bbox"]
        score = doc["score"]
        class_id = doc["class_id"]
    except KeyError as exc:
        raise ValidationError(f"{where}: missing field {exc.args[0]!r}") from None
    if not isinstance(bbox, (list, tuple)) or len(bbox) != 4:
        raise ValidationError(f"{where}: bbox must hold exactly 4 numbers")
    if isinstance(class_id, bool) or not isinstance(class_id, int):
        raise ValidationError(f"{where}: class_id must be an integer")
    probs = doc.get("probs")
    if probs is not None and not isinstance(probs, list):
        raise ValidationError(f"{where}: probs must be a list")
    det = Detection(
        tuple(_require_number(b, f"{where}: bbox entry") for b in bbox),
        _require_number(score, f"{where}: score"),
        class_id,
        tuple(_require_number(p, f"{where}: probs entry") for p in probs)
        if probs is not None
        else None,
    )
    # full cross-image class-count checks happen at pool assembly; here the
    # class count is whatever the row itself implies
    local_classes = len(det.probs) if det.probs is not None else det.class_id + 1
    problems = _validate_detection(det, max(local_classes, 1), where)
    if problems:
        raise ValidationError("; ".join(problems))
    return det


def read_detections(path: str | Path) -> dict[str, list[Detection]]:
    """Parse a detections JSON-lines file into image_id -> detections.

    Each line carries one image: {"image_id": ..., "detections": [...]}.
    Malformed lines and duplicate ids raise a format error naming the
    line; detection fields are validated on construction.
    """
    path = Path(path)
    out: dict[str, list[Detection]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(
                    f"invalid JSON: {exc.msg}", path=path, line=lineno
                ) from None
            if not isinstance(doc, dict) or "image_id" not in doc:
                raise FormatError("missing image_id", path=path, line=lineno)
            iid = doc["image_id"]
            if not isinstance(iid, str):
                raise FormatError("image_id must be a string", path=path, line=lineno)
            if iid in out:
                raise FormatError(
                    f"duplicate image_id {iid!r}", path=path, line=lineno
                )
            entries = doc.get("detections", [])
            if not isinstance(entries, list):
                raise FormatError("detections must be a list", path=path, line=lineno)
            try:
                out[iid] = [
                    _detection_from_doc(e, f"detection {j}")
                    for j, e in enumerate(entries)
                ]
            except ValidationError as exc:
                raise FormatError(str(exc), path=path, line=lineno) from None
    return out


def write_detections(
    detections: Mapping[str, Sequence[Detection]], path: str | Path
) -> None:
    """Inverse of read_detections; one line per image, sorted by id."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for iid in sorted(detections):
            doc = {
                "image_id": iid,
                "detections": [_detection_doc(d) for d in detections[iid]],
            }
            fh.write(json.dumps(doc, sort_keys=True) + "\n")


def _selection_doc(result: SelectionResult) -> dict:
    return {
        "method": result.method,
        "iteration": result.iteration,
        "alpha_used": result.alpha_used,
        "selected": list(result.selected),
        "audit": [dict(entry) for entry in result.audit],
    }


def _selection_from_doc(doc: dict) -> SelectionResult:
    return SelectionResult(
        doc["method"],
        doc["iteration"],
        tuple(doc["selected"]),
        tuple(doc["audit"]),
        doc.get("alpha_used"),
    )


def write_selection(result: SelectionResult, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(_selection_doc(result), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
        newline="\n",
    )


def read_selection(path: str | Path) -> SelectionResult:
    return _selection_from_doc(json.loads(Path(path).read_text(encoding="utf-8")))


def write_report(report: RunReport, path: str | Path) -> None:
    """Serialize a run report; per-round wall times are omitted so that
    identical runs produce byte-identical files."""
    rows = []
    for rec in report.records:
        rows.append(
            {
                "iteration": rec.iteration,
                "labelled_count": rec.labelled_count,
                "batch_size": rec.batch_size,
                "alpha": rec.alpha,
                "quality": rec.quality,
                "selection": _selection_doc(rec.selection)
                if rec.selection is not None
                else None,
            }
        )
    doc = {"summary": report.summary, "iterations": rows}
    Path(path).write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
        newline="\n",
    )


def read_report(path: str | Path) -> dict:
    """Parse a report document back into plain dict form."""
    return json.loads(Path(path).read_text(encoding="utf-8"))


def read_id_list(path: str | Path) -> list[str]:
    """One id per line; blank lines are ignored."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").split("\n"):
        line = line.strip()
        if line:
            out.append(line)
    return out


def write_id_list(ids: Sequence[str], path: str | Path) -> None:
    Path(path).write_text(
        "".join(iid + "\n" for iid in ids), encoding="utf-8", newline="\n"
    )
