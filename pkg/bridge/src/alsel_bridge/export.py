"""Directory-to-embeddings export in the binary embedding container."""

from __future__ import annotations

import os
import struct
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from .encoders import DEFAULT_ENCODER, build_encoder

EMB1_MAGIC = b"EMB1"
EMB1_VERSION = 1
_HEADER = struct.Struct("<4sIII")

# image files are picked up by extension; anything else in the directory is
# ignored silently so stray notes and sidecars stay harmless
IMAGE_EXTENSIONS = frozenset(
    {".bmp", ".gif", ".jpeg", ".jpg", ".png", ".tif", ".tiff", ".webp"}
)

DEFAULT_BATCH_SIZE = 8


@dataclass(frozen=True)
class ExportManifest:
    """What to export: a directory of images and where the output goes.

    Row ids are the file paths relative to image_dir (forward slashes),
    sorted lexicographically, so re-exports of the same directory are
    diffable. ids_path receives one id per line in row order.
    """

    image_dir: str | Path
    out_path: str | Path
    ids_path: str | Path
    encoder: str = DEFAULT_ENCODER
    batch_size: int = DEFAULT_BATCH_SIZE
    device: str = "cpu"

    def __post_init__(self):
        if not Path(self.image_dir).is_dir():
            raise ValueError(f"image directory not found: {self.image_dir}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class ExportSummary:
    """Outcome of one export run, including what was skipped and why it is
    reproducible (encoder, weight provenance, preprocessing)."""

    count: int
    dim: int
    elapsed: float
    encoder: str
    weights: str
    preprocessing: str
    skipped: tuple[str, ...] = ()


def list_image_files(image_dir: str | Path) -> list[str]:
    """Relative paths of candidate image files, sorted lexicographically."""
    root = Path(image_dir)
    found = []
    for base, _, names in os.walk(root):
        for name in names:
            path = Path(base, name)
            if path.suffix.lower() in IMAGE_EXTENSIONS:
                found.append(path.relative_to(root).as_posix())
    return sorted(found)


def write_embeddings_file(
    matrix: np.ndarray,
    ids: list[str],
    out_path: str | Path,
    ids_path: str | Path,
) -> None:
    """Serialize float32 rows plus an id sidecar, one id per line."""
    matrix = np.ascontiguousarray(matrix, dtype=np.float32)
    n, dim = matrix.shape
    if n != len(ids):
        raise ValueError(f"{len(ids)} ids for {n} rows")
    with open(out_path, "wb") as fh:
        fh.write(_HEADER.pack(EMB1_MAGIC, EMB1_VERSION, n, dim))
        fh.write(matrix.tobytes(order="C"))
    with open(ids_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"{i}\n" for i in ids)


def _resolve_device(hint: str) -> torch.device:
    try:
        device = torch.device(hint)
        if device.type == "cuda" and not torch.cuda.is_available():
            raise RuntimeError("cuda requested but not available")
    except RuntimeError as exc:
        warnings.warn(f"device hint {hint!r} unusable ({exc}); running on cpu")
        return torch.device("cpu")
    return device


def export_embeddings(manifest: ExportManifest) -> ExportSummary:
    """Encode every readable image under manifest.image_dir into one row.

    Unreadable files are skipped with a warning and listed in the summary;
    an export with nothing to write is an error. Inference always runs at
    the fixed batch shape (batch_size, ...): the last batch is padded by
    repeating its final image and the filler rows are dropped, because
    convolution kernels may pick shape-dependent algorithms and a row's
    bytes must not depend on how many images share its batch.
    """
    start = time.perf_counter()
    root = Path(manifest.image_dir)
    encoder = build_encoder(manifest.encoder)
    device = _resolve_device(manifest.device)
    module = encoder.module.to(device)

    kept: list[str] = []
    skipped: list[str] = []
    rows: list[np.ndarray] = []
    batch: list[torch.Tensor] = []

    def flush() -> None:
        if not batch:
            return
        real = len(batch)
        while len(batch) < manifest.batch_size:
            batch.append(batch[-1])
        with torch.no_grad():
            feats = module(torch.stack(batch).to(device))
        rows.append(np.asarray(feats[:real].cpu(), dtype=np.float32))
        batch.clear()

    for rel in list_image_files(root):
        try:
            with Image.open(root / rel) as img:
                tensor = encoder.preprocess(img.convert("RGB"))
        except (OSError, UnidentifiedImageError, ValueError) as exc:
            warnings.warn(f"skipping unreadable image {rel}: {exc}")
            skipped.append(rel)
            continue
        kept.append(rel)
        batch.append(tensor)
        if len(batch) == manifest.batch_size:
            flush()
    flush()

    if not kept:
        raise ValueError(f"no exportable images under {root}")

    matrix = np.vstack(rows)
    if matrix.shape[1] != encoder.dim:
        raise ValueError(
            f"encoder {encoder.name} produced dim {matrix.shape[1]}, "
            f"expected {encoder.dim}"
        )
    write_embeddings_file(matrix, kept, manifest.out_path, manifest.ids_path)
    return ExportSummary(
        count=len(kept),
        dim=encoder.dim,
        elapsed=time.perf_counter() - start,
        encoder=encoder.name,
        weights=encoder.weights,
        preprocessing=encoder.preprocessing,
        skipped=tuple(skipped),
    )
