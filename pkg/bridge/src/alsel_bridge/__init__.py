"""Bridge from pixels and raw detector dumps to the selection file formats.

The selection engine never sees images or model internals; it reads an
embedding matrix and a detections file. This package produces both: it
encodes an image directory with a pretrained CNN into the binary embedding
container, and converts third-party detector outputs into the JSON-lines
detections schema. The two packages meet only at those file formats.
"""

from .convert import (
    PROBS_RENORM_TOL,
    SUPPORTED_FORMATS,
    ConvertSummary,
    convert_detections,
)
from .encoders import DEFAULT_ENCODER, Encoder, build_encoder
from .export import (
    DEFAULT_BATCH_SIZE,
    ExportManifest,
    ExportSummary,
    export_embeddings,
    list_image_files,
    write_embeddings_file,
)

__all__ = [
    "PROBS_RENORM_TOL",
    "SUPPORTED_FORMATS",
    "ConvertSummary",
    "convert_detections",
    "DEFAULT_ENCODER",
    "Encoder",
    "build_encoder",
    "DEFAULT_BATCH_SIZE",
    "ExportManifest",
    "ExportSummary",
    "export_embeddings",
    "list_image_files",
    "write_embeddings_file",
]
