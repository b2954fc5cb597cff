"""Command line entry point: alsel-export embed | detections."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .convert import convert_detections
from .encoders import DEFAULT_ENCODER
from .export import DEFAULT_BATCH_SIZE, ExportManifest, export_embeddings


def _cmd_embed(args: argparse.Namespace) -> int:
    manifest = ExportManifest(
        image_dir=args.images,
        out_path=args.out,
        ids_path=args.ids,
        encoder=args.encoder,
        batch_size=args.batch,
    )
    summary = export_embeddings(manifest)
    doc = dataclasses.asdict(summary)
    doc["skipped"] = list(summary.skipped)
    print(json.dumps(doc, sort_keys=True, indent=2))
    return 0


def _cmd_detections(args: argparse.Namespace) -> int:
    summary = convert_detections(args.src, args.format_tag, args.out)
    print(json.dumps(dataclasses.asdict(summary), sort_keys=True, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alsel-export",
        description="Export image embeddings and convert detector dumps "
        "into the selection engine's file formats.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    embed = sub.add_parser(
        "embed", help="encode an image directory into an embedding file"
    )
    embed.add_argument("--images", required=True, help="directory of images")
    embed.add_argument("--out", required=True, help="output embedding path")
    embed.add_argument("--ids", required=True, help="output id sidecar path")
    embed.add_argument("--encoder", default=DEFAULT_ENCODER)
    embed.add_argument("--batch", type=int, default=DEFAULT_BATCH_SIZE)
    embed.set_defaults(func=_cmd_embed)

    conv = sub.add_parser(
        "detections", help="convert a detector dump to the detections schema"
    )
    conv.add_argument("--src", required=True, help="raw detector output path")
    conv.add_argument(
        "--format", required=True, dest="format_tag", help="source format tag"
    )
    conv.add_argument("--out", required=True, help="output JSON-lines path")
    conv.set_defaults(func=_cmd_detections)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
