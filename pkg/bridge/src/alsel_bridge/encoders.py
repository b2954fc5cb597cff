"""Pretrained image encoders and their published preprocessing."""

from __future__ import annotations

import contextlib
import sys
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import torch

# seed for the fallback initialisation when pretrained weights are unreachable
INIT_SEED = 0


@dataclass(frozen=True)
class Encoder:
    """A ready-to-run feature extractor plus its preprocessing pipeline.

    preprocess maps a PIL image to a (3, H, W) float tensor; module maps a
    stacked batch of those to (B, dim) features and is already in eval mode.
    weights records where the parameters came from so export summaries stay
    honest about fallbacks.
    """

    name: str
    module: torch.nn.Module = field(repr=False)
    preprocess: Callable = field(repr=False)
    dim: int
    weights: str
    preprocessing: str


def _vgg16() -> Encoder:
    from torchvision import models

    published = models.VGG16_Weights.IMAGENET1K_V1
    try:
        # torch announces downloads on stdout; keep that off the
        # machine-readable stream (the CLI prints its summary there)
        with contextlib.redirect_stdout(sys.stderr):
            net = models.vgg16(weights=published)
        weights = "imagenet"
    except Exception as exc:
        # No local weight file and no way to fetch one. A seeded random
        # initialisation keeps exports deterministic and the pipeline
        # testable offline; the features carry no semantics, so say so.
        warnings.warn(
            f"pretrained vgg16 weights unavailable ({exc}); falling back to "
            f"a random initialisation seeded with {INIT_SEED}"
        )
        torch.manual_seed(INIT_SEED)
        net = models.vgg16(weights=None)
        weights = f"random-init(seed={INIT_SEED})"
    # keep the classifier up to its second 4096-wide linear layer
    net.classifier = torch.nn.Sequential(*list(net.classifier.children())[:-1])
    net.eval()
    for p in net.parameters():
        p.requires_grad_(False)
    return Encoder(
        name="vgg16",
        module=net,
        # the published default preprocessing ships with the weight metadata
        # and needs no download, so the fallback uses it too
        preprocess=published.transforms(),
        dim=4096,
        weights=weights,
        preprocessing=(
            "resize shorter side to 256 (bilinear), center-crop 224, scale "
            "to [0, 1], normalise mean=(0.485, 0.456, 0.406) "
            "std=(0.229, 0.224, 0.225)"
        ),
    )


_BUILDERS: dict[str, Callable[[], Encoder]] = {"vgg16": _vgg16}

DEFAULT_ENCODER = "vgg16"


@lru_cache(maxsize=None)
def build_encoder(name: str) -> Encoder:
    """Instantiate a registered encoder in deterministic inference mode.

    Built encoders are cached per process; they hold no mutable state after
    construction, so repeated exports reuse the same instance.
    """
    try:
        builder = _BUILDERS[name]
    except KeyError:
        supported = ", ".join(sorted(_BUILDERS))
        raise ValueError(
            f"unknown encoder {name!r}: supported encoders are {supported}"
        ) from None
    return builder()
