"""
Scoring detector outputs
========================

Build a few images' worth of fake detector outputs and walk through every
per-image score the selectors consume: mean-complement uncertainty, class
entropy, and best-versus-second-best margins.
"""

import math

import numpy as np

from alsel import (
    Detection,
    EmptyDetectionPolicy,
    aggregate,
    detection_entropy,
    detection_margin_uncertainty,
    image_uncertainty,
)

box = (10.0, 20.0, 32.0, 24.0)  # x, y, width, height in pixels

images = {
    "confident": [
        Detection(box, 0.95, 0, (0.95, 0.03, 0.02)),
        Detection(box, 0.90, 1, (0.05, 0.90, 0.05)),
    ],
    "hesitant": [
        Detection(box, 0.55, 2, (0.20, 0.25, 0.55)),
        Detection(box, 0.40, 0, (0.40, 0.35, 0.25)),
    ],
    "empty": [],
}

# images without any detections take a configurable stand-in uncertainty
policy = EmptyDetectionPolicy(value=1.0)

print("per-image uncertainty, mean of (1 - score):")
for name, dets in images.items():
    print(f"  {name:10s} u = {image_uncertainty(dets, policy):.4f}")

print("\nper-detection entropy (nats) and margin uncertainty:")
for name, dets in images.items():
    for det in dets:
        h = detection_entropy(det.probs)
        m = detection_margin_uncertainty(det.probs)
        print(f"  {name:10s} class {det.class_id}  H = {h:.4f}  margin-u = {m:.4f}")
print(f"  (uniform over 3 classes would give H = {math.log(3):.4f})")

# image-level scores for the entropy/margin baselines are aggregates
entropies = [detection_entropy(d.probs) for d in images["hesitant"]]
for mode in ("min", "max", "sum", "avg"):
    print(f"aggregate({np.round(entropies, 4).tolist()}, {mode!r}) = "
          f"{aggregate(entropies, mode):.4f}")
