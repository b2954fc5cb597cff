"""Tiny hand-built pool shared by the walkthrough scripts."""

import numpy as np

from alsel import ImageRecord, Pool


def toy_pool():
    """8 images on a 2-D plane, 2 labelled; returns (pool, uncertainty)."""
    embeddings = np.array(
        [
            [0.0, 0.0],   # labelled
            [9.0, 9.0],   # labelled
            [0.5, 0.0],
            [0.0, 0.8],
            [8.5, 9.2],
            [4.5, 4.5],
            [9.0, 0.0],
            [0.2, 9.0],
        ],
        dtype=np.float32,
    )
    labelled = {0, 1}
    records = tuple(
        ImageRecord(f"img{i}", (), i, labelled=i in labelled)
        for i in range(len(embeddings))
    )
    uncertainty = {
        "img2": 0.90,
        "img3": 0.30,
        "img4": 0.85,
        "img5": 0.40,
        "img6": 0.55,
        "img7": 0.50,
    }
    return Pool(records, embeddings, 1), uncertainty
