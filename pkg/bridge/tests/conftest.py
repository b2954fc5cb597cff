"""Shared fixtures: a deterministic image tree and one cached export."""

import shutil
import warnings
from types import SimpleNamespace

import numpy as np
import pytest
from PIL import Image

from alsel_bridge import ExportManifest, export_embeddings


def make_image(path, key, size=(32, 24)):
    """Write a small deterministic RGB noise image."""
    rng = np.random.default_rng(key)
    arr = rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr, "RGB").save(path)


# ten files, two of them byte-identical (aa.png and zz.png), two nested;
# with batch size 4 the duplicates land in different batches and the last
# batch is ragged, exactly the layout the fixed-shape padding must cover
FIXTURE_NAMES = [
    "aa.png",
    "c0.png",
    "c1.png",
    "c2.png",
    "c3.png",
    "c4.png",
    "c5.png",
    "nest/n0.png",
    "nest/n1.png",
    "zz.png",
]


@pytest.fixture(scope="session")
def image_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("images")
    for i, name in enumerate(FIXTURE_NAMES):
        if name != "zz.png":
            make_image(root / name, key=i)
    shutil.copyfile(root / "aa.png", root / "zz.png")
    return root


@pytest.fixture(scope="session")
def exported(image_dir, tmp_path_factory):
    """One export of the fixture tree, shared by every test that reads it."""
    out = tmp_path_factory.mktemp("export")
    manifest = ExportManifest(
        image_dir=image_dir,
        out_path=out / "pool.emb",
        ids_path=out / "pool.emb.ids",
        batch_size=4,
    )
    with warnings.catch_warnings():
        # the offline weight fallback warns; that is expected here
        warnings.simplefilter("ignore")
        summary = export_embeddings(manifest)
    return SimpleNamespace(manifest=manifest, summary=summary, out=out)
