"""Export pipeline: container validity, determinism, skip handling."""

import warnings

import numpy as np
import pytest

from alsel.io import read_embeddings
from alsel_bridge import (
    ExportManifest,
    build_encoder,
    export_embeddings,
    list_image_files,
    write_embeddings_file,
)
from conftest import FIXTURE_NAMES, make_image


def test_export_is_readable_by_the_engine(exported):
    matrix, ids = read_embeddings(
        exported.manifest.out_path, exported.manifest.ids_path
    )
    assert matrix.shape == (10, 4096)
    assert matrix.dtype == np.float32
    assert list(ids) == sorted(FIXTURE_NAMES)
    assert exported.summary.count == 10
    assert exported.summary.dim == 4096
    assert exported.summary.skipped == ()
    assert exported.summary.encoder == "vgg16"
    assert exported.summary.elapsed > 0.0
    assert np.all(np.isfinite(matrix))


def test_duplicate_content_gets_identical_rows(exported):
    # aa.png and zz.png are byte copies sitting in different batches, the
    # second one in the padded ragged batch
    matrix, ids = read_embeddings(
        exported.manifest.out_path, exported.manifest.ids_path
    )
    ids = list(ids)
    a = matrix[ids.index("aa.png")]
    z = matrix[ids.index("zz.png")]
    assert np.array_equal(a, z)
    assert np.any(a != 0.0)


def test_reexport_is_byte_identical(exported, tmp_path, image_dir):
    manifest = ExportManifest(
        image_dir=image_dir,
        out_path=tmp_path / "again.emb",
        ids_path=tmp_path / "again.emb.ids",
        batch_size=4,
    )
    export_embeddings(manifest)
    for first, second in (
        (exported.manifest.out_path, manifest.out_path),
        (exported.manifest.ids_path, manifest.ids_path),
    ):
        assert open(first, "rb").read() == open(second, "rb").read()


def test_unreadable_images_are_skipped_with_warning(tmp_path):
    root = tmp_path / "imgs"
    for i, name in enumerate(["q1.png", "q2.png", "q3.png"]):
        make_image(root / name, key=100 + i)
    (root / "bad.jpg").write_bytes(b"this is not an image")
    manifest = ExportManifest(
        image_dir=root,
        out_path=tmp_path / "p.emb",
        ids_path=tmp_path / "p.emb.ids",
    )
    with pytest.warns(UserWarning, match="bad.jpg"):
        summary = export_embeddings(manifest)
    assert summary.count == 3
    assert summary.skipped == ("bad.jpg",)
    matrix, ids = read_embeddings(manifest.out_path, manifest.ids_path)
    assert matrix.shape == (3, 4096)
    assert list(ids) == ["q1.png", "q2.png", "q3.png"]


def test_nothing_exportable_is_an_error(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    manifest = ExportManifest(
        image_dir=empty,
        out_path=tmp_path / "e.emb",
        ids_path=tmp_path / "e.emb.ids",
    )
    with pytest.raises(ValueError, match="no exportable images"):
        export_embeddings(manifest)

    only_bad = tmp_path / "onlybad"
    only_bad.mkdir()
    (only_bad / "junk.png").write_bytes(b"nope")
    manifest = ExportManifest(
        image_dir=only_bad,
        out_path=tmp_path / "e.emb",
        ids_path=tmp_path / "e.emb.ids",
    )
    with pytest.warns(UserWarning, match="junk.png"):
        with pytest.raises(ValueError, match="no exportable images"):
            export_embeddings(manifest)


def test_manifest_validation(tmp_path):
    with pytest.raises(ValueError, match="not found"):
        ExportManifest(
            image_dir=tmp_path / "missing",
            out_path=tmp_path / "x.emb",
            ids_path=tmp_path / "x.emb.ids",
        )
    with pytest.raises(ValueError, match="batch size"):
        ExportManifest(
            image_dir=tmp_path,
            out_path=tmp_path / "x.emb",
            ids_path=tmp_path / "x.emb.ids",
            batch_size=0,
        )


def test_unknown_encoder_lists_supported(tmp_path):
    make_image(tmp_path / "one.png", key=5)
    manifest = ExportManifest(
        image_dir=tmp_path,
        out_path=tmp_path / "x.emb",
        ids_path=tmp_path / "x.emb.ids",
        encoder="resnet50",
    )
    with pytest.raises(ValueError, match="vgg16"):
        export_embeddings(manifest)
    with pytest.raises(ValueError, match="supported encoders"):
        build_encoder("nope")


def test_listing_is_recursive_sorted_and_extension_filtered(tmp_path):
    make_image(tmp_path / "b.PNG", key=1)
    make_image(tmp_path / "sub" / "a.jpg", key=2)
    make_image(tmp_path / "a.png", key=3)
    (tmp_path / "notes.txt").write_text("ignored\n")
    assert list_image_files(tmp_path) == ["a.png", "b.PNG", "sub/a.jpg"]


def test_writer_rejects_id_row_mismatch(tmp_path):
    with pytest.raises(ValueError, match="2 ids for 3 rows"):
        write_embeddings_file(
            np.zeros((3, 4), dtype=np.float32),
            ["a", "b"],
            tmp_path / "x.emb",
            tmp_path / "x.emb.ids",
        )


def test_default_encoder_is_cached():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert build_encoder("vgg16") is build_encoder("vgg16")
