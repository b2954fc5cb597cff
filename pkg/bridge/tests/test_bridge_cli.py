"""Exit codes and wiring for the alsel-export command."""

import json

import pytest

from alsel.io import read_detections, read_embeddings
from alsel_bridge.cli import main
from conftest import make_image


def test_embed_writes_engine_readable_files(tmp_path, capsys):
    root = tmp_path / "imgs"
    make_image(root / "one.png", key=1)
    make_image(root / "two.png", key=2)
    emb = tmp_path / "pool.emb"
    ids = tmp_path / "pool.emb.ids"
    code = main(
        [
            "embed",
            "--images", str(root),
            "--out", str(emb),
            "--ids", str(ids),
            "--batch", "2",
        ]
    )
    assert code == 0
    matrix, read_ids = read_embeddings(emb, ids)
    assert matrix.shape == (2, 4096)
    assert list(read_ids) == ["one.png", "two.png"]
    doc = json.loads(capsys.readouterr().out)
    assert doc["count"] == 2
    assert doc["dim"] == 4096
    assert doc["encoder"] == "vgg16"
    assert doc["skipped"] == []
    assert "center-crop 224" in doc["preprocessing"]


def test_embed_validation_failures_exit_2(tmp_path, capsys):
    root = tmp_path / "imgs"
    make_image(root / "one.png", key=1)
    base = [
        "embed",
        "--images", str(root),
        "--out", str(tmp_path / "x.emb"),
        "--ids", str(tmp_path / "x.emb.ids"),
    ]
    assert main(base + ["--batch", "0"]) == 2
    assert main(base + ["--encoder", "mystery"]) == 2
    assert "vgg16" in capsys.readouterr().err
    assert (
        main(
            [
                "embed",
                "--images", str(tmp_path / "missing"),
                "--out", str(tmp_path / "x.emb"),
                "--ids", str(tmp_path / "x.emb.ids"),
            ]
        )
        == 2
    )


def test_detections_roundtrip(tmp_path, capsys):
    src = tmp_path / "results.json"
    src.write_text(
        json.dumps(
            [
                {"image_id": 1, "category_id": 0, "bbox": [0, 0, 4, 4], "score": 0.7},
                {"image_id": 1, "category_id": 2, "bbox": [1, 1, 2, 2], "score": 0.4},
            ]
        ),
        encoding="utf-8",
    )
    out = tmp_path / "pool.jsonl"
    code = main(
        ["detections", "--src", str(src), "--format", "coco", "--out", str(out)]
    )
    assert code == 0
    assert len(read_detections(out)["1"]) == 2
    doc = json.loads(capsys.readouterr().out)
    assert doc["images"] == 1
    assert doc["detections"] == 2
    assert doc["rejected"] == 0


def test_detections_bad_tag_exits_2(tmp_path, capsys):
    src = tmp_path / "x.json"
    src.write_text("[]", encoding="utf-8")
    code = main(
        ["detections", "--src", str(src), "--format", "darknet", "--out", str(tmp_path / "y.jsonl")]
    )
    assert code == 2
    err = capsys.readouterr().err
    assert "coco" in err and "flat-jsonl" in err


def test_detections_missing_source_exits_1(tmp_path):
    code = main(
        [
            "detections",
            "--src", str(tmp_path / "absent.json"),
            "--format", "coco",
            "--out", str(tmp_path / "y.jsonl"),
        ]
    )
    assert code == 1


def test_a_subcommand_is_required():
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 2
