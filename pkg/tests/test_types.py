"""Domain-type invariants and pool validation."""

import numpy as np
import pytest

from alsel import (
    AlphaState,
    Detection,
    ImageRecord,
    Pool,
    SelectionResult,
    ValidationError,
    validate_pool,
)
from helpers import det, make_pool


def test_well_formed_pool_has_no_violations():
    pool = make_pool(
        np.eye(3, 4),
        detections={0: [det(0.5)], 1: [], 2: [det(0.9), det(0.2)]},
    )
    assert validate_pool(pool) == []


def test_duplicate_image_id_is_reported_once():
    emb = np.zeros((2, 3), dtype=np.float32)
    records = (
        ImageRecord("dup", (), 0),
        ImageRecord("dup", (), 1),
    )
    problems = validate_pool(Pool(records, emb, 1))
    assert len(problems) == 1
    assert "dup" in problems[0]


def test_probs_sum_violation_names_the_detection():
    bad = Detection((0.0, 0.0, 1.0, 1.0), 0.5, 0, (0.5, 0.3))
    pool = make_pool(np.zeros((1, 2)), detections={0: [bad]}, num_classes=2)
    problems = validate_pool(pool)
    assert len(problems) == 1
    assert "img000" in problems[0] and "detection 0" in problems[0]
    assert "sum" in problems[0]


def test_embedding_index_out_of_range():
    records = (ImageRecord("a", (), 5),)
    problems = validate_pool(Pool(records, np.zeros((2, 2)), 1))
    assert any("embedding_index" in p for p in problems)


def test_non_finite_embeddings_flagged():
    emb = np.zeros((2, 2), dtype=np.float32)
    emb[1, 0] = np.nan
    problems = validate_pool(make_pool(emb))
    assert any("non-finite" in p for p in problems)


@pytest.mark.parametrize(
    "detection,needle",
    [
        (Detection((0, 0, -1.0, 1.0), 0.5, 0), "width"),
        (Detection((0, 0, 1.0, 1.0), 1.3, 0), "score"),
        (Detection((0, 0, 1.0, 1.0), 0.5, 7), "class_id"),
        (Detection((0, 0, 1.0, 1.0), 0.5, 0, (0.2, 0.8)), "attain max"),
        (Detection((0, 0, 1.0, 1.0), 0.5, 0, (1.2, -0.2)), "outside [0, 1]"),
        (Detection((0, 0, 1.0, 1.0), 0.5, 0, (0.5, 0.25, 0.25)), "entries"),
    ],
)
def test_each_detection_invariant_is_checked(detection, needle):
    pool = make_pool(np.zeros((1, 2)), detections={0: [detection]}, num_classes=2)
    problems = validate_pool(pool)
    assert problems, f"expected a violation for {needle}"
    assert any(needle in p for p in problems), problems


def test_single_field_mutations_always_flagged():
    # start from a valid pool and break exactly one invariant at a time
    rng = np.random.default_rng(7)
    for trial in range(20):
        emb = rng.normal(size=(4, 3)).astype(np.float32)
        good = make_pool(
            emb,
            detections={i: [det(0.5, class_id=1, num_classes=3)] for i in range(4)},
            num_classes=3,
        )
        assert validate_pool(good) == []

        mutations = [
            lambda: Pool(good.images, emb, 0),
            lambda: Pool(good.images[:3] + (good.images[0],), emb, 3),
            lambda: Pool(
                good.images[:3] + (ImageRecord("imgX", (), 17),), emb, 3
            ),
            lambda: Pool(
                good.images[:3]
                + (ImageRecord("imgX", (det(1.5),), 3),),
                emb,
                3,
            ),
        ]
        broken = mutations[trial % len(mutations)]()
        assert validate_pool(broken), f"mutation {trial % len(mutations)} not caught"


def test_pool_status_sets_disjoint_and_exhaustive():
    pool = make_pool(np.zeros((4, 2)), labelled={1, 3})
    labelled, unlabelled = set(pool.labelled_ids()), set(pool.unlabelled_ids())
    assert labelled & unlabelled == set()
    assert labelled | unlabelled == {r.image_id for r in pool.images}


def test_with_labelled_moves_and_guards():
    pool = make_pool(np.zeros((3, 2)))
    moved = pool.with_labelled(["img001"])
    assert moved.labelled_ids() == ["img001"]
    assert pool.labelled_ids() == []  # original untouched
    with pytest.raises(ValidationError):
        moved.with_labelled(["img001"])  # already labelled
    with pytest.raises(ValidationError):
        pool.with_labelled(["nope"])


def test_embeddings_are_read_only():
    pool = make_pool(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        pool.embeddings[0, 0] = 1.0


def test_selection_result_requires_matching_audit():
    with pytest.raises(ValidationError):
        SelectionResult("random", 0, ("a", "b"), ({"id": "a"},))


def test_alpha_state_range():
    assert AlphaState(0.0).value == 0.0
    assert AlphaState(1.0, iteration=3).iteration == 3
    with pytest.raises(ValidationError):
        AlphaState(1.2)
    with pytest.raises(ValidationError):
        AlphaState(-0.1)


def test_record_lookup():
    pool = make_pool(np.zeros((2, 2)))
    assert pool.record("img001").embedding_index == 1
    with pytest.raises(ValidationError):
        pool.record("missing")
