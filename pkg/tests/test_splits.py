"""Split-plan construction and persistence tests."""

import pytest

from v2s.errors import DataError
from v2s.splits import MODE_OOV, MODE_RANDOM, load_plan, make_split, save_plan
from v2s.vision import ManifestEntry


def entries_for(digits):
    return [
        ManifestEntry(f"seq_{i:04d}", f"seq_{i:04d}/audio.wav",
                      ("bin", "blue", "at", "f", str(d), "now"))
        for i, d in enumerate(digits)
    ]


def hundred():
    return entries_for([i % 10 for i in range(100)])


def test_random_split_is_80_20_and_disjoint():
    entries = hundred()
    plan = make_split(entries, MODE_RANDOM, seed=0)
    assert len(plan.train_ids) == 80 and len(plan.test_ids) == 20
    assert not set(plan.train_ids) & set(plan.test_ids)
    assert set(plan.train_ids) | set(plan.test_ids) == {e.sequence_id for e in entries}


def test_random_split_deterministic():
    a = make_split(hundred(), MODE_RANDOM, seed=5)
    b = make_split(hundred(), MODE_RANDOM, seed=5)
    assert a.train_ids == b.train_ids and a.test_ids == b.test_ids
    c = make_split(hundred(), MODE_RANDOM, seed=6)
    assert c.test_ids != a.test_ids


def test_random_split_covers_all_digits_in_train():
    entries = hundred()
    digit_of = {e.sequence_id: e.digit for e in entries}
    for seed in range(5):
        plan = make_split(entries, MODE_RANDOM, seed=seed)
        assert {digit_of[i] for i in plan.train_ids} == set(range(10))
        assert plan.train_covers_all_digits


def test_random_split_small_corpus_falls_back_on_test_coverage():
    # 20 sequences -> 4 test slots cannot cover ten digits
    plan = make_split(entries_for([i % 10 for i in range(20)]), MODE_RANDOM, seed=1)
    assert plan.train_covers_all_digits
    assert not plan.test_covers_all_digits


def test_oov_split_excludes_held_out_digits():
    entries = hundred()
    digit_of = {e.sequence_id: e.digit for e in entries}
    plan = make_split(entries, MODE_OOV, seed=0, holdout=(9, 0))
    assert all(digit_of[i] not in (9, 0) for i in plan.train_ids)
    assert all(digit_of[i] in (9, 0) for i in plan.test_ids)
    assert len(plan.test_ids) == 20


def test_oov_duplicate_digits_rejected():
    with pytest.raises(DataError, match="distinct"):
        make_split(hundred(), MODE_OOV, seed=0, holdout=(3, 3))


def test_oov_unknown_digit_rejected():
    with pytest.raises(DataError, match="unknown digit"):
        make_split(hundred(), MODE_OOV, seed=0, holdout=(4, 11))


def test_oov_empty_partition_rejected():
    entries = entries_for([1, 2] * 10)
    with pytest.raises(DataError, match="degenerate"):
        make_split(entries, MODE_OOV, seed=0, holdout=(8, 9))


def test_five_disjoint_holdout_plans_cover_all_digits():
    entries = hundred()
    pairs = [(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)]
    seen = set()
    for pair in pairs:
        plan = make_split(entries, MODE_OOV, seed=0, holdout=pair)
        held = {d for d in pair}
        assert not held & seen
        seen |= held
    assert seen == set(range(10))


def test_plan_save_load_round_trip(tmp_path):
    plan = make_split(hundred(), MODE_OOV, seed=3, holdout=(9, 0))
    path = tmp_path / "plan.txt"
    save_plan(path, plan)
    back = load_plan(path)
    assert back == plan


def test_plan_load_rejects_overlap(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text(
        "mode = random_80_20\nseed = 0\n"
        "train_covers_all_digits = true\ntest_covers_all_digits = true\n"
        "train = a,b\ntest = b,c\n"
    )
    with pytest.raises(DataError, match="overlap"):
        load_plan(path)
