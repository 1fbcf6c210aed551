"""Train/test split plans: seeded random 80/20 and held-out-digit splits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .vision import ManifestEntry

MODE_RANDOM = "random_80_20"
MODE_OOV = "oov_digits"
_MAX_DRAWS = 1000


@dataclass
class SplitPlan:
    mode: str
    seed: int
    holdout: tuple[int, int] | None
    train_ids: list[str]
    test_ids: list[str]
    train_covers_all_digits: bool
    test_covers_all_digits: bool


def _coverage(ids, digit_of, universe) -> bool:
    return {digit_of[i] for i in ids} == universe


def make_split(entries: list[ManifestEntry], mode: str, seed: int,
               holdout: tuple[int, int] | None = None) -> SplitPlan:
    """Partition manifest sequences into train/test ids.

    Random mode draws seeded 80/20 shuffles until every digit present in
    the manifest appears in the training partition (and, when feasible,
    in the test partition as well).  OOV mode holds out exactly the two
    given digits for testing.
    """
    ids = [e.sequence_id for e in entries]
    if len(set(ids)) != len(ids):
        raise DataError("duplicate sequence ids in manifest")
    digit_of = {e.sequence_id: e.digit for e in entries}
    universe = set(digit_of.values())

    if mode == MODE_OOV:
        if holdout is None:
            raise DataError("oov mode needs two holdout digits")
        d1, d2 = holdout
        if d1 == d2:
            raise DataError("holdout digits must be distinct")
        for d in (d1, d2):
            if d not in range(10):
                raise DataError(f"unknown digit {d}")
        test = [i for i in ids if digit_of[i] in (d1, d2)]
        train = [i for i in ids if digit_of[i] not in (d1, d2)]
        if not test or not train:
            raise DataError("degenerate split: empty partition")
        return SplitPlan(
            mode=mode, seed=seed, holdout=(d1, d2),
            train_ids=train, test_ids=test,
            train_covers_all_digits=_coverage(train, digit_of, universe),
            test_covers_all_digits=_coverage(test, digit_of, universe),
        )

    if mode != MODE_RANDOM:
        raise DataError(f"unknown split mode {mode!r}")
    n_test = max(1, round(0.2 * len(ids)))
    if n_test >= len(ids):
        raise DataError("degenerate split: too few sequences")
    rng = np.random.default_rng(seed)

    def draw():
        order = rng.permutation(len(ids))
        test = sorted(ids[j] for j in order[:n_test])
        train = sorted(ids[j] for j in order[n_test:])
        return train, test

    fallback = None
    for _ in range(_MAX_DRAWS):
        train, test = draw()
        if _coverage(train, digit_of, universe):
            if _coverage(test, digit_of, universe):
                return SplitPlan(mode, seed, None, train, test, True, True)
            if fallback is None:
                fallback = (train, test)
    if fallback is None:
        raise DataError("degenerate split: could not cover all digits in train")
    train, test = fallback
    return SplitPlan(mode, seed, None, train, test, True, False)


def save_plan(path, plan: SplitPlan) -> None:
    with open(path, "w") as f:
        f.write(f"mode = {plan.mode}\n")
        f.write(f"seed = {plan.seed}\n")
        if plan.holdout is not None:
            f.write(f"holdout = {plan.holdout[0]},{plan.holdout[1]}\n")
        f.write(f"train_covers_all_digits = {str(plan.train_covers_all_digits).lower()}\n")
        f.write(f"test_covers_all_digits = {str(plan.test_covers_all_digits).lower()}\n")
        f.write(f"train = {','.join(plan.train_ids)}\n")
        f.write(f"test = {','.join(plan.test_ids)}\n")


def load_plan(path) -> SplitPlan:
    values = {}
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    try:
        holdout = None
        if "holdout" in values:
            a, b = values["holdout"].split(",")
            holdout = (int(a), int(b))
        plan = SplitPlan(
            mode=values["mode"],
            seed=int(values["seed"]),
            holdout=holdout,
            train_ids=[s for s in values["train"].split(",") if s],
            test_ids=[s for s in values["test"].split(",") if s],
            train_covers_all_digits=values["train_covers_all_digits"] == "true",
            test_covers_all_digits=values["test_covers_all_digits"] == "true",
        )
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: bad split plan ({exc})") from None
    if not plan.train_ids or not plan.test_ids:
        raise DataError(f"{path}: empty partition in split plan")
    if set(plan.train_ids) & set(plan.test_ids):
        raise DataError(f"{path}: train/test overlap in split plan")
    return plan
