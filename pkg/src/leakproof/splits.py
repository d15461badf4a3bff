"""Train/validation/test split strategies and the leakage audit.

A Split stores *indices* into a Dataset's interaction tuple, so the same
immutable Dataset can carry many splits. Sampling strategies draw from
numpy's PCG64 generator seeded with the caller's seed, which is the
documented reproducibility contract.
"""

from __future__ import annotations

import bisect
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, NamedTuple

import numpy as np

from leakproof.corpus import Dataset

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Split:
    """A partition of a Dataset into train/validation/test index sets."""

    train: frozenset[int]
    validation: frozenset[int]
    test: frozenset[int]
    strategy: str
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.train & self.test or self.train & self.validation or self.validation & self.test:
            raise ValueError("train/validation/test must be pairwise disjoint")


class FutureCounts(NamedTuple):
    future_train_count: int
    future_item_count: int


@dataclass(frozen=True)
class LeakageAudit:
    """Per-test-instance counts of training data from the future.

    ``future_train_count`` counts training interactions strictly later than
    the test timestamp; ``future_item_count`` counts distinct items of the
    training catalog whose release time is strictly later.
    """

    per_test: dict[int, FutureCounts]
    total_future_train: int
    total_future_items: int


def split_random_by_ratio(d: Dataset, ratio: float, seed: int) -> Split:
    """Sample ``round(ratio * |d|)`` interactions uniformly as test; rest is train."""
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    n = len(d.interactions)
    n_test = int(round(ratio * n))
    rng = np.random.default_rng(seed)
    test = frozenset(int(i) for i in rng.choice(n, size=n_test, replace=False))
    train = frozenset(range(n)) - test
    return Split(train=train, validation=frozenset(), test=test,
                 strategy="random-by-ratio", params={"ratio": ratio, "seed": seed})


def split_random_by_user(d: Dataset, user_ratio: float, seed: int) -> Split:
    """Sample a fraction of users; their entire histories become test."""
    if not 0 < user_ratio < 1:
        raise ValueError(f"user_ratio must be in (0, 1), got {user_ratio}")
    if d.n_users < 2:
        raise ValueError("need at least 2 users")
    users = sorted(d.user_span)
    n_test_users = min(max(int(round(user_ratio * len(users))), 1), len(users) - 1)
    rng = np.random.default_rng(seed)
    chosen = {users[int(i)] for i in rng.choice(len(users), size=n_test_users, replace=False)}
    test = frozenset(i for i, it in enumerate(d.interactions) if it.user in chosen)
    train = frozenset(range(len(d.interactions))) - test
    return Split(train=train, validation=frozenset(), test=test,
                 strategy="random-by-user", params={"user_ratio": user_ratio, "seed": seed})


def split_leave_one_out(d: Dataset, with_validation: bool = False) -> Split:
    """Hold out each user's last interaction as test (second-last as validation).

    The dataset's chronological order already breaks timestamp ties by input
    order, so a user's test instance is simply their final interaction in
    dataset order. Users with too few interactions (fewer than 2, or 3 when
    validation is requested) are excluded from the held-out sets and logged;
    all their interactions stay in train.
    """
    per_user: dict = {}
    for idx, it in enumerate(d.interactions):
        per_user.setdefault(it.user, []).append(idx)

    minimum = 3 if with_validation else 2
    test: set[int] = set()
    validation: set[int] = set()
    short_users = 0
    for user in per_user:
        indices = per_user[user]
        if len(indices) < minimum:
            short_users += 1
            continue
        test.add(indices[-1])
        if with_validation:
            validation.add(indices[-2])
    if short_users:
        log.info("leave-one-out: %d users below %d interactions kept train-only", short_users, minimum)

    train = frozenset(range(len(d.interactions))) - test - validation
    return Split(train=train, validation=frozenset(validation), test=frozenset(test),
                 strategy="leave-one-out", params={"with_validation": with_validation})


def split_by_timepoint(d: Dataset, timepoint: int) -> Split:
    """All interactions at or after ``timepoint`` are test; the rest train.

    The only strategy here that observes the global timeline: its audit is
    zero by construction.
    """
    if not d.t_start < timepoint <= d.t_end:
        raise ValueError(f"timepoint {timepoint} outside span ({d.t_start}, {d.t_end}]")
    test = frozenset(i for i, it in enumerate(d.interactions) if it.timestamp >= timepoint)
    train = frozenset(range(len(d.interactions))) - test
    return Split(train=train, validation=frozenset(), test=test,
                 strategy="by-timepoint", params={"timepoint": timepoint})


def leakage_audit(d: Dataset, s: Split) -> LeakageAudit:
    """Count future training interactions and future catalog items per test instance."""
    train_ts = sorted(d.interactions[i].timestamp for i in s.train)
    catalog_releases = sorted({d.release_time[d.interactions[i].item] for i in s.train})

    per_test: dict[int, FutureCounts] = {}
    for idx in sorted(s.test):
        ts = d.interactions[idx].timestamp
        n_train_after = len(train_ts) - bisect.bisect_right(train_ts, ts)
        n_items_after = len(catalog_releases) - bisect.bisect_right(catalog_releases, ts)
        per_test[idx] = FutureCounts(n_train_after, n_items_after)

    return LeakageAudit(
        per_test=per_test,
        total_future_train=sum(c.future_train_count for c in per_test.values()),
        total_future_items=sum(c.future_item_count for c in per_test.values()),
    )


def save_split(s: Split, directory, audit: LeakageAudit | None = None) -> None:
    """Write train/validation/test index lists plus a JSON manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, indices in (("train", s.train), ("validation", s.validation), ("test", s.test)):
        (directory / f"{name}.idx").write_text("".join(f"{i}\n" for i in sorted(indices)))
    manifest = {
        "strategy": s.strategy,
        "params": dict(s.params),
        "sizes": {"train": len(s.train), "validation": len(s.validation), "test": len(s.test)},
    }
    if audit is not None:
        manifest["audit"] = {
            "total_future_train": audit.total_future_train,
            "total_future_items": audit.total_future_items,
        }
    (directory / "split.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def load_split(directory) -> Split:
    directory = Path(directory)
    manifest = json.loads((directory / "split.json").read_text())

    def read_idx(name: str) -> frozenset[int]:
        text = (directory / f"{name}.idx").read_text()
        return frozenset(int(line) for line in text.splitlines() if line)

    return Split(
        train=read_idx("train"),
        validation=read_idx("validation"),
        test=read_idx("test"),
        strategy=manifest["strategy"],
        params=manifest["params"],
    )
