"""Non-sampled accuracy metrics, future-item counting, and list similarity.

Everything here is a pure function over recommendation lists. Accuracy is
evaluated in the single-relevant-item setting: the ideal DCG is 1/log2(2),
so NDCG reduces to 1/log2(rank + 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence


@dataclass(frozen=True)
class AccuracyRecord:
    """Instance-averaged HR@n and NDCG@n."""

    hr_at_n: float
    ndcg_at_n: float
    n: int = 20


@dataclass(frozen=True)
class SimilarityDistribution:
    """Per-test-instance mean Jaccard values, intrinsic or extrinsic."""

    values: tuple[float, ...]
    kind: str
    pair_count: int

    def mean(self) -> float:
        return sum(self.values) / len(self.values) if self.values else 0.0


def _item_set(rec) -> frozenset:
    return frozenset(rec.items) if hasattr(rec, "items") else frozenset(rec)


def hr_at_n(rec, target) -> int:
    """1 iff the target item appears in the list."""
    return int(target in _item_set(rec))


def ndcg_at_n(rec, target) -> float:
    """1/log2(rank + 1) with 1-indexed rank, 0 when absent."""
    items = rec.items if hasattr(rec, "items") else tuple(rec)
    try:
        rank = items.index(target) + 1
    except ValueError:
        return 0.0
    return 1.0 / math.log2(rank + 1)


def evaluate_lists(recs: Sequence, targets: Sequence, n: int = 20) -> AccuracyRecord:
    """Average HR@n / NDCG@n over parallel lists and their relevant items."""
    if len(recs) != len(targets):
        raise ValueError("recs and targets must be parallel")
    if not recs:
        raise ValueError("nothing to evaluate")
    hits = sum(hr_at_n(r, t) for r, t in zip(recs, targets))
    gain = sum(ndcg_at_n(r, t) for r, t in zip(recs, targets))
    return AccuracyRecord(hr_at_n=hits / len(recs), ndcg_at_n=gain / len(recs), n=n)


def count_future_items(rec, release_time: Mapping, asof: int) -> int:
    """Listed items whose release time is strictly after ``asof``.

    An item released exactly at ``asof`` is observable at prediction time and
    does not count.

    Raises:
        KeyError: a listed item has no release-time entry.
    """
    count = 0
    items = rec.items if hasattr(rec, "items") else tuple(rec)
    for item in items:
        if item not in release_time:
            raise KeyError(f"no release time for item {item!r}")
        if release_time[item] > asof:
            count += 1
    return count


def jaccard(a, b) -> float:
    """Set Jaccard of two lists' items; two empty sets count as identical (1.0)."""
    sa, sb = _item_set(a), _item_set(b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def intrinsic_similarity(runs: Mapping, n_runs: int | None = None) -> SimilarityDistribution:
    """Mean Jaccard over all unordered same-experiment run pairs, per instance.

    ``runs`` maps each test instance to its per-seed recommendation lists.
    With R runs there are R(R-1)/2 pairs; R defaults to whatever the first
    instance provides and must be consistent.
    """
    values = []
    for key in sorted(runs):
        lists = runs[key]
        if n_runs is None:
            n_runs = len(lists)
        if len(lists) != n_runs:
            raise ValueError(f"instance {key!r} has {len(lists)} runs, expected {n_runs}")
        pairs = [jaccard(a, b) for a, b in combinations(lists, 2)]
        values.append(sum(pairs) / len(pairs))
    if n_runs is None or n_runs < 2:
        raise ValueError("intrinsic similarity needs at least 2 runs per instance")
    return SimilarityDistribution(values=tuple(values), kind="intrinsic",
                                  pair_count=n_runs * (n_runs - 1) // 2)


def extrinsic_similarity(runs_ref: Mapping, runs_alt: Mapping,
                         n_runs: int | None = None) -> SimilarityDistribution:
    """Mean Jaccard over all cross pairs between two experiments, per instance.

    With R runs on each side there are R*R pairs. Both mappings must cover
    the same test instances with the same run count.
    """
    if set(runs_ref) != set(runs_alt):
        raise ValueError("experiments cover different test instances")
    values = []
    for key in sorted(runs_ref):
        ref, alt = runs_ref[key], runs_alt[key]
        if n_runs is None:
            n_runs = len(ref)
        if len(ref) != n_runs or len(alt) != n_runs:
            raise ValueError(f"instance {key!r} run counts {len(ref)}/{len(alt)} != {n_runs}")
        pairs = [jaccard(a, b) for a in ref for b in alt]
        values.append(sum(pairs) / len(pairs))
    if n_runs is None:
        raise ValueError("no test instances to compare")
    return SimilarityDistribution(values=tuple(values), kind="extrinsic",
                                  pair_count=n_runs * n_runs)


def percent_change(reference: float, value: float) -> float:
    """Signed percentage change of ``value`` against a positive reference."""
    if reference <= 0:
        raise ValueError(f"reference must be > 0, got {reference}")
    return (value - reference) / reference * 100.0


def rank_models(scores: Mapping[str, float]) -> dict[str, int]:
    """Competition ranking: rank 1 is the highest score, ties share the better rank.

    The returned dict iterates by (rank, model name).
    """
    if len(scores) < 2:
        raise ValueError("need at least 2 models to rank")
    ordered = sorted(scores, key=lambda m: (-scores[m], m))
    ranks: dict[str, int] = {}
    for model in ordered:
        ranks[model] = 1 + sum(1 for other in scores.values() if other > scores[model])
    return ranks
