import random

import pytest

from leakproof.metrics import (
    count_future_items,
    evaluate_lists,
    extrinsic_similarity,
    hr_at_n,
    intrinsic_similarity,
    jaccard,
    ndcg_at_n,
    percent_change,
    rank_models,
)
from leakproof.models.base import RecommendationList


def rl(items, asof=0):
    scores = tuple(float(len(items) - k) for k in range(len(items)))
    return RecommendationList("u", tuple(items), scores, asof=asof)


# ------------------------------------------------------------------ hr/ndcg ---

def test_hr_membership():
    assert hr_at_n(rl(["a", "b", "c"]), "b") == 1
    assert hr_at_n(rl(["a", "b", "c"]), "z") == 0
    assert hr_at_n(rl([]), "z") == 0


def test_ndcg_by_rank():
    assert ndcg_at_n(rl(["hit", "b", "c"]), "hit") == pytest.approx(1.0)
    assert ndcg_at_n(rl(["a", "b", "hit"]), "hit") == pytest.approx(0.5)  # 1/log2(4)
    assert ndcg_at_n(rl(["a", "b", "c"]), "hit") == 0.0


def test_ndcg_bounded_by_hr():
    rng = random.Random(0)
    for _ in range(200):
        items = [f"i{k}" for k in rng.sample(range(50), 20)]
        target = f"i{rng.randrange(60)}"
        h, g = hr_at_n(rl(items), target), ndcg_at_n(rl(items), target)
        assert 0.0 <= g <= h <= 1.0
        assert (g > 0) == (h == 1)


def test_evaluate_lists_averages():
    recs = [rl(["a", "b"]), rl(["c", "d"])]
    record = evaluate_lists(recs, ["a", "x"], n=2)
    assert record.hr_at_n == pytest.approx(0.5)
    assert record.ndcg_at_n == pytest.approx(0.5)


# ------------------------------------------------------------- future items ---

def test_count_future_items_zero_when_all_released():
    release = {"a": 5, "b": 9, "c": 10}
    assert count_future_items(rl(["a", "b", "c"]), release, asof=10) == 0


def test_count_future_items_strictly_after():
    release = {"a": 9, "b": 10, "c": 11}
    assert count_future_items(rl(["a", "b", "c"]), release, asof=10) == 1


def test_count_future_items_empty_list():
    assert count_future_items(rl([]), {}, asof=10) == 0


def test_count_future_items_missing_release():
    with pytest.raises(KeyError):
        count_future_items(rl(["mystery"]), {}, asof=10)


# ------------------------------------------------------------------ jaccard ---

def test_jaccard_examples():
    assert jaccard(rl(["a", "b"]), rl(["a", "b"])) == 1.0
    assert jaccard(rl(["a", "b"]), rl(["c", "d"])) == 0.0
    assert jaccard(rl(["a", "b", "c"]), rl(["b", "c", "d"])) == 0.5
    assert jaccard(rl([]), rl([])) == 1.0


def test_jaccard_properties():
    rng = random.Random(1)
    for _ in range(200):
        a = rl([f"i{k}" for k in rng.sample(range(30), rng.randrange(0, 10))])
        b = rl([f"i{k}" for k in rng.sample(range(30), rng.randrange(0, 10))])
        v = jaccard(a, b)
        assert 0.0 <= v <= 1.0
        assert v == jaccard(b, a)
        assert (v == 1.0) == (set(a.items) == set(b.items))


# --------------------------------------------------------------- similarity ---

def test_intrinsic_identical_lists():
    runs = {idx: [rl(["a", "b", "c"])] * 7 for idx in range(5)}
    dist = intrinsic_similarity(runs)
    assert dist.pair_count == 21
    assert dist.values == (1.0,) * 5
    assert dist.kind == "intrinsic"


def test_intrinsic_disjoint_lists():
    runs = {0: [rl([f"i{k}"]) for k in range(7)]}
    dist = intrinsic_similarity(runs)
    assert dist.values == (0.0,)


def test_intrinsic_three_run_example():
    runs = {0: [rl(["a", "b"]), rl(["a", "b"]), rl(["a", "c"])]}
    dist = intrinsic_similarity(runs)
    # pairs: (1, 1/3, 1/3) -> mean 5/9
    assert dist.pair_count == 3
    assert dist.values[0] == pytest.approx(5 / 9, abs=1e-12)


def test_intrinsic_run_count_mismatch():
    runs = {0: [rl(["a"])] * 7, 1: [rl(["a"])] * 6}
    with pytest.raises(ValueError, match="expected"):
        intrinsic_similarity(runs)


def test_extrinsic_identical_sides():
    runs = {idx: [rl(["a", "b"])] * 7 for idx in range(3)}
    dist = extrinsic_similarity(runs, runs)
    assert dist.pair_count == 49
    assert dist.values == (1.0,) * 3
    assert dist.kind == "extrinsic"


def test_extrinsic_disjoint_sides():
    ref = {0: [rl(["a"])] * 7}
    alt = {0: [rl(["b"])] * 7}
    assert extrinsic_similarity(ref, alt).values == (0.0,)


def test_extrinsic_two_by_two_example():
    ref = {0: [rl(["a", "b"]), rl(["a", "b"])]}
    alt = {0: [rl(["a", "c"]), rl(["a", "c"])]}
    dist = extrinsic_similarity(ref, alt)
    assert dist.pair_count == 4
    assert dist.values[0] == pytest.approx(1 / 3, abs=1e-12)


def test_extrinsic_instance_mismatch():
    with pytest.raises(ValueError, match="different test instances"):
        extrinsic_similarity({0: [rl(["a"])]}, {1: [rl(["a"])]})


# ----------------------------------------------------------- percent change ---

def test_percent_change_examples():
    assert percent_change(0.10, 0.11) == pytest.approx(10.0)
    assert percent_change(0.10, 0.10) == 0.0
    with pytest.raises(ValueError):
        percent_change(0.0, 0.5)
    with pytest.raises(ValueError):
        percent_change(-1.0, 0.5)


# -------------------------------------------------------------- rank models ---

def test_rank_models_orders_by_score():
    assert rank_models({"A": 0.5, "B": 0.2, "C": 0.3}) == {"A": 1, "C": 2, "B": 3}


def test_rank_models_ties_share_best_rank():
    ranks = rank_models({"A": 0.5, "B": 0.5})
    assert ranks == {"A": 1, "B": 1}
    assert list(ranks) == ["A", "B"]  # deterministic secondary order


def test_rank_models_matches_sorting_oracle():
    rng = random.Random(5)
    for _ in range(100):
        scores = {f"m{k}": rng.choice([0.1, 0.2, 0.3, 0.4]) for k in range(rng.randint(2, 6))}
        got = rank_models(scores)
        ordered = sorted(scores, key=lambda m: (-scores[m], m))
        expected = {}
        for pos, m in enumerate(ordered):
            expected[m] = pos + 1 if pos == 0 or scores[ordered[pos - 1]] != scores[m] \
                else expected[ordered[pos - 1]]
        assert got == expected


def test_rank_models_needs_two():
    with pytest.raises(ValueError):
        rank_models({"A": 1.0})
