import random

import pytest

from leakproof.splits import (
    FutureCounts,
    Split,
    leakage_audit,
    load_split,
    save_split,
    split_by_timepoint,
    split_leave_one_out,
    split_random_by_ratio,
    split_random_by_user,
)

from helpers import make_ds, random_rows


def brute_force_audit(d, split):
    """Independent O(T*N) pairwise oracle."""
    per_test = {}
    train_items = {d.interactions[i].item for i in split.train}
    for t in split.test:
        ts = d.interactions[t].timestamp
        n_train = sum(1 for j in split.train if d.interactions[j].timestamp > ts)
        n_items = sum(1 for item in train_items if d.release_time[item] > ts)
        per_test[t] = FutureCounts(n_train, n_items)
    return per_test


# ---------------------------------------------------------- random-by-ratio ---

def test_ratio_split_cardinality():
    d = make_ds([(f"u{k}", f"i{k}", k) for k in range(100)])
    s = split_random_by_ratio(d, 0.2, seed=0)
    assert len(s.test) == 20
    assert len(s.train) == 80


def test_ratio_split_is_deterministic():
    d = make_ds(random_rows(random.Random(1), n_rows=80))
    assert split_random_by_ratio(d, 0.3, seed=5) == split_random_by_ratio(d, 0.3, seed=5)
    assert split_random_by_ratio(d, 0.3, seed=5) != split_random_by_ratio(d, 0.3, seed=6)


@pytest.mark.parametrize("ratio", [0.0, 1.0, -0.5, 1.5])
def test_ratio_out_of_range(ratio):
    d = make_ds([("u1", "a", 1), ("u2", "b", 2)])
    with pytest.raises(ValueError):
        split_random_by_ratio(d, ratio, seed=0)


# ----------------------------------------------------------- random-by-user ---

def test_user_split_takes_whole_histories():
    rows = [(f"u{k}", f"i{j}", 10 * k + j) for k in range(10) for j in range(3)]
    d = make_ds(rows)
    s = split_random_by_user(d, 0.3, seed=1)
    test_users = {d.interactions[i].user for i in s.test}
    train_users = {d.interactions[i].user for i in s.train}
    assert len(test_users) == 3
    assert not test_users & train_users


def test_user_split_deterministic():
    d = make_ds(random_rows(random.Random(2), n_users=12, n_rows=60))
    assert split_random_by_user(d, 0.25, seed=9) == split_random_by_user(d, 0.25, seed=9)


def test_user_split_ratio_out_of_range():
    d = make_ds([("u1", "a", 1), ("u2", "b", 2)])
    with pytest.raises(ValueError):
        split_random_by_user(d, 1.0, seed=0)


# ------------------------------------------------------------ leave-one-out ---

def test_loo_with_validation():
    d = make_ds([("u1", "a", 1), ("u1", "b", 2), ("u1", "c", 3)])
    s = split_leave_one_out(d, with_validation=True)
    assert {d.interactions[i].timestamp for i in s.test} == {3}
    assert {d.interactions[i].timestamp for i in s.validation} == {2}
    assert {d.interactions[i].timestamp for i in s.train} == {1}


def test_loo_without_validation():
    d = make_ds([("u1", "a", 1), ("u1", "b", 2)])
    s = split_leave_one_out(d)
    assert {d.interactions[i].timestamp for i in s.test} == {2}
    assert {d.interactions[i].timestamp for i in s.train} == {1}


def test_loo_timestamp_tie_takes_later_input_row():
    d = make_ds([("u1", "a", 5), ("u1", "b", 5)])
    s = split_leave_one_out(d)
    (test_idx,) = s.test
    assert d.interactions[test_idx].item == "b"


def test_loo_short_users_are_excluded_but_kept_in_train(caplog):
    d = make_ds([("u1", "a", 1), ("u1", "b", 2), ("solo", "c", 3)])
    with caplog.at_level("INFO", logger="leakproof.splits"):
        s = split_leave_one_out(d)
    assert {d.interactions[i].user for i in s.test} == {"u1"}
    assert any(d.interactions[i].user == "solo" for i in s.train)


def test_loo_test_is_per_user_maximum():
    d = make_ds(random_rows(random.Random(4), n_users=10, n_rows=100))
    s = split_leave_one_out(d)
    for t in s.test:
        user, _, ts = d.interactions[t]
        later_same_user = [j for j in s.train
                           if d.interactions[j].user == user and d.interactions[j].timestamp > ts]
        assert not later_same_user


# -------------------------------------------------------------- by-timepoint ---

def test_timepoint_split_basic():
    d = make_ds([("u1", "a", 10), ("u2", "b", 20), ("u3", "c", 30)])
    s = split_by_timepoint(d, 20)
    assert {d.interactions[i].timestamp for i in s.train} == {10}
    assert {d.interactions[i].timestamp for i in s.test} == {20, 30}


def test_timepoint_at_end_keeps_only_final_instants():
    d = make_ds([("u1", "a", 10), ("u2", "b", 30), ("u3", "c", 30)])
    s = split_by_timepoint(d, 30)
    assert {d.interactions[i].timestamp for i in s.test} == {30}
    assert len(s.test) == 2


def test_timepoint_outside_span():
    d = make_ds([("u1", "a", 10), ("u2", "b", 30)])
    for bad in (10, 31, 5):
        with pytest.raises(ValueError):
            split_by_timepoint(d, bad)


def test_timepoint_always_audits_to_zero():
    for seed in range(5):
        d = make_ds(random_rows(random.Random(seed), n_rows=60))
        mid = (d.t_start + d.t_end) // 2
        if not d.t_start < mid <= d.t_end:
            continue
        audit = leakage_audit(d, split_by_timepoint(d, mid))
        assert audit.total_future_train == 0
        assert audit.total_future_items == 0


# -------------------------------------------------------------------- audit ---

def test_audit_counts_future_train_and_items():
    d = make_ds([("u1", "i1", 100), ("u2", "i2", 200)])
    s = Split(train=frozenset({1}), validation=frozenset(), test=frozenset({0}),
              strategy="manual")
    audit = leakage_audit(d, s)
    assert audit.per_test[0] == FutureCounts(1, 1)
    assert audit.total_future_train == 1
    assert audit.total_future_items == 1


def test_audit_matches_brute_force_on_random_data():
    for seed in range(10):
        d = make_ds(random_rows(random.Random(seed + 50), n_rows=80))
        s = split_leave_one_out(d)
        audit = leakage_audit(d, s)
        assert audit.per_test == brute_force_audit(d, s)


def test_loo_leaks_when_last_interactions_interleave():
    # u1 retires early: everything u2 does later is future data for u1's test
    d = make_ds([("u1", "a", 1), ("u1", "b", 2), ("u2", "a", 3), ("u2", "c", 4)])
    audit = leakage_audit(d, split_leave_one_out(d))
    u1_test = next(i for i in audit.per_test if d.interactions[i].user == "u1")
    assert audit.per_test[u1_test].future_train_count > 0


def test_random_splits_leak_on_interleaved_data():
    d = make_ds(random_rows(random.Random(77), n_users=6, n_rows=60))
    for s in (split_random_by_ratio(d, 0.3, 0), split_random_by_user(d, 0.3, 0)):
        audit = leakage_audit(d, s)
        assert audit.total_future_train > 0


# --------------------------------------------------------------- invariants ---

def test_all_strategies_are_disjoint_partitions():
    d = make_ds(random_rows(random.Random(123), n_users=8, n_rows=64))
    candidates = [
        split_random_by_ratio(d, 0.25, seed=3),
        split_random_by_user(d, 0.25, seed=3),
        split_leave_one_out(d, with_validation=True),
        split_by_timepoint(d, (d.t_start + d.t_end) // 2 + 1),
    ]
    everything = frozenset(range(len(d.interactions)))
    for s in candidates:
        assert not s.train & s.test
        assert not s.train & s.validation
        assert not s.validation & s.test
        assert s.train | s.validation | s.test <= everything


def test_split_disjointness_is_enforced():
    with pytest.raises(ValueError):
        Split(train=frozenset({0}), validation=frozenset(), test=frozenset({0}), strategy="bad")


def test_split_save_load_roundtrip(tmp_path):
    d = make_ds(random_rows(random.Random(8), n_rows=40))
    s = split_leave_one_out(d, with_validation=True)
    save_split(s, tmp_path / "split", leakage_audit(d, s))
    back = load_split(tmp_path / "split")
    assert back.train == s.train
    assert back.validation == s.validation
    assert back.test == s.test
    assert back.strategy == s.strategy
