import math
import random
from dataclasses import replace

import pytest

from leakproof import synth
from leakproof.metrics import AccuracyRecord, hr_at_n, ndcg_at_n
from leakproof.models import ModelSpec, build_model
from leakproof.experiments import (
    RunResult,
    SweepConfig,
    SweepReport,
    build_sweep_training_set,
    run_sweep,
    run_timeline,
    similarity_analysis,
    summarize,
)
from leakproof.splits import split_by_timepoint, split_leave_one_out

from helpers import make_ds, random_rows


@pytest.fixture(scope="module")
def small_synth():
    d = synth.generate_dataset(n_users=120, n_items=80, n_interactions=1500,
                               seed=5, quiet_window=4)
    return d, split_leave_one_out(d)


# ------------------------------------------------------ training set builder ---

def test_training_set_never_crosses_future_horizon(small_synth):
    d, split = small_synth
    cfg = SweepConfig(test_window_index=4, future_windows=0)
    train, test = build_sweep_training_set(d, split, cfg)
    horizon = d.t_start + 5 * cfg.window_length
    assert max(d.interactions[i].timestamp for i in train) < horizon
    assert all(d.window_of(d.interactions[i].timestamp, cfg.window_length) == 4 for i in test)


def test_training_sizes_grow_with_future_windows(small_synth):
    d, split = small_synth
    sizes = []
    for fw in range(4):
        cfg = SweepConfig(test_window_index=4, future_windows=fw)
        train, _ = build_sweep_training_set(d, split, cfg)
        sizes.append(len(train))
    assert sizes == sorted(sizes)
    assert sizes[0] < sizes[-1]


def test_test_instances_never_appear_in_any_training_set(small_synth):
    d, split = small_synth
    _, test = build_sweep_training_set(d, split, SweepConfig(test_window_index=4))
    for fw in range(4):
        train, _ = build_sweep_training_set(
            d, split, SweepConfig(test_window_index=4, future_windows=fw))
        assert not set(test) & set(train)


def test_validation_of_test_users_is_masked(small_synth):
    d, _ = small_synth
    split = split_leave_one_out(d, with_validation=True)
    cfg = SweepConfig(test_window_index=4, future_windows=3)
    train, test = build_sweep_training_set(d, split, cfg)
    test_users = {d.interactions[i].user for i in test}
    masked_val = {i for i in split.validation if d.interactions[i].user in test_users}
    assert not masked_val & set(train)


def test_builder_rejects_bad_windows(small_synth):
    d, split = small_synth
    with pytest.raises(ValueError, match="future_windows"):
        build_sweep_training_set(d, split, SweepConfig(test_window_index=4, future_windows=99))
    with pytest.raises(ValueError, match="requires a leave-one-out"):
        build_sweep_training_set(d, split_by_timepoint(d, d.t_end), SweepConfig())


# ------------------------------------------------------------------ run_sweep ---

def test_sweep_no_future_means_no_future_items(small_synth):
    d, split = small_synth
    cfg = SweepConfig(test_window_index=4, future_windows=2, seeds=(0, 1))
    report = run_sweep(d, split, ModelSpec("popularity"), cfg, model_name="popularity")
    assert report.future_total(0) == 0
    sizes = [report.train_sizes[fw] for fw in report.future_range]
    assert sizes == sorted(sizes)


def test_sweep_deterministic_model_has_zero_seed_variance(small_synth):
    d, split = small_synth
    cfg = SweepConfig(test_window_index=4, future_windows=1, seeds=(0, 1, 2))
    report = run_sweep(d, split, ModelSpec("popularity"), cfg, model_name="popularity")
    for fw in report.future_range:
        values = {report.runs[(fw, s)].accuracy.hr_at_n for s in cfg.seeds}
        assert len(values) == 1
        lists = [report.runs[(fw, s)].lists for s in cfg.seeds]
        assert lists[0] == lists[1] == lists[2]


def test_parallel_sweep_matches_sequential(small_synth):
    d, split = small_synth
    cfg = SweepConfig(test_window_index=4, future_windows=1, seeds=(0, 1))
    sequential = run_sweep(d, split, ModelSpec("popularity"), cfg, model_name="popularity")
    parallel = run_sweep(d, split, ModelSpec("popularity"), cfg, model_name="popularity",
                         jobs=2)
    assert parallel.train_sizes == sequential.train_sizes
    for key, run in sequential.runs.items():
        assert parallel.runs[key].accuracy == run.accuracy
        assert parallel.runs[key].lists == run.lists


def test_sweep_report_row_bookkeeping(small_synth):
    d, split = small_synth
    cfg = SweepConfig(test_window_index=4, future_windows=1, seeds=(0, 1))
    report = run_sweep(d, split, ModelSpec("popularity"), cfg, model_name="popularity")
    assert set(report.runs) == {(fw, s) for fw in (0, 1) for s in (0, 1)}
    for run in report.runs.values():
        assert set(run.lists) == set(report.test_indices)


# ------------------------------------------------- the co-occurrence chain ---

def fig4_dataset():
    """Users A and B share early items; all of C's items release after A's last."""
    rows = [
        ("A", "a1", 10), ("B", "a1", 11), ("A", "a2", 12), ("B", "a2", 13),
        ("A", "x", 20),                       # A's last interaction: the test instance
        ("B", "c1", 30), ("B", "c2", 31),     # the B-C bridge
        ("C", "c1", 32), ("C", "c2", 33), ("C", "c3", 34),
        ("B", "b9", 35),
    ]
    return make_ds(rows)


def test_future_items_reach_user_a_iff_future_windows_included():
    d = fig4_dataset()
    split = split_leave_one_out(d)
    c_items = {"c1", "c2", "c3"}
    cfg = SweepConfig(window_length=15, test_window_index=0, future_windows=1, seeds=(0,))
    report = run_sweep(d, split, ModelSpec("itemknn", {"neighborhood_size": 10}),
                       cfg, model_name="itemknn")
    (a_test,) = report.test_indices
    assert d.interactions[a_test].user == "A"

    no_future = set(report.runs[(0, 0)].lists[a_test].items)
    with_future = set(report.runs[(1, 0)].lists[a_test].items)
    assert not no_future & c_items
    assert with_future & c_items


def test_fig4_scores_match_brute_force_cosine():
    d = fig4_dataset()
    split = split_leave_one_out(d)
    cfg = SweepConfig(window_length=15, test_window_index=0, future_windows=1, seeds=(0,))
    train, (a_test,) = build_sweep_training_set(d, split, replace(cfg, future_windows=1))

    supports: dict = {}
    history: dict = {}
    for i in train:
        it = d.interactions[i]
        supports.setdefault(it.item, set()).add(it.user)
        history.setdefault(it.user, set()).add(it.item)

    def sim(a, b):
        inter = len(supports[a] & supports[b])
        return inter / math.sqrt(len(supports[a]) * len(supports[b])) if inter else 0.0

    pool = sorted(set(supports) - history["A"])
    scores = {cand: sum(sim(cand, j) for j in history["A"] if j in supports) for cand in pool}
    expected = sorted(pool, key=lambda c: (-scores[c], c))

    report = run_sweep(d, split, ModelSpec("itemknn", {"neighborhood_size": 10}),
                       cfg, model_name="itemknn")
    assert list(report.runs[(1, 0)].lists[a_test].items) == expected


# --------------------------------------------------------- similarity analysis ---

def test_similarity_pair_counts_for_seven_seeds(small_synth):
    d, split = small_synth
    cfg = SweepConfig(test_window_index=4, future_windows=1, seeds=tuple(range(7)))
    report = run_sweep(d, split, ModelSpec("popularity"), cfg, model_name="popularity")
    intr0, intr1, extr = similarity_analysis(report, report, 0, 1)
    assert intr0.pair_count == 21
    assert extr.pair_count == 49
    assert set(intr0.values) == {1.0}  # deterministic model
    assert set(intr1.values) == {1.0}


def test_similarity_two_seed_toy_counts(small_synth):
    d, split = small_synth
    cfg = SweepConfig(test_window_index=4, future_windows=1, seeds=(0, 1))
    report = run_sweep(d, split, ModelSpec("popularity"), cfg, model_name="popularity")
    intr0, _, extr = similarity_analysis(report, report, 0, 1)
    assert intr0.pair_count == 1
    assert extr.pair_count == 4


def test_similarity_rejects_mismatched_reports(small_synth):
    d, split = small_synth
    cfg_a = SweepConfig(test_window_index=4, future_windows=0, seeds=(0, 1))
    cfg_b = SweepConfig(test_window_index=5, future_windows=0, seeds=(0, 1))
    rep_a = run_sweep(d, split, ModelSpec("popularity"), cfg_a)
    rep_b = run_sweep(d, split, ModelSpec("popularity"), cfg_b)
    with pytest.raises(ValueError, match="different test instances"):
        similarity_analysis(rep_a, rep_b, 0, 0)


# -------------------------------------------------------------------- timeline ---

def test_timeline_prediction_sees_only_the_past():
    rows = [("ua", "i1", 1), ("ub", "i2", 2), ("u", "X", 3), ("uc", "i2", 4), ("ud", "i2", 5)]
    d = make_ds(rows)
    report = run_timeline(d, [2], lambda: build_model("popularity"), mode="timeline")
    (row,) = report.rows
    assert row.asof == 3
    assert row.consumed == 2  # only the two earlier events
    assert row.rec.items == ("i1", "i2")  # tied counts, identifier order
    assert report.violations == 0


def test_timeline_instrumentation_on_random_data():
    d = synth.generate_dataset(n_users=60, n_items=50, n_interactions=700, seed=9)
    split = split_leave_one_out(d)
    for batch in (1, 16):
        report = run_timeline(d, split.test, lambda: build_model("popularity"),
                              mode="timeline", batch_size=batch)
        assert report.violations == 0
        assert len(report.rows) == len(split.test)
        consumed = [r.consumed for r in report.rows]
        assert consumed == sorted(consumed)


def test_timeline_never_trains_on_test_instances():
    rows = [("u1", "a", 1), ("u1", "b", 2), ("u2", "a", 3), ("u2", "c", 4)]
    d = make_ds(rows)
    split = split_leave_one_out(d)
    report = run_timeline(d, split.test, lambda: build_model("popularity"), mode="timeline")
    # the two held-out events are never consumed
    assert all(r.consumed <= len(rows) - len(split.test) for r in report.rows)


def test_prequential_tests_every_instance():
    d = synth.generate_dataset(n_users=40, n_items=30, n_interactions=400, seed=3)
    report = run_timeline(d, [], lambda: build_model("popularity"), mode="prequential")
    assert len(report.rows) == len(d.interactions)
    assert report.violations == 0


def test_sliding_full_span_equals_timepoint_evaluation():
    d = make_ds(random_rows(random.Random(42), n_users=12, n_items=15, n_rows=150))
    timepoint = (d.t_start + d.t_end) // 2 + 1
    split = split_by_timepoint(d, timepoint)
    span = d.t_end - d.t_start + 1

    report = run_timeline(d, split.test, lambda: build_model("popularity"),
                          mode="sliding", window=span)
    assert report.violations == 0

    # direct split-by-timepoint evaluation over the identical candidate rule
    model = build_model("popularity")
    model.fit([d.interactions[i] for i in sorted(split.train)])
    by_index = {row.index: row for row in report.rows}
    for i in sorted(split.test):
        it = d.interactions[i]
        pool = [item for item in sorted(model.catalog()) if d.release_time[item] <= it.timestamp]
        rec = model.recommend(it.user, 20, candidates=pool, asof=it.timestamp)
        assert by_index[i].rec.items == rec.items
        assert by_index[i].hr == hr_at_n(rec, it.item)
        assert by_index[i].ndcg == ndcg_at_n(rec, it.item)


def test_sliding_needs_window():
    d = make_ds([("u1", "a", 1), ("u1", "b", 2)])
    with pytest.raises(ValueError, match="window"):
        run_timeline(d, [1], lambda: build_model("popularity"), mode="sliding")


def test_unknown_mode_rejected():
    d = make_ds([("u1", "a", 1), ("u1", "b", 2)])
    with pytest.raises(ValueError, match="unknown mode"):
        run_timeline(d, [1], lambda: build_model("popularity"), mode="nope")


# ------------------------------------------------------------------- summarize ---

def fake_report(model: str, hr_by_fw: dict, ndcg_by_fw: dict | None = None) -> SweepReport:
    ndcg_by_fw = ndcg_by_fw or hr_by_fw
    report = SweepReport(model=model, n=20, seeds=(0,),
                         future_range=tuple(sorted(hr_by_fw)), test_indices=(),
                         train_sizes={fw: 0 for fw in hr_by_fw})
    for fw in hr_by_fw:
        acc = AccuracyRecord(hr_at_n=hr_by_fw[fw], ndcg_at_n=ndcg_by_fw[fw], n=20)
        report.runs[(fw, 0)] = RunResult(fw, 0, acc, 0, {}, {}, {}, {})
    return report


def test_summarize_single_config_is_trivial():
    summary = summarize({"pop": fake_report("pop", {0: 0.1})})
    assert summary.changes["pop"]["hr"] is None
    assert summary.ranks == {0: {"pop": 1}}


def test_summarize_change_range():
    summary = summarize({"m": fake_report("m", {0: 0.10, 1: 0.11, 2: 0.09})})
    low, high = summary.changes["m"]["hr"]
    assert low == pytest.approx(-10.0)
    assert high == pytest.approx(10.0)


def test_summarize_rank_swaps_show_up():
    reports = {
        "alpha": fake_report("alpha", {0: 0.3, 1: 0.1}),
        "beta": fake_report("beta", {0: 0.2, 1: 0.2}),
    }
    summary = summarize(reports)
    assert summary.ranks[0] == {"alpha": 1, "beta": 2}
    assert summary.ranks[1] == {"beta": 1, "alpha": 2}


def test_summarize_requires_reference():
    with pytest.raises(ValueError, match="reference"):
        summarize({"m": fake_report("m", {1: 0.1})})
