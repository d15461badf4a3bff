"""Report assembly and the CSV contract consumed by the figure scripts.

All writers emit deterministic byte-identical output for identical inputs:
rows are sorted, floats use repr (shortest round-trip), and nothing
wall-clock-dependent is written. The column layouts here are the documented
cross-component interface; see the README.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping, Sequence

from leakproof.corpus import ActivePeriodStats, Dataset, WeeklySeries, window_popularity
from leakproof.metrics import SimilarityDistribution, percent_change, rank_models
from leakproof.experiments.sweep import SweepReport
from leakproof.experiments.timeline import TimelineReport


@dataclass(frozen=True)
class SweepSummary:
    """Percent-change ranges per model plus per-configuration model ranks."""

    changes: dict[str, dict[str, tuple[float, float] | None]]
    ranks: dict[int, dict[str, int]]


def summarize(reports: Mapping[str, SweepReport]) -> SweepSummary:
    """Min/max percent change vs the no-future reference, and rank tables.

    Each model's future_windows=0 run is the reference. Models with a single
    configuration, or a zero reference score (percent change undefined), get
    an empty (None) change range. Rank 1 is the best HR.
    """
    if not reports:
        raise ValueError("need at least one sweep report")
    changes: dict[str, dict[str, tuple[float, float] | None]] = {}
    for model, report in reports.items():
        if 0 not in report.future_range:
            raise ValueError(f"model {model!r} is missing the future_windows=0 reference")
        per_metric: dict[str, tuple[float, float] | None] = {}
        for metric, value_of in (("hr", report.mean_hr), ("ndcg", report.mean_ndcg)):
            if value_of(0) <= 0:
                per_metric[metric] = None
                continue
            deltas = [percent_change(value_of(0), value_of(fw))
                      for fw in report.future_range if fw > 0]
            per_metric[metric] = (min(deltas), max(deltas)) if deltas else None
        changes[model] = per_metric

    shared_range = sorted(set.intersection(*(set(r.future_range) for r in reports.values())))
    ranks: dict[int, dict[str, int]] = {}
    for fw in shared_range:
        scores = {model: report.mean_hr(fw) for model, report in reports.items()}
        ranks[fw] = rank_models(scores) if len(scores) >= 2 else {m: 1 for m in scores}
    return SweepSummary(changes=changes, ranks=ranks)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_sweep_metrics_csv(path, report: SweepReport) -> None:
    """One row per (experiment, model, seed, test instance)."""
    rows = []
    for fw in report.future_range:
        for seed in report.seeds:
            run = report.runs[(fw, seed)]
            for idx in report.test_indices:
                rec = run.lists[idx]
                rows.append((f"fw{fw}", report.model, seed, idx, rec.user,
                             report.targets[idx], rec.asof,
                             run.hr[idx], run.ndcg[idx], run.future_counts[idx]))
    _write_csv(path, ("experiment", "model", "seed", "test_index", "user", "target_item",
                      "asof", "hr", "ndcg", "future_items"), rows)


def write_sweep_lists_csv(path, report: SweepReport) -> None:
    """Per-instance recommendation lists as space-joined item-id sequences."""
    rows = []
    for fw in report.future_range:
        for seed in report.seeds:
            run = report.runs[(fw, seed)]
            for idx in report.test_indices:
                items = " ".join(str(i) for i in run.lists[idx].items)
                rows.append((f"fw{fw}", report.model, seed, idx, items))
    _write_csv(path, ("experiment", "model", "seed", "test_index", "items"), rows)


def write_sweep_summary_csv(path, reports: Mapping[str, SweepReport]) -> None:
    """Seed-averaged accuracy and leakage counts per (model, future_windows)."""
    rows = []
    for model in sorted(reports):
        report = reports[model]
        for fw in report.future_range:
            rows.append((model, fw, report.train_sizes[fw], len(report.seeds),
                         report.mean_hr(fw), report.mean_ndcg(fw), report.future_total(fw)))
    _write_csv(path, ("model", "future_windows", "train_instances", "seeds",
                      "mean_hr", "mean_ndcg", "total_future_items"), rows)


def write_similarity_csv(path, entries: Sequence[tuple[str, Sequence[int], SimilarityDistribution]]) -> None:
    """Rows of (kind, experiment, test_index, mean_jaccard, pair_count).

    ``entries`` holds (experiment label, test instance keys, distribution)
    triples; keys align with the distribution's values.
    """
    rows = []
    for experiment, keys, dist in entries:
        if len(keys) != len(dist.values):
            raise ValueError(f"{experiment}: {len(keys)} keys vs {len(dist.values)} values")
        for key, value in zip(keys, dist.values):
            rows.append((dist.kind, experiment, key, value, dist.pair_count))
    _write_csv(path, ("kind", "experiment", "test_index", "mean_jaccard", "pair_count"), rows)


def write_changes_csv(path, summary: SweepSummary) -> None:
    rows = []
    for model in sorted(summary.changes):
        for metric in ("hr", "ndcg"):
            span = summary.changes[model][metric]
            low, high = ("", "") if span is None else span
            rows.append((model, metric, low, high))
    _write_csv(path, ("model", "metric", "min_change_pct", "max_change_pct"), rows)


def write_ranks_csv(path, summary: SweepSummary) -> None:
    rows = []
    for fw in sorted(summary.ranks):
        for model in sorted(summary.ranks[fw]):
            rows.append((fw, model, summary.ranks[fw][model]))
    _write_csv(path, ("future_windows", "model", "rank"), rows)


def write_timeline_csv(path, report: TimelineReport) -> None:
    """Per test-instance timeline rows, including the recommended sequence."""
    rows = []
    for row in report.rows:
        items = " ".join(str(i) for i in row.rec.items)
        rows.append((report.mode, row.index, row.user, row.item, row.asof,
                     row.hr, row.ndcg, row.consumed, items))
    _write_csv(path, ("mode", "test_index", "user", "target_item", "asof",
                      "hr", "ndcg", "consumed", "items"), rows)


def write_popularity_csv(path, d: Dataset, items: Sequence, window: int) -> None:
    """Per-window interaction counts for the sampled items."""
    rows = []
    for item in items:
        for w, count in enumerate(window_popularity(d, item, window)):
            rows.append((item, w, count))
    _write_csv(path, ("item", "window", "count"), rows)


def write_active_periods_csv(path, dataset_name: str, stats: ActivePeriodStats) -> None:
    rows = [
        (dataset_name, "user", stats.mean_user_days, stats.median_user_days),
        (dataset_name, "item", stats.mean_item_days, stats.median_item_days),
    ]
    _write_csv(path, ("dataset", "entity", "mean_days", "median_days"), rows)


def write_weekly_csv(path, series: WeeklySeries) -> None:
    rows = [(w, series.item_releases[w], series.user_last_interactions[w])
            for w in range(len(series))]
    _write_csv(path, ("week", "item_releases", "user_last_interactions"), rows)
