"""Graded-leakage sweep: train on history plus 0..F cumulative future windows.

The dataset is partitioned into fixed-length windows from t_start. Test
instances are the leave-one-out held-out interactions that fall inside the
chosen test window. The no-future run trains on everything up to and inside
the test window (minus held-out instances); each further run adds one more
whole window of "future" interactions, reproducing a gradually intensifying
leakage problem.
"""

from __future__ import annotations

import concurrent.futures
import logging
from dataclasses import dataclass, field, replace
from typing import Callable

from leakproof.corpus import YEAR, Dataset
from leakproof.metrics import (
    AccuracyRecord,
    SimilarityDistribution,
    count_future_items,
    extrinsic_similarity,
    hr_at_n,
    intrinsic_similarity,
    ndcg_at_n,
)
from leakproof.models.base import RecommendationList
from leakproof.splits import Split

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepConfig:
    """One sweep cell: which window is tested, how much future is trained on."""

    window_length: int = YEAR
    test_window_index: int = 4
    future_windows: int = 0
    seeds: tuple[int, ...] = (0,)
    n: int = 20
    exclude_seen: bool = True

    def __post_init__(self):
        if self.window_length <= 0:
            raise ValueError("window_length must be > 0")
        if self.test_window_index < 0:
            raise ValueError("test_window_index must be >= 0")
        if self.future_windows < 0:
            raise ValueError("future_windows must be >= 0")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if self.n < 1:
            raise ValueError("n must be >= 1")


def build_sweep_training_set(d: Dataset, split: Split, cfg: SweepConfig) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Materialize (train indices, test indices) for one sweep cell.

    Train: every interaction in windows before the test window, non-held-out
    interactions inside the test window, and all interactions in the next
    ``future_windows`` windows. The held-out validation instances of the test
    users stay masked as well, so hyperparameter tuning never trains on them.

    Test: held-out last interactions whose timestamps fall in the test window.
    """
    if split.strategy != "leave-one-out":
        raise ValueError(f"sweep requires a leave-one-out split, got {split.strategy!r}")
    total = d.n_windows(cfg.window_length)
    if cfg.test_window_index >= total:
        raise ValueError(f"test window {cfg.test_window_index} outside the {total}-window span")
    if cfg.test_window_index + cfg.future_windows >= total:
        raise ValueError(
            f"future_windows={cfg.future_windows} exceeds the span: "
            f"test window {cfg.test_window_index} plus future must stay below {total}"
        )

    window = lambda i: d.window_of(d.interactions[i].timestamp, cfg.window_length)
    test = sorted(i for i in split.test if window(i) == cfg.test_window_index)
    if not test:
        raise ValueError(f"no test instances fall in window {cfg.test_window_index}")

    test_users = {d.interactions[i].user for i in test}
    masked = set(test)
    masked.update(i for i in split.validation if d.interactions[i].user in test_users)

    last_window = cfg.test_window_index + cfg.future_windows
    train = tuple(
        i for i in range(len(d.interactions))
        if window(i) <= last_window and i not in masked
    )
    return train, tuple(test)


@dataclass
class RunResult:
    """Everything recorded for one (future_windows, seed) model run."""

    future_windows: int
    seed: int
    accuracy: AccuracyRecord
    future_item_total: int
    lists: dict[int, RecommendationList]
    hr: dict[int, int]
    ndcg: dict[int, float]
    future_counts: dict[int, int]


@dataclass
class SweepReport:
    """Sweep outputs: per-run records plus per-configuration aggregates."""

    model: str
    n: int
    seeds: tuple[int, ...]
    future_range: tuple[int, ...]
    test_indices: tuple[int, ...]
    train_sizes: dict[int, int]
    targets: dict[int, object] = field(default_factory=dict)
    runs: dict[tuple[int, int], RunResult] = field(default_factory=dict)

    def mean_hr(self, fw: int) -> float:
        return sum(self.runs[(fw, s)].accuracy.hr_at_n for s in self.seeds) / len(self.seeds)

    def mean_ndcg(self, fw: int) -> float:
        return sum(self.runs[(fw, s)].accuracy.ndcg_at_n for s in self.seeds) / len(self.seeds)

    def future_total(self, fw: int) -> int:
        return sum(self.runs[(fw, s)].future_item_total for s in self.seeds)

    def lists_by_instance(self, fw: int) -> dict[int, list[RecommendationList]]:
        """Per test instance, the per-seed lists of one configuration (seed order)."""
        return {
            idx: [self.runs[(fw, s)].lists[idx] for s in self.seeds]
            for idx in self.test_indices
        }


def _run_cell(d: Dataset, split: Split, model_factory, cfg: SweepConfig,
              fw: int, seed: int) -> RunResult:
    train_idx, test_idx = build_sweep_training_set(d, split, replace(cfg, future_windows=fw))
    train = [d.interactions[i] for i in train_idx]
    model = model_factory(seed)
    model.fit(train)

    lists: dict[int, RecommendationList] = {}
    hr: dict[int, int] = {}
    ndcg: dict[int, float] = {}
    future_counts: dict[int, int] = {}
    for idx in test_idx:
        it = d.interactions[idx]
        rec = model.recommend(it.user, cfg.n, asof=it.timestamp, exclude_seen=cfg.exclude_seen)
        lists[idx] = rec
        hr[idx] = hr_at_n(rec, it.item)
        ndcg[idx] = ndcg_at_n(rec, it.item)
        future_counts[idx] = count_future_items(rec, d.release_time, it.timestamp)

    accuracy = AccuracyRecord(
        hr_at_n=sum(hr.values()) / len(test_idx),
        ndcg_at_n=sum(ndcg.values()) / len(test_idx),
        n=cfg.n,
    )
    return RunResult(
        future_windows=fw,
        seed=seed,
        accuracy=accuracy,
        future_item_total=sum(future_counts.values()),
        lists=lists,
        hr=hr,
        ndcg=ndcg,
        future_counts=future_counts,
    )


_WORKER_STATE: dict = {}


def _init_worker(d, split, model_factory, cfg):
    _WORKER_STATE.update(d=d, split=split, model_factory=model_factory, cfg=cfg)


def _run_cell_worker(key: tuple[int, int]) -> tuple[tuple[int, int], RunResult]:
    fw, seed = key
    st = _WORKER_STATE
    return key, _run_cell(st["d"], st["split"], st["model_factory"], st["cfg"], fw, seed)


def run_sweep(d: Dataset, split: Split, model_factory: Callable[[int], object],
              cfg: SweepConfig, model_name: str | None = None, jobs: int = 1) -> SweepReport:
    """Run every (future_windows, seed) cell for future_windows 0..cfg.future_windows.

    ``model_factory(seed)`` must return a fresh recommender; with jobs > 1 it
    must also be picklable. Results are assembled by key, so the report is
    deterministic regardless of completion order.
    """
    future_range = tuple(range(cfg.future_windows + 1))
    train_sizes: dict[int, int] = {}
    test_indices: tuple[int, ...] | None = None
    for fw in future_range:
        train_idx, test_idx = build_sweep_training_set(d, split, replace(cfg, future_windows=fw))
        train_sizes[fw] = len(train_idx)
        test_indices = test_idx

    assert test_indices is not None
    report = SweepReport(
        model=model_name or getattr(model_factory, "kind", "model"),
        n=cfg.n,
        seeds=tuple(cfg.seeds),
        future_range=future_range,
        test_indices=test_indices,
        train_sizes=train_sizes,
        targets={i: d.interactions[i].item for i in test_indices},
    )

    keys = [(fw, seed) for fw in future_range for seed in cfg.seeds]
    if jobs <= 1:
        for fw, seed in keys:
            log.info("sweep cell fw=%d seed=%d (train=%d)", fw, seed, train_sizes[fw])
            report.runs[(fw, seed)] = _run_cell(d, split, model_factory, cfg, fw, seed)
    else:
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=jobs, initializer=_init_worker,
            initargs=(d, split, model_factory, cfg),
        ) as pool:
            for key, result in pool.map(_run_cell_worker, keys):
                report.runs[key] = result
    return report


def similarity_analysis(report_ref: SweepReport, report_alt: SweepReport,
                        fw_ref: int = 0, fw_alt: int | None = None,
                        ) -> tuple[SimilarityDistribution, SimilarityDistribution, SimilarityDistribution]:
    """Intrinsic distributions of both configurations plus their extrinsic one.

    Both reports must cover the same test instances with the same number of
    seeds. With R seeds each intrinsic distribution averages R(R-1)/2 pairs
    per instance and the extrinsic one averages R*R cross pairs.
    """
    if fw_alt is None:
        fw_alt = report_alt.future_range[-1]
    if report_ref.test_indices != report_alt.test_indices:
        raise ValueError("reports cover different test instances")
    if len(report_ref.seeds) != len(report_alt.seeds):
        raise ValueError("reports have different seed counts")
    runs_ref = report_ref.lists_by_instance(fw_ref)
    runs_alt = report_alt.lists_by_instance(fw_alt)
    return (
        intrinsic_similarity(runs_ref),
        intrinsic_similarity(runs_alt),
        extrinsic_similarity(runs_ref, runs_alt),
    )
