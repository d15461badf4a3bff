"""Timeline-scheme evaluation: models consume events chronologically.

The runner walks the interaction log in time order. Masked test instances
are predicted from (i) whatever the model has consumed so far and (ii) the
pool of items already released at prediction time; they are never fed back
for training (except in prequential mode, where every instance is tested
first and trained on afterwards). Interactions sharing a timestamp are
treated as simultaneous: predictions at a timestamp happen before any
same-timestamp training, keeping the consumed horizon strictly in the past.

Every prediction is instrumented: the runner counts violations of the two
defining guarantees (consumed max timestamp < asof, and release_time <= asof
for each recommended item). A correct run reports zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import groupby
from typing import Callable, Iterable

from leakproof.corpus import Dataset
from leakproof.metrics import hr_at_n, ndcg_at_n
from leakproof.models.base import RecommendationList, Recommender

log = logging.getLogger(__name__)

MODES = ("timeline", "prequential", "sliding")


@dataclass(frozen=True)
class TimelineRow:
    """One evaluated test instance."""

    index: int
    user: str | int
    item: str | int
    asof: int
    hr: int
    ndcg: float
    consumed: int
    rec: RecommendationList


@dataclass
class TimelineReport:
    mode: str
    n: int
    rows: tuple[TimelineRow, ...]
    violations: int

    @property
    def mean_hr(self) -> float:
        return sum(r.hr for r in self.rows) / len(self.rows) if self.rows else 0.0

    @property
    def mean_ndcg(self) -> float:
        return sum(r.ndcg for r in self.rows) / len(self.rows) if self.rows else 0.0


class _Instrumented:
    """Tracks the consumed-time horizon and audits every prediction."""

    def __init__(self, d: Dataset, n: int, exclude_seen: bool):
        self.d = d
        self.n = n
        self.exclude_seen = exclude_seen
        self.consumed_max: int | None = None
        self.violations = 0
        self.rows: list[TimelineRow] = []

    def consume(self, model: Recommender, events: list) -> None:
        if not events:
            return
        model.update(events)
        ts = events[-1].timestamp
        if self.consumed_max is None or ts > self.consumed_max:
            self.consumed_max = ts

    def predict(self, model: Recommender, index: int, it) -> None:
        asof = it.timestamp
        if self.consumed_max is not None and self.consumed_max >= asof:
            self.violations += 1
        pool = [item for item in sorted(model.catalog()) if self.d.release_time[item] <= asof]
        rec = model.recommend(it.user, self.n, candidates=pool,
                              exclude_seen=self.exclude_seen, asof=asof)
        self.violations += sum(1 for item in rec.items if self.d.release_time[item] > asof)
        self.rows.append(TimelineRow(
            index=index,
            user=it.user,
            item=it.item,
            asof=asof,
            hr=hr_at_n(rec, it.item),
            ndcg=ndcg_at_n(rec, it.item),
            consumed=model.consumed,
            rec=rec,
        ))


def _groups(d: Dataset):
    """Chronological (timestamp, [(index, interaction), ...]) groups."""
    return groupby(enumerate(d.interactions), key=lambda pair: pair[1].timestamp)


def _require_update(model: Recommender, mode: str) -> None:
    if not callable(getattr(model, "update", None)):
        raise TypeError(f"{mode} mode needs an incremental model with update()")


def run_timeline(d: Dataset, test_indices: Iterable[int],
                 model_factory: Callable[[], Recommender], mode: str = "timeline",
                 n: int = 20, batch_size: int = 1, window: int | None = None,
                 exclude_seen: bool = True) -> TimelineReport:
    """Evaluate masked test instances along the global timeline.

    Args:
        test_indices: dataset indices of the masked test instances (ignored
            by prequential mode, which tests every instance).
        model_factory: zero-argument callable returning a fresh model;
            sliding mode calls it once per refit.
        mode: ``timeline`` feeds non-test events incrementally (in
            micro-batches of ``batch_size``); ``prequential`` tests each
            instance then trains on it; ``sliding`` refits on all prior
            non-test data at each ``window``-second boundary, anchored at the
            first test timestamp.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    test_set = frozenset(test_indices)
    tracker = _Instrumented(d, n, exclude_seen)

    if mode == "timeline":
        model = model_factory()
        _require_update(model, mode)
        pending: list = []
        for _, grp in _groups(d):
            entries = list(grp)
            tests = [(i, it) for i, it in entries if i in test_set]
            if tests:
                tracker.consume(model, pending)  # everything pending is strictly older
                pending = []
                for i, it in tests:
                    tracker.predict(model, i, it)
            pending.extend(it for i, it in entries if i not in test_set)
            while len(pending) >= batch_size:
                tracker.consume(model, pending[:batch_size])
                pending = pending[batch_size:]
        tracker.consume(model, pending)

    elif mode == "prequential":
        model = model_factory()
        _require_update(model, mode)
        for _, grp in _groups(d):
            entries = list(grp)
            for i, it in entries:
                tracker.predict(model, i, it)
            tracker.consume(model, [it for _, it in entries])

    else:  # sliding
        if window is None or window <= 0:
            raise ValueError("sliding mode needs a positive window")
        if not test_set:
            raise ValueError("sliding mode needs a non-empty test set")
        ordered_tests = sorted(test_set)
        anchor = d.interactions[ordered_tests[0]].timestamp
        by_window: dict[int, list[int]] = {}
        for i in ordered_tests:
            by_window.setdefault((d.interactions[i].timestamp - anchor) // window, []).append(i)
        for w in sorted(by_window):
            boundary = anchor + w * window
            train = [it for i, it in enumerate(d.interactions)
                     if i not in test_set and it.timestamp < boundary]
            model = model_factory()
            if train:
                model.fit(train)
                tracker.consumed_max = train[-1].timestamp
            else:
                tracker.consumed_max = None
            log.info("sliding refit at window %d: %d training interactions", w, len(train))
            for i in by_window[w]:
                tracker.predict(model, i, d.interactions[i])

    rows = tuple(tracker.rows)
    report = TimelineReport(mode=mode, n=n, rows=rows, violations=tracker.violations)
    if report.violations:
        log.error("%s run recorded %d leakage violations", mode, report.violations)
    return report
