"""Interaction-log ingestion, preprocessing, and temporal corpus statistics.

A corpus is an immutable chronological log of implicit user-item events.
Ratings present in raw files are parsed and discarded: only the act of
interacting matters. All durations are in seconds; reported statistics use
fractional days.
"""

from __future__ import annotations

import io
import logging
import statistics
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

log = logging.getLogger(__name__)

DAY = 86_400
WEEK = 7 * DAY
YEAR = 365 * DAY

#: How many malformed-row warnings are emitted per ingest before going quiet.
_BAD_ROW_LOG_CAP = 20


class Interaction(NamedTuple):
    """One implicit user-item event."""

    user: str | int
    item: str | int
    timestamp: int


class IngestError(RuntimeError):
    """Raised when an interaction file cannot be turned into a Dataset."""


@dataclass(frozen=True)
class ColumnSchema:
    """Column layout of a delimiter-separated interaction file.

    Indices are zero-based positions within a split row. ``rating`` may be
    None for files without a rating column; when present the value is parsed
    only to validate the row and is then dropped.
    """

    user: int = 0
    item: int = 1
    rating: int | None = 2
    timestamp: int = 3
    delimiter: str | None = "\t"
    header: bool = False

    @classmethod
    def parse(cls, spec: str, delimiter: str | None = "\t", header: bool = False) -> "ColumnSchema":
        """Parse a ``user:item:rating:ts`` index spec such as ``0:1:2:3``.

        An empty rating field (``0:1::2``) means the file has no rating
        column.
        """
        parts = spec.split(":")
        if len(parts) != 4:
            raise ValueError(f"schema must have four ':'-separated fields, got {spec!r}")
        try:
            user, item, ts = int(parts[0]), int(parts[1]), int(parts[3])
            rating = int(parts[2]) if parts[2] != "" else None
        except ValueError as exc:
            raise ValueError(f"non-integer column index in schema {spec!r}") from exc
        return cls(user=user, item=item, rating=rating, timestamp=ts, delimiter=delimiter, header=header)

    @property
    def width(self) -> int:
        cols = [self.user, self.item, self.timestamp]
        if self.rating is not None:
            cols.append(self.rating)
        return max(cols) + 1


@dataclass(frozen=True)
class Dataset:
    """Immutable chronologically sorted interaction log.

    ``interactions`` is non-decreasing in timestamp; ties keep input order
    (stable sort), which is also the tie rule every downstream split relies
    on. ``release_time`` maps each item to the timestamp of its first
    interaction by any user; ``user_span``/``item_span`` map each entity to
    its (first_ts, last_ts) active period.
    """

    interactions: tuple[Interaction, ...]
    n_users: int
    n_items: int
    release_time: dict
    user_span: dict
    item_span: dict
    t_start: int
    t_end: int

    def __len__(self) -> int:
        return len(self.interactions)

    @classmethod
    def from_interactions(cls, interactions: Iterable) -> "Dataset":
        """Build a Dataset from (user, item, timestamp) records.

        Records are sorted by timestamp with input order as the tiebreaker.
        An empty input yields an empty Dataset with zeroed time bounds.
        """
        rows = [it if isinstance(it, Interaction) else Interaction(*it) for it in interactions]
        ordered = tuple(sorted(rows, key=lambda it: it.timestamp))
        if ordered and ordered[0].timestamp < 0:
            raise ValueError("timestamps must be >= 0")

        user_span: dict = {}
        item_span: dict = {}
        for it in ordered:
            if it.user in user_span:
                user_span[it.user] = (user_span[it.user][0], it.timestamp)
            else:
                user_span[it.user] = (it.timestamp, it.timestamp)
            if it.item in item_span:
                item_span[it.item] = (item_span[it.item][0], it.timestamp)
            else:
                item_span[it.item] = (it.timestamp, it.timestamp)

        release_time = {item: span[0] for item, span in item_span.items()}
        t_start = ordered[0].timestamp if ordered else 0
        t_end = ordered[-1].timestamp if ordered else 0
        return cls(
            interactions=ordered,
            n_users=len(user_span),
            n_items=len(item_span),
            release_time=release_time,
            user_span=user_span,
            item_span=item_span,
            t_start=t_start,
            t_end=t_end,
        )

    def window_of(self, timestamp: int, window_length: int) -> int:
        """Index of the fixed-length window (measured from t_start) holding ``timestamp``."""
        return (timestamp - self.t_start) // window_length

    def n_windows(self, window_length: int) -> int:
        if not self.interactions:
            return 0
        return (self.t_end - self.t_start) // window_length + 1


@dataclass(frozen=True)
class ActivePeriodStats:
    """Mean/median duration between an entity's first and last interaction, in days."""

    mean_user_days: float
    median_user_days: float
    mean_item_days: float
    median_item_days: float


@dataclass(frozen=True)
class WeeklySeries:
    """Per-week item releases and user last interactions, from t_start.

    Week ``w`` covers ``[t_start + w*WEEK, t_start + (w+1)*WEEK)``. Column
    sums equal n_items and n_users respectively.
    """

    item_releases: tuple[int, ...]
    user_last_interactions: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.item_releases)


def ingest(source, schema: ColumnSchema = ColumnSchema()) -> Dataset:
    """Read a delimiter-separated interaction file into a Dataset.

    Rows that do not parse (too few columns, non-integer timestamp, empty
    identifiers) are skipped and reported with their line numbers through the
    module logger.

    Args:
        source: path to a text file, or an open text stream.
        schema: column layout; the rating column, when mapped, is discarded.

    Raises:
        IngestError: unreadable source, or no row parsed successfully.
    """
    if isinstance(source, (str, Path)):
        try:
            fh = open(source, "r", encoding="utf-8")
        except OSError as exc:
            raise IngestError(f"cannot read {source}: {exc}") from exc
        close = True
    elif isinstance(source, io.TextIOBase) or hasattr(source, "readline"):
        fh, close = source, False
    else:
        raise IngestError(f"unsupported source {type(source).__name__}")

    rows: list[Interaction] = []
    bad: list[tuple[int, str]] = []
    try:
        for lineno, line in enumerate(fh, start=1):
            if schema.header and lineno == 1:
                continue
            line = line.strip("\n\r")
            if not line:
                continue
            fields = line.split(schema.delimiter) if schema.delimiter else line.split()
            if len(fields) < schema.width:
                bad.append((lineno, f"expected >= {schema.width} columns, got {len(fields)}"))
                continue
            user = fields[schema.user].strip()
            item = fields[schema.item].strip()
            if not user or not item:
                bad.append((lineno, "empty user or item identifier"))
                continue
            try:
                ts = int(fields[schema.timestamp])
                if schema.rating is not None:
                    float(fields[schema.rating])  # validated, then dropped
            except ValueError:
                bad.append((lineno, f"unparseable numeric field in {fields!r}"))
                continue
            if ts < 0:
                bad.append((lineno, f"negative timestamp {ts}"))
                continue
            rows.append(Interaction(user, item, ts))
    finally:
        if close:
            fh.close()

    for lineno, reason in bad[:_BAD_ROW_LOG_CAP]:
        log.warning("skipped line %d: %s", lineno, reason)
    if len(bad) > _BAD_ROW_LOG_CAP:
        log.warning("... and %d more malformed rows", len(bad) - _BAD_ROW_LOG_CAP)

    if not rows:
        detail = f" ({len(bad)} malformed rows, e.g. line {bad[0][0]}: {bad[0][1]})" if bad else ""
        raise IngestError(f"zero valid rows{detail}")
    return Dataset.from_interactions(rows)


def deduplicate(d: Dataset, mode: str = "exact-triple") -> Dataset:
    """Remove duplicated interactions.

    ``exact-triple`` drops repeated (user, item, timestamp) triples, keeping
    the first; ``earliest-per-pair`` keeps only the earliest interaction per
    (user, item) pair. The default is the least destructive reading: repeated
    pairs at distinct times survive, which leave-one-out splitting needs.
    """
    if mode not in ("exact-triple", "earliest-per-pair"):
        raise ValueError(f"unknown dedup mode {mode!r}")
    kept: list[Interaction] = []
    seen: set = set()
    for it in d.interactions:
        key = it if mode == "exact-triple" else (it.user, it.item)
        if key in seen:
            continue
        seen.add(key)
        kept.append(it)
    return Dataset.from_interactions(kept)


def select_time_span(d: Dataset, start: int, duration: int, first_rating_grace: int = 0) -> Dataset:
    """Keep interactions with ``start <= t < start + duration``.

    Users whose first interaction in the *original* dataset falls before
    ``start + first_rating_grace`` are dropped entirely, including their
    in-span interactions. The grace defaults to 0 here; the CLI ingest
    pipeline applies a one-day grace by default.

    Raises:
        ValueError: duration <= 0, or nothing survives the selection.
    """
    if duration <= 0:
        raise ValueError("duration must be > 0")
    cutoff = start + first_rating_grace
    eligible = {u for u, (first, _) in d.user_span.items() if first >= cutoff}
    end = start + duration
    kept = [it for it in d.interactions if start <= it.timestamp < end and it.user in eligible]
    if not kept:
        raise ValueError("resulting dataset empty")
    return Dataset.from_interactions(kept)


def k_core_filter(d: Dataset, k: int) -> Dataset:
    """Iteratively drop users/items with fewer than k interactions until stable.

    In the result every remaining user and item has at least k interactions.
    An empty result is valid and logged.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    kept = list(d.interactions)
    while True:
        user_deg = Counter(it.user for it in kept)
        item_deg = Counter(it.item for it in kept)
        filtered = [it for it in kept if user_deg[it.user] >= k and item_deg[it.item] >= k]
        if len(filtered) == len(kept):
            break
        kept = filtered
    if not kept:
        log.warning("k-core filtering with k=%d removed every interaction", k)
    return Dataset.from_interactions(kept)


def active_period_stats(d: Dataset) -> ActivePeriodStats:
    """Mean and median active period of users and items, in fractional days."""
    user_days = [(last - first) / DAY for first, last in d.user_span.values()]
    item_days = [(last - first) / DAY for first, last in d.item_span.values()]
    return ActivePeriodStats(
        mean_user_days=statistics.fmean(user_days) if user_days else 0.0,
        median_user_days=statistics.median(user_days) if user_days else 0.0,
        mean_item_days=statistics.fmean(item_days) if item_days else 0.0,
        median_item_days=statistics.median(item_days) if item_days else 0.0,
    )


def weekly_series(d: Dataset) -> WeeklySeries:
    """Bucket item releases and users' last interactions into 7-day windows."""
    if not d.interactions:
        return WeeklySeries(item_releases=(), user_last_interactions=())
    n_weeks = (d.t_end - d.t_start) // WEEK + 1
    releases = [0] * n_weeks
    last_seen = [0] * n_weeks
    for ts in d.release_time.values():
        releases[(ts - d.t_start) // WEEK] += 1
    for _, last in d.user_span.values():
        last_seen[(last - d.t_start) // WEEK] += 1
    return WeeklySeries(item_releases=tuple(releases), user_last_interactions=tuple(last_seen))


def window_popularity(d: Dataset, item, window: int = YEAR) -> list[int]:
    """Per-window interaction counts of one item, from t_start.

    Raises:
        KeyError: the item never appears in the dataset.
    """
    if item not in d.item_span:
        raise KeyError(f"unknown item {item!r}")
    counts = [0] * d.n_windows(window)
    for it in d.interactions:
        if it.item == item:
            counts[d.window_of(it.timestamp, window)] += 1
    return counts


def dataset_stats(d: Dataset) -> dict:
    """Summary counts used for the processed-dataset sidecar file."""
    return {
        "n_users": d.n_users,
        "n_items": d.n_items,
        "n_interactions": len(d.interactions),
        "t_start": d.t_start,
        "t_end": d.t_end,
    }


def save_dataset(d: Dataset, path, delimiter: str = "\t") -> None:
    """Write the log as ``user<sep>item<sep>timestamp`` rows (re-ingestable with schema 0:1::2)."""
    with open(path, "w", encoding="utf-8") as fh:
        for it in d.interactions:
            fh.write(f"{it.user}{delimiter}{it.item}{delimiter}{it.timestamp}\n")
