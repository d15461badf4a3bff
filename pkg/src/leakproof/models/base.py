"""Recommender contract: batch fit, incremental update, total-ranking top-N.

Every model consumes plain Interaction records, remembers which items each
user has interacted with, and ranks candidates deterministically: by score
descending, with ties broken by ascending item identifier. Recommendations
never leave the candidate-pool intersection with the model's catalog.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class RecommendationList:
    """Ranked top-N items for one user, with scores and prediction time."""

    user: str | int
    items: tuple
    scores: tuple[float, ...]
    asof: int | None = None

    def __post_init__(self):
        if len(self.items) != len(self.scores):
            raise ValueError("items and scores must have equal length")
        if len(set(self.items)) != len(self.items):
            raise ValueError("duplicate items in recommendation list")
        if any(a < b for a, b in zip(self.scores, self.scores[1:])):
            raise ValueError("scores must be non-increasing")

    def __len__(self) -> int:
        return len(self.items)


def top_n_from_scores(ids: Sequence, scores: np.ndarray, n: int) -> list[tuple]:
    """Select the top-n (id, score) pairs by (score desc, id asc).

    Boundary ties are resolved exactly: every id whose score ties the n-th
    best participates in the identifier sort before truncation.
    """
    if n <= 0 or len(ids) == 0:
        return []
    if len(ids) <= n:
        order = sorted(range(len(ids)), key=lambda k: (-scores[k], ids[k]))
        return [(ids[k], float(scores[k])) for k in order]
    kth = np.partition(scores, len(scores) - n)[len(scores) - n]
    contenders = np.flatnonzero(scores >= kth).tolist()
    order = sorted(contenders, key=lambda k: (-scores[k], ids[k]))[:n]
    return [(ids[k], float(scores[k])) for k in order]


def top_n_from_mapping(pool: Sequence, score_of, n: int) -> list[tuple]:
    """Top-n over ``pool`` where ``score_of(item)`` yields the score."""
    if n <= 0:
        return []
    chosen = heapq.nsmallest(n, pool, key=lambda item: (-score_of(item), item))
    return [(item, float(score_of(item))) for item in chosen]


class Recommender:
    """Base class implementing the shared consumption and ranking plumbing.

    Subclasses override ``_reset_state``, ``_consume`` and ``_rank``. The
    catalog grows monotonically: after ``fit(Y)`` followed by ``update(X)``
    the model knows exactly the users/items of X union Y.
    """

    kind = "base"

    def __init__(self):
        self._seen: dict = {}
        self._catalog: set = set()
        self._catalog_sorted: list | None = None
        self._n_consumed = 0

    # -- contract surface ---------------------------------------------------

    def fit(self, interactions: Iterable) -> "Recommender":
        """Discard existing state and train on the given interactions."""
        self._seen = {}
        self._catalog = set()
        self._catalog_sorted = None
        self._n_consumed = 0
        self._reset_state()
        self._absorb(list(interactions))
        return self

    def update(self, interactions: Iterable) -> "Recommender":
        """Incrementally consume new interactions; catalog only grows."""
        self._absorb(list(interactions))
        return self

    def catalog(self) -> set:
        return set(self._catalog)

    def recommend(self, user, n: int, candidates: Iterable | None = None,
                  exclude: Iterable = (), exclude_seen: bool = True,
                  asof: int | None = None) -> RecommendationList:
        """Rank the candidate pool for one user and return the top-n.

        Args:
            candidates: item pool to rank; None means the full catalog. Items
                outside the catalog are silently dropped.
            exclude: items removed from the pool.
            exclude_seen: also remove items the user already interacted with.
            asof: prediction timestamp recorded on the list.
        """
        pool = self._pool(user, candidates, exclude, exclude_seen)
        ranked = self._rank(user, pool, n)
        return RecommendationList(
            user=user,
            items=tuple(item for item, _ in ranked),
            scores=tuple(score for _, score in ranked),
            asof=asof,
        )

    @property
    def consumed(self) -> int:
        """Number of interactions the model has been fed so far."""
        return self._n_consumed

    def seen(self, user) -> set:
        return set(self._seen.get(user, ()))

    # -- shared plumbing ----------------------------------------------------

    def _absorb(self, interactions: list) -> None:
        for it in interactions:
            self._seen.setdefault(it.user, set()).add(it.item)
            self._catalog.add(it.item)
        self._n_consumed += len(interactions)
        self._catalog_sorted = None
        self._consume(interactions)

    def _pool(self, user, candidates, exclude, exclude_seen) -> list:
        if candidates is None:
            if self._catalog_sorted is None:
                self._catalog_sorted = sorted(self._catalog)
            pool = self._catalog_sorted
        else:
            pool = sorted(set(candidates) & self._catalog)
        drop = set(exclude)
        if exclude_seen and user in self._seen:
            drop |= self._seen[user]
        if drop:
            pool = [item for item in pool if item not in drop]
        return pool

    # -- subclass hooks -----------------------------------------------------

    def _reset_state(self) -> None:
        """Clear model-specific state before a fresh fit."""

    def _consume(self, interactions: list) -> None:
        raise NotImplementedError

    def _rank(self, user, pool: list, n: int) -> list[tuple]:
        """Return up to n (item, score) pairs, scores non-increasing."""
        raise NotImplementedError
