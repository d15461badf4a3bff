"""Popularity baseline: items are scored by their interaction count."""

from __future__ import annotations

from collections import Counter

from leakproof.models.base import Recommender, top_n_from_mapping


class Popularity(Recommender):
    """User-independent baseline; unknown users are fine by construction."""

    kind = "popularity"

    def __init__(self):
        super().__init__()
        self._counts: Counter = Counter()

    def _reset_state(self) -> None:
        self._counts = Counter()

    def _consume(self, interactions: list) -> None:
        self._counts.update(it.item for it in interactions)

    def _rank(self, user, pool: list, n: int) -> list[tuple]:
        return top_n_from_mapping(pool, lambda item: self._counts[item], n)
