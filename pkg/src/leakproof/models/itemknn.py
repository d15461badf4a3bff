"""Item-based nearest-neighbor collaborative filtering.

Similarity is cosine over binary user vectors:

    sim(i, j) = |U_i & U_j| / sqrt(|U_i| * |U_j|)

where U_i is the set of users who interacted with item i. A user is scored
against candidate i by summing sim(i, j) over the user's history, counting j
only when it is one of i's top-k neighbors.
"""

from __future__ import annotations

import logging
import math
from collections import Counter

from leakproof.models.base import Recommender, top_n_from_mapping

log = logging.getLogger(__name__)


class ItemKnn(Recommender):

    kind = "itemknn"

    def __init__(self, neighborhood_size: int = 50):
        super().__init__()
        if neighborhood_size < 1:
            raise ValueError("neighborhood_size must be >= 1")
        self.neighborhood_size = neighborhood_size
        self._item_users: dict = {}
        self._counts: Counter = Counter()
        self._contrib: dict | None = None  # j -> [(i, sim(i, j))] for j in topk(i)

    def _reset_state(self) -> None:
        self._item_users = {}
        self._counts = Counter()
        self._contrib = None

    def _consume(self, interactions: list) -> None:
        for it in interactions:
            self._item_users.setdefault(it.item, set()).add(it.user)
        self._counts.update(it.item for it in interactions)
        self._contrib = None

    def similarity(self, a, b) -> float:
        """Cosine similarity of two items' user supports; 0 for unknown items."""
        users_a = self._item_users.get(a)
        users_b = self._item_users.get(b)
        if not users_a or not users_b:
            return 0.0
        overlap = len(users_a & users_b)
        if overlap == 0:
            return 0.0
        return overlap / math.sqrt(len(users_a) * len(users_b))

    def _build_contrib(self) -> dict:
        """Per-item top-k neighbor lists, inverted for history-driven scoring."""
        contrib: dict = {item: [] for item in self._item_users}
        for item in self._item_users:
            users = self._item_users[item]
            co = Counter()
            for user in users:
                co.update(self._seen[user])
            del co[item]
            norm = math.sqrt(len(users))
            sims = [
                (count / (norm * math.sqrt(len(self._item_users[other]))), other)
                for other, count in co.items()
            ]
            sims.sort(key=lambda pair: (-pair[0], pair[1]))
            for sim, neighbor in sims[: self.neighborhood_size]:
                contrib[neighbor].append((item, sim))
        return contrib

    def _rank(self, user, pool: list, n: int) -> list[tuple]:
        history = self._seen.get(user)
        if not history:
            log.warning("itemknn: user %r has no history, falling back to popularity order", user)
            return top_n_from_mapping(pool, lambda item: self._counts[item], n)
        if self._contrib is None:
            self._contrib = self._build_contrib()
        acc: dict = {}
        for j in sorted(history):
            for item, sim in self._contrib.get(j, ()):
                acc[item] = acc.get(item, 0.0) + sim
        return top_n_from_mapping(pool, lambda item: acc.get(item, 0.0), n)
