"""Shared test utilities: tiny dataset builders and independent oracles."""

from __future__ import annotations

import random

from leakproof.corpus import Dataset, Interaction


def make_ds(rows) -> Dataset:
    """Dataset from (user, item, timestamp) tuples."""
    return Dataset.from_interactions([Interaction(*r) for r in rows])


def random_rows(rng: random.Random, n_users=8, n_items=10, n_rows=40, t_max=10_000):
    return [
        (f"u{rng.randrange(n_users)}", f"i{rng.randrange(n_items)}", rng.randrange(t_max))
        for _ in range(n_rows)
    ]


def kcore_oracle(rows, k: int):
    """Naive repeat-until-stable pruning, alternating user and item passes."""
    rows = list(rows)
    changed = True
    while changed:
        changed = False
        counts: dict = {}
        for u, _, _ in rows:
            counts[u] = counts.get(u, 0) + 1
        keep_users = {u for u, c in counts.items() if c >= k}
        pruned = [r for r in rows if r[0] in keep_users]
        if len(pruned) != len(rows):
            rows, changed = pruned, True
        counts = {}
        for _, i, _ in rows:
            counts[i] = counts.get(i, 0) + 1
        keep_items = {i for i, c in counts.items() if c >= k}
        pruned = [r for r in rows if r[1] in keep_items]
        if len(pruned) != len(rows):
            rows, changed = pruned, True
    return rows
