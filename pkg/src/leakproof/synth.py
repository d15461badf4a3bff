"""Synthetic interaction logs with realistic temporal dynamics.

Generated corpora mimic the shape of long-horizon review datasets at desk
scale: items keep being released along the span, attention is biased toward
recently released and intrinsically popular items, and users have bounded
active periods whose last interactions spread over the whole timeline.

A ``quiet_window`` can be reserved: no item's first interaction falls inside
it. Sweeps that test in that window then have a no-future configuration whose
training catalog provably contains no item released after any test instance,
which makes the zero-future-item law structural instead of statistical.
"""

from __future__ import annotations

import numpy as np

from leakproof.corpus import YEAR, Dataset, Interaction


def generate_log(n_users: int = 2000, n_items: int = 1200, n_interactions: int = 30_000,
                 n_windows: int = 10, window: int = YEAR, seed: int = 0,
                 quiet_window: int | None = None, start: int = 0,
                 recency_tau: float = 1.0) -> list[Interaction]:
    """Generate implicit interactions over ``n_windows`` fixed windows.

    Every user gets at least two interactions at the ends of their active
    period. Item choice at time t weights intrinsic popularity by a recency
    decay exp(-(age in windows)/recency_tau) over the items released by t.
    """
    if quiet_window is not None and not 0 < quiet_window < n_windows:
        raise ValueError("quiet_window must be inside (0, n_windows)")
    rng = np.random.default_rng(seed)
    span = n_windows * window
    end = start + span

    allowed = [w for w in range(n_windows) if w != quiet_window]
    release_window = rng.choice(allowed, size=n_items)
    release_ts = start + release_window * window + rng.integers(0, window, size=n_items)
    release_ts[0] = start
    release_window[0] = 0
    base_pop = np.power(rng.permutation(n_items) + 1.0, -0.7)

    # per release window: items sorted by release time, with popularity cumsums
    win_items: dict[int, np.ndarray] = {}
    win_rel: dict[int, np.ndarray] = {}
    win_cum: dict[int, np.ndarray] = {}
    for w in range(n_windows):
        members = np.flatnonzero(release_window == w)
        order = members[np.argsort(release_ts[members], kind="stable")]
        win_items[w] = order
        win_rel[w] = release_ts[order]
        win_cum[w] = np.cumsum(base_pop[order])

    def pick_item(t: int) -> int:
        wt = min((t - start) // window, n_windows - 1)
        weights = []
        choices = []  # (window, eligible prefix length)
        for w in range(wt + 1):
            if len(win_items[w]) == 0:
                continue
            k = int(np.searchsorted(win_rel[w], t, side="right")) if w == wt else len(win_items[w])
            if k == 0:
                continue
            mass = float(win_cum[w][k - 1]) * float(np.exp(-(wt - w) / recency_tau))
            weights.append(mass)
            choices.append((w, k))
        total = sum(weights)
        r = rng.random() * total
        for mass, (w, k) in zip(weights, choices):
            if r <= mass or (w, k) == choices[-1]:
                u = rng.random() * float(win_cum[w][k - 1])
                pos = int(np.searchsorted(win_cum[w][:k], u, side="left"))
                return int(win_items[w][min(pos, k - 1)])
            r -= mass
        raise AssertionError("unreachable")

    mean_extra = max(n_interactions / n_users - 2.0, 0.0)
    events: list[Interaction] = []
    for u in range(n_users):
        first = int(rng.integers(start, end - 2))
        length = int(rng.exponential(scale=2.0 * window)) + 1
        last = min(first + length, end - 1)
        count = 2 + int(rng.poisson(mean_extra))
        times = sorted({first, last} | {int(t) for t in rng.integers(first, last + 1, size=count - 2)})
        user = f"u{u:05d}"
        for t in times:
            events.append(Interaction(user, f"i{pick_item(t):05d}", t))

    # shift so the log starts exactly at `start`, anchoring the window grid
    shift = min(e.timestamp for e in events) - start
    if shift:
        events = [Interaction(e.user, e.item, e.timestamp - shift) for e in events]

    if quiet_window is not None:
        lo = start + quiet_window * window
        hi = lo + window
        first_seen: dict = {}
        for e in events:
            if e.item not in first_seen or e.timestamp < first_seen[e.item]:
                first_seen[e.item] = e.timestamp
        born_quiet = {item for item, ts in first_seen.items() if lo <= ts < hi}
        events = [e for e in events if e.item not in born_quiet]
    return events


def generate_dataset(**kwargs) -> Dataset:
    return Dataset.from_interactions(generate_log(**kwargs))
