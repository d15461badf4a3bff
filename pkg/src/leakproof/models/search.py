"""Continuous random hyperparameter search scored by HR@N on validation."""

from __future__ import annotations

import logging
from typing import Callable, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

#: Published search ranges for the pairwise-ranking factorization model.
#: Learning rate and regularization span several orders of magnitude, so
#: they are sampled log-uniformly; the latent dimension is a uniform integer.
DEFAULT_BPR_RANGES: Mapping[str, tuple] = {
    "latent_dim": ("int", 8, 128),
    "learning_rate": ("log", 1e-6, 0.1),
    "regularization": ("log", 1e-4, 0.1),
}


def sample_params(ranges: Mapping[str, tuple], rng: np.random.Generator) -> dict:
    """Draw one value per hyperparameter, each independently.

    A range is ``(kind, low, high)`` with kind one of ``int`` (uniform
    integer, inclusive bounds), ``uniform``, or ``log`` (log-uniform).
    """
    sampled: dict = {}
    for name, (kind, low, high) in ranges.items():
        if kind == "int":
            sampled[name] = int(rng.integers(low, high + 1))
        elif kind == "uniform":
            sampled[name] = float(rng.uniform(low, high))
        elif kind == "log":
            sampled[name] = float(np.exp(rng.uniform(np.log(low), np.log(high))))
        else:
            raise ValueError(f"unknown range kind {kind!r} for {name}")
    return sampled


def hit_rate(model, instances: Sequence, n: int = 20) -> float:
    """Mean HR@n of held-out interactions against the model's catalog."""
    if not instances:
        raise ValueError("cannot evaluate on an empty instance set")
    hits = 0
    for it in instances:
        rec = model.recommend(it.user, n, asof=it.timestamp)
        hits += int(it.item in rec.items)
    return hits / len(instances)


def random_search(factory: Callable[[dict], object], train: Sequence, validation: Sequence,
                  ranges: Mapping[str, tuple] = DEFAULT_BPR_RANGES, trials: int = 10,
                  seed: int = 0, n: int = 20) -> dict:
    """Return the best-sampled hyperparameters by validation HR@n.

    Each trial draws all hyperparameters from one seeded generator, trains
    ``factory(params)`` on ``train``, and scores it on ``validation``. Ties
    go to the earlier trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not validation:
        raise ValueError("validation set must be non-empty")
    rng = np.random.default_rng(seed)
    best_params: dict | None = None
    best_score = -1.0
    for trial in range(trials):
        params = sample_params(ranges, rng)
        model = factory(params)
        model.fit(train)
        score = hit_rate(model, validation, n=n)
        log.info("trial %d: hr@%d=%.6f params=%s", trial, n, score, params)
        if score > best_score:
            best_score = score
            best_params = params
    assert best_params is not None
    return best_params
