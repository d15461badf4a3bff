"""Model checkpoints: a JSON text dump sufficient to resume update().

The header carries the model kind, its parameters, and the consumed
interaction count; the body holds count tables or factor matrices plus the
generator state, so a reloaded model continues exactly where the saved one
stopped. Identifiers round-trip as JSON scalars (pair lists, not object
keys), so integer and string ids both survive.
"""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

import numpy as np

from leakproof.models.base import Recommender
from leakproof.models.bpr import Bpr, BprParams
from leakproof.models.itemknn import ItemKnn
from leakproof.models.popularity import Popularity

FORMAT = "leakproof-model-v1"


def _seen_to_pairs(seen: dict) -> list:
    return [[user, sorted(items)] for user, items in seen.items()]


def _seen_from_pairs(pairs) -> dict:
    return {user: set(items) for user, items in pairs}


def save_model(model: Recommender, path) -> None:
    """Write a checkpoint; the inverse of :func:`load_model`."""
    payload = {
        "format": FORMAT,
        "kind": model.kind,
        "consumed": model.consumed,
        "seen": _seen_to_pairs(model._seen),
    }
    if isinstance(model, Popularity):
        payload["counts"] = [[item, count] for item, count in model._counts.items()]
    elif isinstance(model, ItemKnn):
        payload["params"] = {"neighborhood_size": model.neighborhood_size}
        payload["counts"] = [[item, count] for item, count in model._counts.items()]
        payload["item_users"] = [[item, sorted(users)] for item, users in model._item_users.items()]
    elif isinstance(model, Bpr):
        payload["params"] = {
            "latent_dim": model.params.latent_dim,
            "learning_rate": model.params.learning_rate,
            "regularization": model.params.regularization,
            "epochs": model.params.epochs,
            "negatives_per_positive": model.params.negatives_per_positive,
            "seed": model.params.seed,
        }
        payload["group_size"] = model.group_size
        payload["users"] = list(model._user_index)
        payload["items"] = list(model._item_index)
        payload["user_factors"] = model._user_factors.tolist()
        payload["item_factors"] = model._item_factors.tolist()
        payload["positives"] = [model._pos_u, model._pos_i]
        payload["rng_state"] = model._rng.bit_generator.state
        payload["loss_history"] = model.loss_history
    else:
        raise TypeError(f"cannot checkpoint model kind {model.kind!r}")
    Path(path).write_text(json.dumps(payload))


def load_model(path) -> Recommender:
    """Restore a checkpointed model, ready for recommend() and update()."""
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != FORMAT:
        raise ValueError(f"not a model checkpoint: {path}")
    kind = payload["kind"]

    if kind == "popularity":
        model: Recommender = Popularity()
        model._counts = Counter(dict((tuple(p) for p in payload["counts"])))
    elif kind == "itemknn":
        model = ItemKnn(**payload["params"])
        model._counts = Counter(dict((tuple(p) for p in payload["counts"])))
        model._item_users = {item: set(users) for item, users in payload["item_users"]}
    elif kind == "bpr":
        model = Bpr(BprParams(**payload["params"]), group_size=payload["group_size"])
        model._user_index = {user: row for row, user in enumerate(payload["users"])}
        model._item_index = {item: row for row, item in enumerate(payload["items"])}
        model._user_factors = np.asarray(payload["user_factors"], dtype=np.float64)
        model._item_factors = np.asarray(payload["item_factors"], dtype=np.float64)
        model._pos_u, model._pos_i = payload["positives"]
        model._rng.bit_generator.state = payload["rng_state"]
        model.loss_history = list(payload["loss_history"])
        model._pos_sets = [set() for _ in payload["users"]]
        for u, i in zip(model._pos_u, model._pos_i):
            model._pos_sets[u].add(i)
    else:
        raise ValueError(f"unknown checkpoint kind {kind!r}")

    model._seen = _seen_from_pairs(payload["seen"])
    model._catalog = {it for items in (p[1] for p in payload["seen"]) for it in items}
    model._n_consumed = payload["consumed"]
    return model
