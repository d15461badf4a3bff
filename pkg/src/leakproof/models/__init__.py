"""Reference recommenders and the pluggable model contract."""

from __future__ import annotations

from dataclasses import dataclass, field

from leakproof.models.base import Recommender, RecommendationList
from leakproof.models.bpr import Bpr, BprParams, DivergenceError, triple_grads, triple_loss
from leakproof.models.io import load_model, save_model
from leakproof.models.itemknn import ItemKnn
from leakproof.models.popularity import Popularity
from leakproof.models.search import DEFAULT_BPR_RANGES, random_search, sample_params

MODEL_KINDS = ("popularity", "itemknn", "bpr")


def build_model(kind: str, params: dict | None = None, seed: int = 0) -> Recommender:
    """Instantiate a model by name.

    ``seed`` feeds the stochastic models; the deterministic baselines ignore
    it. ``params`` passes model-specific knobs (e.g. ``latent_dim`` for bpr,
    ``neighborhood_size`` for itemknn).
    """
    params = dict(params or {})
    if kind == "popularity":
        return Popularity()
    if kind == "itemknn":
        return ItemKnn(**params)
    if kind == "bpr":
        group_size = params.pop("group_size", 1024)
        return Bpr(BprParams(seed=seed, **params), group_size=group_size)
    raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


@dataclass(frozen=True)
class ModelSpec:
    """Picklable (kind, params) pair usable as a per-seed model factory."""

    kind: str
    params: dict = field(default_factory=dict)

    def __call__(self, seed: int = 0) -> Recommender:
        return build_model(self.kind, self.params, seed=seed)


__all__ = [
    "Bpr",
    "BprParams",
    "DEFAULT_BPR_RANGES",
    "DivergenceError",
    "ItemKnn",
    "MODEL_KINDS",
    "ModelSpec",
    "Popularity",
    "RecommendationList",
    "Recommender",
    "build_model",
    "load_model",
    "random_search",
    "sample_params",
    "save_model",
    "triple_grads",
    "triple_loss",
]
