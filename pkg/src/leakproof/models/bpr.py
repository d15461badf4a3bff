"""Matrix factorization trained with a pairwise ranking loss.

For a sampled triple (u, i, j) with i observed and j unobserved for u, the
per-triple loss on the score difference s = w_u . h_i - w_u . h_j is

    L = -ln sigmoid(s) + reg * (|w_u|^2 + |h_i|^2 + |h_j|^2)

minimized by stochastic gradient descent, one step per sampled triple.
Factors start from a zero-mean normal (sigma = 0.01) drawn from the run
seed's generator; sampling, initialization, and therefore the learned
factors are deterministic given (data, params).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from leakproof.models.base import Recommender, top_n_from_scores

INIT_SIGMA = 0.01


class DivergenceError(RuntimeError):
    """Training loss became non-finite."""


@dataclass(frozen=True)
class BprParams:
    """Hyperparameters; bounds follow the published search ranges."""

    latent_dim: int = 32
    learning_rate: float = 0.05
    regularization: float = 1e-4
    epochs: int = 50
    negatives_per_positive: int = 1
    seed: int = 0

    def __post_init__(self):
        if not 8 <= self.latent_dim <= 128:
            raise ValueError(f"latent_dim must be in [8, 128], got {self.latent_dim}")
        if not 1e-6 <= self.learning_rate <= 0.1:
            raise ValueError(f"learning_rate must be in [1e-6, 0.1], got {self.learning_rate}")
        if not 1e-4 <= self.regularization <= 0.1:
            raise ValueError(f"regularization must be in [1e-4, 0.1], got {self.regularization}")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.negatives_per_positive < 1:
            raise ValueError("negatives_per_positive must be >= 1")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def triple_loss(w_u: np.ndarray, h_i: np.ndarray, h_j: np.ndarray, reg: float) -> float:
    """Loss of a single (user, positive, negative) triple."""
    s = float(w_u @ h_i - w_u @ h_j)
    # softplus(-s) = -ln sigmoid(s), numerically stable
    return float(np.logaddexp(0.0, -s) + reg * (w_u @ w_u + h_i @ h_i + h_j @ h_j))


def triple_grads(w_u: np.ndarray, h_i: np.ndarray, h_j: np.ndarray, reg: float):
    """Analytic gradients of ``triple_loss`` wrt (w_u, h_i, h_j).

    The shared weight is 1 - sigmoid(s); at s = 0 it equals 0.5.
    """
    s = float(w_u @ h_i - w_u @ h_j)
    weight = float(_sigmoid(np.asarray([-s]))[0])  # 1 - sigmoid(s)
    g_u = -weight * (h_i - h_j) + 2.0 * reg * w_u
    g_i = -weight * w_u + 2.0 * reg * h_i
    g_j = weight * w_u + 2.0 * reg * h_j
    return g_u, g_i, g_j


class Bpr(Recommender):
    """BPR matrix factorization with incremental updates.

    ``group_size`` controls how many sampled triples share one vectorized
    gradient application; it is a speed/fidelity knob (group_size=1 is exact
    per-triple SGD) and part of the model's deterministic configuration.
    """

    kind = "bpr"

    def __init__(self, params: BprParams = BprParams(), group_size: int = 1024):
        super().__init__()
        if group_size < 1:
            raise ValueError("group_size must be >= 1")
        self.params = params
        self.group_size = group_size
        self.loss_history: list[float] = []
        self._rng = np.random.default_rng(params.seed)
        self._user_index: dict = {}
        self._item_index: dict = {}
        self._user_factors = np.empty((0, params.latent_dim))
        self._item_factors = np.empty((0, params.latent_dim))
        self._pos_u: list[int] = []
        self._pos_i: list[int] = []
        self._pos_sets: list[set] = []  # per user-row, consumed item rows

    def _reset_state(self) -> None:
        dim = self.params.latent_dim
        self.loss_history = []
        self._rng = np.random.default_rng(self.params.seed)
        self._user_index = {}
        self._item_index = {}
        self._user_factors = np.empty((0, dim))
        self._item_factors = np.empty((0, dim))
        self._pos_u = []
        self._pos_i = []
        self._pos_sets = []

    # -- training -------------------------------------------------------

    def fit(self, interactions) -> "Bpr":
        super().fit(interactions)
        if not self._pos_u:
            raise ValueError("bpr requires a non-empty training set")
        self._run_epochs(self.params.epochs)
        return self

    def update(self, interactions, steps: int | None = None) -> "Bpr":
        """Absorb new interactions, then take ``steps`` stochastic steps.

        New users/items get freshly initialized factor rows. Positives are
        sampled from the accumulated history including the new interactions.
        ``steps`` defaults to one step per new interaction.
        """
        interactions = list(interactions)
        super().update(interactions)
        if steps is None:
            steps = len(interactions)
        if steps and self._pos_u:
            self._run_samples(self._sample_positions(steps))
        return self

    def _consume(self, interactions: list) -> None:
        grow_users = []
        grow_items = []
        for it in interactions:
            if it.user not in self._user_index:
                self._user_index[it.user] = len(self._user_index)
                grow_users.append(it.user)
                self._pos_sets.append(set())
            if it.item not in self._item_index:
                self._item_index[it.item] = len(self._item_index)
                grow_items.append(it.item)
        if grow_users:
            fresh = self._rng.normal(0.0, INIT_SIGMA, size=(len(grow_users), self.params.latent_dim))
            self._user_factors = np.vstack([self._user_factors, fresh])
        if grow_items:
            fresh = self._rng.normal(0.0, INIT_SIGMA, size=(len(grow_items), self.params.latent_dim))
            self._item_factors = np.vstack([self._item_factors, fresh])
        for it in interactions:
            u = self._user_index[it.user]
            i = self._item_index[it.item]
            self._pos_u.append(u)
            self._pos_i.append(i)
            self._pos_sets[u].add(i)

    def _run_epochs(self, epochs: int) -> None:
        n_pos = len(self._pos_u)
        npp = self.params.negatives_per_positive
        for epoch in range(epochs):
            order = self._rng.permutation(n_pos)
            if npp > 1:
                order = np.repeat(order, npp)
            mean_loss = self._run_samples(order)
            self.loss_history.append(mean_loss)
            if not np.isfinite(mean_loss):
                raise DivergenceError(
                    f"non-finite mean loss {mean_loss} at epoch {epoch + 1} "
                    f"(lr={self.params.learning_rate}, dim={self.params.latent_dim})"
                )

    def _sample_positions(self, count: int) -> np.ndarray:
        return self._rng.integers(0, len(self._pos_u), size=count)

    def _run_samples(self, positions: np.ndarray) -> float:
        """One SGD step per sampled positive, applied in vectorized groups."""
        pos_u = np.asarray(self._pos_u)
        pos_i = np.asarray(self._pos_i)
        lr = self.params.learning_rate
        reg = self.params.regularization
        w, h = self._user_factors, self._item_factors
        loss_sum = 0.0
        n_done = 0
        for start in range(0, len(positions), self.group_size):
            batch = positions[start:start + self.group_size]
            u = pos_u[batch]
            i = pos_i[batch]
            j, keep = self._sample_negatives(u)
            if not np.all(keep):
                u, i, j = u[keep], i[keep], j[keep]
                if len(u) == 0:
                    continue
            wu = w[u]
            hi = h[i]
            hj = h[j]
            diff = hi - hj
            s = np.einsum("ij,ij->i", wu, diff)
            weight = _sigmoid(-s)[:, None]
            loss_sum += float(
                np.logaddexp(0.0, -s).sum()
                + reg * ((wu * wu).sum() + (hi * hi).sum() + (hj * hj).sum())
            )
            n_done += len(u)
            g_u = -weight * diff + 2.0 * reg * wu
            g_i = -weight * wu + 2.0 * reg * hi
            g_j = weight * wu + 2.0 * reg * hj
            np.add.at(w, u, -lr * g_u)
            np.add.at(h, i, -lr * g_i)
            np.add.at(h, j, -lr * g_j)
        return loss_sum / n_done if n_done else float("nan")

    def _sample_negatives(self, users: np.ndarray):
        """Uniform negatives over items unobserved by each user.

        Users who have consumed the whole catalog have no negative to offer;
        their samples are dropped (keep mask False).
        """
        n_items = len(self._item_index)
        j = self._rng.integers(0, n_items, size=len(users))
        keep = np.fromiter(
            (len(self._pos_sets[u]) < n_items for u in users), bool, count=len(users)
        )
        while True:
            clash = np.fromiter(
                (keep[k] and int(j[k]) in self._pos_sets[users[k]] for k in range(len(users))),
                bool,
                count=len(users),
            )
            if not clash.any():
                break
            j[clash] = self._rng.integers(0, n_items, size=int(clash.sum()))
        return j, keep

    # -- ranking --------------------------------------------------------

    def _rank(self, user, pool: list, n: int) -> list[tuple]:
        if not pool:
            return []
        row = self._user_index.get(user)
        if row is None:
            scores = np.zeros(len(pool))
        else:
            idx = np.fromiter((self._item_index[item] for item in pool), dtype=np.int64, count=len(pool))
            scores = self._item_factors[idx] @ self._user_factors[row]
        return top_n_from_scores(pool, scores, n)
