"""Losses with hand-derived gradients, optimizers, and the training loop.

Gradients are dicts keyed like ``model.params()``. Every loss here is
checked against central finite differences in the test suite.

The k-filter masks and the argmax selections of the collaborative
regularizers are treated as constants within a step: gradients flow only
through the selected entries.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import itertools
import json
import logging
from dataclasses import asdict, dataclass, fields, replace
from typing import Callable, Iterable, Mapping

import numpy as np

from .data import InteractionTable, SplitDataset
from .errors import ConfigError, NumericalError
from .model import EPS, PrototypeModel, SideCache, init_model, normalize_rows, side_forward
from .rng import substream

log = logging.getLogger(__name__)

LOSS_LOG_FORMAT = "# protofair-losslog v1"


@dataclass
class TrainConfig:
    model_kind: str = "protomf"
    d: int = 32
    L_u: int = 16
    L_i: int = 16
    k_u: int | None = None
    k_i: int | None = None
    lambda1_u: float = 0.0
    lambda2_u: float = 0.0
    lambda1_i: float = 0.0
    lambda2_i: float = 0.0
    lambda_dist_u: float = 0.0
    lambda_dist_i: float = 0.0
    lambda_zerosum: float = 0.0
    n_negatives_train: int = 10
    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    epochs: int = 20
    batch_size: int = 256
    seed: int = 0
    enable_user_filtering: bool = False
    enable_item_filtering: bool = False

    def __post_init__(self):
        if self.k_u is None:
            self.k_u = self.L_u
        if self.k_i is None:
            self.k_i = self.L_i
        self.validate()

    def validate(self):
        if self.model_kind not in ("protomf", "mf"):
            raise ConfigError(f"model_kind must be 'protomf' or 'mf', got {self.model_kind!r}")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}")
        for name in ("d", "L_u", "L_i", "n_negatives_train", "epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for f in fields(self):
            if f.name.startswith("lambda") and getattr(self, f.name) < 0:
                raise ConfigError(f"{f.name} must be >= 0")
        if not 1 <= self.k_u <= self.L_u:
            raise ConfigError(f"k_u={self.k_u} outside [1, L_u={self.L_u}]")
        if not 1 <= self.k_i <= self.L_i:
            raise ConfigError(f"k_i={self.k_i} outside [1, L_i={self.L_i}]")

    @classmethod
    def from_dict(cls, d: Mapping) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown train config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @property
    def effective_k_u(self) -> int:
        return self.k_u if self.enable_user_filtering else self.L_u

    @property
    def effective_k_i(self) -> int:
        return self.k_i if self.enable_item_filtering else self.L_i


@dataclass
class LossBreakdown:
    """Unweighted loss components; ``total`` applies the config's weights.

    A regularizer whose weight is 0 is not evaluated and reads 0.
    """

    rec_user: float = 0.0
    rec_item: float = 0.0
    reg_proto_to_user: float = 0.0
    reg_user_to_proto: float = 0.0
    reg_proto_to_item: float = 0.0
    reg_item_to_proto: float = 0.0
    dist_user: float = 0.0
    dist_item: float = 0.0
    zerosum: float = 0.0
    total: float = 0.0

    def weighted_total(self, cfg: TrainConfig) -> float:
        return (self.rec_user + self.rec_item
                + cfg.lambda1_u * self.reg_proto_to_user + cfg.lambda2_u * self.reg_user_to_proto
                + cfg.lambda1_i * self.reg_proto_to_item + cfg.lambda2_i * self.reg_item_to_proto
                + cfg.lambda_dist_u * self.dist_user + cfg.lambda_dist_i * self.dist_item
                + cfg.lambda_zerosum * self.zerosum)

    def components(self) -> dict[str, float]:
        d = asdict(self)
        d.pop("total")
        return d


# ---------------------------------------------------------------------------
# differentiable pieces

def _normalize_backward(d_unit: np.ndarray, unit: np.ndarray, norms: np.ndarray) -> np.ndarray:
    grad = (d_unit - unit * np.sum(d_unit * unit, axis=-1, keepdims=True)) / norms
    floored = norms[..., 0] <= EPS
    if np.any(floored):
        # below the floor the norm is a constant
        grad[floored] = d_unit[floored] / EPS
    return grad


def _side_backward(c: SideCache, W: np.ndarray, d_star, d_hat, d_cos=None):
    """Gradients w.r.t. (embeddings, prototypes, W) of one side."""
    dcos = d_star * c.mask
    if d_cos is not None:
        dcos = dcos + d_cos
    d_eu = dcos @ c.proto_unit
    d_pu = dcos.T @ c.emb_unit
    dE = _normalize_backward(d_eu, c.emb_unit, c.emb_norm) + d_hat @ W
    dP = _normalize_backward(d_pu, c.proto_unit, c.proto_norm)
    dW = d_hat.T @ c.emb
    return dE, dP, dW


def _scatter(n_rows: int, idx: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Row-wise scatter-add of ``vals`` (idx.shape + (L,)) into (n_rows, L)."""
    if idx.ndim == 2 and idx.shape[1] > 1 and np.all(idx == idx[:, :1]):
        idx, vals = idx[:, 0], vals.sum(axis=1)
    L = vals.shape[-1]
    flat = (idx.reshape(-1, 1) * L + np.arange(L)).ravel()
    return np.bincount(flat, weights=vals.ravel(), minlength=n_rows * L).reshape(n_rows, L)


class _Tape:
    """Full-table forward pass for one step, with pair scoring and backprop."""

    def __init__(self, model, use_filtering: bool = True):
        self.model = model
        self.proto = isinstance(model, PrototypeModel)
        if self.proto:
            self.us = side_forward(model.U, model.Pu, model.Wu, model.k_u, use_filtering)
            self.its = side_forward(model.I, model.Pi, model.Wi, model.k_i, use_filtering)
            L_u, L_i = model.Pu.shape[0], model.Pi.shape[0]
            self.d_ustar = np.zeros((model.n_users, L_u))
            self.d_uhat = np.zeros((model.n_users, L_i))
            self.d_istar = np.zeros((model.n_items, L_i))
            self.d_ihat = np.zeros((model.n_items, L_u))
        else:
            self.dU = np.zeros_like(model.U)
            self.dI = np.zeros_like(model.I)

    def scores(self, users, items) -> np.ndarray:
        users, items = np.broadcast_arrays(users, items)
        if not self.proto:
            return np.einsum("...d,...d->...", self.model.U[users], self.model.I[items])
        us, its = self.us, self.its
        return (np.einsum("...l,...l->...", us.star[users], its.hat[items])
                + np.einsum("...l,...l->...", us.hat[users], its.star[items]))

    def backprop_scores(self, users, items, d_scores):
        users, items = np.broadcast_arrays(users, items)
        g = d_scores[..., None]
        m = self.model
        if not self.proto:
            self.dU += _scatter(m.n_users, users, g * m.I[items])
            self.dI += _scatter(m.n_items, items, g * m.U[users])
            return
        us, its = self.us, self.its
        self.d_ustar += _scatter(m.n_users, users, g * its.hat[items])
        self.d_uhat += _scatter(m.n_users, users, g * its.star[items])
        self.d_istar += _scatter(m.n_items, items, g * us.hat[users])
        self.d_ihat += _scatter(m.n_items, items, g * us.star[users])

    def grads(self) -> dict[str, np.ndarray]:
        if not self.proto:
            return {"U": self.dU, "I": self.dI}
        m = self.model
        dU, dPu, dWu = _side_backward(self.us, m.Wu, self.d_ustar, self.d_uhat)
        dI, dPi, dWi = _side_backward(self.its, m.Wi, self.d_istar, self.d_ihat)
        return {"U": dU, "I": dI, "Pu": dPu, "Pi": dPi, "Wu": dWu, "Wi": dWi}


def _softmax_xent(scores: np.ndarray, valid: np.ndarray | None = None):
    """Mean cross-entropy with the positive in column 0, and d/dscores.

    ``valid`` masks out sampled negatives (column 0 is always valid).
    """
    s = scores if valid is None else np.where(valid, scores, -np.inf)
    top = s.max(axis=1, keepdims=True)
    e = np.exp(s - top)
    z = e.sum(axis=1, keepdims=True)
    loss = (top[:, 0] + np.log(z[:, 0])) - s[:, 0]
    grad = e / z
    grad[:, 0] -= 1.0
    B = len(scores)
    return float(loss.mean()), grad / B


def _rec_loss(model, rows, pos, neg, side: str, use_filtering: bool, neg_valid=None):
    rows = np.asarray(rows, dtype=np.int64)
    cands = np.concatenate([np.asarray(pos, dtype=np.int64)[:, None],
                            np.asarray(neg, dtype=np.int64).reshape(len(rows), -1)], axis=1)
    valid = None
    if neg_valid is not None:
        valid = np.concatenate([np.ones((len(rows), 1), bool), neg_valid], axis=1)
    tape = _Tape(model, use_filtering)
    pair = (rows[:, None], cands) if side == "user" else (cands, rows[:, None])
    loss, d = _softmax_xent(tape.scores(*pair), valid)
    tape.backprop_scores(*pair, d)
    return loss, tape.grads()


def rec_loss_user(model, users, pos_items, neg_items, use_filtering: bool = True,
                  neg_valid=None) -> tuple[float, dict]:
    """Sampled-softmax loss of each user's positive item against its negatives.

    ``neg_items`` has shape (B, n); with n = 0 the loss is exactly 0.
    """
    return _rec_loss(model, users, pos_items, neg_items, "user", use_filtering, neg_valid)


def rec_loss_item(model, items, pos_users, neg_users, use_filtering: bool = True,
                  neg_valid=None) -> tuple[float, dict]:
    """Item-side mirror of :func:`rec_loss_user`: softmax over sampled users."""
    return _rec_loss(model, items, pos_users, neg_users, "item", use_filtering, neg_valid)


def proto_collab_reg(entities: np.ndarray, prototypes: np.ndarray,
                     w_proto_to_entity: float = 1.0, w_entity_to_proto: float = 1.0):
    """Pull each prototype toward its closest entity and each entity toward
    its closest prototype.

    Returns ``(r_pe, r_ep, dE, dP)`` where ``r_pe = -mean_l max_n sim`` and
    ``r_ep = -mean_n max_l sim``; the gradients are of
    ``w_proto_to_entity * r_pe + w_entity_to_proto * r_ep``. Ties in the
    max go to the lower index.
    """
    if entities.shape[1] != prototypes.shape[1]:
        raise ValueError("entity and prototype dimensions differ")
    eu, en = normalize_rows(entities)
    pu, pn = normalize_rows(prototypes)
    sim = 1.0 + eu @ pu.T
    n, L = sim.shape
    best_entity = np.argmax(sim, axis=0)
    best_proto = np.argmax(sim, axis=1)
    r_pe = -float(sim[best_entity, np.arange(L)].mean())
    r_ep = -float(sim[np.arange(n), best_proto].mean())
    dsim = np.zeros_like(sim)
    np.add.at(dsim, (best_entity, np.arange(L)), -w_proto_to_entity / L)
    np.add.at(dsim, (np.arange(n), best_proto), -w_entity_to_proto / n)
    dE = _normalize_backward(dsim @ pu, eu, en)
    dP = _normalize_backward(dsim.T @ eu, pu, pn)
    return r_pe, r_ep, dE, dP


def distributing_reg(prototypes: np.ndarray) -> tuple[float, np.ndarray]:
    """Frobenius norm of the cosine Gram matrix of the prototypes, diagonal
    included. Equals sqrt(L) iff the rows are mutually orthogonal."""
    pu, pn = normalize_rows(prototypes)
    gram = pu @ pu.T
    value = float(np.sqrt(np.sum(gram * gram)))
    d_gram = gram / value
    d_pu = 2.0 * d_gram @ pu
    return value, _normalize_backward(d_pu, pu, pn)


def zerosum_reg(pos_scores, neg_scores, neg_valid=None):
    """Mean over examples of ``mean_j (s_pos - s_neg_j) ** 2``.

    Returns ``(value, d_pos, d_neg)``.
    """
    pos = np.asarray(pos_scores, dtype=float)
    neg = np.asarray(neg_scores, dtype=float)
    if neg.ndim != 2 or neg.shape[1] < 1:
        raise ValueError("need at least one negative per positive")
    w = np.ones_like(neg) if neg_valid is None else neg_valid.astype(float)
    cnt = np.maximum(w.sum(axis=1, keepdims=True), 1.0)
    diff = (pos[:, None] - neg) * w
    B = len(pos)
    value = float(np.sum(diff * diff / cnt) / B)
    d_neg = -2.0 * diff / cnt / B
    return value, -d_neg.sum(axis=1), d_neg


# ---------------------------------------------------------------------------
# optimizers

class SGD:
    def __init__(self, lr: float = 1e-3):
        self.lr = lr

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for k, p in params.items():
            p -= self.lr * grads[k]


class Adam:
    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for k, p in params.items():
            g = grads[k]
            if k not in self.m:
                self.m[k] = np.zeros_like(p)
                self.v[k] = np.zeros_like(p)
            m, v = self.m[k], self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= (self.lr / bc1) * m / (np.sqrt(v / bc2) + self.eps)


def make_optimizer(cfg: TrainConfig):
    if cfg.optimizer == "sgd":
        return SGD(cfg.learning_rate)
    return Adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps)


# ---------------------------------------------------------------------------
# training loop

class NegativeSampler:
    """Uniform negatives outside each entity's training history.

    ``side="user"`` samples items for users, ``side="item"`` samples users
    for items. Entities that interacted with more than half of the other
    side sample straight from their precomputed complement; the rest use
    rejection sampling. Entities with an empty complement get invalid
    (masked) negatives.
    """

    def __init__(self, table: InteractionTable, side: str, dense_fraction: float = 0.5):
        if side not in ("user", "item"):
            raise ValueError(f"side must be 'user' or 'item', got {side!r}")
        self.table, self.side = table, side
        self.n_cols = table.n_items if side == "user" else table.n_users
        counts = table.user_counts() if side == "user" else table.item_counts()
        self.complement: dict[int, np.ndarray] = {}
        for e in np.flatnonzero(counts > dense_fraction * self.n_cols).tolist():
            history = table.items_of(e) if side == "user" else table.users[table.items == e]
            self.complement[e] = np.setdiff1d(np.arange(self.n_cols), history, assume_unique=True)
        self.dense = np.zeros(len(counts), dtype=bool)
        self.dense[list(self.complement)] = True

    def _taken(self, rows, cols):
        if self.side == "user":
            return self.table.contains(rows, cols)
        return self.table.contains(cols, rows)

    def sample(self, rng: np.random.Generator, rows: np.ndarray, n: int):
        """Returns ``(negatives, valid)``, both of shape (len(rows), n)."""
        neg = rng.integers(self.n_cols, size=(len(rows), n))
        r = np.broadcast_to(rows[:, None], neg.shape)
        bad = self._taken(r, neg)
        dense_rows = self.dense[rows]
        bad[dense_rows] = False
        while bad.any():
            idx = np.nonzero(bad)
            neg[idx] = rng.integers(self.n_cols, size=len(idx[0]))
            bad[idx] = self._taken(r[idx], neg[idx])
        valid = np.ones(neg.shape, dtype=bool)
        for b in np.flatnonzero(dense_rows).tolist():
            pool = self.complement[int(rows[b])]
            if len(pool):
                neg[b] = pool[rng.integers(len(pool), size=n)]
            else:
                neg[b] = 0
                valid[b] = False
        return neg, valid


def model_from_config(cfg: TrainConfig, n_users: int, n_items: int):
    return init_model(cfg.model_kind, n_users, n_items, cfg.d, cfg.L_u, cfg.L_i,
                      cfg.effective_k_u, cfg.effective_k_i, substream(cfg.seed, "init"))


def train_step(model, cfg: TrainConfig, users, items, neg_items, neg_items_valid,
               neg_users, neg_users_valid, optimizer) -> LossBreakdown:
    """One optimizer step on a batch of (user, positive item) pairs."""
    proto = isinstance(model, PrototypeModel)
    tape = _Tape(model)
    out = LossBreakdown()

    user_pair = (users[:, None], np.concatenate([items[:, None], neg_items], axis=1))
    item_pair = (np.concatenate([users[:, None], neg_users], axis=1), items[:, None])
    valid_u = np.concatenate([np.ones((len(users), 1), bool), neg_items_valid], axis=1)
    valid_i = np.concatenate([np.ones((len(users), 1), bool), neg_users_valid], axis=1)

    s_user = tape.scores(*user_pair)
    s_item = tape.scores(*item_pair)
    out.rec_user, d_user = _softmax_xent(s_user, valid_u)
    out.rec_item, d_item = _softmax_xent(s_item, valid_i)
    if cfg.lambda_zerosum > 0:
        zu, dpu, dnu = zerosum_reg(s_user[:, 0], s_user[:, 1:], neg_items_valid)
        zi, dpi, dni = zerosum_reg(s_item[:, 0], s_item[:, 1:], neg_users_valid)
        out.zerosum = zu + zi
        lz = cfg.lambda_zerosum
        d_user[:, 0] += lz * dpu
        d_user[:, 1:] += lz * dnu
        d_item[:, 0] += lz * dpi
        d_item[:, 1:] += lz * dni
    tape.backprop_scores(*user_pair, d_user)
    tape.backprop_scores(*item_pair, d_item)
    grads = tape.grads()

    if proto:
        if cfg.lambda1_u > 0 or cfg.lambda2_u > 0:
            a, b, dE, dP = proto_collab_reg(model.U, model.Pu, cfg.lambda1_u, cfg.lambda2_u)
            out.reg_proto_to_user, out.reg_user_to_proto = a, b
            grads["U"] += dE
            grads["Pu"] += dP
        if cfg.lambda1_i > 0 or cfg.lambda2_i > 0:
            a, b, dE, dP = proto_collab_reg(model.I, model.Pi, cfg.lambda1_i, cfg.lambda2_i)
            out.reg_proto_to_item, out.reg_item_to_proto = a, b
            grads["I"] += dE
            grads["Pi"] += dP
        if cfg.lambda_dist_u > 0:
            out.dist_user, dP = distributing_reg(model.Pu)
            grads["Pu"] += cfg.lambda_dist_u * dP
        if cfg.lambda_dist_i > 0:
            out.dist_item, dP = distributing_reg(model.Pi)
            grads["Pi"] += cfg.lambda_dist_i * dP

    out.total = out.weighted_total(cfg)
    for name, value in asdict(out).items():
        if not np.isfinite(value):
            raise NumericalError(f"non-finite loss component {name!r}: {value}")
    params = model.params()
    if cfg.weight_decay:
        for k in grads:
            grads[k] = grads[k] + cfg.weight_decay * params[k]
    optimizer.step(params, grads)
    return out


def _mean_breakdown(steps: list[LossBreakdown], cfg: TrainConfig) -> LossBreakdown:
    keys = steps[0].components()
    out = LossBreakdown(**{k: float(np.mean([getattr(s, k) for s in steps])) for k in keys})
    out.total = out.weighted_total(cfg)
    return out


def train(cfg: TrainConfig, data: SplitDataset | InteractionTable,
          model=None,
          val_fn: Callable[[object], float] | None = None,
          step_callback: Callable[[int, int, LossBreakdown], None] | None = None):
    """Train a model from scratch (or continue ``model``) for ``cfg.epochs``.

    Returns ``(model, history)`` with one :class:`LossBreakdown` per epoch.
    If ``val_fn`` is given it is called after each epoch (higher is
    better) and the best-scoring parameters are restored at the end.
    """
    table = data.train if isinstance(data, SplitDataset) else data
    if len(table) == 0:
        raise ConfigError("no training interactions")
    if model is None:
        model = model_from_config(cfg, table.n_users, table.n_items)
    rng_shuffle = substream(cfg.seed, "shuffle")
    rng_neg = substream(cfg.seed, "negatives")
    item_sampler = NegativeSampler(table, "user")
    user_sampler = NegativeSampler(table, "item")
    opt = make_optimizer(cfg)
    history: list[LossBreakdown] = []
    best = (-np.inf, None)

    for epoch in range(cfg.epochs):
        order = rng_shuffle.permutation(len(table))
        steps = []
        for step, start in enumerate(range(0, len(order), cfg.batch_size)):
            batch = order[start:start + cfg.batch_size]
            users, items = table.users[batch], table.items[batch]
            ni, vi = item_sampler.sample(rng_neg, users, cfg.n_negatives_train)
            nu, vu = user_sampler.sample(rng_neg, items, cfg.n_negatives_train)
            # overflow surfaces as a NumericalError naming the component
            with np.errstate(over="ignore", invalid="ignore"):
                br = train_step(model, cfg, users, items, ni, vi, nu, vu, opt)
            steps.append(br)
            if step_callback is not None:
                step_callback(epoch, step, br)
        history.append(_mean_breakdown(steps, cfg))
        log.debug("epoch %d: total %.5f", epoch, history[-1].total)
        if val_fn is not None:
            score = float(val_fn(model))
            if score > best[0]:
                best = (score, copy.deepcopy(model.params()))
    if best[1] is not None:
        for k, p in model.params().items():
            p[...] = best[1][k]
    return model, history


def write_loss_log(history: Iterable[LossBreakdown], path) -> None:
    cols = ["epoch", "rec_user", "rec_item", "reg_pu", "reg_up", "reg_pi", "reg_ip",
            "dist_u", "dist_i", "zerosum", "total"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(LOSS_LOG_FORMAT + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for epoch, b in enumerate(history):
            w.writerow([epoch] + [repr(float(v)) for v in asdict(b).values()])


# ---------------------------------------------------------------------------
# hyperparameter sweeps

def grid_configs(base: TrainConfig, grid: Mapping[str, list]) -> list[tuple[str, TrainConfig]]:
    """Cartesian product of ``grid`` over ``base``; names encode the overrides."""
    keys = sorted(grid)
    out = []
    for values in itertools.product(*(grid[k] for k in keys)):
        over = dict(zip(keys, values))
        name = ",".join(f"{k}={v}" for k, v in over.items()) or "base"
        out.append((name, replace(base, **over)))
    return out


def sweep(base: TrainConfig, grid: Mapping[str, list], data: SplitDataset,
          score_fn: Callable[[object], float]) -> list[tuple[float, str, TrainConfig]]:
    """Train every grid point and return ``(score, name, config)`` best first."""
    results = []
    for name, cfg in grid_configs(base, grid):
        model, _ = train(cfg, data)
        results.append((float(score_fn(model)), name, cfg))
        log.info("sweep %s -> %.4f", name, results[-1][0])
    return sorted(results, key=lambda r: -r[0])


def two_stage_search(base: TrainConfig, base_grid: Mapping[str, list],
                     fairness_grid: Mapping[str, list], data: SplitDataset,
                     score_fn: Callable[[object], float]):
    """Tune the vanilla model first, then the filtering/distributing knobs
    with those hyperparameters frozen. Returns both stages' results."""
    first = sweep(base, base_grid, data, score_fn)
    second = sweep(first[0][2], fairness_grid, data, score_fn)
    return first, second
