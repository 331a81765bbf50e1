"""Prototype-based matrix factorization: similarities, k-filtering, affinity.

A user embedding ``u`` is re-expressed as its shifted-cosine similarities to
the user prototypes (``u_star``) and mapped linearly into the item prototype
space (``u_hat = W_u @ u``); items mirror this. The affinity of a pair is
``u_star . i_hat + u_hat . i_star``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DataError

EPS = 1e-12
INIT_SCALE = 0.05
CKPT_MAGIC = b"PROTOFAIR-CKPT-v1\n"


def shifted_cosine(x, y) -> float:
    """``1 + cos(x, y)``, in [0, 2]. Raises on zero-norm input."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {y.shape}")
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise ValueError("shifted cosine of a zero vector is undefined")
    c = float(x @ y) / (nx * ny)
    return 1.0 + min(1.0, max(-1.0, c))


def normalize_rows(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit rows and the (floored) norms used to make them."""
    norms = np.maximum(np.linalg.norm(x, axis=-1, keepdims=True), EPS)
    return x / norms, norms


def topk_mask(values: np.ndarray, k: int) -> np.ndarray:
    """Boolean mask of the ``k`` largest entries along the last axis.

    Ties at the cut go to the lower index.
    """
    L = values.shape[-1]
    if not 1 <= k <= L:
        raise ValueError(f"k={k} outside [1, {L}]")
    if k == L:
        return np.ones(values.shape, dtype=bool)
    order = np.argsort(-values, axis=-1, kind="stable")
    mask = np.zeros(values.shape, dtype=bool)
    np.put_along_axis(mask, order[..., :k], True, axis=-1)
    return mask


@dataclass(frozen=True)
class TransformedVector:
    values: np.ndarray
    active_mask: np.ndarray


def transform(embedding, prototypes) -> TransformedVector:
    embedding = np.asarray(embedding, dtype=float)
    prototypes = np.atleast_2d(np.asarray(prototypes, dtype=float))
    if embedding.ndim != 1 or prototypes.shape[1] != embedding.shape[0]:
        raise ValueError(f"embedding {embedding.shape} does not match prototypes {prototypes.shape}")
    e, _ = normalize_rows(embedding)
    p, _ = normalize_rows(prototypes)
    values = 1.0 + np.clip(p @ e, -1.0, 1.0)
    return TransformedVector(values, np.ones(len(values), dtype=bool))


def k_filter(t: TransformedVector, k: int) -> TransformedVector:
    """Keep the k largest similarities; zero and deactivate the rest."""
    keep = topk_mask(t.values, k) & t.active_mask
    return TransformedVector(np.where(keep, t.values, 0.0), keep)


class SideCache(NamedTuple):
    """Intermediates of one side's forward pass, reused by the backward pass."""

    emb: np.ndarray
    emb_unit: np.ndarray
    emb_norm: np.ndarray
    proto_unit: np.ndarray
    proto_norm: np.ndarray
    cos: np.ndarray
    mask: np.ndarray
    star: np.ndarray
    hat: np.ndarray


def side_forward(emb, protos, W, k: int, use_filtering: bool) -> SideCache:
    """Transformed (``star``) and cross-mapped (``hat``) rows for ``emb``."""
    eu, en = normalize_rows(emb)
    pu, pn = normalize_rows(protos)
    cos = eu @ pu.T
    if use_filtering and k < protos.shape[0]:
        mask = topk_mask(cos, k).astype(float)
    else:
        mask = np.ones_like(cos)
    star = (1.0 + cos) * mask
    hat = emb @ W.T
    return SideCache(emb, eu, en, pu, pn, cos, mask, star, hat)


@dataclass
class PrototypeModel:
    """ProtoMF parameters.

    Shapes: ``U`` (N, d), ``I`` (M, d), ``Pu`` (L_u, d), ``Pi`` (L_i, d),
    ``Wu`` (L_i, d) and ``Wi`` (L_u, d). ``k_u``/``k_i`` are the filter sizes
    applied when scoring with ``use_filtering=True``; ``k = L`` disables the
    filter.
    """

    U: np.ndarray
    I: np.ndarray
    Pu: np.ndarray
    Pi: np.ndarray
    Wu: np.ndarray
    Wi: np.ndarray
    k_u: int
    k_i: int

    kind = "protomf"
    param_names = ("U", "I", "Pu", "Pi", "Wu", "Wi")

    def __post_init__(self):
        d = self.U.shape[1]
        L_u, L_i = self.Pu.shape[0], self.Pi.shape[0]
        shapes = {"I": (self.I.shape[0], d), "Pu": (L_u, d), "Pi": (L_i, d),
                  "Wu": (L_i, d), "Wi": (L_u, d)}
        for name, shape in shapes.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if d < 1 or L_u < 1 or L_i < 1:
            raise ValueError("d, L_u and L_i must be at least 1")
        if not (1 <= self.k_u <= L_u and 1 <= self.k_i <= L_i):
            raise ValueError(f"k_u={self.k_u}, k_i={self.k_i} outside prototype counts ({L_u}, {L_i})")

    @property
    def n_users(self) -> int:
        return self.U.shape[0]

    @property
    def n_items(self) -> int:
        return self.I.shape[0]

    @property
    def dim(self) -> int:
        return self.U.shape[1]

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.param_names}

    def dims(self) -> dict[str, int]:
        return {"N": self.n_users, "M": self.n_items, "d": self.dim,
                "L_u": self.Pu.shape[0], "L_i": self.Pi.shape[0],
                "k_u": self.k_u, "k_i": self.k_i}

    def user_side(self, users, use_filtering: bool = True) -> SideCache:
        return side_forward(self.U[users], self.Pu, self.Wu, self.k_u, use_filtering)

    def item_side(self, items, use_filtering: bool = True) -> SideCache:
        return side_forward(self.I[items], self.Pi, self.Wi, self.k_i, use_filtering)

    def score(self, users, items, use_filtering: bool = True) -> np.ndarray:
        """Affinities for broadcast-compatible index arrays ``users``, ``items``."""
        users, items = np.broadcast_arrays(np.asarray(users), np.asarray(items))
        uu, uinv = np.unique(users, return_inverse=True)
        ii, iinv = np.unique(items, return_inverse=True)
        us = self.user_side(uu, use_filtering)
        its = self.item_side(ii, use_filtering)
        uinv, iinv = uinv.reshape(users.shape), iinv.reshape(items.shape)
        return (np.einsum("...l,...l->...", us.star[uinv], its.hat[iinv])
                + np.einsum("...l,...l->...", us.hat[uinv], its.star[iinv]))


@dataclass
class MatrixFactorization:
    """Plain dot-product baseline: score = ``U[u] . I[i]``."""

    U: np.ndarray
    I: np.ndarray

    kind = "mf"
    param_names = ("U", "I")

    @property
    def n_users(self) -> int:
        return self.U.shape[0]

    @property
    def n_items(self) -> int:
        return self.I.shape[0]

    @property
    def dim(self) -> int:
        return self.U.shape[1]

    def params(self) -> dict[str, np.ndarray]:
        return {"U": self.U, "I": self.I}

    def dims(self) -> dict[str, int]:
        return {"N": self.n_users, "M": self.n_items, "d": self.dim,
                "L_u": 0, "L_i": 0, "k_u": 0, "k_i": 0}

    def score(self, users, items, use_filtering: bool = True) -> np.ndarray:
        users, items = np.broadcast_arrays(np.asarray(users), np.asarray(items))
        return np.einsum("...d,...d->...", self.U[users], self.I[items])


def init_model(kind: str, n_users: int, n_items: int, d: int, L_u: int = 1, L_i: int = 1,
               k_u: int | None = None, k_i: int | None = None,
               rng: np.random.Generator | int = 0):
    """Uniform(-0.05, 0.05) initialisation of every matrix, in a fixed order."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)

    def draw(*shape):
        return rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)

    if kind == "mf":
        return MatrixFactorization(draw(n_users, d), draw(n_items, d))
    if kind != "protomf":
        raise ValueError(f"unknown model kind {kind!r}")
    return PrototypeModel(draw(n_users, d), draw(n_items, d), draw(L_u, d), draw(L_i, d),
                          draw(L_i, d), draw(L_u, d),
                          L_u if k_u is None else k_u, L_i if k_i is None else k_i)


def _check_user(model, user):
    if not 0 <= user < model.n_users:
        raise IndexError(f"user {user} out of range [0, {model.n_users})")


def _check_items(model, items):
    items = np.asarray(items)
    if items.size and (items.min() < 0 or items.max() >= model.n_items):
        raise IndexError(f"item index out of range [0, {model.n_items})")


def affinity(model, user: int, item: int, use_filtering: bool = True) -> float:
    """Single-pair affinity, composed from :func:`transform` and :func:`k_filter`."""
    _check_user(model, user)
    _check_items(model, [item])
    u, i = model.U[user], model.I[item]
    if model.kind == "mf":
        return float(u @ i)
    u_star = transform(u, model.Pu)
    i_star = transform(i, model.Pi)
    if use_filtering:
        u_star = k_filter(u_star, model.k_u)
        i_star = k_filter(i_star, model.k_i)
    u_hat = model.Wu @ u
    i_hat = model.Wi @ i
    return float(u_star.values @ i_hat + u_hat @ i_star.values)


def score_all_items(model, user: int, candidate_items, use_filtering: bool = True) -> np.ndarray:
    candidate_items = np.asarray(candidate_items, dtype=np.int64)
    if candidate_items.size == 0:
        raise ValueError("no candidate items to score")
    _check_user(model, user)
    _check_items(model, candidate_items)
    return model.score(user, candidate_items, use_filtering)


# ---------------------------------------------------------------------------
# checkpoints

def save_checkpoint(path, model, config: dict | None = None) -> None:
    """Binary checkpoint: magic line, one JSON header line, then float64
    little-endian row-major matrices in ``param_names`` order."""
    header = {"kind": model.kind, "dims": model.dims(), "dtype": "<f8",
              "matrices": {n: list(getattr(model, n).shape) for n in model.param_names},
              "config": config or {}}
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")).encode() + b"\n")
        for name in model.param_names:
            fh.write(np.ascontiguousarray(getattr(model, name), dtype="<f8").tobytes())


def load_checkpoint(path):
    """Returns ``(model, config)``."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such checkpoint: {path}")
    blob = path.read_bytes()
    if not blob.startswith(CKPT_MAGIC):
        raise DataError(f"{path}: not a PROTOFAIR-CKPT-v1 checkpoint")
    end = blob.index(b"\n", len(CKPT_MAGIC))
    header = json.loads(blob[len(CKPT_MAGIC):end])
    offset = end + 1
    kind = header["kind"]
    names = MatrixFactorization.param_names if kind == "mf" else PrototypeModel.param_names
    mats = {}
    for name in names:
        shape = header["matrices"][name]
        count = int(np.prod(shape))
        mats[name] = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
        offset += 8 * count
    if offset != len(blob):
        raise DataError(f"{path}: trailing bytes after matrices")
    if kind == "mf":
        model = MatrixFactorization(mats["U"], mats["I"])
    else:
        dims = header["dims"]
        model = PrototypeModel(**mats, k_u=dims["k_u"], k_i=dims["k_i"])
    return model, header["config"]
