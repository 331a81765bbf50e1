"""Nearest-prototype explanations and 2-D embedding exports for plotting."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import textio
from .data import GroupAssignment
from .model import PrototypeModel, normalize_rows, transform

log = logging.getLogger(__name__)


def nearest_prototypes(model: PrototypeModel, item: int, n: int) -> list[tuple[int, float]]:
    """The ``n`` item prototypes most similar to ``item``, closest first."""
    L = model.Pi.shape[0]
    if not 1 <= n <= L:
        raise ValueError(f"n={n} outside [1, {L}]")
    sims = transform(model.I[item], model.Pi).values
    order = np.argsort(-sims, kind="stable")[:n]
    return [(int(j), float(sims[j])) for j in order]


def prototype_exemplars(model: PrototypeModel, prototype: int, m: int,
                        exclude: Iterable[int] | None = None) -> list[tuple[int, float]]:
    """The ``m`` items most similar to an item prototype, closest first."""
    if not 0 <= prototype < model.Pi.shape[0]:
        raise IndexError(f"prototype {prototype} out of range")
    if m < 1:
        raise ValueError("m must be >= 1")
    items, _ = normalize_rows(model.I)
    p, _ = normalize_rows(model.Pi[prototype])
    sims = 1.0 + np.clip(items @ p, -1.0, 1.0)
    keep = np.ones(len(sims), dtype=bool)
    if exclude is not None:
        keep[list(exclude)] = False
    idx = np.flatnonzero(keep)
    order = idx[np.argsort(-sims[idx], kind="stable")][:m]
    return [(int(i), float(sims[i])) for i in order]


@dataclass
class Exemplar:
    item: int
    similarity: float
    label: str
    country: str | None
    same_country: bool


@dataclass
class PrototypeEntry:
    prototype: int
    similarity: float
    exemplars: list[Exemplar] = field(default_factory=list)


@dataclass
class Explanation:
    item: int
    label: str
    country: str | None
    prototypes: list[PrototypeEntry]

    def same_country_fraction(self) -> float:
        ex = [e for p in self.prototypes for e in p.exemplars]
        return sum(e.same_country for e in ex) / len(ex) if ex else 0.0


def explain_item(model: PrototypeModel, item: int, n_protos: int = 5, m_exemplars: int = 1,
                 labels: Sequence[str] | Mapping[int, str] | None = None,
                 item_country: Mapping[int, str] | None = None) -> Explanation:
    """Closest prototypes of ``item`` and, for each, its closest other items.

    ``labels`` maps item index to a display name; missing names fall back to
    the index. Exemplars from the target's country are flagged.
    """
    item_country = item_country or {}

    def label(i):
        if labels is None:
            return str(i)
        try:
            return str(labels[i])
        except (KeyError, IndexError):
            log.warning("no label for item %d", i)
            return str(i)

    target_country = item_country.get(item)
    entries = []
    for proto, sim in nearest_prototypes(model, item, n_protos):
        ex = []
        for i, s in prototype_exemplars(model, proto, m_exemplars, exclude=[item]):
            c = item_country.get(i)
            ex.append(Exemplar(i, s, label(i), c, c is not None and c == target_country))
        entries.append(PrototypeEntry(proto, sim, ex))
    return Explanation(item, label(item), target_country, entries)


def _cell(e: Exemplar) -> str:
    name = f"**{e.label}**" if e.same_country else e.label
    return f"{name} ({e.similarity:.2f}) ({e.country or '?'})"


def format_explanations(rows: Sequence[tuple[str, Explanation]]) -> str:
    """Markdown table: one row per (model, product) and one column per
    prototype; exemplars from the product's country are bolded."""
    n = max(len(ex.prototypes) for _, ex in rows)
    lines = ["| Product | Model | " + " | ".join(f"Proto. {j + 1}" for j in range(n)) + " |",
             "|" + "---|" * (n + 2)]
    for model_name, ex in rows:
        product = f"{ex.label} ({ex.country or '?'})"
        cells = ["<br>".join(_cell(e) for e in p.exemplars) for p in ex.prototypes]
        cells += [""] * (n - len(cells))
        lines.append(f"| {product} | {model_name} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def prototype_dispersion(prototypes: np.ndarray) -> float:
    """Mean absolute cosine over distinct prototype pairs (0 = orthogonal)."""
    pu, _ = normalize_rows(prototypes)
    gram = pu @ pu.T
    L = len(gram)
    if L < 2:
        return 0.0
    off = np.abs(gram[~np.eye(L, dtype=bool)])
    return float(off.mean())


def pca_2d(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Project rows onto their top two principal components.

    Returns ``(coords, components, variances)``: components are unit rows
    whose largest-magnitude loading is positive, and ``variances`` are all
    eigenvalues of the (1/n) covariance in decreasing order.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] < 2:
        raise ValueError("PCA projection needs at least 2 dimensions")
    centered = x - x.mean(axis=0)
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    comps = vt[:2].copy()
    for c in comps:
        if c[np.argmax(np.abs(c))] < 0:
            c *= -1
    variances = np.zeros(x.shape[1])
    variances[:len(sv)] = sv ** 2 / len(x)
    return centered @ comps.T, comps, variances


def export_embedding_projection(model, which: str, groups: GroupAssignment | None, out_path) -> np.ndarray:
    """Write ``id,kind,country,x,y`` rows for items and/or item prototypes.

    Items and prototypes share one PCA basis when both are exported.
    Returns the projected coordinates in file order.
    """
    if which not in ("items", "prototypes", "both"):
        raise ValueError(f"which must be items, prototypes or both, got {which!r}")
    if model.dim < 2:
        raise ValueError("embedding dimension must be >= 2 to project to 2-D")
    blocks = []
    if which in ("items", "both"):
        blocks.append(("item", model.I))
    if which in ("prototypes", "both"):
        if not isinstance(model, PrototypeModel):
            raise ValueError("model has no prototypes")
        blocks.append(("prototype", model.Pi))
    coords, _, _ = pca_2d(np.vstack([b for _, b in blocks]))
    country = groups.item_country if groups is not None else {}
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        fh.write(textio.header("projection") + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "kind", "country", "x", "y"])
        row = 0
        for kind, block in blocks:
            for j in range(len(block)):
                c = country.get(j, "") if kind == "item" else ""
                w.writerow([j, kind, c, repr(float(coords[row, 0])), repr(float(coords[row, 1]))])
                row += 1
    return coords
