"""Leave-one-out ranking metrics: HR@10, NDCG@10 and average group ranks.

Each user's held-out positive is ranked together with its sampled negatives
(1 + 99 candidates by default). Group metrics average the rank position of
every candidate belonging to the group, pooled over all users.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import textio
from .data import GroupAssignment, SplitDataset
from .errors import DataError

CUTOFF = 10
TABLE_COLUMNS = ("hr_at_10", "ndcg_at_10", "mu_under", "mu_over", "mu_long_tail")


@dataclass
class RankedList:
    user: int
    candidates: np.ndarray
    positive_rank: int


def order_candidates(candidates: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Sort along the last axis by descending score, ties to the lower item id."""
    idx = np.lexsort((candidates, -scores), axis=-1)
    return np.take_along_axis(candidates, idx, axis=-1)


def rank_candidates(model, user: int, positive: int, negatives, use_filtering: bool = True) -> RankedList:
    cands = np.concatenate([[positive], np.asarray(negatives, dtype=np.int64)]).astype(np.int64)
    if len(np.unique(cands)) != len(cands):
        raise DataError(f"user {user}: duplicate candidates")
    scores = model.score(user, cands, use_filtering)
    ordered = order_candidates(cands, scores)
    return RankedList(user, ordered, int(np.flatnonzero(ordered == positive)[0]) + 1)


def rank_all(model, split: SplitDataset, use_filtering: bool = True, threads: int = 1,
             chunk: int = 512) -> list[RankedList]:
    """Rank every user's candidate list. Chunks may run on ``threads``
    workers; results keep user order."""
    n = split.n_users
    cands = np.concatenate([split.test_positives[:, None], split.test_negatives], axis=1)
    srt = np.sort(cands, axis=1)
    if np.any(srt[:, 1:] == srt[:, :-1]):
        raise DataError("duplicate candidates in a user's evaluation list")
    if cands.max() >= model.n_items or n != model.n_users:
        raise DataError(f"model ({model.n_users} users, {model.n_items} items) does not match "
                        f"split ({n} users, {split.n_items} items)")

    def run(start):
        users = np.arange(start, min(start + chunk, n))
        c = cands[users]
        return order_candidates(c, model.score(users[:, None], c, use_filtering))

    starts = range(0, n, chunk)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    ordered = np.concatenate(parts)
    ranks = np.argmax(ordered == split.test_positives[:, None], axis=1) + 1
    return [RankedList(u, ordered[u], int(ranks[u])) for u in range(n)]


def utility_metrics(lists: Sequence[RankedList], cutoff: int = CUTOFF) -> tuple[float, float]:
    """HR@cutoff and NDCG@cutoff with one relevant item per user."""
    if not lists:
        raise ValueError("no ranked lists")
    ranks = np.array([rl.positive_rank for rl in lists], dtype=float)
    hit = ranks <= cutoff
    gains = np.where(hit, 1.0 / np.log2(ranks + 1.0), 0.0)
    # exactly rounded sums keep the means independent of summation order
    return math.fsum(hit) / len(ranks), math.fsum(gains) / len(ranks)


def _occurrence_mean(lists: Sequence[RankedList], member: np.ndarray) -> tuple[float | None, int]:
    total, count = 0, 0
    for rl in lists:
        hit = member[rl.candidates]
        if hit.any():
            total += int(np.sum(np.flatnonzero(hit) + 1))
            count += int(hit.sum())
    return (total / count if count else None), count


def group_rank_metrics(lists: Sequence[RankedList], groups: GroupAssignment, n_items: int | None = None
                       ) -> tuple[float | None, float | None]:
    """Mean rank position of under- and overrepresented candidates.

    A group that never appears among the candidates yields ``None``.
    """
    n_items = n_items or 1 + max(int(rl.candidates.max()) for rl in lists)
    mu_under, _ = _occurrence_mean(lists, groups.under_mask(n_items))
    mu_over, _ = _occurrence_mean(lists, groups.over_mask(n_items))
    return mu_under, mu_over


def long_tail_metric(lists: Sequence[RankedList], groups: GroupAssignment,
                     n_items: int | None = None) -> float | None:
    n_items = n_items or 1 + max(int(rl.candidates.max()) for rl in lists)
    return _occurrence_mean(lists, groups.long_tail_mask(n_items))[0]


@dataclass
class EvalReport:
    hr_at_10: float
    ndcg_at_10: float
    mu_under: float | None
    mu_over: float | None
    mu_long_tail: float | None
    n_users: int
    n_candidates: int
    counts: dict[str, int] = field(default_factory=dict)
    per_user: list[dict] = field(default_factory=list)
    config_hash: str = ""

    def row(self) -> list:
        return [getattr(self, c) for c in TABLE_COLUMNS]

    def to_dict(self, detail: bool = True) -> dict:
        d = asdict(self)
        if not detail:
            d.pop("per_user")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(**{**d, "per_user": d.get("per_user", [])})


def evaluate(model, split: SplitDataset, groups: GroupAssignment, config=None,
             use_filtering: bool = True, threads: int = 1) -> EvalReport:
    """Rank all test users and aggregate every metric into an :class:`EvalReport`."""
    lists = rank_all(model, split, use_filtering, threads)
    n_items = split.n_items
    hr, ndcg = utility_metrics(lists)
    masks = {"under": groups.under_mask(n_items), "over": groups.over_mask(n_items),
             "long_tail": groups.long_tail_mask(n_items)}
    mus, counts = {}, {}
    for name, mask in masks.items():
        mus[name], counts[name] = _occurrence_mean(lists, mask)
    per_user = [{"user": rl.user, "positive_rank": rl.positive_rank,
                 "n_under_cands": int(masks["under"][rl.candidates].sum()),
                 "n_over_cands": int(masks["over"][rl.candidates].sum()),
                 "n_lt_cands": int(masks["long_tail"][rl.candidates].sum())} for rl in lists]
    digest = ""
    if config is not None:
        digest = config.digest() if hasattr(config, "digest") else str(config)
    return EvalReport(hr, ndcg, mus["under"], mus["over"], mus["long_tail"],
                      n_users=len(lists), n_candidates=len(lists[0].candidates),
                      counts=counts, per_user=per_user, config_hash=digest)


def write_report(report: EvalReport, path, detail: bool = False) -> None:
    textio.dump_json(path, "report", report.to_dict(detail))


def read_report(path) -> EvalReport:
    return EvalReport.from_dict(textio.load_json(path, "report"))


def write_comparison(rows: Sequence[tuple[str, EvalReport]], path) -> None:
    """Cross-variant table, metric columns in the order HR, NDCG, under, over, LT."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(textio.header("comparison") + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("variant",) + TABLE_COLUMNS)
        for name, rep in rows:
            w.writerow([name] + ["" if v is None else f"{v:.6f}" for v in rep.row()])


def format_comparison(rows: Sequence[tuple[str, EvalReport]]) -> str:
    head = f"{'variant':<24}" + "".join(f"{c:>14}" for c in TABLE_COLUMNS)
    lines = [head]
    for name, rep in rows:
        cells = "".join(f"{'-':>14}" if v is None else f"{v:>14.4f}" for v in rep.row())
        lines.append(f"{name:<24}{cells}")
    return "\n".join(lines)
