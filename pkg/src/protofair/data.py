"""Loading, filtering, grouping and splitting implicit-feedback datasets.

Input files are delimiter-separated text with a header row. Lines starting
with ``#`` are skipped, so artifacts written by this package (which carry a
format-version line) can be read back with the same loaders.
"""

from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import textio
from .errors import DataError

log = logging.getLogger(__name__)

N_TEST_NEGATIVES = 99
LONG_TAIL_FRACTION = 0.10

TABLE_FORMAT = "# protofair-table v1"
SPLIT_FORMAT = "# protofair-split v1"


@dataclass(frozen=True)
class RawInteraction:
    user_key: str
    item_key: str
    weight: float = 1.0
    timestamp: int | None = None

    def __post_init__(self):
        if not self.user_key or not self.item_key:
            raise DataError("user and item keys must be nonempty")
        if not self.weight >= 1:
            raise DataError(f"interaction weight must be >= 1, got {self.weight}")


@dataclass
class InteractionTable:
    """Deduplicated (user, item) pairs over dense integer ids.

    Pairs are stored sorted by user then item, so ``indptr`` gives each
    user's slice of ``items`` (a CSR adjacency).
    """

    n_users: int
    n_items: int
    users: np.ndarray
    items: np.ndarray
    timestamps: np.ndarray | None = None
    user_keys: list[str] | None = None
    item_keys: list[str] | None = None
    require_dense: bool = True
    indptr: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        users = np.asarray(self.users, dtype=np.int64)
        items = np.asarray(self.items, dtype=np.int64)
        if users.shape != items.shape or users.ndim != 1:
            raise DataError("users and items must be 1-D arrays of equal length")
        if self.n_users < 1 or self.n_items < 1:
            raise DataError("table needs at least one user and one item")
        if len(users) and (users.min() < 0 or users.max() >= self.n_users):
            raise DataError("user index out of range")
        if len(items) and (items.min() < 0 or items.max() >= self.n_items):
            raise DataError("item index out of range")
        order = np.lexsort((items, users))
        users, items = users[order], items[order]
        keys = users * self.n_items + items
        if len(keys) > 1 and np.any(keys[1:] == keys[:-1]):
            raise DataError("duplicate (user, item) pairs")
        self.users, self.items = users, items
        if self.timestamps is not None:
            self.timestamps = np.asarray(self.timestamps, dtype=np.int64)[order]
        self.indptr = np.zeros(self.n_users + 1, dtype=np.int64)
        np.cumsum(np.bincount(users, minlength=self.n_users), out=self.indptr[1:])
        if self.require_dense:
            if np.any(self.user_counts() == 0):
                raise DataError("every user needs at least one interaction")
            if np.any(self.item_counts() == 0):
                raise DataError("every item needs at least one interaction")

    def __len__(self) -> int:
        return len(self.users)

    def items_of(self, user: int) -> np.ndarray:
        return self.items[self.indptr[user]:self.indptr[user + 1]]

    def user_counts(self) -> np.ndarray:
        return np.diff(self.indptr)

    def item_counts(self) -> np.ndarray:
        return np.bincount(self.items, minlength=self.n_items)

    def pair_keys(self) -> np.ndarray:
        """Sorted ``user * n_items + item`` codes, for fast membership tests."""
        if getattr(self, "_keys", None) is None:
            self._keys = self.users * self.n_items + self.items
        return self._keys

    def contains(self, users, items) -> np.ndarray:
        keys = self.pair_keys()
        q = np.asarray(users, dtype=np.int64) * self.n_items + np.asarray(items, dtype=np.int64)
        if len(keys) == 0:
            return np.zeros(q.shape, dtype=bool)
        pos = np.searchsorted(keys, q)
        pos = np.minimum(pos, len(keys) - 1)
        return keys[pos] == q

    def to_raw(self) -> list[RawInteraction]:
        ukeys = self.user_keys or [str(u) for u in range(self.n_users)]
        ikeys = self.item_keys or [str(i) for i in range(self.n_items)]
        ts = self.timestamps
        return [
            RawInteraction(ukeys[u], ikeys[i], 1.0, None if ts is None else int(ts[n]))
            for n, (u, i) in enumerate(zip(self.users.tolist(), self.items.tolist()))
        ]


@dataclass
class GroupAssignment:
    item_country: dict[int, str] = field(default_factory=dict)
    overrepresented: frozenset[str] = frozenset()
    underrepresented: frozenset[str] = frozenset()
    long_tail_items: frozenset[int] = frozenset()

    def __post_init__(self):
        self.overrepresented = frozenset(self.overrepresented)
        self.underrepresented = frozenset(self.underrepresented)
        self.long_tail_items = frozenset(int(i) for i in self.long_tail_items)
        clash = self.overrepresented & self.underrepresented
        if clash:
            raise DataError(f"countries in both groups: {sorted(clash)}")

    def country_mask(self, countries: Iterable[str], n_items: int) -> np.ndarray:
        countries = set(countries)
        mask = np.zeros(n_items, dtype=bool)
        for item, c in self.item_country.items():
            if c in countries:
                mask[item] = True
        return mask

    def under_mask(self, n_items: int) -> np.ndarray:
        return self.country_mask(self.underrepresented, n_items)

    def over_mask(self, n_items: int) -> np.ndarray:
        return self.country_mask(self.overrepresented, n_items)

    def long_tail_mask(self, n_items: int) -> np.ndarray:
        mask = np.zeros(n_items, dtype=bool)
        mask[list(self.long_tail_items)] = True
        return mask


@dataclass
class SplitDataset:
    """Leave-one-out split: ``test_positives[u]`` is user u's held-out item
    and ``test_negatives[u]`` its sampled non-interacted candidates."""

    train: InteractionTable
    test_positives: np.ndarray
    test_negatives: np.ndarray

    def __post_init__(self):
        self.test_positives = np.asarray(self.test_positives, dtype=np.int64)
        self.test_negatives = np.asarray(self.test_negatives, dtype=np.int64)
        n = self.train.n_users
        if self.test_positives.shape != (n,) or self.test_negatives.ndim != 2 \
                or len(self.test_negatives) != n:
            raise DataError("split arrays must have one row per user")

    @property
    def n_users(self) -> int:
        return self.train.n_users

    @property
    def n_items(self) -> int:
        return self.train.n_items

    def full_history(self, user: int) -> np.ndarray:
        return np.union1d(self.train.items_of(user), [self.test_positives[user]])


# ---------------------------------------------------------------------------
# file loading

def _content_lines(path: Path):
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.startswith("#") or not line.strip():
                continue
            yield lineno, line.rstrip("\r\n")


def _sniff_delimiter(header: str) -> str:
    return "\t" if "\t" in header else ","


def _open_table(path, delimiter: str | None):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    lines = _content_lines(path)
    first = next(lines, None)
    if first is None:
        return None, None, iter(())
    delim = delimiter or _sniff_delimiter(first[1])
    header = [h.strip().lower() for h in next(csv.reader([first[1]], delimiter=delim))]
    rows = ((n, next(csv.reader([text], delimiter=delim))) for n, text in lines)
    return header, delim, rows


def load_interactions(path, delimiter: str | None = None,
                      max_bad_rows: int = 100) -> list[RawInteraction]:
    """Parse an interactions file with header ``user,item[,weight][,timestamp]``.

    Malformed rows are skipped and logged with their line numbers; more than
    ``max_bad_rows`` of them aborts with :class:`DataError`. Duplicates are
    kept as-is.
    """
    header, _, rows = _open_table(path, delimiter)
    if header is None:
        return []
    if "user" not in header or "item" not in header:
        raise DataError(f"{path}: header must name 'user' and 'item' columns, got {header}")
    cu, ci = header.index("user"), header.index("item")
    cw = header.index("weight") if "weight" in header else None
    ct = header.index("timestamp") if "timestamp" in header else None
    need = max(c for c in (cu, ci, cw, ct) if c is not None) + 1

    out, bad = [], []
    for lineno, row in rows:
        try:
            if len(row) < need:
                raise ValueError(f"expected {need} columns, got {len(row)}")
            weight = float(row[cw]) if cw is not None else 1.0
            ts = int(float(row[ct])) if ct is not None and row[ct].strip() else None
            out.append(RawInteraction(row[cu].strip(), row[ci].strip(), weight, ts))
        except (ValueError, DataError) as exc:
            bad.append(lineno)
            log.warning("%s:%d: skipping malformed row (%s)", path, lineno, exc)
            if len(bad) > max_bad_rows:
                raise DataError(f"{path}: more than {max_bad_rows} malformed rows "
                                f"(lines {bad[:10]}...)") from exc
    return out


def load_item_metadata(path, delimiter: str | None = None) -> dict[str, str]:
    """Read ``item,country`` rows; country codes are uppercased, last row wins."""
    header, _, rows = _open_table(path, delimiter)
    if header is None:
        return {}
    if "item" not in header or "country" not in header:
        raise DataError(f"{path}: header must be item,country")
    ci, cc = header.index("item"), header.index("country")
    meta = {}
    for lineno, row in rows:
        if len(row) <= max(ci, cc) or not row[ci].strip() or not row[cc].strip():
            log.warning("%s:%d: skipping malformed metadata row", path, lineno)
            continue
        meta[row[ci].strip()] = row[cc].strip().upper()
    return meta


def load_labels(path, delimiter: str | None = None) -> dict[str, str]:
    header, _, rows = _open_table(path, delimiter)
    if header is None:
        return {}
    if "item" not in header or "label" not in header:
        raise DataError(f"{path}: header must be item,label")
    ci, cl = header.index("item"), header.index("label")
    return {row[ci].strip(): row[cl].strip() for _, row in rows if len(row) > max(ci, cl)}


# ---------------------------------------------------------------------------
# filtering and grouping

def build_table(raw: Sequence[RawInteraction], min_user: int = 1, min_item: int = 1,
                metadata: Mapping[str, str] | None = None,
                require_country: bool = False) -> tuple[InteractionTable, GroupAssignment]:
    """Deduplicate, filter to a fixed point, and reindex densely.

    Users with fewer than ``min_user`` interactions and items with fewer than
    ``min_item`` are removed repeatedly until neither rule removes anything.
    With ``require_country`` items missing from ``metadata`` go first.
    Dense ids follow first appearance in ``raw``.

    Returns the table and a partial :class:`GroupAssignment` holding only the
    per-item countries.
    """
    if not raw:
        raise DataError("no interactions to build a table from")
    if min_user < 1 or min_item < 1:
        raise DataError("min_user and min_item must be positive")
    metadata = metadata or {}

    latest: dict[tuple[str, str], int | None] = {}
    for r in raw:
        key = (r.user_key, r.item_key)
        prev = latest.get(key, None)
        if key not in latest or (r.timestamp is not None and (prev is None or r.timestamp > prev)):
            latest[key] = r.timestamp
    pairs = list(latest)

    if require_country:
        pairs = [p for p in pairs if p[1] in metadata]

    while True:
        ucount = Counter(u for u, _ in pairs)
        icount = Counter(i for _, i in pairs)
        kept = [(u, i) for u, i in pairs if ucount[u] >= min_user and icount[i] >= min_item]
        if len(kept) == len(pairs):
            break
        pairs = kept
    if not pairs:
        raise DataError("no interactions left after filtering")

    uid: dict[str, int] = {}
    iid: dict[str, int] = {}
    for u, i in pairs:
        uid.setdefault(u, len(uid))
        iid.setdefault(i, len(iid))
    has_ts = all(latest[p] is not None for p in pairs)
    table = InteractionTable(
        n_users=len(uid), n_items=len(iid),
        users=np.array([uid[u] for u, _ in pairs]),
        items=np.array([iid[i] for _, i in pairs]),
        timestamps=np.array([latest[p] for p in pairs]) if has_ts else None,
        user_keys=list(uid), item_keys=list(iid),
    )
    countries = {iid[k]: metadata[k] for k in iid if k in metadata}
    log.info("built table: %d users, %d items, %d interactions", table.n_users,
             table.n_items, len(table))
    return table, GroupAssignment(item_country=countries)


def country_ranking(table: InteractionTable, item_country: Mapping[int, str]) -> list[tuple[str, int]]:
    """Countries with their interaction totals, largest first (ties by code)."""
    totals: Counter[str] = Counter()
    counts = table.item_counts()
    for item in range(table.n_items):
        totals[item_country[item]] += int(counts[item])
    return sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))


def long_tail(table: InteractionTable, fraction: float = LONG_TAIL_FRACTION) -> frozenset[int]:
    # ranking by raw count equals ranking by log count; ties go to the lower index
    n = int(np.floor(fraction * table.n_items))
    order = np.lexsort((np.arange(table.n_items), table.item_counts()))
    return frozenset(order[:n].tolist())


def assign_groups(table: InteractionTable, item_country: Mapping[int, str],
                  overrepresented: Iterable[str] | None = None,
                  underrepresented: Iterable[str] | None = None) -> GroupAssignment:
    """Split countries into over/under-represented groups and mark the long tail.

    Countries are ranked by total interactions, largest first. Positions in
    the top 10% of that ranking are overrepresented; positions in the
    [25%, 50%) band are underrepresented. Explicit group lists, when both are
    given, bypass the quantile rule.
    """
    missing = [i for i in range(table.n_items) if i not in item_country]
    if missing:
        raise DataError(f"{len(missing)} items have no country (first: {missing[:5]})")
    item_country = {int(i): item_country[i] for i in range(table.n_items)}

    if overrepresented is not None and underrepresented is not None:
        over, under = frozenset(overrepresented), frozenset(underrepresented)
    else:
        ranking = country_ranking(table, item_country)
        n = len(ranking)
        if n < 4:
            raise DataError(f"only {n} distinct countries; quantile groups need at least 4. "
                            "Configure explicit overrepresented/underrepresented lists instead.")
        # integer arithmetic keeps band edges exact
        over = frozenset(c for r, (c, _) in enumerate(ranking) if 10 * r < n)
        under = frozenset(c for r, (c, _) in enumerate(ranking) if 4 * r >= n and 2 * r < n)

    return GroupAssignment(item_country=item_country, overrepresented=over,
                           underrepresented=under, long_tail_items=long_tail(table))


# ---------------------------------------------------------------------------
# splitting

def split_leave_one_out(table: InteractionTable, seed: int | np.random.Generator,
                        n_negatives: int = N_TEST_NEGATIVES) -> SplitDataset:
    """Hold out one interaction per user and sample ``n_negatives`` negatives.

    The held-out item is the user's latest interaction when the table has
    timestamps (ties to the lower item index), otherwise a seeded uniform
    pick. Negatives are drawn without replacement from items the user never
    interacted with.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    counts = table.user_counts()
    short = np.flatnonzero(counts < 2)
    if len(short):
        raise DataError(f"{len(short)} users have fewer than 2 interactions (first: {short[0]})")
    thin = np.flatnonzero(table.n_items - counts < n_negatives)
    if len(thin):
        raise DataError(f"user {thin[0]} has only {table.n_items - counts[thin[0]]} "
                        f"non-interacted items, need {n_negatives} negatives")

    all_items = np.arange(table.n_items)
    positives = np.empty(table.n_users, dtype=np.int64)
    negatives = np.empty((table.n_users, n_negatives), dtype=np.int64)
    held = np.empty(table.n_users, dtype=np.int64)
    for u in range(table.n_users):
        lo, hi = table.indptr[u], table.indptr[u + 1]
        if table.timestamps is not None:
            ts = table.timestamps[lo:hi]
            pick = int(np.flatnonzero(ts == ts.max())[0])
        else:
            pick = int(rng.integers(hi - lo))
        held[u] = lo + pick
        positives[u] = table.items[lo + pick]
        pool = np.setdiff1d(all_items, table.items[lo:hi], assume_unique=True)
        negatives[u] = rng.choice(pool, size=n_negatives, replace=False)

    keep = np.ones(len(table), dtype=bool)
    keep[held] = False
    train = InteractionTable(
        n_users=table.n_users, n_items=table.n_items,
        users=table.users[keep], items=table.items[keep],
        timestamps=None if table.timestamps is None else table.timestamps[keep],
        user_keys=table.user_keys, item_keys=table.item_keys,
        require_dense=False,
    )
    return SplitDataset(train=train, test_positives=positives, test_negatives=negatives)


# ---------------------------------------------------------------------------
# synthetic data

@dataclass
class CountrySpec:
    code: str
    item_share: float
    multiplier: float


@dataclass
class SynthSpec:
    """Parameters of a synthetic popularity-skewed dataset.

    ``draws_per_user`` is either a fixed count or an inclusive ``[lo, hi]``
    range sampled uniformly per user. With ``taste_clusters > 0`` users and
    items get random cluster labels and same-cluster items are
    ``taste_boost`` times more likely to be drawn, giving the data
    collaborative structure beyond popularity.
    """

    n_users: int
    n_items: int
    draws_per_user: int | tuple[int, int]
    gamma: float
    countries: list[CountrySpec]
    taste_clusters: int = 0
    taste_boost: float = 1.0

    def __post_init__(self):
        self.countries = [c if isinstance(c, CountrySpec) else CountrySpec(**c)
                          for c in self.countries]
        if isinstance(self.draws_per_user, (list, tuple)):
            self.draws_per_user = tuple(int(x) for x in self.draws_per_user)

    @classmethod
    def from_dict(cls, d: Mapping) -> "SynthSpec":
        return cls(**d)

    def to_dict(self) -> dict:
        draws = self.draws_per_user
        return {
            "n_users": self.n_users, "n_items": self.n_items,
            "draws_per_user": list(draws) if isinstance(draws, tuple) else draws,
            "gamma": self.gamma,
            "countries": [vars(c).copy() for c in self.countries],
            "taste_clusters": self.taste_clusters, "taste_boost": self.taste_boost,
        }


def _apportion(shares: np.ndarray, total: int) -> np.ndarray:
    # largest-remainder rounding so counts sum to total exactly
    raw = shares / shares.sum() * total
    counts = np.floor(raw).astype(np.int64)
    rest = total - counts.sum()
    order = np.lexsort((np.arange(len(raw)), -(raw - counts)))
    counts[order[:rest]] += 1
    return counts


def generate_synthetic(spec: SynthSpec, seed: int | np.random.Generator
                       ) -> tuple[InteractionTable, GroupAssignment]:
    """Sample a dataset whose item popularity follows a country-scaled power law.

    Item ``j`` has weight ``(j + 1) ** -gamma`` times its country's
    multiplier. Each user draws items without replacement proportionally to
    those weights. Items that nobody drew get one interaction from a random
    user so the table stays dense.

    Groups use the quantile rule when there are at least 4 countries;
    otherwise the highest-multiplier countries are overrepresented and the
    lowest-multiplier ones underrepresented.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n, m = spec.n_users, spec.n_items
    if n < 1 or m < 1:
        raise DataError("n_users and n_items must be positive")
    if spec.gamma < 0:
        raise DataError("gamma must be nonnegative")
    if not spec.countries:
        raise DataError("at least one country is required")
    draws = spec.draws_per_user
    lo, hi = draws if isinstance(draws, tuple) else (draws, draws)
    if lo < 1 or hi < lo:
        raise DataError(f"bad draws_per_user {draws}")
    if hi > m:
        raise DataError(f"infeasible: {hi} draws per user without replacement from {m} items")
    shares = np.array([c.item_share for c in spec.countries], dtype=float)
    mult = np.array([c.multiplier for c in spec.countries], dtype=float)
    if np.any(shares < 0) or shares.sum() <= 0 or np.any(mult <= 0):
        raise DataError("country shares must be >= 0 (not all 0) and multipliers > 0")
    if spec.taste_clusters < 0 or spec.taste_boost <= 0:
        raise DataError("taste_clusters must be >= 0 and taste_boost > 0")

    labels = np.repeat(np.arange(len(spec.countries)), _apportion(shares, m))
    labels = rng.permutation(labels)
    weights = (np.arange(1, m + 1, dtype=float) ** -spec.gamma) * mult[labels]

    k = rng.integers(lo, hi + 1, size=n) if hi > lo else np.full(n, lo)
    logw = np.broadcast_to(np.log(weights), (n, m))
    if spec.taste_clusters > 0:
        item_cluster = rng.integers(spec.taste_clusters, size=m)
        user_cluster = rng.integers(spec.taste_clusters, size=n)
        logw = logw + np.log(spec.taste_boost) * (user_cluster[:, None] == item_cluster[None, :])
    # Gumbel top-k is exact sequential sampling without replacement
    keys = logw + rng.gumbel(size=(n, m))
    order = np.argsort(-keys, axis=1, kind="stable")
    users = np.repeat(np.arange(n), k)
    items = np.concatenate([order[u, :k[u]] for u in range(n)])

    unseen = np.setdiff1d(np.arange(m), items)
    if len(unseen):
        taken = set(zip(users.tolist(), items.tolist()))
        extra_u = []
        for item in unseen.tolist():
            while True:
                u = int(rng.integers(n))
                if (u, item) not in taken:
                    break
            taken.add((u, item))
            extra_u.append(u)
        users = np.concatenate([users, extra_u])
        items = np.concatenate([items, unseen])

    table = InteractionTable(n_users=n, n_items=m, users=users, items=items,
                             user_keys=[f"u{u}" for u in range(n)],
                             item_keys=[f"i{i}" for i in range(m)])
    item_country = {i: spec.countries[labels[i]].code for i in range(m)}
    codes = {c.code for c in spec.countries}
    if len(codes) >= 4:
        groups = assign_groups(table, item_country)
    else:
        top, bottom = mult.max(), mult.min()
        over = {c.code for c in spec.countries if c.multiplier == top}
        under = {c.code for c in spec.countries if c.multiplier == bottom} - over
        groups = assign_groups(table, item_country, over, under)
    return table, groups


# ---------------------------------------------------------------------------
# prepared-artifact files

def save_table(table: InteractionTable, path, item_country: Mapping[int, str] | None = None) -> None:
    item_country = item_country or {}
    ukeys = table.user_keys or [str(u) for u in range(table.n_users)]
    ikeys = table.item_keys or [str(i) for i in range(table.n_items)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(TABLE_FORMAT + "\n")
        w = csv.writer(fh, lineterminator="\n")
        cols = ["user", "item", "user_key", "item_key", "country"]
        if table.timestamps is not None:
            cols.append("timestamp")
        w.writerow(cols)
        for n, (u, i) in enumerate(zip(table.users.tolist(), table.items.tolist())):
            row = [u, i, ukeys[u], ikeys[i], item_country.get(i, "")]
            if table.timestamps is not None:
                row.append(int(table.timestamps[n]))
            w.writerow(row)


def load_table(path, require_dense: bool = True) -> tuple[InteractionTable, dict[int, str]]:
    header, _, rows = _open_table(path, ",")
    if header is None:
        raise DataError(f"{path}: empty table file")
    users, items, ts, ukeys, ikeys, country = [], [], [], {}, {}, {}
    has_ts = "timestamp" in header
    for _, row in rows:
        rec = dict(zip(header, row))
        u, i = int(rec["user"]), int(rec["item"])
        users.append(u)
        items.append(i)
        ukeys[u], ikeys[i] = rec["user_key"], rec["item_key"]
        if rec.get("country"):
            country[i] = rec["country"]
        if has_ts:
            ts.append(int(rec["timestamp"]))
    n, m = max(ukeys) + 1, max(ikeys) + 1
    table = InteractionTable(
        n_users=n, n_items=m, users=np.array(users), items=np.array(items),
        timestamps=np.array(ts) if has_ts else None,
        user_keys=[ukeys.get(u, str(u)) for u in range(n)],
        item_keys=[ikeys.get(i, str(i)) for i in range(m)],
        require_dense=require_dense,
    )
    return table, country


def save_groups(groups: GroupAssignment, path) -> None:
    textio.dump_json(path, "groups", {
        "overrepresented": sorted(groups.overrepresented),
        "underrepresented": sorted(groups.underrepresented),
        "long_tail_items": sorted(groups.long_tail_items),
        "item_country": {str(k): v for k, v in sorted(groups.item_country.items())},
    })


def load_groups(path) -> GroupAssignment:
    doc = textio.load_json(path, "groups")
    return GroupAssignment(
        item_country={int(k): v for k, v in doc["item_country"].items()},
        overrepresented=doc["overrepresented"],
        underrepresented=doc["underrepresented"],
        long_tail_items=doc["long_tail_items"],
    )


def save_split(split: SplitDataset, path) -> None:
    """Write the held-out positives and negatives; the train table goes to
    its own file via :func:`save_table`."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(SPLIT_FORMAT + "\n")
        fh.write("user,positive,negatives\n")
        for u in range(split.n_users):
            negs = " ".join(map(str, split.test_negatives[u].tolist()))
            fh.write(f"{u},{split.test_positives[u]},{negs}\n")


def load_split(path, train: InteractionTable) -> SplitDataset:
    header, _, rows = _open_table(path, ",")
    if header != ["user", "positive", "negatives"]:
        raise DataError(f"{path}: not a split file")
    pos, neg = {}, {}
    for _, row in rows:
        u = int(row[0])
        pos[u] = int(row[1])
        neg[u] = [int(x) for x in row[2].split()]
    if sorted(pos) != list(range(train.n_users)):
        raise DataError(f"{path}: split users do not match the train table")
    return SplitDataset(train=train,
                        test_positives=np.array([pos[u] for u in range(train.n_users)]),
                        test_negatives=np.array([neg[u] for u in range(train.n_users)]))
