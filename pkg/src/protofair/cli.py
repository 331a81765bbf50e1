"""Config-driven pipeline: ``prepare``/``synth`` -> ``train`` -> ``evaluate`` -> ``explain``.

Every command reads one JSON config (``--config``), applies ``--set
section.key=value`` overrides, and writes the effective config next to its
outputs. Layout under ``out_dir``::

    data/     table.csv train.csv split.csv groups.json
    runs/<variant>/   model.ckpt loss_log.csv config.json (resolved train settings)
    eval/     <variant>.json comparison.csv
    explain/  <item>.md <variant>_projection.csv

Exit codes: 0 ok, 1 usage/config error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import textio
from .data import (
    GroupAssignment, SynthSpec, assign_groups, build_table, generate_synthetic, load_groups,
    load_interactions, load_item_metadata, load_labels, load_split, load_table, long_tail,
    save_groups, save_split, save_table, split_leave_one_out,
)
from .errors import ConfigError, DataError, NumericalError, ProtofairError
from .evaluation import evaluate, format_comparison, write_comparison, write_report
from .explain import explain_item, export_embedding_projection, format_explanations
from .model import PrototypeModel, load_checkpoint, save_checkpoint
from .rng import substream
from .training import TrainConfig, grid_configs, train, write_loss_log

log = logging.getLogger("protofair")

DEFAULTS = {
    "seed": 0,
    "out_dir": "protofair-out",
    "threads": 1,
    "data": {
        "interactions": None, "metadata": None, "labels": None, "delimiter": None,
        "min_user": 1, "min_item": 1, "require_country": False, "min_country_coverage": 0.0,
        "n_test_negatives": 99, "max_bad_rows": 100,
        "overrepresented": None, "underrepresented": None,
    },
    "synth": None,
    "train": {
        **{f.name: f.default for f in fields(TrainConfig)},
        "ablation": ["vanilla"],
        "grid": {},
        "variant_defaults": {"lambda_dist_u": 0.1, "lambda_dist_i": 0.1, "lambda_zerosum": 0.1},
    },
    "eval": {"detail": False},
    "explain": {"items": "auto-sample", "n_protos": 5, "m_exemplars": 1,
                "projection": "both", "variants": None},
}
# sections whose values are free-form
_OPAQUE = {("synth",), ("train", "grid"), ("train", "ablation")}

NAMED_VARIANTS = {
    "vanilla": lambda vd: {},
    "mf": lambda vd: {"model_kind": "mf"},
    "zerosum": lambda vd: {"lambda_zerosum": vd["lambda_zerosum"]},
    "user_k": lambda vd: {"enable_user_filtering": True},
    "item_k": lambda vd: {"enable_item_filtering": True},
    "user_lambda": lambda vd: {"lambda_dist_u": vd["lambda_dist_u"]},
    "item_lambda": lambda vd: {"lambda_dist_i": vd["lambda_dist_i"]},
    "item_k_lambda": lambda vd: {"enable_item_filtering": True,
                                 "lambda_dist_i": vd["lambda_dist_i"]},
    "user_item_k_lambda": lambda vd: {"enable_user_filtering": True, "enable_item_filtering": True,
                                      "lambda_dist_u": vd["lambda_dist_u"],
                                      "lambda_dist_i": vd["lambda_dist_i"]},
}


# ---------------------------------------------------------------------------
# config handling

def _merge(defaults, given, path=()):
    if path in _OPAQUE or not isinstance(defaults, dict):
        return copy.deepcopy(given)
    if not isinstance(given, dict):
        raise ConfigError(f"section {'.'.join(path) or '<root>'} must be a mapping")
    unknown = set(given) - set(defaults)
    if unknown:
        where = ".".join(path) or "top level"
        raise ConfigError(f"unknown config keys at {where}: {sorted(unknown)}")
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if defaults[k] is None or v is None:
            out[k] = copy.deepcopy(v)
        else:
            out[k] = _merge(defaults[k], v, path + (k,))
    return out


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(raw: dict, assignment: str) -> None:
    """Set a dotted key in a raw config; unknown keys surface when merging."""
    key, sep, value = assignment.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    parts = key.strip().split(".")
    node = raw
    for p in parts[:-1]:
        child = node.get(p)
        if child is None:
            child = node[p] = {}
        elif not isinstance(child, dict):
            raise ConfigError(f"--set: {key!r} descends into a non-section value")
        node = child
    node[parts[-1]] = _parse_value(value)


def load_config(path=None, overrides=(), seed=None, out_dir=None, threads=None) -> dict:
    """Effective run config: defaults <- file <- ``--set`` <- flags."""
    try:
        raw = textio.load_json(path) if path else {}
    except DataError as exc:
        raise ConfigError(f"config: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    for assignment in overrides:
        apply_override(raw, assignment)
    cfg = _merge(DEFAULTS, raw)
    if seed is not None:
        cfg["seed"] = seed
    if out_dir is not None:
        cfg["out_dir"] = str(out_dir)
    if threads is not None:
        cfg["threads"] = threads
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    train_base(cfg)
    names = [v if isinstance(v, str) else v.get("name") for v in cfg["train"]["ablation"]]
    if len(set(names)) != len(names) or None in names:
        raise ConfigError(f"ablation variant names must be unique and present: {names}")
    for v in cfg["train"]["ablation"]:
        if isinstance(v, str) and v not in NAMED_VARIANTS:
            raise ConfigError(f"unknown named variant {v!r}; known: {sorted(NAMED_VARIANTS)}")
    for key in cfg["train"]["grid"]:
        if key not in {f.name for f in fields(TrainConfig)}:
            raise ConfigError(f"grid key {key!r} is not a train setting")


def train_base(cfg: dict) -> TrainConfig:
    t = {k: v for k, v in cfg["train"].items() if k not in ("ablation", "grid", "variant_defaults")}
    t["seed"] = cfg["seed"]
    return TrainConfig.from_dict(t)


def variants(cfg: dict) -> list[tuple[str, TrainConfig]]:
    """Expand the ablation list (and grid) into named configs sharing one seed."""
    base = train_base(cfg)
    vd = cfg["train"]["variant_defaults"]
    out = []
    for entry in cfg["train"]["ablation"]:
        if isinstance(entry, str):
            name, over = entry, NAMED_VARIANTS[entry](vd)
        else:
            name, over = entry["name"], entry.get("overrides", {})
        try:
            vcfg = TrainConfig.from_dict({**base.to_dict(), **over})
        except TypeError as exc:
            raise ConfigError(f"variant {name}: {exc}") from exc
        grid = cfg["train"]["grid"]
        if grid:
            for gname, gcfg in grid_configs(vcfg, grid):
                out.append((f"{name}[{gname}]", gcfg))
        else:
            out.append((name, vcfg))
    return out


def _write_config(cfg: dict, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    textio.dump_json(directory / "config.json", "config", cfg)


# ---------------------------------------------------------------------------
# commands

def _data_dir(cfg) -> Path:
    return Path(cfg["out_dir"]) / "data"


def _write_dataset(cfg, table, groups, split) -> None:
    d = _data_dir(cfg)
    d.mkdir(parents=True, exist_ok=True)
    save_table(table, d / "table.csv", groups.item_country)
    save_table(split.train, d / "train.csv", groups.item_country)
    save_split(split, d / "split.csv")
    save_groups(groups, d / "groups.json")
    _write_config(cfg, d)


def _load_dataset(cfg):
    d = _data_dir(cfg)
    if not (d / "train.csv").is_file():
        raise DataError(f"no prepared dataset under {d}; run 'prepare' or 'synth' first")
    train_table, _ = load_table(d / "train.csv", require_dense=False)
    full, _ = load_table(d / "table.csv")
    split = load_split(d / "split.csv", _pad_table(train_table, full))
    return full, split, load_groups(d / "groups.json")


def _pad_table(train_table, full):
    # held-out items may leave the train file without the highest ids
    if (train_table.n_users, train_table.n_items) == (full.n_users, full.n_items):
        return train_table
    from .data import InteractionTable
    return InteractionTable(full.n_users, full.n_items, train_table.users, train_table.items,
                            train_table.timestamps, full.user_keys, full.item_keys,
                            require_dense=False)


def _summary(label, users, items, n) -> str:
    return f"{label:<8} users={users:<8} items={items:<8} interactions={n}"


def _pct(before, after) -> str:
    return f"(-{100 * (1 - after / before):.1f}%)" if before else ""


def cmd_prepare(cfg: dict) -> int:
    dc = cfg["data"]
    if not dc["interactions"]:
        raise ConfigError("data.interactions is required for prepare")
    raw = load_interactions(dc["interactions"], dc["delimiter"], dc["max_bad_rows"])
    if not raw:
        raise DataError(f"{dc['interactions']}: no interactions")
    meta = load_item_metadata(dc["metadata"], dc["delimiter"]) if dc["metadata"] else {}
    items_before = {r.item_key for r in raw}
    if dc["metadata"]:
        coverage = len(items_before & set(meta)) / len(items_before)
        if coverage < dc["min_country_coverage"]:
            raise DataError(f"country metadata covers {coverage:.1%} of items, "
                            f"below the configured floor {dc['min_country_coverage']:.1%}")
    table, partial = build_table(raw, dc["min_user"], dc["min_item"], meta, dc["require_country"])
    if len(partial.item_country) == table.n_items:
        groups = assign_groups(table, partial.item_country, dc["overrepresented"],
                               dc["underrepresented"])
    else:
        log.warning("%d of %d items lack a country; only the long-tail group is defined",
                    table.n_items - len(partial.item_country), table.n_items)
        groups = GroupAssignment(partial.item_country, long_tail_items=long_tail(table))
    split = split_leave_one_out(table, substream(cfg["seed"], "split"), dc["n_test_negatives"])
    _write_dataset(cfg, table, groups, split)

    n_users_before = len({r.user_key for r in raw})
    print(_summary("before", n_users_before, len(items_before), len(raw)))
    print(_summary("after", table.n_users, table.n_items, len(table)),
          _pct(n_users_before, table.n_users), _pct(len(items_before), table.n_items),
          _pct(len(raw), len(table)))
    print(f"overrepresented: {sorted(groups.overrepresented)}")
    print(f"underrepresented: {sorted(groups.underrepresented)}")
    return 0


def cmd_synth(cfg: dict) -> int:
    if not cfg["synth"]:
        raise ConfigError("a 'synth' section is required for synth")
    spec = SynthSpec.from_dict(cfg["synth"])
    table, groups = generate_synthetic(spec, substream(cfg["seed"], "synth"))
    split = split_leave_one_out(table, substream(cfg["seed"], "split"),
                                cfg["data"]["n_test_negatives"])
    _write_dataset(cfg, table, groups, split)
    print(_summary("synth", table.n_users, table.n_items, len(table)))
    print(f"overrepresented: {sorted(groups.overrepresented)}")
    print(f"underrepresented: {sorted(groups.underrepresented)}")
    return 0


def cmd_train(cfg: dict) -> int:
    _, split, _ = _load_dataset(cfg)
    runs = Path(cfg["out_dir"]) / "runs"
    failed = []
    rows = []
    for name, vcfg in variants(cfg):
        out = runs / name
        try:
            model, history = train(vcfg, split)
        except NumericalError as exc:
            log.error("variant %s failed: %s", name, exc)
            failed.append(name)
            continue
        out.mkdir(parents=True, exist_ok=True)
        save_checkpoint(out / "model.ckpt", model, vcfg.to_dict())
        write_loss_log(history, out / "loss_log.csv")
        textio.dump_json(out / "config.json", "trainconfig", vcfg.to_dict())
        rows.append((name, history[0].total, history[-1].total))
    _write_config(cfg, runs)
    print(f"{'variant':<32}{'first loss':>12}{'final loss':>12}")
    for name, first, last in rows:
        print(f"{name:<32}{first:>12.4f}{last:>12.4f}")
    if failed:
        print(f"failed variants: {failed}", file=sys.stderr)
        return NumericalError.exit_code
    return 0


def _checkpoints(cfg, only=None) -> list[tuple[str, Path]]:
    runs = Path(cfg["out_dir"]) / "runs"
    names = [n for n, _ in variants(cfg)] if only is None else list(only)
    found = [(n, runs / n / "model.ckpt") for n in names if (runs / n / "model.ckpt").is_file()]
    if not found:
        raise DataError(f"no checkpoints found under {runs}; run 'train' first")
    return found


def cmd_evaluate(cfg: dict) -> int:
    _, split, groups = _load_dataset(cfg)
    out = Path(cfg["out_dir"]) / "eval"
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for name, path in _checkpoints(cfg):
        model, mcfg = load_checkpoint(path)
        report = evaluate(model, split, groups, TrainConfig.from_dict(mcfg),
                          threads=cfg["threads"])
        write_report(report, out / f"{name}.json", detail=cfg["eval"]["detail"])
        rows.append((name, report))
    write_comparison(rows, out / "comparison.csv")
    _write_config(cfg, out)
    print(format_comparison(rows))
    return 0


def _pick_items(cfg, table, groups, labels) -> list[int]:
    req = cfg["explain"]["items"]
    if req == "auto-sample":
        rng = substream(cfg["seed"], "explain")
        picks = []
        for countries in (groups.underrepresented, groups.overrepresented):
            pool = np.flatnonzero(groups.country_mask(countries, table.n_items))
            if len(pool):
                picks.append(int(rng.choice(pool)))
        return picks
    keys = {k: i for i, k in enumerate(table.item_keys or [])}
    picks = []
    for key in req:
        if str(key) in keys:
            picks.append(keys[str(key)])
        else:
            log.warning("unknown item id %r skipped", key)
    return picks


def cmd_explain(cfg: dict) -> int:
    table, _, groups = _load_dataset(cfg)
    ec = cfg["explain"]
    label_map = load_labels(cfg["data"]["labels"]) if cfg["data"]["labels"] else {}
    keys = table.item_keys or [str(i) for i in range(table.n_items)]
    labels = [label_map.get(k, k) for k in keys]
    items = _pick_items(cfg, table, groups, labels)
    if not items:
        print("no known items to explain", file=sys.stderr)
        return DataError.exit_code
    out = Path(cfg["out_dir"]) / "explain"
    out.mkdir(parents=True, exist_ok=True)
    models = [(n, load_checkpoint(p)[0]) for n, p in _checkpoints(cfg, ec["variants"])]
    models = [(n, m) for n, m in models if isinstance(m, PrototypeModel)]
    if not models:
        raise DataError("explanations need at least one prototype model checkpoint")
    for item in items:
        rows = []
        for name, model in models:
            n = min(ec["n_protos"], model.Pi.shape[0])
            rows.append((name, explain_item(model, item, n, ec["m_exemplars"], labels,
                                            groups.item_country)))
        text = format_explanations(rows)
        safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in keys[item])
        (out / f"{safe}.md").write_text(text, encoding="utf-8")
        print(text)
    for name, model in models:
        if model.dim >= 2:
            export_embedding_projection(model, ec["projection"], groups,
                                        out / f"{name}_projection.csv")
    _write_config(cfg, out)
    return 0


COMMANDS = {"prepare": cmd_prepare, "synth": cmd_synth, "train": cmd_train,
            "evaluate": cmd_evaluate, "explain": cmd_explain}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="protofair", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON run config")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config value (dotted key)")
        p.add_argument("--seed", type=int)
        p.add_argument("--out-dir", type=Path)
        p.add_argument("--threads", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.overrides, args.seed, args.out_dir, args.threads)
        return COMMANDS[args.command](cfg)
    except ProtofairError as exc:
        print(f"protofair {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
