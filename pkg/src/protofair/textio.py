"""Versioned JSON artifacts: a ``# protofair-<kind> v1`` line, then JSON."""

import json
from pathlib import Path

from .errors import DataError


def header(kind: str) -> str:
    return f"# protofair-{kind} v1"


def dump_json(path, kind: str, obj) -> None:
    text = header(kind) + "\n" + json.dumps(obj, indent=1, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def load_json(path, kind: str | None = None):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    text = path.read_text(encoding="utf-8")
    first, _, rest = text.partition("\n")
    if first.startswith("#"):
        if kind is not None and first.strip() != header(kind):
            raise DataError(f"{path}: expected '{header(kind)}', found '{first.strip()}'")
        text = rest
    elif kind is not None:
        raise DataError(f"{path}: missing '{header(kind)}' line")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc
