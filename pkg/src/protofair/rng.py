"""Labeled sub-seeding so stages can be held fixed independently."""

import zlib

import numpy as np


def substream(seed: int, label: str) -> np.random.Generator:
    """Generator derived from ``seed`` and a stage label.

    Same (seed, label) always gives the same stream; different labels give
    statistically independent streams.
    """
    return np.random.default_rng([int(seed), zlib.crc32(label.encode("utf-8"))])
