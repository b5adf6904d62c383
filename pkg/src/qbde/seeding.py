"""Deterministic seed derivation.

Every random stream in a run is derived from one top-level seed plus a path
of keys, e.g. ``derive_seed(seed, "model", "qrf", 3)`` for tree 3 of the QRF.
String keys are hashed with CRC-32 so the mapping is stable across Python
processes (unlike ``hash()``).
"""

from __future__ import annotations

import zlib

import numpy as np


def _key(k) -> int:
    if isinstance(k, str):
        return zlib.crc32(k.encode("utf-8"))
    return int(k)


def derive_seed(seed: int, *keys) -> int:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def rng_for(seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *keys))
