"""Seed derivation.

Every sampled object gets its own 64-bit seed derived from a run-level seed
and a path of integer/string keys. Strings are folded to integers with
BLAKE2b so the scheme is stable across Python processes (no ``hash()``).
"""
from __future__ import annotations

import hashlib

import numpy as np


def _key_to_int(key) -> int:
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError("seed keys must be non-negative")
        return int(key)
    digest = hashlib.blake2b(str(key).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(seed: int, *keys) -> int:
    """Return the 64-bit seed for counter path ``keys`` under run ``seed``.

    ``derive_seed(s)`` with no keys returns a mix of ``s`` itself, so
    ``derive_seed(s, 0)`` and ``derive_seed(s)`` differ.
    """
    ss = np.random.SeedSequence(entropy=_key_to_int(seed), spawn_key=tuple(_key_to_int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *keys))


def text_seed(*parts) -> int:
    """64-bit seed from arbitrary text parts (used by the synthetic backend)."""
    h = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(h[:8], "little")
