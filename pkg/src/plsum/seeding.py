"""Deterministic seed derivation for per-item randomness.

Seeds for individual items derive from the global seed and the item id, so
work order and thread scheduling never change an item's output.
"""

from __future__ import annotations

import hashlib


def derive_seed(seed: int, key: str) -> int:
    """A 64-bit seed unique to (seed, key), stable across platforms."""
    digest = hashlib.sha256(f"{seed}|{key}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
