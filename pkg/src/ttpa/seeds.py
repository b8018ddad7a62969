"""Deterministic seed derivation for independent random streams.

Every randomized component takes its own numpy Generator derived from a
master seed plus a label path, e.g. ``stream(seed, "attack", "exp1", 7,
"keys")``.  Labels are hashed, so adding a new component never shifts the
draws of an existing one, and trials can run in any order (or in
parallel) with identical results.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master: int, *labels: object) -> int:
    """Hash a master seed and a label path into a 128-bit stream seed."""
    h = hashlib.sha256()
    h.update(str(int(master)).encode())
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode())
    return int.from_bytes(h.digest()[:16], "big")


def stream(master: int, *labels: object) -> np.random.Generator:
    """Independent PCG64 stream for the component named by the label path."""
    return np.random.default_rng(derive_seed(master, *labels))
