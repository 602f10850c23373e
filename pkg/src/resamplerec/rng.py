"""Deterministic RNG stream derivation.

Every randomized task in the pipeline derives its own generator from a
stable key (master seed plus context tokens), so results do not depend on
scheduling or worker count.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts: object) -> int:
    """Hash arbitrary context tokens into a 64-bit seed.

    Floats are canonicalized through repr() so that equal values always
    map to the same stream.
    """
    tokens = []
    for p in parts:
        if isinstance(p, float):
            tokens.append(repr(p))
        else:
            tokens.append(str(p))
    digest = hashlib.blake2b("|".join(tokens).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def derive_rng(*parts: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
