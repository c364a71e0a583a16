"""Derivation of independent PRNG streams from a single run seed."""

import hashlib

import numpy as np


def stream_seed(seed: int, *tags) -> int:
    """Hash ``seed`` and a sequence of stage tags into a 64-bit stream seed.

    The result depends only on the arguments, never on call order, so every
    stage can be re-run in isolation and draw the same numbers.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed)).encode())
    for tag in tags:
        h.update(b"\x1f")
        h.update(str(tag).encode())
    return int.from_bytes(h.digest(), "little")


def stream(seed: int, *tags) -> np.random.Generator:
    return np.random.default_rng(stream_seed(seed, *tags))
