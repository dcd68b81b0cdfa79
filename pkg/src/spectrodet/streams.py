"""Deterministic, platform-independent random stream derivation.

All randomness in the toolkit flows from a single 64-bit master seed.
Independent entities (scene configs, realizations, signals, noise, splits)
get their own PCG64 stream derived from the master seed plus a tag path,
so scenes can be generated in any order or in parallel with identical
results.
"""

import hashlib

import numpy as np

# Tag constants keep unrelated derivation paths from colliding.
TAG_CONFIG = 1
TAG_REALIZE = 2
TAG_SCENE = 3
TAG_NOISE = 4
TAG_SPLIT = 5

_MASK64 = (1 << 64) - 1


def derive_seedseq(master_seed, *path):
    """SeedSequence for (master_seed, path...). Path entries must be ints >= 0."""
    entropy = [int(master_seed) & _MASK64] + [int(p) & _MASK64 for p in path]
    return np.random.SeedSequence(entropy)


def derive_rng(master_seed, *path):
    """A fresh PCG64 Generator for the given derivation path."""
    return np.random.Generator(np.random.PCG64(derive_seedseq(master_seed, *path)))


def stable_hash64(*parts) -> int:
    """64-bit content hash of a tuple of ints/floats/strings.

    Floats are hashed via their IEEE-754 bytes, so the hash is exact and
    platform independent.
    """
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        if isinstance(p, float):
            h.update(b"f" + np.float64(p).tobytes())
        elif isinstance(p, (int, np.integer)):
            h.update(b"i" + int(p).to_bytes(16, "little", signed=True))
        elif isinstance(p, str):
            h.update(b"s" + p.encode("utf-8"))
        else:
            raise TypeError(f"unhashable part for stable_hash64: {type(p)!r}")
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "little")
