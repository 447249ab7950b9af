"""Deterministic stream derivation.

Every randomized operation in the library takes an explicit seed and is a pure
function of (arguments, seed).  Composite experiments derive per-trial streams
with the splittable rule below so any single trial can be replayed in
isolation:

    stream(master, *path) = Generator(PCG64(SeedSequence((master, *path))))

Path components are integers; strings are mapped through crc32 so enum-like
labels ("sparse_gaussian", "matrix") participate deterministically.
"""

import zlib

import numpy as np


def _as_entropy(component) -> int:
    if isinstance(component, str):
        return zlib.crc32(component.encode("utf-8"))
    if isinstance(component, (bool, np.bool_)):
        return int(component)
    if isinstance(component, (int, np.integer)):
        return int(component)
    raise TypeError(f"seed path component must be int or str, got {type(component)!r}")


def seed_sequence(master_seed: int, *path) -> np.random.SeedSequence:
    """SeedSequence for (master_seed, *path); the splittable-seed rule."""
    entropy = (int(master_seed),) + tuple(_as_entropy(c) for c in path)
    return np.random.SeedSequence(entropy)


def stream(master_seed: int, *path) -> np.random.Generator:
    """Independent Generator for the given derivation path."""
    return np.random.default_rng(seed_sequence(master_seed, *path))


def derived_seed(master_seed: int, *path) -> int:
    """Single u64 summarizing a derived stream (recorded in report rows)."""
    return int(seed_sequence(master_seed, *path).generate_state(1, np.uint64)[0])
