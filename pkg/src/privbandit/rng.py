"""Deterministic derivation of named random substreams.

A single root seed expands into independent substreams identified by string
or integer labels (e.g. ``("attack", strategy_index, grid_index)``), so that
changing how many draws one component consumes never perturbs another
component's stream.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(base_seed: int, *labels) -> int:
    """Return a 128-bit integer seed for the substream named by ``labels``.

    Stable across platforms and processes: the labels are joined into a
    string and hashed with SHA-256 together with the base seed.
    """
    tag = "/".join([str(int(base_seed))] + [str(part) for part in labels])
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "little")


def substream(base_seed: int, *labels) -> np.random.Generator:
    """Return a fresh generator for the substream named by ``labels``."""
    return np.random.default_rng(derive_seed(base_seed, *labels))


def as_generator(seed) -> np.random.Generator:
    """Coerce an int seed or an existing Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
