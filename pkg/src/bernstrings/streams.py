"""Deterministic random-stream derivation.

Every simulation routine takes an explicit numpy Generator. Experiments that
run many replicates derive one child stream per replicate (or per fixed-size
replicate block in the vectorized paths) from the master seed, so results are
reproducible and replicates are independent by construction.

The integer-mixing function is numpy's SeedSequence entropy hash: the child
for key (i0, i1, ...) is SeedSequence(seed, spawn_key=(i0, i1, ...)). Child
streams for distinct keys never collide and do not depend on creation order.
"""

from __future__ import annotations

import numpy as np


def child_rng(seed: int, *key: int) -> np.random.Generator:
    """Return the PCG64 generator for the child stream (seed; key)."""
    if any(k < 0 for k in key):
        raise ValueError("stream key indices must be non-negative")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
