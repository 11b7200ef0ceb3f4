"""Shared helpers for the test suite."""

import numpy as np

from bernstrings import exact
from bernstrings.sequences import count_strings_block, gen_bern_block
from bernstrings.streams import child_rng

BLOCK_ENTRIES = 20_000_000


def windowed_counts(a, b, dmax, reps, seed, model="bern", bias_target=1e-3):
    """Order-1..dmax windowed counts for `reps` prefixes, horizon sized by
    the truncation bias bound, generated in bounded-size blocks."""
    n = exact.horizon_for_bias(a, b, dmax, bias_target)
    if model == "bern1":
        n += 1
    out = np.empty((reps, dmax + 1), dtype=np.int64)
    rows_per_block = max(1, BLOCK_ENTRIES // n)
    start = 0
    block = 0
    while start < reps:
        stop = min(start + rows_per_block, reps)
        rng = child_rng(seed, block)
        bits = gen_bern_block(a, b, n, stop - start, rng, model=model)
        out[start:stop] = count_strings_block(bits, dmax)
        start = stop
        block += 1
    return out
