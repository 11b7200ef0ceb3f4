"""Bernoulli sequences with decaying success probabilities and their
success-gap statistics.

Two sequence families are generated directly:

* ``bern(a, b)``: independent bits with P(Y_k = 1) = a / (a + b + k - 1).
* ``bern1(a, b)``: Y_1 = 1 surely, then P(Y_k = 1) = a / (a + b + k - 2)
  for k >= 2.

A gap of order d is a 1 followed by exactly d - 1 zeros and then a 1.
``count_strings`` tallies the gaps completed inside a finite prefix, pooling
orders above ``dmax`` into an overflow bucket.

The module also houses the sequential uniform-permutation construction whose
cycle-completion indicators realize ``bern(1, 0)`` in reverse order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_DMAX = 16

_MODELS = ("bern", "bern1", "raw")


@dataclass(frozen=True)
class BitPrefix:
    """A realized finite prefix of a 0/1 sequence.

    ``model`` records which generator produced the bits: "bern", "bern1",
    "raw", or "cmpp:<tag>" for prefixes assembled from a marked point
    process. ``truncated`` is set when the producer could not determine the
    full prefix (only possible for assembled prefixes).
    """

    bits: np.ndarray
    model: str = "raw"
    params: tuple[float, float] | None = None
    truncated: bool = False

    def __post_init__(self) -> None:
        bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1:
            raise ValueError("bits must be one-dimensional")
        if bits.size and bits.max() > 1:
            raise ValueError("bits must be 0 or 1")
        if self.model not in _MODELS and not self.model.startswith("cmpp:"):
            raise ValueError(f"unknown model tag {self.model!r}")
        if self.model == "bern1" and bits.size and bits[0] != 1:
            raise ValueError("bern1 prefixes start with a 1")
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return int(self.bits.size)


@dataclass(frozen=True)
class CountVector:
    """Sparse gap counts: ``counts[d]`` for 1 <= d <= dmax, orders above
    ``dmax`` pooled in ``overflow``."""

    counts: dict[int, int]
    dmax: int
    overflow: int = 0

    def __post_init__(self) -> None:
        if self.dmax < 1:
            raise ValueError("dmax must be at least 1")
        if self.overflow < 0:
            raise ValueError("overflow must be non-negative")
        for d, c in self.counts.items():
            if not (1 <= d <= self.dmax):
                raise ValueError(f"count order {d} outside 1..{self.dmax}")
            if c < 0:
                raise ValueError("counts must be non-negative")

    def get(self, d: int) -> int:
        return self.counts.get(d, 0)

    def total(self) -> int:
        """Number of gaps tallied, overflow included."""
        return sum(self.counts.values()) + self.overflow

    def as_array(self) -> np.ndarray:
        """Dense counts for d = 1..dmax (overflow not included)."""
        out = np.zeros(self.dmax, dtype=np.int64)
        for d, c in self.counts.items():
            out[d - 1] = c
        return out


def _check_bern_params(a: float, b: float, n: int) -> None:
    if not a > 0:
        raise ValueError("a must be positive")
    if b < 0:
        raise ValueError("b must be non-negative")
    if n < 1:
        raise ValueError("prefix length must be at least 1")


def bern_probabilities(a: float, b: float, n: int) -> np.ndarray:
    """Success probabilities a / (a + b + k - 1) for positions k = 1..n."""
    _check_bern_params(a, b, n)
    k = np.arange(1, n + 1, dtype=np.float64)
    return a / (a + b + k - 1.0)


def bern1_probabilities(a: float, b: float, n: int) -> np.ndarray:
    """Success probabilities of the forced-start family: 1 at k = 1, then
    a / (a + b + k - 2) for k >= 2."""
    _check_bern_params(a, b, n)
    p = np.empty(n, dtype=np.float64)
    p[0] = 1.0
    if n > 1:
        k = np.arange(2, n + 1, dtype=np.float64)
        p[1:] = a / (a + b + k - 2.0)
    return p


def _draw_bits(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # Positions with probability exactly 1 are emitted deterministically,
    # with no stream consumption.
    bits = np.zeros(probs.size, dtype=np.uint8)
    det = probs >= 1.0
    bits[det] = 1
    free = ~det
    m = int(free.sum())
    if m:
        bits[free] = rng.random(m) < probs[free]
    return bits


def gen_bern(a: float, b: float, n: int, rng: np.random.Generator) -> BitPrefix:
    """Draw an n-bit prefix of the bern(a, b) sequence."""
    probs = bern_probabilities(a, b, n)
    return BitPrefix(bits=_draw_bits(probs, rng), model="bern", params=(a, b))


def gen_bern1(a: float, b: float, n: int, rng: np.random.Generator) -> BitPrefix:
    """Draw an n-bit prefix of the bern1(a, b) sequence (starts with a 1)."""
    probs = bern1_probabilities(a, b, n)
    return BitPrefix(bits=_draw_bits(probs, rng), model="bern1", params=(a, b))


def gen_bern_block(
    a: float, b: float, n: int, size: int, rng: np.random.Generator, model: str = "bern"
) -> np.ndarray:
    """Draw ``size`` independent n-bit prefixes as a boolean matrix.

    Vectorized equivalent of repeated gen_bern / gen_bern1 calls (same law,
    different stream consumption); used by the large-replicate experiments.
    """
    if size < 1:
        raise ValueError("size must be at least 1")
    if model == "bern":
        probs = bern_probabilities(a, b, n)
    elif model == "bern1":
        probs = bern1_probabilities(a, b, n)
    else:
        raise ValueError(f"unknown model {model!r}")
    return rng.random((size, n)) < probs


def count_strings(prefix: BitPrefix, dmax: int = DEFAULT_DMAX) -> CountVector:
    """Tally completed success gaps in a prefix.

    A gap of order d needs its opening and closing 1 inside the prefix, so
    leading zeros and anything after the last 1 contribute nothing. Orders
    above dmax land in the overflow bucket.
    """
    if dmax < 1:
        raise ValueError("dmax must be at least 1")
    ones = np.flatnonzero(prefix.bits)
    counts: dict[int, int] = {}
    overflow = 0
    for g in np.diff(ones):
        d = int(g)
        if d <= dmax:
            counts[d] = counts.get(d, 0) + 1
        else:
            overflow += 1
    return CountVector(counts=counts, dmax=dmax, overflow=overflow)


def count_strings_block(bits: np.ndarray, dmax: int = DEFAULT_DMAX) -> np.ndarray:
    """Per-row gap counts for a matrix of prefixes.

    Returns an int64 array of shape (rows, dmax + 1): columns 0..dmax-1 hold
    the counts for d = 1..dmax, the last column holds the overflow. Agrees
    row for row with count_strings.
    """
    if dmax < 1:
        raise ValueError("dmax must be at least 1")
    mat = np.asarray(bits)
    if mat.ndim != 2:
        raise ValueError("bits must be a matrix")
    out = np.zeros((mat.shape[0], dmax + 1), dtype=np.int64)
    rows, cols = np.nonzero(mat)
    if rows.size < 2:
        return out
    same_row = rows[1:] == rows[:-1]
    gaps = cols[1:] - cols[:-1]
    r = rows[1:][same_row]
    d = np.minimum(gaps[same_row], dmax + 1)
    np.add.at(out, (r, d - 1), 1)
    return out


def add_unit(z: CountVector, n: int) -> CountVector:
    """Return z with one extra gap of order n (overflow if n > dmax)."""
    if n < 1:
        raise ValueError("gap order must be at least 1")
    counts = dict(z.counts)
    overflow = z.overflow
    if n <= z.dmax:
        counts[n] = counts.get(n, 0) + 1
    else:
        overflow += 1
    return CountVector(counts=counts, dmax=z.dmax, overflow=overflow)


@dataclass(frozen=True)
class PermDraw:
    """One permutation drawn by the sequential cycle construction.

    ``perm`` maps i -> perm[i] as a bijection on 0..n-1. ``indicators[k]``
    is 1 when the k-th draw closed a cycle; the last draw always does.
    ``cycle_counts`` is the cycle-length census of ``perm``, computed from
    the permutation itself (not from the indicators).
    """

    n: int
    perm: np.ndarray
    indicators: np.ndarray
    cycle_counts: dict[int, int]


def cycle_census(perm: np.ndarray) -> dict[int, int]:
    """Cycle-length counts of a permutation given as an image array."""
    p = np.asarray(perm)
    n = p.size
    if n and (np.sort(p) != np.arange(n)).any():
        raise ValueError("not a permutation of 0..n-1")
    seen = np.zeros(n, dtype=bool)
    counts: dict[int, int] = {}
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = int(p[j])
            length += 1
        counts[length] = counts.get(length, 0) + 1
    return counts


def feller_draw(n: int, rng: np.random.Generator) -> PermDraw:
    """Draw a uniform permutation of 0..n-1 cycle by cycle.

    The image of the current element is drawn uniformly from the values not
    yet used; drawing the current cycle's leader closes the cycle and the
    smallest unused value starts the next one. The k-th draw closes a cycle
    with probability 1 / (n - k + 1), independently across k.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    u = rng.random(n)
    pool = list(range(n))
    perm = np.empty(n, dtype=np.int64)
    indicators = np.zeros(n, dtype=np.uint8)
    leader = 0
    current = 0
    for k in range(n):
        m = n - k
        idx = min(int(u[k] * m), m - 1)
        val = pool[idx]
        pool[idx] = pool[m - 1]
        pool.pop()
        perm[current] = val
        if val == leader:
            indicators[k] = 1
            if pool:
                leader = min(pool)
                current = leader
        else:
            current = val
    return PermDraw(n=n, perm=perm, indicators=indicators, cycle_counts=cycle_census(perm))


def indicators_to_counts(indicators: np.ndarray) -> dict[int, int]:
    """Cycle-length census implied by a cycle-completion indicator vector.

    With completion times t_1 < ... < t_m (the positions of the 1s, 1-based,
    t_m = n), the cycle lengths are t_1 and the successive differences; this
    is the census the indicator formula computes term by term.
    """
    ind = np.asarray(indicators)
    if ind.size == 0:
        raise ValueError("indicator vector is empty")
    if ind[-1] != 1:
        raise ValueError("last indicator must be 1 (final draw closes a cycle)")
    pos = np.flatnonzero(ind) + 1
    lengths = np.diff(np.concatenate(([0], pos)))
    counts: dict[int, int] = {}
    for ell in lengths:
        k = int(ell)
        counts[k] = counts.get(k, 0) + 1
    return counts
