"""The marked point process behind a decaying Bernoulli sequence.

A bern(a, b) sequence can be produced two very different ways: flip the
biased coins one position at a time, or draw a random starting level, run a
nonhomogeneous Poisson process above it, attach an integer mark to the
start and to every point, and read the 1s off the running sums of the
marks. This script draws one realization, shows the bits it implies, and
then checks at scale that the two routes put the same probabilities on
short prefixes and on the gap-count vector.

Run:  python3 demos/cmpp_vs_direct.py [--replicates N] [--seed S]
"""

from __future__ import annotations

import argparse
from collections import Counter

import numpy as np

from bernstrings import (
    CmppSpec,
    MixtureSpec,
    assemble_bits,
    child_rng,
    counts_from_marks,
    gen_bern,
    realize,
    sample_mixture_counts,
    two_sample_counts,
)
from bernstrings.sequences import bern_probabilities

A, B = 1.0, 2.0


def show_one_realization(seed: int) -> None:
    print(f"--- one realization of the point process for bern({A:g}, {B:g}) ---")
    spec = CmppSpec.beta_bern(A, B)
    real = realize(spec, child_rng(seed, 0), dmax=8)
    print(f"starting level x0 = {real.x0:.4f}")
    print(f"points above x0 (first 6 of {real.points.size}): "
          f"{np.round(real.points[:6], 4).tolist()}")
    print(f"marks (first mark then one per point, first 7): "
          f"{real.marks[:7].tolist()}")
    prefix = assemble_bits(real, 20)
    print(f"implied first 20 bits: {prefix.bits.tolist()}")
    print(f"1s sit at the running sums of the marks: "
          f"{real.partial_sums[real.partial_sums <= 20].tolist()}")


def exact_prefix_prob(bits: tuple[int, ...]) -> float:
    """Probability of an exact short prefix under the coin-flip model."""
    probs = bern_probabilities(A, B, len(bits))
    factors = np.where(np.asarray(bits, dtype=bool), probs, 1.0 - probs)
    return float(np.prod(factors))


def compare_prefix_laws(replicates: int, seed: int) -> None:
    width = 4
    print(f"\n--- length-{width} prefix frequencies, {replicates} per route ---")
    spec = CmppSpec.beta_bern(A, B)
    from_points: Counter[tuple[int, ...]] = Counter()
    from_flips: Counter[tuple[int, ...]] = Counter()
    for r in range(replicates):
        real = realize(spec, child_rng(seed, 1, r), dmax=width + 1)
        from_points[tuple(assemble_bits(real, width).bits.tolist())] += 1
        prefix = gen_bern(A, B, width, child_rng(seed, 2, r))
        from_flips[tuple(prefix.bits.tolist())] += 1

    print("prefix    point process   coin flips   exact")
    for bits, count in from_points.most_common(6):
        print(f"{''.join(map(str, bits))}      {count / replicates:.4f}"
              f"          {from_flips[bits] / replicates:.4f}"
              f"       {exact_prefix_prob(bits):.4f}")


def compare_count_laws(replicates: int, seed: int) -> None:
    dmax = 2
    print("\n--- gap counts: marks vs the Poisson mixture shortcut ---")
    spec = CmppSpec.beta_bern(A, B)
    mix = MixtureSpec.for_bern(A, B)
    za = np.empty((replicates, dmax), dtype=np.int64)
    zb = np.empty((replicates, dmax), dtype=np.int64)
    for r in range(replicates):
        cv = counts_from_marks(realize(spec, child_rng(seed, 3, r), dmax=dmax),
                               dmax=dmax)
        za[r] = [cv.get(1), cv.get(2)]
        cv = sample_mixture_counts(mix, dmax, child_rng(seed, 4, r))
        zb[r] = [cv.get(1), cv.get(2)]
    for k in (1, 2):
        res = two_sample_counts(za[:, k - 1], zb[:, k - 1])
        print(f"Z_{k}: mean {za[:, k - 1].mean():.4f} vs "
              f"{zb[:, k - 1].mean():.4f}, two-sample chi-square "
              f"p = {res.p_value:.3f}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replicates", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()

    show_one_realization(args.seed)
    compare_prefix_laws(args.replicates, args.seed)
    compare_count_laws(args.replicates, args.seed)


if __name__ == "__main__":
    main()
