"""Closed forms and the brute-force enumeration oracle.

Everything the simulators produce can be checked against exact numbers:
a full enumeration of all prefixes on a short horizon, Poisson-mixture
probabilities for the gap counts, the sign of Var(Z_1) - E(Z_1), and a
recurrence that samples the count vector even where no mixture
representation exists. This script prints each oracle next to a Monte
Carlo estimate of the same quantity.

Run:  python3 demos/exact_oracles.py [--replicates N] [--seed S]
"""

from __future__ import annotations

import argparse
from collections import Counter
from fractions import Fraction

import numpy as np

from bernstrings import (
    child_rng,
    enumerate_truncated,
    gen_bern,
    count_strings,
    mixture_pmf,
    overdispersion_z1,
    sample_bern1_counts_recurrence,
    second_success_pmf,
    truncation_bias_bound,
    tv_distance,
)
from bernstrings.exact import BetaMixing


def show_enumeration(replicates: int, seed: int) -> None:
    a, b, m, dmax = 2.0, 1.0, 10, 3
    print(f"--- enumeration oracle: bern({a:g}, {b:g}) on the first {m} bits ---")
    dist = enumerate_truncated(a, b, model="bern", m=m, dmax=dmax, exact=True)
    z1 = dist.marginal_exact(1)
    print("exact law of the windowed Z_1 (adjacent-1 pairs):")
    for j, p in z1.items():
        if p > Fraction(1, 10_000):
            print(f"  P(Z_1 = {j}) = {p} = {float(p):.6f}")

    freq: Counter[int] = Counter()
    for r in range(replicates):
        prefix = gen_bern(a, b, m, child_rng(seed, 0, r))
        freq[count_strings(prefix, dmax).get(1)] += 1
    emp = {j: c / replicates for j, c in freq.items()}
    tv = tv_distance(dist.marginal(1), emp)
    print(f"TV distance to {replicates} simulated prefixes: {tv:.4f}")

    # windowed counts ignore gaps that straddle the cut; the bound on that
    # bias decays as the horizon grows, which is how prefix lengths are
    # chosen when a windowed count stands in for the infinite-sequence one
    print("bias bound for the windowed count as the horizon grows:")
    for horizon in (10, 100, 1_000, 10_000):
        print(f"  m = {horizon:<6d} "
              f"{truncation_bias_bound(a, b, dmax, horizon):.5f}")


def show_mixture_values() -> None:
    print("\n--- Poisson mixture values ---")
    # with a = 1 and a uniform starting level the no-adjacent-pair
    # probability has a closed form
    p0 = mixture_pmf(1.0, BetaMixing(1.0, 1.0), 1, 0)
    print(f"P(Z_1 = 0) at a = 1, uniform start: {p0:.9f} "
          f"(1 - 1/e = {1.0 - np.exp(-1.0):.9f})")
    for j in (1, 2, 3):
        print(f"P(Z_1 = {j}) = {mixture_pmf(1.0, BetaMixing(1.0, 1.0), 1, j):.6f}")

    print("\nVar(Z_1) - E(Z_1) by parameter (negative is impossible for any")
    print("mixture of Poissons, so b < 1 rules the representation out):")
    for b in (0.25, 0.5, 1.0, 2.0, 4.0):
        print(f"  b = {b:<5g} overdispersion = {overdispersion_z1(1.0, b):+.5f}")


def show_recurrence(replicates: int, seed: int) -> None:
    a, b = 1.0, 0.5
    print(f"\n--- recurrence sampler at (a, b) = ({a:g}, {b:g}), "
          f"below the mixture range ---")
    probs = second_success_pmf(a, b, np.arange(2, 8))
    print("law of the position of the second 1:")
    for n, p in zip(range(2, 8), probs):
        print(f"  P(T = {n}) = {p:.4f}")

    freq: Counter[int] = Counter()
    for r in range(replicates):
        cv = sample_bern1_counts_recurrence(a, b, 1, child_rng(seed, 1, r))
        freq[cv.get(1)] += 1
    mean = sum(j * c for j, c in freq.items()) / replicates
    var = sum(j * j * c for j, c in freq.items()) / replicates - mean * mean
    print(f"sampled Z_1 over {replicates} draws: mean {mean:.4f}, "
          f"variance {var:.4f}")
    print(f"Var - E = {var - mean:+.4f}, exact value "
          f"{overdispersion_z1(a, b):+.4f}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replicates", type=int, default=50_000)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()

    show_enumeration(args.replicates, args.seed)
    show_mixture_values()
    show_recurrence(args.replicates, args.seed)


if __name__ == "__main__":
    main()
