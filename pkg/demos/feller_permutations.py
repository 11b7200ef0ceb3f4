"""Walk through the sequential permutation construction.

The draw builds a permutation of 0..n-1 one element at a time and records,
at each step, whether the step closed a cycle. The closing indicators turn
out to be independent Bernoulli variables with P(step k closes) equal to
1/(n - k + 1), and the cycle-length census of the finished permutation is a
function of those indicators alone. This script shows all three facts on
live draws.

Run:  python3 demos/feller_permutations.py [--replicates N] [--seed S]
"""

from __future__ import annotations

import argparse
from collections import Counter

import numpy as np

from bernstrings import child_rng, feller_draw, indicators_to_counts


def show_single_draw(seed: int) -> None:
    print("--- one draw at n = 8 ---")
    draw = feller_draw(8, child_rng(seed, 0))
    print(f"permutation (image form): {draw.perm.tolist()}")
    print(f"cycle-closing indicators: {draw.indicators.tolist()}")
    print(f"cycle census from the permutation: {draw.cycle_counts}")
    # gaps between successive closing steps are exactly the cycle lengths
    recomputed = indicators_to_counts(draw.indicators)
    print(f"cycle census from the indicators:  {recomputed}")
    assert recomputed == draw.cycle_counts


def show_closing_rates(replicates: int, seed: int) -> None:
    n = 6
    print(f"\n--- closing rates over {replicates} draws at n = {n} ---")
    hits = np.zeros(n)
    for r in range(replicates):
        hits += feller_draw(n, child_rng(seed, 1, r)).indicators
    print("step k:  empirical P(close)   1/(n-k+1)")
    for k in range(1, n + 1):
        print(f"  {k}       {hits[k - 1] / replicates:.4f}            "
              f"{1.0 / (n - k + 1):.4f}")


def show_cycle_count_means(replicates: int, seed: int) -> None:
    n = 200
    reps = max(200, replicates // 10)
    print(f"\n--- mean number of k-cycles, n = {n}, {reps} draws ---")
    totals = Counter()
    for r in range(reps):
        totals.update(feller_draw(n, child_rng(seed, 2, r)).cycle_counts)
    print("k:  empirical E[C_k]   limit 1/k")
    for k in range(1, 6):
        print(f"  {k}    {totals[k] / reps:.4f}          {1.0 / k:.4f}")


def show_uniformity(replicates: int, seed: int) -> None:
    # every one of the 24 permutations of 4 elements should be equally likely
    print(f"\n--- uniformity over S_4, {replicates} draws ---")
    freq = Counter()
    for r in range(replicates):
        freq[tuple(feller_draw(4, child_rng(seed, 3, r)).perm.tolist())] += 1
    top = freq.most_common()
    print(f"distinct permutations seen: {len(freq)} of 24")
    print(f"most frequent: {top[0][0]} x{top[0][1]}, "
          f"least frequent: {top[-1][0]} x{top[-1][1]} "
          f"(uniform would give {replicates / 24:.0f} each)")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replicates", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    show_single_draw(args.seed)
    show_closing_rates(args.replicates, args.seed)
    show_cycle_count_means(args.replicates, args.seed)
    show_uniformity(args.replicates, args.seed)


if __name__ == "__main__":
    main()
