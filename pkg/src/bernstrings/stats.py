"""Statistical verification: goodness of fit, homogeneity, and moment tests.

Conventions shared by every experiment:

* significance level alpha = 1e-3; a test passes when p > alpha,
* moment comparisons use z-scores with |z| <= 4 as the pass band,
* chi-square bins are pooled so every expected count is at least 5,
* sample sizes below 1000 are rejected (the asymptotics are not trusted).

Calibration contract: with samples drawn from the reference pmf itself, the
pass rate over 100 independent repetitions must be at least
1 - alpha - 3 sqrt(alpha / 100), i.e. at least 99 of 100 at alpha = 1e-3.
The test suite pins this with a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import gammaincc

DEFAULT_ALPHA = 1e-3
DEFAULT_Z_MAX = 4.0
MIN_EXPECTED = 5.0
MIN_SAMPLES = 1000


@dataclass(frozen=True)
class GofResult:
    statistic: float
    dof: int
    p_value: float
    bins: tuple[tuple[str, float, float], ...]  # (label, observed, expected)
    alpha: float
    verdict: bool


@dataclass(frozen=True)
class MomentTest:
    empirical_mean: float
    empirical_var: float
    theoretical_mean: float
    theoretical_var: float | None
    z_mean: float
    z_var: float | None
    z_max: float
    verdict: bool


@dataclass(frozen=True)
class DispersionTest:
    """Variance-minus-mean comparison against a signed theoretical value."""

    empirical: float
    theoretical: float
    std_error: float
    z_sign: float
    z_match: float
    z_max: float
    verdict: bool


def chi2_survival(statistic: float, dof: int) -> float:
    """Upper-tail chi-square probability Q(dof/2, statistic/2)."""
    if dof < 1:
        raise ValueError("dof must be at least 1")
    if statistic < 0:
        raise ValueError("statistic must be non-negative")
    return float(gammaincc(dof / 2.0, statistic / 2.0))


def _as_count_samples(samples) -> np.ndarray:
    arr = np.asarray(samples)
    if arr.ndim != 1 or arr.size < MIN_SAMPLES:
        raise ValueError(f"need a flat sample of at least {MIN_SAMPLES} values")
    if not np.issubdtype(arr.dtype, np.integer):
        ints = arr.astype(np.int64)
        if np.any(ints != arr):
            raise ValueError("count samples must be integers")
        arr = ints
    if arr.min() < 0:
        raise ValueError("count samples must be non-negative")
    return arr


def _pool_slices(weights: np.ndarray,
                 min_expected: float = MIN_EXPECTED) -> list[slice]:
    """Group adjacent bins left to right until each group's weight reaches
    min_expected; a light tail group is folded into the last one. The slices
    partition range(len(weights)), so group totals preserve sums exactly."""
    slices: list[slice] = []
    start = 0
    acc = 0.0
    for i, w in enumerate(weights):
        acc += float(w)
        if acc >= min_expected:
            slices.append(slice(start, i + 1))
            start, acc = i + 1, 0.0
    if start < len(weights):
        if slices:
            last = slices.pop()
            slices.append(slice(last.start, len(weights)))
        else:
            slices.append(slice(0, len(weights)))
    return slices


def _group_label(labels: Sequence[str], sl: slice) -> str:
    picked = labels[sl]
    return picked[0] if len(picked) == 1 else f"{picked[0]}..{picked[-1]}"


def chi2_gof(samples, pmf: Callable[[int], float], *,
             alpha: float = DEFAULT_ALPHA) -> GofResult:
    """Pearson goodness of fit of integer count samples against a pmf.

    The pmf is enumerated up to the sample maximum and the remaining tail
    mass becomes one extra bin, so the expected column always sums to the
    sample size.
    """
    arr = _as_count_samples(samples)
    n = arr.size
    top = int(arr.max())
    observed = np.bincount(arr, minlength=top + 1).astype(np.float64)
    probs = np.array([float(pmf(j)) for j in range(top + 1)], dtype=np.float64)
    if np.any(probs < -1e-15) or probs.sum() > 1.0 + 1e-9:
        raise ValueError("pmf values must form a sub-probability vector")
    probs = np.clip(probs, 0.0, None)
    tail = max(0.0, 1.0 - float(probs.sum()))
    labels = [str(j) for j in range(top + 1)] + [f">{top}"]
    expected = np.concatenate((n * probs, [n * tail]))
    observed = np.concatenate((observed, [0.0]))
    slices = _pool_slices(expected)
    if len(slices) < 2:
        raise ValueError("fewer than two bins after pooling; enlarge the sample")
    bins = [(_group_label(labels, sl), float(observed[sl].sum()),
             float(expected[sl].sum())) for sl in slices]
    stat = sum((o - e) ** 2 / e for _, o, e in bins)
    dof = len(bins) - 1
    p = chi2_survival(stat, dof)
    return GofResult(statistic=float(stat), dof=dof, p_value=p,
                     bins=tuple(bins), alpha=alpha, verdict=p > alpha)


def two_sample_counts(samples_a, samples_b, *,
                      alpha: float = DEFAULT_ALPHA) -> GofResult:
    """Chi-square homogeneity test that two integer count samples share a
    distribution. Bins pool until both rows expect at least 5 per group."""
    xa = _as_count_samples(samples_a)
    xb = _as_count_samples(samples_b)
    na, nb = xa.size, xb.size
    top = int(max(xa.max(), xb.max()))
    oa = np.bincount(xa, minlength=top + 1).astype(np.float64)
    ob = np.bincount(xb, minlength=top + 1).astype(np.float64)
    combined = oa + ob
    ea = na * combined / (na + nb)
    eb = nb * combined / (na + nb)
    labels = [str(j) for j in range(top + 1)]
    # pool on the smaller expected row so both rows clear the floor
    slices = _pool_slices(np.minimum(ea, eb))
    if len(slices) < 2:
        raise ValueError("fewer than two bins after pooling; enlarge the samples")
    stat = 0.0
    bins = []
    for sl in slices:
        goa, gob = float(oa[sl].sum()), float(ob[sl].sum())
        gea, geb = float(ea[sl].sum()), float(eb[sl].sum())
        stat += (goa - gea) ** 2 / gea + (gob - geb) ** 2 / geb
        bins.append((_group_label(labels, sl), goa, gea))
    dof = len(slices) - 1
    p = chi2_survival(stat, dof)
    return GofResult(statistic=float(stat), dof=dof, p_value=p,
                     bins=tuple(bins), alpha=alpha, verdict=p > alpha)


def _central_moments(arr: np.ndarray) -> tuple[float, float, float, float]:
    mean = float(arr.mean())
    dev = arr - mean
    m2 = float(np.mean(dev ** 2))
    m3 = float(np.mean(dev ** 3))
    m4 = float(np.mean(dev ** 4))
    return mean, m2, m3, m4


def moment_test(samples, theoretical_mean: float,
                theoretical_var: float | None, *,
                z_max: float = DEFAULT_Z_MAX,
                check_variance: bool = True) -> MomentTest:
    """Compare sample mean (and optionally variance) against theory.

    The mean z-score uses sqrt(theoretical_var / n) when the variance is
    given, else the empirical standard error. The variance z-score uses the
    asymptotic normal spread of the sample variance, estimated with the
    empirical fourth central moment.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1 or arr.size < MIN_SAMPLES:
        raise ValueError(f"need a flat sample of at least {MIN_SAMPLES} values")
    n = arr.size
    mean, m2, _, m4 = _central_moments(arr)
    s2 = m2 * n / (n - 1)
    if theoretical_var is not None and theoretical_var < 0:
        raise ValueError("theoretical variance must be non-negative")
    if theoretical_var == 0.0:
        if m2 > 0:
            raise ValueError("zero theoretical variance but the sample varies")
        z_mean = 0.0 if mean == theoretical_mean else float("inf")
        verdict = z_mean == 0.0
        return MomentTest(mean, 0.0, theoretical_mean, 0.0, z_mean, 0.0,
                          z_max, verdict)
    scale = theoretical_var if theoretical_var is not None else s2
    z_mean = (mean - theoretical_mean) / np.sqrt(scale / n)
    z_var = None
    if check_variance and theoretical_var is not None:
        spread = max(m4 - m2 * m2, 1e-300)
        z_var = float((s2 - theoretical_var) / np.sqrt(spread / n))
    verdict = abs(z_mean) <= z_max and (z_var is None or abs(z_var) <= z_max)
    return MomentTest(
        empirical_mean=mean, empirical_var=float(s2),
        theoretical_mean=float(theoretical_mean),
        theoretical_var=None if theoretical_var is None else float(theoretical_var),
        z_mean=float(z_mean), z_var=z_var, z_max=z_max, verdict=bool(verdict),
    )


def dispersion_test(samples, theoretical: float, *,
                    z_max: float = DEFAULT_Z_MAX) -> DispersionTest:
    """Test the variance-minus-mean gap against a signed theoretical value.

    The standard error of (S^2 - mean) comes from the joint asymptotics of
    the sample variance and mean with empirical central moments:
    Var = (m4 - m2^2 + m2 - 2 m3) / n. The verdict needs the gap to match
    theory within z_max standard errors and, when theory is nonzero, to be
    decisively (|z| >= z_max) of the right sign.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1 or arr.size < MIN_SAMPLES:
        raise ValueError(f"need a flat sample of at least {MIN_SAMPLES} values")
    n = arr.size
    mean, m2, m3, m4 = _central_moments(arr)
    s2 = m2 * n / (n - 1)
    gap = s2 - mean
    se = float(np.sqrt(max(m4 - m2 * m2 + m2 - 2.0 * m3, 1e-300) / n))
    z_sign = gap / se
    z_match = (gap - theoretical) / se
    if theoretical == 0.0:
        sign_ok = True
    else:
        sign_ok = (np.sign(gap) == np.sign(theoretical)) and abs(z_sign) >= z_max
    verdict = bool(sign_ok and abs(z_match) <= z_max)
    return DispersionTest(empirical=float(gap), theoretical=float(theoretical),
                          std_error=se, z_sign=float(z_sign),
                          z_match=float(z_match), z_max=z_max, verdict=verdict)


def tv_distance(dist_a: Mapping, dist_b: Mapping) -> float:
    """Total variation distance between two discrete distributions given as
    {outcome: probability} mappings."""
    keys = set(dist_a) | set(dist_b)
    return 0.5 * sum(abs(float(dist_a.get(k, 0.0)) - float(dist_b.get(k, 0.0)))
                     for k in keys)
