"""Closed-form reference distributions and exact oracles.

Everything here is deterministic: cylinder probabilities for the decaying
Bernoulli families, the Poisson-mixture law of the gap counts, moment and
overdispersion formulas, a brute-force enumeration oracle over short
prefixes, and the truncation-bias bound used to size simulation horizons.

Numerical policy: probabilities are assembled in log space; Beta-weighted
integrals use Gauss-Jacobi quadrature, which folds the Beta density into
the quadrature weights, with node doubling (64 then 128 nodes) that fails
loudly when the two estimates disagree; the enumeration oracle works in
exact rational arithmetic on short horizons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy.special import gammaln, roots_jacobi

from .sequences import DEFAULT_DMAX, bern1_probabilities, bern_probabilities

QUAD_NODES = (64, 128)
QUAD_TOL = 1e-9
ENUM_HORIZON_CAP = 24


class QuadratureError(RuntimeError):
    """Raised when node doubling leaves the quadrature estimates apart."""


# ---------------------------------------------------------------------------
# mixing measures for the conditional-Poisson representation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BetaMixing:
    """Beta(alpha, beta) mixing density x^(alpha-1) (1-x)^(beta-1) / B."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("Beta mixing parameters must be positive")


@dataclass(frozen=True)
class PointMixing:
    """Point mass at x0 (the default 0 is the vanishing-b limit)."""

    x0: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.x0 <= 1.0:
            raise ValueError("point mass must sit in [0, 1]")


Mixing = Union[BetaMixing, PointMixing]


# ---------------------------------------------------------------------------
# special functions and quadrature
# ---------------------------------------------------------------------------


def log_beta(alpha: float, beta: float) -> float:
    if not (alpha > 0 and beta > 0):
        raise ValueError("beta function needs positive arguments")
    return math.lgamma(alpha) + math.lgamma(beta) - math.lgamma(alpha + beta)


def beta_fn(alpha: float, beta: float) -> float:
    """Euler beta function, evaluated in log space."""
    return math.exp(log_beta(alpha, beta))


@lru_cache(maxsize=None)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _gl_sum(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, n: int) -> float:
    x, w = _leggauss(n)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return float(half * np.sum(w * f(mid + half * x)))


@lru_cache(maxsize=64)
def _jacobi_nodes(n: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on (0, 1) and weights absorbing x^(alpha-1) (1-x)^(beta-1).

    Gauss-Jacobi rules carry the Beta weight inside the quadrature weights,
    so endpoint singularities and fractional-power endpoint behavior never
    touch the evaluated function; only the smooth factor h is sampled.
    """
    x, w = roots_jacobi(n, beta - 1.0, alpha - 1.0)
    u = 0.5 * (x + 1.0)
    scale = 2.0 ** (1.0 - alpha - beta)
    return u, scale * w


def _beta_weighted(
    h: Callable[[np.ndarray], np.ndarray], alpha: float, beta: float, n: int
) -> float:
    u, w = _jacobi_nodes(n, alpha, beta)
    return float(np.sum(w * h(u)))


def beta_expectation(
    alpha: float, beta: float, h: Callable[[np.ndarray], np.ndarray], tol: float = QUAD_TOL
) -> float:
    """E[h(X)] for X ~ Beta(alpha, beta), with node-doubling verification."""
    if not (alpha > 0 and beta > 0):
        raise ValueError("Beta parameters must be positive")
    lo, hi = (_beta_weighted(h, alpha, beta, n) for n in QUAD_NODES)
    if abs(hi - lo) > tol * max(1.0, abs(hi)):
        raise QuadratureError(
            f"node doubling disagrees: {lo!r} vs {hi!r} for Beta({alpha}, {beta})"
        )
    return hi / beta_fn(alpha, beta)


# ---------------------------------------------------------------------------
# cylinder probabilities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderPattern:
    """A finite pattern fixed by its successive gaps.

    gaps = (k_0, ..., k_n) pins the bits 1..K_n: ones exactly at the partial
    sums K_r = k_0 + ... + k_r, zeros elsewhere.
    """

    gaps: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.gaps) == 0:
            raise ValueError("pattern needs at least one gap")
        if any(int(k) != k or k < 1 for k in self.gaps):
            raise ValueError("gaps must be integers >= 1")
        object.__setattr__(self, "gaps", tuple(int(k) for k in self.gaps))

    @property
    def partial_sums(self) -> tuple[int, ...]:
        out = []
        acc = 0
        for k in self.gaps:
            acc += k
            out.append(acc)
        return tuple(out)

    @property
    def length(self) -> int:
        return self.partial_sums[-1]


def _pattern_prob_from_marginals(probs: np.ndarray, pattern: CylinderPattern) -> float:
    ones = np.zeros(pattern.length, dtype=bool)
    ones[np.asarray(pattern.partial_sums) - 1] = True
    factors = np.where(ones, probs, 1.0 - probs)
    if np.any(factors == 0.0):
        return 0.0
    return float(math.exp(np.log(factors).sum()))


def cylinder_prob_product(a: float, b: float, pattern: CylinderPattern) -> float:
    """Probability that bern(a, b) realizes the pattern, as the product of
    its independent position marginals."""
    return _pattern_prob_from_marginals(bern_probabilities(a, b, pattern.length), pattern)


def cylinder_prob_bern1(a: float, b: float, pattern: CylinderPattern) -> float:
    """Pattern probability under bern1(a, b); the first gap must be 1
    because the first bit is surely a 1."""
    if pattern.gaps[0] != 1:
        raise ValueError("bern1 patterns must open with gap 1 (Y_1 = 1 surely)")
    return _pattern_prob_from_marginals(bern1_probabilities(a, b, pattern.length), pattern)


def cylinder_prob_integral(a: float, b: float, pattern: CylinderPattern) -> float:
    """Pattern probability under bern(a, b) in closed Beta-ratio form:

        B(b + K_n - 1, a + 1) / B(b, a) * a^n / prod_{s<n} (b + K_s - 1)

    with K_0..K_n the pattern's partial sums. Requires b > 0 (the ratio
    degenerates in the b -> 0 limit; use the product form there).
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if not b > 0:
        raise ValueError("integral form requires b > 0")
    ks = pattern.partial_sums
    n = len(ks) - 1
    logv = log_beta(b + ks[-1] - 1.0, a + 1.0) - log_beta(b, a) + n * math.log(a)
    for s in range(n):
        logv -= math.log(b + ks[s] - 1.0)
    return math.exp(logv)


# ---------------------------------------------------------------------------
# the waiting time to the second 1 in bern1(a, b)
# ---------------------------------------------------------------------------


def second_success_pmf(a: float, b: float, n) -> float | np.ndarray:
    """P(the second 1 of bern1(a, b) sits at position n), n >= 2.

        p_2 = a / (a + b),
        p_n = a / (a + b + n - 2) * prod_{r=0}^{n-3} (b + r) / (a + b + r).

    Accepts a scalar or an integer array for n.
    """
    if not a > 0 or b < 0:
        raise ValueError("need a > 0 and b >= 0")
    arr = np.asarray(n)
    if arr.size == 0 or np.any(arr < 2) or not np.issubdtype(arr.dtype, np.integer):
        raise ValueError("positions must be integers >= 2")
    nn = arr.astype(np.float64)
    if b == 0:
        # the second 1 follows immediately: p_2 = 1, everything else 0
        out = np.where(arr == 2, 1.0, 0.0)
    else:
        logp = (
            math.log(a)
            - np.log(a + b + nn - 2.0)
            + gammaln(b + nn - 2.0)
            - gammaln(b)
            - gammaln(a + b + nn - 2.0)
            + gammaln(a + b)
        )
        out = np.exp(logp)
    return float(out) if np.isscalar(n) or arr.ndim == 0 else out


# ---------------------------------------------------------------------------
# first-order gap-count moments for bern1(a, b)
# ---------------------------------------------------------------------------


def bern1_z1_moments(a: float, b: float) -> tuple[float, float]:
    """Mean and variance of the order-1 gap count of bern1(a, b):

        E Z_1  = a (a + 1) / (a + b)
        E Z_1^2 = E Z_1 + a^2 (a + 1)(a + 2) / ((a + b)(a + b + 1))
    """
    if not a > 0 or b < 0:
        raise ValueError("need a > 0 and b >= 0")
    mean = a * (a + 1.0) / (a + b)
    second = mean + a * a * (a + 1.0) * (a + 2.0) / ((a + b) * (a + b + 1.0))
    return mean, second - mean * mean


def overdispersion_z1(a: float, b: float) -> float:
    """Var(Z_1) - E(Z_1) for bern1(a, b):

        a^2 (a + 1)(b - 1) / ((a + b)^2 (a + b + 1))

    Negative for b < 1 (no Poisson mixture can represent Z_1 there), zero at
    b = 1, positive for b > 1.
    """
    if not a > 0 or b < 0:
        raise ValueError("need a > 0 and b >= 0")
    return a * a * (a + 1.0) * (b - 1.0) / ((a + b) ** 2 * (a + b + 1.0))


# ---------------------------------------------------------------------------
# the Poisson mixture law of the gap counts
# ---------------------------------------------------------------------------


def _poisson_pmf(j: int, mean) -> np.ndarray:
    m = np.asarray(mean, dtype=np.float64)
    if j == 0:
        return np.exp(-m)
    with np.errstate(divide="ignore"):
        logp = -m + j * np.log(m) - math.lgamma(j + 1)
    return np.where(m > 0.0, np.exp(logp), 0.0)


def mixture_intensity(a: float, k: int, x0) -> np.ndarray:
    """Conditional mean count of order-k gaps given the initial value x0:
    a (1 - x0^k) / k."""
    return a * (1.0 - np.asarray(x0, dtype=np.float64) ** k) / k


def mixture_pmf(a: float, mixing: Mixing, k: int, j: int) -> float:
    """P(Z_k = j) when Z_k is Poisson with mean a (1 - x0^k) / k and x0
    follows the mixing measure."""
    if not a > 0:
        raise ValueError("a must be positive")
    if k < 1 or j < 0:
        raise ValueError("need k >= 1 and j >= 0")
    if isinstance(mixing, PointMixing):
        return float(_poisson_pmf(j, mixture_intensity(a, k, mixing.x0)))
    return beta_expectation(
        mixing.alpha, mixing.beta, lambda x: _poisson_pmf(j, mixture_intensity(a, k, x))
    )


def _beta_power_moment(alpha: float, beta: float, k: int) -> float:
    """E[X^k] for X ~ Beta(alpha, beta): prod_{i<k} (alpha + i) / (alpha + beta + i)."""
    val = 1.0
    for i in range(k):
        val *= (alpha + i) / (alpha + beta + i)
    return val


def mixture_moments(a: float, mixing: Mixing, k: int) -> tuple[float, float]:
    """Mean and variance of Z_k under the mixture law.

    mean = a (1 - E[x0^k]) / k and the variance adds the mixing spread:
    var = mean + (a/k)^2 Var(x0^k).
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if k < 1:
        raise ValueError("k must be at least 1")
    if isinstance(mixing, PointMixing):
        m = float(mixture_intensity(a, k, mixing.x0))
        return m, m
    ek = _beta_power_moment(mixing.alpha, mixing.beta, k)
    e2k = _beta_power_moment(mixing.alpha, mixing.beta, 2 * k)
    mean = a * (1.0 - ek) / k
    var = mean + (a / k) ** 2 * (e2k - ek * ek)
    return mean, var


# ---------------------------------------------------------------------------
# dependent-sequence reference values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlusModelProbs:
    """Low-order marginals of the size-biased-first-mark model."""

    y1: float
    y2: float
    y1_and_y2: float

    @property
    def product_gap(self) -> float:
        """P(Y1=1)P(Y2=1) - P(Y1=1, Y2=1); nonzero means dependence."""
        return self.y1 * self.y2 - self.y1_and_y2


def plus_model_probs(a: float, b: float) -> PlusModelProbs:
    """Closed-form bit marginals when the first mark is size-biased:

        P(Y1=1)       = a (a + 1) / ((a + b)(a + b + 1))
        P(Y2=1)       = (a^2 (a + 2) + 2 b a (a + 1)) / ((a + b)(a + b + 1)(a + b + 2))
        P(Y1=1,Y2=1)  = a^2 (a + 2) / ((a + b)(a + b + 1)(a + b + 2))
    """
    if not (a > 0 and b > 0):
        raise ValueError("need a > 0 and b > 0")
    d1 = (a + b) * (a + b + 1.0)
    d2 = d1 * (a + b + 2.0)
    return PlusModelProbs(
        y1=a * (a + 1.0) / d1,
        y2=(a * a * (a + 2.0) + 2.0 * b * a * (a + 1.0)) / d2,
        y1_and_y2=a * a * (a + 2.0) / d2,
    )


@dataclass(frozen=True)
class SwappedModelProbs:
    """Bit probabilities after interchanging the first two marked points of
    the record construction (a = 1, vanishing b)."""

    y2: float
    y3: float
    y2_and_y3: float
    y2c_and_y3: float

    @property
    def product(self) -> float:
        return self.y2 * self.y3


def swapped_model_probs() -> SwappedModelProbs:
    """P(Y2=1) = 1/4, P(Y3=1) = 11/36, P(Y2=1,Y3=1) = 1/6, and
    P(Y2=0,Y3=1) = 5/36; the product 11/144 differs from 1/6."""
    return SwappedModelProbs(
        y2=0.25, y3=11.0 / 36.0, y2_and_y3=1.0 / 6.0, y2c_and_y3=5.0 / 36.0
    )


# ---------------------------------------------------------------------------
# brute-force enumeration oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactDistribution:
    """Exact joint law of the windowed count vector on a short horizon.

    ``outcomes[i]`` is ((counts for d=1..dmax), overflow) and carries
    probability ``probabilities[i]``; probabilities are Fractions when the
    enumeration ran in exact arithmetic.
    """

    outcomes: tuple[tuple[tuple[int, ...], int], ...]
    probabilities: tuple
    horizon: int
    dmax: int

    def __post_init__(self) -> None:
        total = sum(self.probabilities)
        if isinstance(total, Fraction):
            if total != 1:
                raise ValueError(f"probabilities sum to {total}, not 1")
        elif abs(float(total) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    def marginal(self, d: int) -> dict[int, float]:
        """Distribution of the order-d count (d <= dmax) as {value: prob}."""
        if not 1 <= d <= self.dmax:
            raise ValueError(f"order {d} outside 1..{self.dmax}")
        out: dict[int, object] = {}
        for (counts, _), p in zip(self.outcomes, self.probabilities):
            j = counts[d - 1]
            out[j] = out.get(j, 0) + p
        return {j: float(p) for j, p in sorted(out.items())}

    def marginal_exact(self, d: int) -> dict[int, Fraction]:
        if not 1 <= d <= self.dmax:
            raise ValueError(f"order {d} outside 1..{self.dmax}")
        out: dict[int, Fraction] = {}
        for (counts, _), p in zip(self.outcomes, self.probabilities):
            j = counts[d - 1]
            out[j] = out.get(j, Fraction(0)) + Fraction(p)
        return dict(sorted(out.items()))


def enumerate_truncated(
    a,
    b,
    model: str = "bern",
    m: int = 12,
    dmax: int = 4,
    exact: bool | None = None,
) -> ExactDistribution:
    """Enumerate all 2^m prefixes of bern/bern1(a, b) and aggregate the
    exact law of the windowed count vector.

    Runs in exact rational arithmetic by default up to m = 16 (floats are
    dyadic, so Fraction(a) represents the parameter exactly); the horizon is
    capped at 24 because the walk is deliberately brute force.
    """
    if not 1 <= m <= ENUM_HORIZON_CAP:
        raise ValueError(f"horizon must lie in 1..{ENUM_HORIZON_CAP}")
    if dmax < 1:
        raise ValueError("dmax must be at least 1")
    if model not in ("bern", "bern1"):
        raise ValueError(f"unknown model {model!r}")
    use_exact = (m <= 16) if exact is None else exact

    if use_exact:
        aa, bb = Fraction(a), Fraction(b)
        if model == "bern":
            probs = [aa / (aa + bb + k - 1) for k in range(1, m + 1)]
        else:
            probs = [Fraction(1)] + [aa / (aa + bb + k - 2) for k in range(2, m + 1)]
        one, zero = Fraction(1), Fraction(0)
    else:
        gen = bern_probabilities if model == "bern" else bern1_probabilities
        probs = [float(p) for p in gen(a, b, m)]
        one, zero = 1.0, 0.0
    if any(p < 0 or p > 1 for p in probs):
        raise ValueError("marginal probabilities fall outside [0, 1]")

    dist: dict[tuple[tuple[int, ...], int], object] = {}
    # depth-first walk over all prefixes; each stack entry carries the
    # probability of its branch so leaves cost one multiply per level
    blank = (0,) * dmax
    stack = [(0, one, -1, blank, 0)]
    while stack:
        i, w, last_one, counts, over = stack.pop()
        if i == m:
            key = (counts, over)
            dist[key] = dist.get(key, zero) + w
            continue
        p = probs[i]
        if p < 1:
            stack.append((i + 1, w * (1 - p), last_one, counts, over))
        if p > 0:
            c2, o2 = counts, over
            if last_one >= 0:
                d = i + 1 - last_one
                if d <= dmax:
                    c2 = counts[:d - 1] + (counts[d - 1] + 1,) + counts[d:]
                else:
                    o2 = over + 1
            stack.append((i + 1, w * p, i + 1, c2, o2))

    items = sorted(dist.items())
    return ExactDistribution(
        outcomes=tuple(k for k, _ in items),
        probabilities=tuple(v for _, v in items),
        horizon=m,
        dmax=dmax,
    )


# ---------------------------------------------------------------------------
# horizon sizing
# ---------------------------------------------------------------------------


def truncation_bias_bound(a: float, b: float, dmax: int, horizon: int) -> float:
    """Upper bound on the expected number of gaps of order <= dmax missed
    by windowed counting on an n-bit prefix of bern(a, b):

        sum_{d<=dmax} sum_{n>N-d} a^2 / ((a+b+n-1)(a+b+n+d-1))

    evaluated through its telescoped form (a^2/d) sum_{j=N-d+1}^{N}
    1/(a+b-1+j). At a=1, b=0, dmax=1 this is exactly 1/N.
    """
    if not a > 0 or b < 0:
        raise ValueError("need a > 0 and b >= 0")
    if dmax < 1:
        raise ValueError("dmax must be at least 1")
    if horizon <= dmax:
        raise ValueError("horizon must exceed dmax")
    c = a + b - 1.0
    total = 0.0
    for d in range(1, dmax + 1):
        j = np.arange(horizon - d + 1, horizon + 1, dtype=np.float64)
        total += (a * a / d) * float(np.sum(1.0 / (c + j)))
    return total


def horizon_for_bias(a: float, b: float, dmax: int, target: float) -> int:
    """Smallest horizon whose truncation_bias_bound drops below target."""
    if not target > 0:
        raise ValueError("target must be positive")
    lo, hi = dmax + 1, dmax + 2
    while truncation_bias_bound(a, b, dmax, hi) > target:
        hi *= 2
        if hi > 10 ** 9:
            raise ValueError("bias target needs a horizon beyond 1e9 bits")
    while lo < hi:
        mid = (lo + hi) // 2
        if mid <= dmax or truncation_bias_bound(a, b, dmax, mid) > target:
            lo = mid + 1
        else:
            hi = mid
    return hi
