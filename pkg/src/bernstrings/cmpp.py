"""Conditional marked Poisson process representation of Bernoulli sequences.

A model is four ingredients: an initial value x0 drawn from ``initial``, a
nonhomogeneous Poisson process on (x0, 1) with conditional intensity
``intensity``, a first mark drawn from ``first_mark`` at x0, and one mark per
point drawn from ``mark_law``. The running sums of the marks are the
positions of the 1s in a Bernoulli sequence, and the count of marks equal to
k among the Poisson points (the first mark excluded) is the order-k gap
count Z_k. Given x0, the Z_k are independent Poisson with mean
integral of intensity(x0, x) * mark_pmf(x, k) over x.

The built-in Beta family realizes the decaying Bernoulli sequences:

* ``beta_bern(a, b)``: x0 ~ Beta(b, a), intensity a / (1 - x), geometric
  marks with success 1 - x; the bits are bern(a, b).
* ``beta_bern1(a, b)``, b > 1: x0 ~ Beta(b-1, a+1) and a first mark fixed
  at 1; the bits are bern1(a, b).
* ``plus(a, b)``: same but the first mark is size-biased geometric; the bits
  become dependent while the gap counts keep the beta_bern law.
* ``swapped()``: the a = 1, vanishing-b record construction with the first
  two point marks interchanged; again dependent bits, unchanged counts.

Point sampling inverts the cumulative intensity exactly: with unit-rate
arrival times G_i, the points are x_i = 1 - (1 - x0) exp(-G_i / a), stopped
at 1 - epsilon. The expected number of marks of order <= dmax lost to the
stopping is below a * dmax * epsilon.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exact
from .sequences import DEFAULT_DMAX, BitPrefix, CountVector, add_unit
from .exact import BetaMixing, Mixing, PointMixing

MARK_LOSS_TOL = 1e-3
_PMF_GRID = np.linspace(0.1, 0.9, 9)
_PMF_KMAX = 5000
_FINITENESS_WS = (0.0, 0.5, 0.9)


# ---------------------------------------------------------------------------
# ingredient laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BetaInitial:
    """Initial value with density x^(alpha-1) (1-x)^(beta-1) / B(alpha, beta)."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("Beta parameters must be positive")

    def sample(self, rng: np.random.Generator) -> float:
        x = float(rng.beta(self.alpha, self.beta))
        while not 0.0 < x < 1.0:
            x = float(rng.beta(self.alpha, self.beta))
        return x


@dataclass(frozen=True)
class FixedInitial:
    """Initial value pinned to a constant (used by the record construction)."""

    value: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.value < 1.0:
            raise ValueError("fixed initial value must lie in [0, 1)")

    def sample(self, rng: np.random.Generator) -> float:
        return self.value


@dataclass(frozen=True)
class GeometricMarks:
    """Mark law with pmf x^(k-1) (1-x): the waiting time to the next success
    when each trial succeeds with probability 1 - x."""

    def pmf(self, x, k):
        x = np.asarray(x, dtype=np.float64)
        k = np.asarray(k)
        return x ** (k - 1) * (1.0 - x)

    def sample(self, xs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if xs.size == 0:
            return np.empty(0, dtype=np.int64)
        # x = 0 is allowed (the mark is then 1 with certainty); x = 1 is not
        if np.any(xs < 0.0) or np.any(xs >= 1.0):
            raise ValueError("mark positions must lie in [0, 1)")
        return rng.geometric(1.0 - xs).astype(np.int64)

    def sample_one(self, x: float, rng: np.random.Generator) -> int:
        return int(self.sample(np.asarray([x]), rng)[0])


@dataclass(frozen=True)
class SizeBiasedGeometricMarks:
    """Mark law with pmf k x^(k-1) (1-x)^2, the size-biased geometric.

    Sampled as G1 + G2 - 1 for independent geometric G1, G2 with success
    1 - x, whose convolution gives exactly that pmf.
    """

    def pmf(self, x, k):
        x = np.asarray(x, dtype=np.float64)
        k = np.asarray(k)
        return k * x ** (k - 1) * (1.0 - x) ** 2

    def sample(self, xs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if xs.size == 0:
            return np.empty(0, dtype=np.int64)
        if np.any(xs < 0.0) or np.any(xs >= 1.0):
            raise ValueError("mark positions must lie in [0, 1)")
        g = rng.geometric(1.0 - xs, size=(2, xs.size))
        return (g.sum(axis=0) - 1).astype(np.int64)

    def sample_one(self, x: float, rng: np.random.Generator) -> int:
        return int(self.sample(np.asarray([x]), rng)[0])


@dataclass(frozen=True)
class UnitMarks:
    """Mark law concentrated at 1 (the forced-start first mark)."""

    def pmf(self, x, k):
        x = np.asarray(x, dtype=np.float64)
        k = np.asarray(k)
        return np.where(k == 1, np.ones_like(x * np.asarray(k, dtype=float)), 0.0)

    def sample(self, xs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return np.ones(np.asarray(xs).size, dtype=np.int64)

    def sample_one(self, x: float, rng: np.random.Generator) -> int:
        return 1


@dataclass(frozen=True)
class ReciprocalIntensity:
    """Conditional intensity rate / (1 - x) on (x0, 1), with closed-form
    cumulative rate * log((1 - x0) / (1 - x)) and its exact inverse."""

    rate: float

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ValueError("intensity rate must be positive")

    def intensity(self, x0: float, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return np.where((x > x0) & (x < 1.0), self.rate / (1.0 - x), 0.0)

    def cumulative(self, x0: float, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return self.rate * (np.log1p(-x0) - np.log1p(-x))

    def inverse_cumulative(self, x0: float, gamma) -> np.ndarray:
        g = np.asarray(gamma, dtype=np.float64)
        return 1.0 - (1.0 - x0) * np.exp(-g / self.rate)


# ---------------------------------------------------------------------------
# model definition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CmppSpec:
    """The four ingredients plus a tag naming the built-in family.

    Construction validates the contract: mark pmfs sum to 1, the intensity
    is non-negative, and the conditional mean count of each order k <= 16 is
    verifiably finite by node-doubled quadrature. Custom ingredients must
    satisfy the same protocol (pmf/sample for mark laws, sample for the
    initial law, intensity plus either inverse_cumulative or sample_points
    for the intensity).
    """

    initial: object
    first_mark: object
    intensity: object
    mark_law: object
    tag: str = "custom"
    swap_first_two_marks: bool = False

    def __post_init__(self) -> None:
        _validate_spec(self)

    @classmethod
    def beta_bern(cls, a: float, b: float) -> "CmppSpec":
        if not (a > 0 and b > 0):
            raise ValueError("beta_bern needs a > 0 and b > 0")
        return cls(
            initial=BetaInitial(b, a),
            first_mark=GeometricMarks(),
            intensity=ReciprocalIntensity(a),
            mark_law=GeometricMarks(),
            tag=f"beta_bern({a},{b})",
        )

    @classmethod
    def beta_bern1(cls, a: float, b: float) -> "CmppSpec":
        if not (a > 0 and b > 1):
            raise ValueError("beta_bern1 needs a > 0 and b > 1")
        return cls(
            initial=BetaInitial(b - 1.0, a + 1.0),
            first_mark=UnitMarks(),
            intensity=ReciprocalIntensity(a),
            mark_law=GeometricMarks(),
            tag=f"beta_bern1({a},{b})",
        )

    @classmethod
    def plus(cls, a: float, b: float) -> "CmppSpec":
        if not (a > 0 and b > 0):
            raise ValueError("plus needs a > 0 and b > 0")
        return cls(
            initial=BetaInitial(b, a),
            first_mark=SizeBiasedGeometricMarks(),
            intensity=ReciprocalIntensity(a),
            mark_law=GeometricMarks(),
            tag=f"plus({a},{b})",
        )

    @classmethod
    def swapped(cls) -> "CmppSpec":
        """Record construction at a = 1 started from 0 with a unit first
        mark, then the marks of the first two points interchanged."""
        return cls(
            initial=FixedInitial(0.0),
            first_mark=UnitMarks(),
            intensity=ReciprocalIntensity(1.0),
            mark_law=GeometricMarks(),
            tag="swapped",
            swap_first_two_marks=True,
        )


def _validate_spec(spec: CmppSpec) -> None:
    ks = np.arange(1, _PMF_KMAX + 1, dtype=np.int64)
    for name, law in (("first_mark", spec.first_mark), ("mark_law", spec.mark_law)):
        for x in _PMF_GRID:
            total = float(np.sum(law.pmf(x, ks)))
            if abs(total - 1.0) > 1e-12:
                raise ValueError(
                    f"{name} pmf sums to {total!r} at x={x:.2f}, expected 1"
                )
    sampler = getattr(spec.intensity, "sample_points", None)
    inverse = getattr(spec.intensity, "inverse_cumulative", None)
    if sampler is None and inverse is None:
        raise ValueError(
            "intensity must provide inverse_cumulative or its own sample_points"
        )
    for w in _FINITENESS_WS:
        for k in (1, DEFAULT_DMAX):
            def integrand(x, w=w, k=k):
                lam = np.asarray(spec.intensity.intensity(w, x), dtype=np.float64)
                if np.any(lam < 0):
                    raise ValueError("intensity must be non-negative")
                return lam * spec.mark_law.pmf(x, k)
            lo = exact._gl_sum(integrand, w, 1.0, 64)
            hi = exact._gl_sum(integrand, w, 1.0, 128)
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise ValueError(f"mean count of order {k} is not finite from {w}")
            if abs(hi - lo) > 1e-6 * max(1.0, abs(hi)):
                raise ValueError(
                    f"mean count of order {k} from {w} is not verifiably finite "
                    f"(quadrature unstable: {lo!r} vs {hi!r})"
                )


# ---------------------------------------------------------------------------
# realizations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointRealization:
    """One draw of the marked process.

    ``marks[0]`` is the first mark attached to x0; ``marks[i]`` for i >= 1
    belongs to the i-th point in model order. ``partial_sums`` are the
    positions of the 1s in the assembled sequence.
    """

    x0: float
    points: np.ndarray
    marks: np.ndarray
    epsilon: float
    source: str = "custom"
    partial_sums: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        marks = np.ascontiguousarray(self.marks, dtype=np.int64)
        if marks.size != pts.size + 1:
            raise ValueError("need exactly one mark per point plus the first mark")
        if np.any(marks < 1):
            raise ValueError("marks must be integers >= 1")
        if pts.size:
            if pts[0] <= self.x0 or pts[-1] >= 1.0:
                raise ValueError("points must lie strictly inside (x0, 1)")
            # The process has strictly ascending points, but near 1 the gap
            # (1 - x) * Exp(1) falls below float64 resolution and neighbors
            # round to the same value, so ties are tolerated here.
            if np.any(np.diff(pts) < 0.0):
                raise ValueError("points must be ascending")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "marks", marks)
        object.__setattr__(self, "partial_sums", np.cumsum(marks))


def default_epsilon(rate: float, dmax: int, tol: float = MARK_LOSS_TOL) -> float:
    """Stopping margin sized so the expected number of lost marks of order
    <= dmax stays below tol."""
    if not (rate > 0 and dmax >= 1 and tol > 0):
        raise ValueError("need rate > 0, dmax >= 1, tol > 0")
    return tol / (rate * dmax)


def sample_points(spec: CmppSpec, x0: float, epsilon: float,
                  rng: np.random.Generator) -> np.ndarray:
    """All points of the conditional Poisson process below 1 - epsilon,
    in ascending order, by exact inversion of the cumulative intensity."""
    if not 0.0 <= x0 < 1.0:
        raise ValueError("x0 must lie in [0, 1)")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    own = getattr(spec.intensity, "sample_points", None)
    if own is not None:
        return np.asarray(own(x0, epsilon, rng), dtype=np.float64)
    inverse = spec.intensity.inverse_cumulative
    upper = 1.0 - epsilon
    if x0 >= upper:
        return np.empty(0, dtype=np.float64)
    chunks: list[np.ndarray] = []
    offset = 0.0
    while True:
        gam = offset + np.cumsum(rng.exponential(size=64))
        x = np.asarray(inverse(x0, gam), dtype=np.float64)
        inside = x < upper
        if not bool(inside.all()):
            chunks.append(x[inside])
            break
        chunks.append(x)
        offset = float(gam[-1])
    return np.concatenate(chunks)


def realize(spec: CmppSpec, rng: np.random.Generator, *,
            epsilon: float | None = None, dmax: int = DEFAULT_DMAX) -> PointRealization:
    """Draw x0, the points, and all marks for one realization."""
    if epsilon is None:
        rate = getattr(spec.intensity, "rate", None)
        if rate is None:
            raise ValueError("custom intensity without a rate: pass epsilon explicitly")
        epsilon = default_epsilon(rate, dmax)
    x0 = float(spec.initial.sample(rng))
    pts = sample_points(spec, x0, epsilon, rng)
    marks = np.empty(pts.size + 1, dtype=np.int64)
    marks[0] = spec.first_mark.sample_one(x0, rng)
    if pts.size:
        marks[1:] = spec.mark_law.sample(pts, rng)
    if spec.swap_first_two_marks:
        if pts.size < 2:
            raise RuntimeError(
                "swap model needs at least two points; epsilon is too coarse"
            )
        marks[1], marks[2] = marks[2], marks[1]
    return PointRealization(x0=x0, points=pts, marks=marks, epsilon=epsilon,
                            source=spec.tag)


def sample_mark_q(x: float, rng: np.random.Generator) -> int:
    """One geometric mark at position x (success probability 1 - x)."""
    return GeometricMarks().sample_one(x, rng)


def sample_mark_rplus(x: float, rng: np.random.Generator) -> int:
    """One size-biased geometric mark at position x."""
    return SizeBiasedGeometricMarks().sample_one(x, rng)


def assemble_bits(real: PointRealization, n: int) -> BitPrefix:
    """The first n bits implied by the realization: 1s at the partial sums.

    When the realization's marks stop short of position n the suffix is
    unknown; the returned prefix then carries truncated=True rather than
    passing off the padding zeros as data.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    ps = real.partial_sums
    bits = np.zeros(n, dtype=np.uint8)
    bits[ps[ps <= n] - 1] = 1
    truncated = bool(ps[-1] < n)
    return BitPrefix(bits=bits, model=f"cmpp:{real.source}", params=None,
                     truncated=truncated)


def counts_from_marks(real: PointRealization, dmax: int = DEFAULT_DMAX) -> CountVector:
    """Gap counts read straight off the marks: Z_k is the number of point
    marks equal to k, the first mark excluded; orders above dmax pool into
    overflow."""
    if dmax < 1:
        raise ValueError("dmax must be at least 1")
    counts: dict[int, int] = {}
    overflow = 0
    for mk in real.marks[1:]:
        k = int(mk)
        if k <= dmax:
            counts[k] = counts.get(k, 0) + 1
        else:
            overflow += 1
    return CountVector(counts=counts, dmax=dmax, overflow=overflow)


# ---------------------------------------------------------------------------
# the mixture shortcut for the count law
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixtureSpec:
    """Sampling form of the count law: draw x0 from the mixing measure, then
    independent Poisson counts with mean a (1 - x0^k) / k."""

    a: float
    mixing: Mixing

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise ValueError("a must be positive")

    @classmethod
    def for_bern(cls, a: float, b: float) -> "MixtureSpec":
        """Count law of bern(a, b); b = 0 degenerates to the point mass at 0
        (independent Poisson a/k)."""
        if not a > 0 or b < 0:
            raise ValueError("need a > 0 and b >= 0")
        mixing = PointMixing(0.0) if b == 0 else BetaMixing(b, a)
        return cls(a=a, mixing=mixing)

    @classmethod
    def for_bern1(cls, a: float, b: float) -> "MixtureSpec":
        """Count law of bern1(a, b); needs b >= 1, with b = 1 the point mass
        at 0. For b < 1 no Poisson mixture represents the counts."""
        if not a > 0:
            raise ValueError("a must be positive")
        if b < 1:
            raise ValueError("no mixture representation for b < 1")
        mixing = PointMixing(0.0) if b == 1 else BetaMixing(b - 1.0, a + 1.0)
        return cls(a=a, mixing=mixing)

    def intensity_of(self, k: int, x0) -> np.ndarray:
        """Conditional Poisson mean of Z_k given x0: a (1 - x0^k) / k."""
        if k < 1:
            raise ValueError("k must be at least 1")
        return exact.mixture_intensity(self.a, k, x0)

    def sample_x0(self, rng: np.random.Generator) -> float:
        if isinstance(self.mixing, PointMixing):
            return self.mixing.x0
        x = float(rng.beta(self.mixing.alpha, self.mixing.beta))
        while not 0.0 < x < 1.0:
            x = float(rng.beta(self.mixing.alpha, self.mixing.beta))
        return x

    def pmf(self, k: int, j: int) -> float:
        return exact.mixture_pmf(self.a, self.mixing, k, j)

    def moments(self, k: int) -> tuple[float, float]:
        return exact.mixture_moments(self.a, self.mixing, k)


def sample_mixture_counts(mix: MixtureSpec, dmax: int,
                          rng: np.random.Generator) -> CountVector:
    """One draw of (Z_1, ..., Z_dmax) from the mixture law.

    Orders above dmax are not sampled and overflow stays 0: over an infinite
    horizon the total gap count across all orders is almost surely infinite,
    so only the per-order counts are meaningful here.
    """
    if dmax < 1:
        raise ValueError("dmax must be at least 1")
    x0 = mix.sample_x0(rng)
    ks = np.arange(1, dmax + 1)
    zs = rng.poisson(exact.mixture_intensity(mix.a, ks, x0))
    counts = {int(k): int(z) for k, z in zip(ks, zs) if z > 0}
    return CountVector(counts=counts, dmax=dmax, overflow=0)


# ---------------------------------------------------------------------------
# the waiting-time recurrence sampler for bern1(a, b), any b >= 0
# ---------------------------------------------------------------------------


def second_one_position(a: float, b: float, rng: np.random.Generator) -> int:
    """Position of the second 1 in bern1(a, b): first success among
    independent trials at positions 2, 3, ... with probability
    a / (a + b + n - 2). Distributed exactly as second_success_pmf.

    Flips run in growing chunks because the position is heavy-tailed for
    b < 1; each chunk costs one uniform draw per position regardless of
    where the success lands, keeping replicate streams deterministic.
    """
    if not a > 0 or b < 0:
        raise ValueError("need a > 0 and b >= 0")
    n = 2
    chunk = 64
    while n <= 10 ** 9:
        ks = np.arange(n, n + chunk, dtype=np.float64)
        hit = np.flatnonzero(rng.random(chunk) < a / (a + b + ks - 2.0))
        if hit.size:
            return int(n + hit[0])
        n += chunk
        chunk = min(chunk * 8, 1 << 20)
    raise RuntimeError("second 1 not reached within 1e9 positions")


def sample_bern1_counts_recurrence(a: float, b: float, dmax: int,
                                   rng: np.random.Generator) -> CountVector:
    """Sample the gap counts of bern1(a, b) for any b >= 0 by conditioning
    on the position n of the second 1: the remaining counts follow the
    mixture law with Beta(b + n - 2, a + 1) mixing (point mass at 0 when
    b + n - 2 vanishes), plus the one gap of order n - 1 just completed."""
    if dmax < 1:
        raise ValueError("dmax must be at least 1")
    n = second_one_position(a, b, rng)
    alpha = b + n - 2.0
    mixing: Mixing = PointMixing(0.0) if alpha == 0.0 else BetaMixing(alpha, a + 1.0)
    z = sample_mixture_counts(MixtureSpec(a=a, mixing=mixing), dmax, rng)
    return add_unit(z, n - 1)
