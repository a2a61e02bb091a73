"""Monte Carlo sampling of the Bernoulli convolution and the x4 / x5 pushforwards.

Samples are the truncated random series ``sum_{k<=D} s_k lam^k`` with fair
independent signs, which lives on the symmetric attractor
``[-lam/(1-lam), lam/(1-lam)]``.  For lam = 1/4 the shift ``x + 1/3`` is the
{0, 2}-digit copy on ``[0, 2/3]``, the picture in which x4 and x5 act as
circle maps on [0, 1).

Random bits come from Philox streams keyed by ``(seed, block)``; blocks are a
fixed size, so a batch does not depend on how blocks are spread over workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import binomtest, ks_2samp

from .transform import QUARTER

BLOCK = 2**16
DEFAULT_DEPTH = 30
UNIT_SHIFT = 1 / 3


@dataclass(frozen=True, eq=False)
class SampleBatch:
    lam: float
    depth: int
    n: int
    seed: int
    points: np.ndarray

    @property
    def radius(self) -> float:
        return self.lam / (1 - self.lam)

    def unit_embedded(self) -> np.ndarray:
        """Points moved to the {0, 2}-digit copy on [0, 2/3] (lam = 1/4 only)."""
        if self.lam != QUARTER:
            raise ValueError("the unit embedding is defined for lam = 1/4")
        return self.points + UNIT_SHIFT


def _block(lam: float, depth: int, seed: int, b: int, size: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(b,))))
    bits = rng.integers(0, 2, size=(size, depth), dtype=np.int8)
    x = np.zeros(size)
    # smallest terms first
    for k in range(depth, 0, -1):
        x += (2.0 * bits[:, k - 1] - 1.0) * lam**k
    return x


def sample_batch(
    lam: float = QUARTER,
    depth: int = DEFAULT_DEPTH,
    n: int = 10**6,
    seed: int = 0,
    threads: int = 1,
) -> SampleBatch:
    if depth < 1 or n < 1:
        raise ValueError("depth and n must be at least 1")
    if not 0 < lam < 1:
        raise ValueError("lam must lie in (0, 1)")
    sizes = [min(BLOCK, n - i) for i in range(0, n, BLOCK)]
    jobs = [(lam, depth, seed, b, s) for b, s in enumerate(sizes)]
    if threads == 1 or len(jobs) == 1:
        parts = [_block(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads or None) as pool:
            parts = list(pool.map(lambda j: _block(*j), jobs))
    pts = np.concatenate(parts)
    pts.setflags(write=False)
    return SampleBatch(lam, depth, n, seed, pts)


def truncation_error(lam: float, depth: int) -> float:
    """Largest distance from a depth-D point to the untruncated series."""
    return lam ** (depth + 1) / (1 - lam)


def empirical_char(t: float, batch: SampleBatch) -> complex:
    """Sample mean of exp(2 pi i t x)."""
    a = 2 * np.pi * t * batch.points
    return complex(np.mean(np.cos(a)), np.mean(np.sin(a)))


def hutchinson_residual(batch: SampleBatch, gridM: int = 100) -> float:
    """sup_x |F(x) - F(x/lam - 1)/2 - F(x/lam + 1)/2| for the empirical CDF F."""
    if batch.n == 0 or len(batch.points) == 0:
        raise ValueError("empty batch")
    s = np.sort(batch.points)
    r = batch.radius
    x = np.linspace(-1.1 * r, 1.1 * r, gridM)

    def F(y):
        return np.searchsorted(s, y, side="right") / len(s)

    lam = batch.lam
    return float(np.max(np.abs(F(x) - 0.5 * F(x / lam - 1) - 0.5 * F(x / lam + 1))))


@dataclass(frozen=True)
class IntervalQuery:
    """Half-open interval (a, b]; ``unit`` selects the [0, 2/3] picture."""

    a: float
    b: float
    unit: bool = True

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("need a < b")


@dataclass(frozen=True)
class MassEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    count: int
    n: int


def circle_map(y: np.ndarray, n_scale: int) -> np.ndarray:
    """tau_n(y) = n y mod 1."""
    return np.mod(n_scale * y, 1.0)


def pushforward_mass(batch: SampleBatch, n_scale: int, q: IntervalQuery) -> MassEstimate:
    """Fraction of tau_n-images in (a, b] with a 95% Wilson interval."""
    if n_scale < 1:
        raise ValueError("n_scale must be a positive integer")
    y = batch.unit_embedded() if q.unit else np.asarray(batch.points)
    z = circle_map(y, n_scale)
    count = int(np.count_nonzero((z > q.a) & (z <= q.b)))
    ci = binomtest(count, batch.n).proportion_ci(confidence_level=0.95, method="wilson")
    return MassEstimate(count / batch.n, float(ci.low), float(ci.high), count, batch.n)


def ks_threshold(n: int, m: int | None = None) -> float:
    """Two-sample Kolmogorov-Smirnov critical distance at the 5% level."""
    m = n if m is None else m
    return 1.358 * np.sqrt((n + m) / (n * m))


def scaling_ks(batch: SampleBatch, n_scale: int) -> tuple[float, float]:
    """KS distance between the embedded batch and its tau_n image, and the 5% threshold."""
    y = batch.unit_embedded()
    stat = ks_2samp(y, circle_map(y, n_scale)).statistic
    return float(stat), float(ks_threshold(len(y)))


MAX_FIGURE_LEVELS = 12
FIGURE_COLUMNS = ("series", "index", "x0", "x1")


def cantor_intervals(level: int) -> list[tuple[Fraction, Fraction]]:
    """Level-``level`` cover of the [0, 2/3] Cantor set under x/4, (x+2)/4."""
    if not 0 <= level <= MAX_FIGURE_LEVELS:
        raise ValueError(f"levels must be in [0, {MAX_FIGURE_LEVELS}]")
    iv = [(Fraction(0), Fraction(2, 3))]
    for _ in range(level):
        iv = [((a + d) / 4, (b + d) / 4) for d in (0, 2) for a, b in iv]
    return sorted(iv)


def tau5_preimage(a: Fraction = Fraction(2, 3), b: Fraction = Fraction(1)):
    """Branches of tau_5^{-1}((a, b]): (k/5 + a/5, k/5 + b/5], k = 0..4."""
    return [(Fraction(k, 5) + a / 5, Fraction(k, 5) + b / 5) for k in range(5)]


def figure1_data(levels: int = 2, gridM: int = 501) -> list[tuple]:
    """Rows (series, index, x0, x1) for the tau_5 / Cantor-set picture.

    ``tau5``: sample points (x, tau_5(x)).  ``cantor_L``: intervals of the
    level-L cover, L = 1..levels.  ``preimage``: the five branches of
    tau_5^{-1}((2/3, 1]).  ``breakpoint``: k/5, where tau_5 jumps.
    """
    if levels > MAX_FIGURE_LEVELS:
        raise ValueError(f"levels > {MAX_FIGURE_LEVELS} refused ({2**levels} intervals per level)")
    if levels < 1 or gridM < 2:
        raise ValueError("need levels >= 1 and gridM >= 2")
    rows: list[tuple] = []
    x = np.linspace(0.0, 1.0, gridM)
    for i, (xi, yi) in enumerate(zip(x, circle_map(x, 5))):
        rows.append(("tau5", i, float(xi), float(yi)))
    for k in range(6):
        rows.append(("breakpoint", k, k / 5, k / 5))
    for level in range(1, levels + 1):
        for i, (a, b) in enumerate(cantor_intervals(level)):
            rows.append((f"cantor_{level}", i, float(a), float(b)))
    for i, (a, b) in enumerate(tau5_preimage()):
        rows.append(("preimage", i, float(a), float(b)))
    return rows
