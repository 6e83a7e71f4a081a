"""
Limiting spectral laws and empirical-distribution fitting.

Every law exposes a vectorized ``density`` and ``cdf``, its ``support`` as a
list of closed intervals, and the interior ``breakpoints`` where the density
is not smooth (used to split quadrature). The analytic kinds are

* :class:`Semicircle` with parameter ``a``: density ``sqrt(4a^2 - x^2) / (2 pi a^2)``
  on ``[-2a, 2a]``.
* :class:`Quartercircle` with parameter ``b``: density ``sqrt(4b^2 - x^2) / (pi b^2)``
  on ``[0, 2b]``, total mass one.
* :class:`QuartercirclePair` with parameters ``(alpha, beta, gamma)``: half
  of the mass on a reflected quartercircle of radius ``2 alpha`` ending at
  ``-gamma`` and half on a quartercircle of radius ``2 beta`` starting at
  ``+gamma``. ``gamma = 0`` gives the two-sided pair law, ``gamma > 0`` the
  shifted pair with a spectral gap ``(-gamma, gamma)``.
* :class:`Shifted` and :class:`Scaled` wrappers.

:class:`Empirical` (a finite sample) and :class:`Tabulated` (a density
known on a grid) cover the non-analytic cases.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import List, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from .errors import InvalidInputError, InvalidParameterError

__all__ = [
    "SpectralLaw",
    "Semicircle",
    "Quartercircle",
    "QuartercirclePair",
    "shifted_pair",
    "Shifted",
    "Scaled",
    "Empirical",
    "Tabulated",
    "Histogram",
    "density",
    "cdf",
    "classical_locations",
    "ks_distance",
    "moments",
    "histogram",
    "total_mass",
]

Interval = Tuple[float, float]


class SpectralLaw:
    """Common interface of all laws."""

    kind = "abstract"
    analytic = True

    def density(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def support(self) -> List[Interval]:
        raise NotImplementedError

    def breakpoints(self) -> List[float]:
        """Sorted points, including the support ends, where the density is not smooth."""
        pts = sorted({p for iv in self.support() for p in iv})
        return pts

    def hull(self) -> Interval:
        sup = self.support()
        return sup[0][0], sup[-1][1]

    def ppf(self, q, iterations: int = 80):
        """Quantile function by vectorized bisection on the support hull."""
        q = np.asarray(q, dtype=float)
        lo_end, hi_end = self.hull()
        lo = np.full(q.shape, lo_end)
        hi = np.full(q.shape, hi_end)
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < q
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def moment(self, k: int) -> float:
        pts = self.breakpoints()
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            if b > a:
                total += integrate.quad(lambda x: x**k * float(self.density(x)), a, b, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
        return total


def _semicircle_cdf_unit(u):
    # CDF of the standard semicircle on [-2, 2] at u.
    u = np.clip(u, -2.0, 2.0)
    return 0.5 + u * np.sqrt(4.0 - u * u) / (4.0 * np.pi) + np.arcsin(u / 2.0) / np.pi


def _quarter_cdf(u, b):
    # CDF of the quartercircle of radius 2b on [0, 2b] at u.
    u = np.clip(u, 0.0, 2.0 * b)
    return (0.5 * u * np.sqrt(4.0 * b * b - u * u) + 2.0 * b * b * np.arcsin(u / (2.0 * b))) / (np.pi * b * b)


def _positive(name, value):
    if not value > 0 or not np.isfinite(value):
        raise InvalidParameterError(f"{name} must be positive and finite, got {value}")
    return float(value)


@dataclass(frozen=True)
class Semicircle(SpectralLaw):
    a: float = 1.0
    kind = "semicircle"

    def __post_init__(self):
        _positive("a", self.a)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        r = 4.0 * self.a**2 - x * x
        return np.where(r > 0, np.sqrt(np.maximum(r, 0.0)) / (2.0 * np.pi * self.a**2), 0.0)

    def cdf(self, x):
        return _semicircle_cdf_unit(np.asarray(x, dtype=float) / self.a)

    def support(self):
        return [(-2.0 * self.a, 2.0 * self.a)]

    def moment(self, k: int) -> float:
        if k % 2:
            return 0.0
        m = k // 2
        return self.a**k * comb(2 * m, m) / (m + 1)


@dataclass(frozen=True)
class Quartercircle(SpectralLaw):
    b: float = 1.0
    kind = "quartercircle"

    def __post_init__(self):
        _positive("b", self.b)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        b = self.b
        inside = (x >= 0) & (x <= 2 * b)
        return np.where(inside, np.sqrt(np.maximum(4 * b * b - x * x, 0.0)) / (np.pi * b * b), 0.0)

    def cdf(self, x):
        return _quarter_cdf(np.asarray(x, dtype=float), self.b)

    def support(self):
        return [(0.0, 2.0 * self.b)]


@dataclass(frozen=True)
class QuartercirclePair(SpectralLaw):
    """Half-mass reflected quartercircle on the left, half-mass quartercircle on the right.

    The left piece lives on ``[-gamma - 2 alpha, -gamma]``, the right piece
    on ``[gamma, gamma + 2 beta]``.
    """

    alpha: float
    beta: float
    gamma: float = 0.0

    def __post_init__(self):
        _positive("alpha", self.alpha)
        _positive("beta", self.beta)
        if not self.gamma >= 0 or not np.isfinite(self.gamma):
            raise InvalidParameterError(f"gamma must be non-negative, got {self.gamma}")

    @property
    def kind(self):
        return "shifted_pair" if self.gamma > 0 else "quartercircle_pair"

    def density(self, x):
        x = np.asarray(x, dtype=float)
        al, be, ga = self.alpha, self.beta, self.gamma
        left = -x - ga
        right = x - ga
        dl = np.where((left > 0) & (left <= 2 * al), np.sqrt(np.maximum(4 * al * al - left * left, 0.0)) / (2 * np.pi * al * al), 0.0)
        dr = np.where((right >= 0) & (right <= 2 * be), np.sqrt(np.maximum(4 * be * be - right * right, 0.0)) / (2 * np.pi * be * be), 0.0)
        return dl + dr

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        left = 0.5 * (1.0 - _quarter_cdf(-x - self.gamma, self.alpha))
        right = 0.5 + 0.5 * _quarter_cdf(x - self.gamma, self.beta)
        return np.where(x < self.gamma, left, right)

    def support(self):
        g = self.gamma
        if g == 0:
            return [(-2.0 * self.alpha, 2.0 * self.beta)]
        return [(-g - 2.0 * self.alpha, -g), (g, g + 2.0 * self.beta)]

    def breakpoints(self):
        g = self.gamma
        return sorted({-g - 2 * self.alpha, -g, g, g + 2 * self.beta})


def shifted_pair(alpha: float, beta: float, gamma: float) -> QuartercirclePair:
    """Pair law with its two halves pushed ``gamma`` away from the origin."""
    return QuartercirclePair(alpha, beta, gamma)


@dataclass(frozen=True)
class Shifted(SpectralLaw):
    base: SpectralLaw
    offset: float
    kind = "shifted"

    @property
    def analytic(self):
        return self.base.analytic

    def density(self, x):
        return self.base.density(np.asarray(x, dtype=float) - self.offset)

    def cdf(self, x):
        return self.base.cdf(np.asarray(x, dtype=float) - self.offset)

    def support(self):
        return [(lo + self.offset, hi + self.offset) for lo, hi in self.base.support()]

    def breakpoints(self):
        return [p + self.offset for p in self.base.breakpoints()]


@dataclass(frozen=True)
class Scaled(SpectralLaw):
    base: SpectralLaw
    factor: float
    kind = "scaled"

    def __post_init__(self):
        _positive("factor", self.factor)

    @property
    def analytic(self):
        return self.base.analytic

    def density(self, x):
        return self.base.density(np.asarray(x, dtype=float) / self.factor) / self.factor

    def cdf(self, x):
        return self.base.cdf(np.asarray(x, dtype=float) / self.factor)

    def support(self):
        return [(lo * self.factor, hi * self.factor) for lo, hi in self.base.support()]

    def breakpoints(self):
        return [p * self.factor for p in self.base.breakpoints()]

    def moment(self, k):
        return self.factor**k * self.base.moment(k)


class Empirical(SpectralLaw):
    """Uniform measure on a finite sample; its density is a histogram."""

    kind = "empirical"
    analytic = False

    def __init__(self, samples, bins: int = 60):
        s = np.sort(np.asarray(samples, dtype=float).ravel())
        if s.size == 0:
            raise InvalidInputError("empirical law needs at least one sample")
        self.samples = s
        self.bins = int(bins)

    def cdf(self, x):
        return np.searchsorted(self.samples, np.asarray(x, dtype=float), side="right") / self.samples.size

    def density(self, x):
        h = histogram(self.samples, self.bins)
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(h.right, x, side="left")
        inside = (x >= h.left[0]) & (x <= h.right[-1])
        return np.where(inside, h.density[np.clip(idx, 0, h.density.size - 1)], 0.0)

    def support(self):
        return [(float(self.samples[0]), float(self.samples[-1]))]

    def moment(self, k):
        return float(np.mean(self.samples**k))


class Tabulated(SpectralLaw):
    """A law known through density values on an increasing grid.

    The density is linearly interpolated and the CDF is the cumulative
    trapezoid rule divided by the total trapezoid mass, so it runs exactly
    from 0 to 1 across the grid.
    """

    kind = "tabulated"
    analytic = False

    def __init__(self, grid, values):
        x = np.asarray(grid, dtype=float)
        y = np.asarray(values, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2 or np.any(np.diff(x) <= 0):
            raise InvalidInputError("grid must be strictly increasing with one value per point")
        y = np.where(np.isfinite(y), np.maximum(y, 0.0), 0.0)
        cum = integrate.cumulative_trapezoid(y, x, initial=0.0)
        if cum[-1] <= 0:
            raise InvalidInputError("tabulated density has zero mass")
        self.grid = x
        self.values = y
        self.mass = float(cum[-1])
        self._cum = cum / cum[-1]

    def density(self, x):
        return np.interp(np.asarray(x, dtype=float), self.grid, self.values, left=0.0, right=0.0)

    def cdf(self, x):
        return np.interp(np.asarray(x, dtype=float), self.grid, self._cum, left=0.0, right=1.0)

    def support(self):
        nz = np.nonzero(self.values > 0)[0]
        i0 = max(nz[0] - 1, 0)
        i1 = min(nz[-1] + 1, self.grid.size - 1)
        return [(float(self.grid[i0]), float(self.grid[i1]))]


@dataclass(frozen=True)
class Histogram:
    left: np.ndarray
    right: np.ndarray
    count: np.ndarray
    density: np.ndarray

    def rows(self):
        """Rows ``(bin_left, bin_right, count, density)`` for CSV output."""
        return list(zip(self.left.tolist(), self.right.tolist(), self.count.tolist(), self.density.tolist()))


def density(law: SpectralLaw, x):
    return law.density(x)


def cdf(law: SpectralLaw, x):
    return law.cdf(x)


def total_mass(law: SpectralLaw) -> float:
    """Integral of the density by adaptive quadrature split at the breakpoints."""
    pts = law.breakpoints()
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b > a:
            total += integrate.quad(lambda x: float(law.density(x)), a, b, epsabs=1e-10, epsrel=1e-12, limit=200)[0]
    return total


def classical_locations(law: SpectralLaw, n: int) -> np.ndarray:
    """Descending quantiles ``gamma_i`` with ``cdf(gamma_i) = (n - i + 1/2) / n``."""
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"n must be a positive integer, got {n}")
    i = np.arange(1, n + 1)
    return law.ppf((n - i + 0.5) / n)


def ks_distance(samples: Sequence[float], law: SpectralLaw) -> float:
    """Sup-norm distance between the empirical CDF of ``samples`` and ``law.cdf``."""
    s = np.asarray(samples, dtype=float).ravel()
    if s.size == 0:
        raise InvalidInputError("KS distance needs at least one sample")
    return float(stats.kstest(s, law.cdf).statistic)


def moments(law: SpectralLaw, k: int) -> float:
    if int(k) != k or k < 0:
        raise InvalidParameterError(f"moment order must be a non-negative integer, got {k}")
    return law.moment(int(k))


def histogram(samples, bins: int, range: Tuple[float, float] = None) -> Histogram:
    """Equal-width histogram with density ``count / (m * width)``."""
    if int(bins) != bins or bins < 1:
        raise InvalidParameterError(f"bins must be a positive integer, got {bins}")
    s = np.asarray(samples, dtype=float).ravel()
    if s.size == 0:
        raise InvalidInputError("histogram needs at least one sample")
    count, edges = np.histogram(s, bins=int(bins), range=range)
    width = np.diff(edges)
    return Histogram(edges[:-1], edges[1:], count, count / (s.size * width))
