"""Convolution of independent driver distributions.

Quantile grids are turned into probability masses on a uniform lattice, the
lattices are convolved pairwise, and the standard quantile grid is read back
from the resulting cumulative distribution.

Beyond the outermost grid levels each tail follows the normal law passing
through the two outermost grid points of that side, truncated at six of its
standard deviations.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy import special

from .core import QuantileGrid, alpha, default_levels
from .errors import ValidationError

DEFAULT_BINS = 4096
DEFAULT_PADDING = 0.1
TAIL_SIGMAS = 6.0
MASS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Probability masses at ``lo + i * step`` (bin centres)."""

    lo: float
    step: float
    masses: np.ndarray

    def __post_init__(self):
        masses = np.array(self.masses, dtype=float)
        if not self.step > 0:
            raise ValidationError([("step", "bin width must be positive")])
        if masses.ndim != 1 or masses.size == 0:
            raise ValidationError([("masses", "need a non-empty 1-D mass vector")])
        if np.any(masses < 0):
            raise ValidationError([("masses", "masses must be non-negative")])
        total = float(masses.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise ValidationError([("masses", f"masses sum to {total!r}, not 1")])
        masses.flags.writeable = False
        object.__setattr__(self, "masses", masses)

    @property
    def centers(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.masses.size)

    @property
    def is_point_mass(self) -> bool:
        return self.masses.size == 1

    def mean(self) -> float:
        return float(np.dot(self.centers, self.masses))

    def var(self) -> float:
        c = self.centers - self.mean()
        return float(np.dot(c * c, self.masses))

    def shifted(self, offset: float) -> "DensityGrid":
        return DensityGrid(self.lo + offset, self.step, self.masses)


@dataclass(frozen=True)
class TailFit:
    """Normal law through the two outermost grid points of one side."""

    mu: float
    sigma: float

    @classmethod
    def through(cls, levels, values) -> "TailFit":
        z = alpha(np.asarray(levels, dtype=float))
        sigma = (values[1] - values[0]) / (z[1] - z[0])
        return cls(values[0] - sigma * z[0], max(float(sigma), 0.0))


def tail_fits(g: QuantileGrid) -> tuple[TailFit, TailFit]:
    return (TailFit.through(g.levels[:2], g.values[:2]),
            TailFit.through(g.levels[-2:], g.values[-2:]))


def support(g: QuantileGrid) -> tuple[float, float]:
    """Extent of the tail-extended distribution."""
    lower, upper = tail_fits(g)
    lo = min(g.values[0], lower.mu - TAIL_SIGMAS * lower.sigma)
    hi = max(g.values[-1], upper.mu + TAIL_SIGMAS * upper.sigma)
    return float(lo), float(hi)


def extended_cdf(g: QuantileGrid, x) -> np.ndarray:
    """Right-continuous CDF of the grid with normal tails."""
    x = np.asarray(x, dtype=float)
    v, p = g.values, g.levels / 100.0
    lower, upper = tail_fits(g)
    lo, hi = support(g)

    k = np.searchsorted(v, x, side="right") - 1
    inner = np.clip(k, 0, v.size - 2)
    width = v[inner + 1] - v[inner]
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(width > 0, (x - v[inner]) / width, 0.0)
    F = np.where(k == v.size - 1, p[-1], p[inner] + np.clip(frac, 0.0, 1.0) * (p[inner + 1] - p[inner]))

    below = x < v[0]
    if lower.sigma > 0:
        F = np.where(below, special.ndtr((x - lower.mu) / lower.sigma), F)
    else:
        F = np.where(below, 0.0, F)
    above = x >= v[-1]
    if upper.sigma > 0:
        F = np.where(above, special.ndtr((x - upper.mu) / upper.sigma), F)
        # the atom of the truncated upper tail sits on the support's end
        F = np.where(x >= hi, 1.0, F)
    else:
        F = np.where(above, 1.0, F)
    return np.where(x < lo, 0.0, F)


def extended_inverse_cdf(g: QuantileGrid, u) -> np.ndarray:
    """Inverse of :func:`extended_cdf`; tails follow the fitted normals."""
    u = np.asarray(u, dtype=float)
    lower, upper = tail_fits(g)
    lo, hi = support(g)
    p0, p1 = g.levels[0] / 100.0, g.levels[-1] / 100.0
    out = np.interp(np.clip(u, p0, p1) * 100.0, g.levels, g.values)
    with np.errstate(divide="ignore", invalid="ignore"):
        low = lower.mu + lower.sigma * special.ndtri(np.clip(u, 1e-300, None))
        high = upper.mu + upper.sigma * special.ndtri(np.clip(u, None, 1 - 1e-16))
    out = np.where(u < p0, np.maximum(low, lo) if lower.sigma > 0 else g.values[0], out)
    out = np.where(u > p1, np.minimum(high, hi) if upper.sigma > 0 else g.values[-1], out)
    return out


def quantile_to_density(g: QuantileGrid, n_bins: int = DEFAULT_BINS,
                        padding: float = DEFAULT_PADDING) -> DensityGrid:
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    lo, hi = support(g)
    width = hi - lo
    if width <= 0:
        return DensityGrid(lo, 1.0, np.ones(1))
    a = lo - padding * width
    step = (width * (1.0 + 2.0 * padding)) / n_bins
    edges = a + step * np.arange(n_bins + 1)
    F = extended_cdf(g, edges)
    F[0], F[-1] = 0.0, 1.0
    masses = np.maximum(np.diff(F), 0.0)
    masses /= masses.sum()
    return _trimmed(a + step / 2.0, step, masses)


def _trimmed(lo: float, step: float, masses: np.ndarray) -> DensityGrid:
    nz = np.flatnonzero(masses)
    first, last = nz[0], nz[-1]
    masses = masses[first:last + 1]
    return DensityGrid(lo + first * step, step, masses / masses.sum())


def resample(d: DensityGrid, step: float) -> DensityGrid:
    """Move masses onto a coarser lattice of width ``step`` anchored at ``d.lo``.

    Each mass is split linearly between its two neighbouring nodes, which
    preserves both total mass and mean.
    """
    if step == d.step or d.is_point_mass:
        return d
    if step < d.step:
        raise ValueError("resampling only coarsens the lattice")
    pos = (d.centers - d.lo) / step
    idx = np.floor(pos).astype(np.int64)
    frac = pos - idx
    size = int(idx[-1]) + 2
    masses = (np.bincount(idx, weights=d.masses * (1.0 - frac), minlength=size)
              + np.bincount(idx + 1, weights=d.masses * frac, minlength=size))
    return _trimmed(d.lo, step, masses)


def convolve(a: DensityGrid, b: DensityGrid) -> DensityGrid:
    """Distribution of the sum of two independent lattice variables."""
    if a.is_point_mass:
        return b.shifted(a.lo)
    if b.is_point_mass:
        return a.shifted(b.lo)
    step = max(a.step, b.step)
    a, b = resample(a, step), resample(b, step)
    if a.is_point_mass or b.is_point_mass:
        return convolve(a, b)
    return _trimmed(a.lo + b.lo, step, np.convolve(a.masses, b.masses))


def density_quantiles(d: DensityGrid, levels) -> np.ndarray:
    """Quantiles of the lattice distribution with mass spread evenly over each bin."""
    p = np.asarray(levels, dtype=float) / 100.0
    if d.is_point_mass:
        return np.full(p.shape, d.lo)
    cum = np.cumsum(d.masses)
    cum[-1] = 1.0
    j = np.minimum(np.searchsorted(cum, p, side="left"), cum.size - 1)
    before = np.where(j > 0, cum[j - 1], 0.0)
    frac = np.clip((p - before) / d.masses[j], 0.0, 1.0)
    return d.lo - d.step / 2.0 + (j + frac) * d.step


def density_to_grid(d: DensityGrid, levels=None) -> QuantileGrid:
    levels = default_levels() if levels is None else np.asarray(levels, dtype=float)
    return QuantileGrid(levels, density_quantiles(d, levels))


def convolve_grids(grids, n_bins: int = DEFAULT_BINS, padding: float = DEFAULT_PADDING) -> DensityGrid:
    grids = list(grids)
    if not grids:
        raise ValueError("at least one driver distribution is required")
    densities = [quantile_to_density(g, n_bins, padding) for g in grids]
    return reduce(convolve, densities)


def global_distribution(grids, levels=None, n_bins: int = DEFAULT_BINS,
                        padding: float = DEFAULT_PADDING) -> QuantileGrid:
    """Quantile grid of the sum of independent drivers."""
    grids = list(grids)
    if levels is None:
        levels = grids[0].levels if grids else default_levels()
    return density_to_grid(convolve_grids(grids, n_bins, padding), levels)
