"""Conventional-generation outage uncertainty as two log-normal components.

One component covers plants that only ever produce, the other the
bidirectional fleet (pumped storage, power-to-gas). Upward margins see the
sum of both; downward margins see the bidirectional component only, since a
producing-only unit cannot fail towards more production.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .convolution import DEFAULT_BINS, DEFAULT_PADDING, convolve_grids, density_to_grid
from .core import Direction, QuantileGrid, alpha, default_levels
from .errors import ValidationError


@dataclass(frozen=True)
class LogNormalSpec:
    """``shift + sign * scale * exp(mu_ln + sigma_ln * Z)`` with ``Z`` standard normal."""

    mu_ln: float = 0.0
    sigma_ln: float = 0.0
    scale: float = 1.0
    shift: float = 0.0
    sign: int = 1

    def __post_init__(self):
        issues = []
        for name in ("mu_ln", "sigma_ln", "scale", "shift"):
            if not math.isfinite(getattr(self, name)):
                issues.append((name, "must be finite"))
        if not self.sigma_ln >= 0:
            issues.append(("sigma_ln", f"must be >= 0, got {self.sigma_ln}"))
        if not self.scale > 0:
            issues.append(("scale", f"must be > 0, got {self.scale}"))
        if self.sign not in (1, -1):
            issues.append(("sign", f"must be +1 or -1, got {self.sign}"))
        if issues:
            raise ValidationError(issues)

    @classmethod
    def point_mass(cls, value: float) -> "LogNormalSpec":
        """Degenerate component sitting at ``value`` MW."""
        return cls(0.0, 0.0, 1.0, float(value) - 1.0, 1)

    @property
    def median(self) -> float:
        return self.shift + self.sign * self.scale * math.exp(self.mu_ln)

    @property
    def mean(self) -> float:
        return self.shift + self.sign * self.scale * math.exp(self.mu_ln + self.sigma_ln ** 2 / 2)

    @property
    def std(self) -> float:
        s2 = self.sigma_ln ** 2
        return self.scale * math.exp(self.mu_ln + s2 / 2) * math.sqrt(math.expm1(s2))

    def sample(self, z):
        """Map standard normal draws ``z`` to MW."""
        return self.shift + self.sign * self.scale * np.exp(self.mu_ln + self.sigma_ln * np.asarray(z))


@dataclass(frozen=True)
class FleetSnapshot:
    positive_only: LogNormalSpec
    bidirectional: LogNormalSpec


def lognormal_grid(s: LogNormalSpec, levels=None) -> QuantileGrid:
    levels = default_levels() if levels is None else np.asarray(levels, dtype=float)
    # reflected fleets read the mirrored level so the grid stays non-decreasing
    z = alpha(levels if s.sign == 1 else 100.0 - levels)
    return QuantileGrid(levels, s.shift + s.sign * s.scale * np.exp(s.mu_ln + s.sigma_ln * z))


def conventional_grid(fleet: FleetSnapshot, direction: Direction, levels=None,
                      n_bins: int = DEFAULT_BINS, padding: float = DEFAULT_PADDING) -> QuantileGrid:
    levels = default_levels() if levels is None else np.asarray(levels, dtype=float)
    return _conventional_grid(fleet, Direction(direction), tuple(levels.tolist()), n_bins, padding)


@lru_cache(maxsize=256)
def _conventional_grid(fleet, direction, levels, n_bins, padding):
    levels = np.asarray(levels)
    bidirectional = lognormal_grid(fleet.bidirectional, levels)
    if direction is Direction.DOWN:
        return bidirectional
    both = convolve_grids([lognormal_grid(fleet.positive_only, levels), bidirectional], n_bins, padding)
    return density_to_grid(both, levels)
