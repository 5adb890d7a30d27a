"""Consumption forecast-error quantiles from a fixed-form quantile regression.

For each probability level the error quantile is a linear combination of the
consumption forecast, the floored anticipation period ``f = max(30, dT)`` on
either side of 180 min, and a public-holiday intensity ``day(T)`` on either
side of 600 min, all scaled by ``dT / f``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from datetime import date, datetime

import numpy as np

from .core import QuantileGrid, TimeTriple, alpha, as_utc, default_levels
from .errors import DomainError, QuantileCrossingError, ValidationError

N_BETAS = 7
SHORT_BRANCH_MAX = 180  # minutes, inclusive
HOLIDAY_BRANCH_MAX = 600  # minutes, inclusive


def f_floor(delta_T: float) -> float:
    if delta_T < 0:
        raise DomainError(f"anticipation period must be >= 0, got {delta_T}")
    return max(30.0, float(delta_T))


@dataclass(frozen=True)
class Holiday:
    day: date
    peak: float
    ramp_in_days: int = 0
    ramp_out_days: int = 0

    def value_on(self, d: date) -> float:
        offset = (d - self.day).days
        if offset == 0:
            return self.peak
        if offset < 0 and -offset < self.ramp_in_days:
            return self.peak * (1.0 + offset / self.ramp_in_days)
        if offset > 0 and offset < self.ramp_out_days:
            return self.peak * (1.0 - offset / self.ramp_out_days)
        return 0.0


@dataclass(frozen=True)
class HolidayProfile:
    """Piecewise-linear daily holiday intensity; 0 away from every holiday."""

    holidays: tuple[Holiday, ...] = ()

    def __call__(self, when) -> float:
        d = as_utc(when).date() if isinstance(when, datetime) else when
        values = [h.value_on(d) for h in self.holidays]
        # overlapping ramps: keep the strongest effect
        return max(values, key=abs) if values else 0.0

    @property
    def extremes(self) -> tuple[float, float]:
        peaks = [h.peak for h in self.holidays]
        return min([0.0, *peaks]), max([0.0, *peaks])


@dataclass(frozen=True)
class ConsumptionForecast:
    value: float
    t0: datetime
    T: datetime

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValidationError([("consumption", f"forecast must be finite and >= 0, got {self.value}")])


@dataclass(frozen=True, eq=False)
class ConsumptionRegression:
    """Per-level regression coefficients ``beta[i, 0..6]`` plus holiday profile.

    Construction checks that the quantiles never cross over the validation
    range: consumption in ``consumption_range`` MW and anticipation periods up
    to ``max_delta_T`` minutes, with and without a holiday.
    """

    levels: np.ndarray
    betas: np.ndarray
    holidays: HolidayProfile = field(default_factory=HolidayProfile)
    consumption_range: tuple[float, float] = (20_000.0, 110_000.0)
    max_delta_T: float = 1440.0
    tolerance: float = 1e-9

    def __post_init__(self):
        levels = np.array(self.levels, dtype=float)
        betas = np.array(self.betas, dtype=float)
        if betas.ndim != 2 or betas.shape != (levels.size, N_BETAS):
            raise ValidationError([("betas", f"expected shape ({levels.size}, {N_BETAS}), got {betas.shape}")])
        if np.any(np.diff(levels) <= 0):
            raise ValidationError([("levels", "coefficient levels must be strictly increasing")])
        if not np.all(np.isfinite(betas)):
            raise ValidationError([("betas", "coefficients must be finite")])
        levels.flags.writeable = False
        betas.flags.writeable = False
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "betas", betas)
        self._check_monotone()

    @classmethod
    def location_scale(cls, location, scale, levels=None, **kwargs) -> "ConsumptionRegression":
        """Coefficients of the form ``location + alpha(level) * scale``."""
        levels = default_levels() if levels is None else np.asarray(levels, dtype=float)
        betas = np.asarray(location, float)[None, :] + alpha(levels)[:, None] * np.asarray(scale, float)[None, :]
        return cls(levels, betas, **kwargs)

    def coefficients(self, level: float) -> np.ndarray:
        idx = np.flatnonzero(np.abs(self.levels - level) <= 1e-9)
        if idx.size == 0:
            raise DomainError(f"no consumption coefficient set for level {level:g}")
        return self.betas[idx[0]]

    def _lattice(self):
        v_lo, v_hi = self.consumption_range
        d_lo, d_hi = self.holidays.extremes
        # the bracket is linear in v, day and f within each branch, so branch
        # endpoints bound every crossing
        horizons = [30.0, min(SHORT_BRANCH_MAX, self.max_delta_T)]
        if self.max_delta_T > SHORT_BRANCH_MAX:
            horizons += [SHORT_BRANCH_MAX + 1e-6, min(HOLIDAY_BRANCH_MAX, self.max_delta_T)]
        if self.max_delta_T > HOLIDAY_BRANCH_MAX:
            horizons += [HOLIDAY_BRANCH_MAX + 1e-6, self.max_delta_T]
        yield from itertools.product((v_lo, v_hi), sorted({d_lo, 0.0, d_hi}), horizons)

    def _check_monotone(self):
        crossings = {}
        for v, d, dt in self._lattice():
            q = _bracket(self.betas, v, dt, d)
            scale = max(1.0, float(np.max(np.abs(q))))
            for i in np.flatnonzero(np.diff(q) < -self.tolerance * scale):
                crossings.setdefault((self.levels[i], self.levels[i + 1]), (v, d, dt))
        if crossings:
            issues = [(f"levels {a:g}/{b:g}", f"quantiles cross at consumption={v:g} MW, "
                                              f"day={d:g}, delta_T={dt:g} min")
                      for (a, b), (v, d, dt) in sorted(crossings.items())[:10]]
            raise QuantileCrossingError(issues)


def _bracket(betas: np.ndarray, v: float, delta_T: float, day_value: float) -> np.ndarray:
    f = f_floor(delta_T)
    short = 1.0 if delta_T <= SHORT_BRANCH_MAX else 0.0
    near = 1.0 if delta_T <= HOLIDAY_BRANCH_MAX else 0.0
    b = betas
    return (b[..., 0] + b[..., 1] * v
            + b[..., 2] * f * short
            + (b[..., 3] * f + b[..., 4]) * (1.0 - short)
            + (b[..., 5] * f * near + b[..., 6] * (1.0 - near)) * day_value)


def _evaluate(betas: np.ndarray, v: float, delta_T: float, day_value: float):
    return _bracket(betas, v, delta_T, day_value) * (delta_T / f_floor(delta_T))


def consumption_error_quantile(r: ConsumptionRegression, fc: ConsumptionForecast,
                               triple: TimeTriple, level: float) -> float:
    return float(_evaluate(r.coefficients(level), fc.value, triple.delta_T, r.holidays(triple.T)))


def consumption_grid(r: ConsumptionRegression, fc: ConsumptionForecast, triple: TimeTriple,
                     levels=None) -> QuantileGrid:
    levels = default_levels() if levels is None else np.asarray(levels, dtype=float)
    if levels.size == r.levels.size and np.allclose(levels, r.levels, rtol=0, atol=1e-9):
        betas = r.betas
    else:
        betas = np.stack([r.coefficients(w) for w in levels])
    values = _evaluate(betas, fc.value, triple.delta_T, r.holidays(triple.T))
    scale = max(1.0, float(np.max(np.abs(values))))
    drops = np.flatnonzero(np.diff(values) < -r.tolerance * scale)
    if drops.size:
        raise QuantileCrossingError([(f"levels {levels[i]:g}/{levels[i + 1]:g}",
                                      f"consumption quantiles cross ({values[i]:.6g} > {values[i + 1]:.6g})")
                                     for i in drops[:10]])
    return QuantileGrid(levels, values)
