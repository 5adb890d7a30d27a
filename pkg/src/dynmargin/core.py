"""Time model, quantile-grid distributions and the standard-normal quantile.

Everything here is immutable once built, so instances can be shared freely
between threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np
from scipy import special

from .errors import DomainError, ValidationError

DEFAULT_LEVEL_LO = 0.5
DEFAULT_LEVEL_HI = 99.5
DEFAULT_LEVEL_STEP = 0.5


class Direction(str, enum.Enum):
    UP = "up"
    DOWN = "down"

    @classmethod
    def parse(cls, text: str) -> "Direction":
        key = text.strip().lower()
        aliases = {"up": cls.UP, "upward": cls.UP, "u": cls.UP,
                   "down": cls.DOWN, "downward": cls.DOWN, "d": cls.DOWN}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown direction {text!r}; expected up or down") from None


def as_utc(ts: datetime) -> datetime:
    """Return ``ts`` as an aware UTC datetime (naive input is taken as UTC)."""
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def parse_instant(text: str) -> datetime:
    """Parse an ISO-8601 instant at minute resolution."""
    raw = text.strip()
    if raw.endswith("Z") or raw.endswith("z"):
        raw = raw[:-1] + "+00:00"
    ts = as_utc(datetime.fromisoformat(raw))
    if ts.second or ts.microsecond:
        raise ValueError(f"instant {text!r} is not at minute resolution")
    return ts


def format_instant(ts: datetime) -> str:
    return as_utc(ts).strftime("%Y-%m-%dT%H:%MZ")


def minutes_between(start: datetime, end: datetime) -> int:
    delta = as_utc(end) - as_utc(start)
    minutes, rest = divmod(delta, timedelta(minutes=1))
    if rest:
        raise ValueError("instants must be aligned on whole minutes")
    return int(minutes)


@dataclass(frozen=True)
class TimeTriple:
    """Computation instant ``t0``, projection instant ``t`` and study instant ``T``."""

    t0: datetime
    t: datetime
    T: datetime

    def __post_init__(self):
        for name in ("t0", "t", "T"):
            value = as_utc(getattr(self, name))
            if value.second or value.microsecond:
                raise ValidationError([(name, "instant is not at minute resolution")])
            object.__setattr__(self, name, value)
        if not (self.t0 <= self.t <= self.T):
            raise ValidationError([("", f"expected t0 <= t <= T, got t0={format_instant(self.t0)}, "
                                        f"t={format_instant(self.t)}, T={format_instant(self.T)}")])

    @classmethod
    def from_horizon(cls, t0: datetime, T: datetime, delta_T: int) -> "TimeTriple":
        """Build the triple whose projection instant lies ``delta_T`` minutes before ``T``."""
        return cls(t0, as_utc(T) - timedelta(minutes=delta_T), T)

    @property
    def delta_T(self) -> int:
        """Anticipation period ``T - t`` in minutes."""
        return minutes_between(self.t, self.T)

    @property
    def lead(self) -> int:
        """Forecast lead time ``T - t0`` in minutes."""
        return minutes_between(self.t0, self.T)


def alpha(level):
    """Standard normal quantile at probability ``level / 100``.

    ``level`` is a percentage in the open interval (0, 100); scalars return a
    float, arrays an array. The lower tail is evaluated directly and the
    upper tail by reflection, which keeps ``alpha(100 - w) == -alpha(w)``.
    """
    w = np.asarray(level, dtype=float)
    if np.any(~np.isfinite(w)) or np.any(w <= 0.0) or np.any(w >= 100.0):
        raise DomainError(f"probability level must lie in (0, 100), got {level!r}")
    lower = np.minimum(w, 100.0 - w)
    z = special.ndtri(lower / 100.0)
    out = np.where(w > 50.0, -z, z)
    if out.ndim == 0:
        return float(out)
    return out


def default_levels(lo: float = DEFAULT_LEVEL_LO, hi: float = DEFAULT_LEVEL_HI,
                   step: float = DEFAULT_LEVEL_STEP) -> np.ndarray:
    """Probability levels ``lo, lo+step, ..., hi`` in percent (199 by default)."""
    if step <= 0:
        raise ValueError("level step must be positive")
    n = int(round((hi - lo) / step)) + 1
    levels = lo + step * np.arange(n)
    if abs(levels[-1] - hi) > 1e-9 * max(1.0, abs(hi)):
        raise ValueError(f"levels from {lo} to {hi} are not a whole number of {step} steps")
    levels[-1] = hi
    return levels


@dataclass(frozen=True, eq=False)
class QuantileGrid:
    """A distribution stored as MW values at increasing probability levels (percent)."""

    levels: np.ndarray
    values: np.ndarray
    _tol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        levels = np.array(self.levels, dtype=float)
        values = np.array(self.values, dtype=float)
        issues = []
        if levels.ndim != 1 or values.shape != levels.shape:
            issues.append(("levels", "levels and values must be 1-D and of equal length"))
        elif levels.size < 2:
            issues.append(("levels", "at least two levels are required"))
        else:
            if np.any(levels <= 0) or np.any(levels >= 100):
                issues.append(("levels", "every level must lie in (0, 100)"))
            if np.any(np.diff(levels) <= 0):
                issues.append(("levels", "levels must be strictly increasing"))
            if not np.all(np.isfinite(values)):
                issues.append(("values", "values must be finite"))
            else:
                scale = max(1.0, float(np.max(np.abs(values))))
                drops = np.flatnonzero(np.diff(values) < -self._tol * scale)
                if drops.size:
                    bad = ", ".join(f"{levels[i]:g}->{levels[i + 1]:g}" for i in drops[:5])
                    issues.append(("values", f"values decrease between levels {bad}"))
        if issues:
            raise ValidationError(issues)
        # remove rounding-level dips so downstream interpolation is monotone
        values = np.maximum.accumulate(values)
        levels.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.levels.size

    def __eq__(self, other):
        if not isinstance(other, QuantileGrid):
            return NotImplemented
        return (np.array_equal(self.levels, other.levels)
                and np.array_equal(self.values, other.values))

    __hash__ = None

    @classmethod
    def from_normal(cls, mu: float, sigma: float, levels=None) -> "QuantileGrid":
        levels = default_levels() if levels is None else np.asarray(levels, dtype=float)
        return cls(levels, mu + sigma * alpha(levels))

    @classmethod
    def point_mass(cls, value: float, levels=None) -> "QuantileGrid":
        levels = default_levels() if levels is None else np.asarray(levels, dtype=float)
        return cls(levels, np.full(levels.shape, float(value)))

    @property
    def is_point_mass(self) -> bool:
        return bool(self.values[0] == self.values[-1])

    def quantile(self, level):
        return grid_quantile(self, level)

    def shifted(self, offset: float) -> "QuantileGrid":
        return QuantileGrid(self.levels, self.values + offset)

    def scaled(self, factor: float) -> "QuantileGrid":
        if factor < 0:
            raise ValueError("scale factor must be non-negative")
        return QuantileGrid(self.levels, self.values * factor)


def grid_quantile(grid: QuantileGrid, level):
    """Linear interpolation of the quantile function; no extrapolation."""
    w = np.asarray(level, dtype=float)
    lo, hi = grid.levels[0], grid.levels[-1]
    if np.any(w < lo) or np.any(w > hi):
        raise DomainError(f"level {level!r} outside grid range [{lo:g}, {hi:g}]")
    out = np.interp(w, grid.levels, grid.values)
    return float(out) if out.ndim == 0 else out


def sample_inverse_cdf(grid: QuantileGrid, u):
    """Map uniform draws in (0, 1) to MW by inverting the grid.

    Draws below the first level or above the last are clamped to the grid's
    boundary values.
    """
    w = np.clip(np.asarray(u, dtype=float) * 100.0, grid.levels[0], grid.levels[-1])
    out = np.interp(w, grid.levels, grid.values)
    return float(out) if out.ndim == 0 else out
