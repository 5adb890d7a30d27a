"""Forecast snapshots and engine configuration containers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime

import numpy as np

from .consumption import ConsumptionForecast, ConsumptionRegression
from .conventional import FleetSnapshot
from .convolution import DEFAULT_BINS, DEFAULT_PADDING
from .core import (DEFAULT_LEVEL_HI, DEFAULT_LEVEL_LO, DEFAULT_LEVEL_STEP, as_utc, default_levels,
                   format_instant)
from .errors import DomainError, ValidationError
from .margins import DeterministicTable
from .renewables import PV, WIND, RenewableForecast, WindGammaConstants

DRIVERS = ("wind", "pv", "consumption", "conventional")
WINTER_MONTHS = (11, 12, 1, 2, 3)
DEFAULT_SEASONS = {m: ("winter" if m in WINTER_MONTHS else "summer") for m in range(1, 13)}


@dataclass(frozen=True)
class SnapshotRow:
    T: datetime
    wind: RenewableForecast | None = None
    pv: RenewableForecast | None = None
    consumption: ConsumptionForecast | None = None


@dataclass(frozen=True)
class ForecastSnapshot:
    """Everything known at ``t0``: per-study-instant forecasts and the fleet.

    Instants between two rows are linearly interpolated.
    """

    t0: datetime
    rows: tuple[SnapshotRow, ...]
    drivers: frozenset
    fleet: FleetSnapshot | None = None

    def __post_init__(self):
        object.__setattr__(self, "t0", as_utc(self.t0))
        object.__setattr__(self, "drivers", frozenset(self.drivers))
        object.__setattr__(self, "rows", tuple(sorted(self.rows, key=lambda r: r.T)))
        issues = []
        unknown = self.drivers - set(DRIVERS)
        if unknown:
            issues.append(("drivers", f"unknown drivers {sorted(unknown)}"))
        if not self.drivers:
            issues.append(("drivers", "at least one driver must be enabled"))
        if "conventional" in self.drivers and self.fleet is None:
            issues.append(("fleet", "conventional driver enabled without fleet parameters"))
        if not self.rows and self.drivers - {"conventional"}:
            issues.append(("rows", "no forecast rows"))
        seen = set()
        for i, row in enumerate(self.rows, start=1):
            where = f"row {i} ({format_instant(row.T)})"
            if row.T <= self.t0:
                issues.append((where, "study instant must be after t0"))
            if row.T in seen:
                issues.append((where, "duplicate study instant"))
            seen.add(row.T)
            for name in ("wind", "pv", "consumption"):
                if name in self.drivers and getattr(row, name) is None:
                    issues.append((where, f"{name} enabled but missing"))
        if issues:
            raise ValidationError(issues)

    @property
    def instants(self) -> list[datetime]:
        return [r.T for r in self.rows]

    def at(self, T: datetime) -> SnapshotRow:
        T = as_utc(T)
        for row in self.rows:
            if row.T == T:
                return row
        if not self.rows:
            return SnapshotRow(T)
        if T < self.rows[0].T or T > self.rows[-1].T:
            raise DomainError(f"study instant {format_instant(T)} outside snapshot range "
                              f"[{format_instant(self.rows[0].T)}, {format_instant(self.rows[-1].T)}]")
        after = next(i for i, r in enumerate(self.rows) if r.T > T)
        a, b = self.rows[after - 1], self.rows[after]
        w = (T - a.T) / (b.T - a.T)

        def mix(x, y):
            return (1.0 - w) * x + w * y

        def renewable(x, y):
            if x is None or y is None:
                return None
            return RenewableForecast(x.kind, mix(x.expected, y.expected), mix(x.q10_forecast, y.q10_forecast),
                                     mix(x.q90_forecast, y.q90_forecast), self.t0, T)

        cons = None
        if a.consumption is not None and b.consumption is not None:
            cons = ConsumptionForecast(mix(a.consumption.value, b.consumption.value), self.t0, T)
        return SnapshotRow(T, renewable(a.wind, b.wind), renewable(a.pv, b.pv), cons)

    def with_drivers(self, drivers) -> "ForecastSnapshot":
        return replace(self, drivers=frozenset(drivers))


def make_row(t0, T, *, wind=None, pv=None, consumption=None) -> SnapshotRow:
    """Row from plain tuples: ``wind``/``pv`` as ``(expected, q10, q90)``."""
    return SnapshotRow(
        as_utc(T),
        RenewableForecast(WIND, *map(float, wind), t0, T) if wind is not None else None,
        RenewableForecast(PV, *map(float, pv), t0, T) if pv is not None else None,
        ConsumptionForecast(float(consumption), t0, T) if consumption is not None else None,
    )


def _default_regression() -> ConsumptionRegression:
    from .ingestion import default_config

    return default_config().consumption


@dataclass(frozen=True)
class EngineConfig:
    level_lo: float = DEFAULT_LEVEL_LO
    level_hi: float = DEFAULT_LEVEL_HI
    level_step: float = DEFAULT_LEVEL_STEP
    wind_gamma: WindGammaConstants = field(default_factory=WindGammaConstants)
    consumption: ConsumptionRegression = field(default_factory=_default_regression)
    deterministic: DeterministicTable = field(default_factory=DeterministicTable)
    n_bins: int = DEFAULT_BINS
    padding: float = DEFAULT_PADDING
    seasons: dict = field(default_factory=lambda: dict(DEFAULT_SEASONS))

    def __post_init__(self):
        issues = []
        try:
            levels = default_levels(self.level_lo, self.level_hi, self.level_step)
        except ValueError as exc:
            issues.append(("grid", str(exc)))
        else:
            if levels[0] <= 0 or levels[-1] >= 100:
                issues.append(("grid", "levels must lie in (0, 100)"))
            elif levels[0] > 1 or levels[-1] < 99:
                issues.append(("grid", "grid must cover levels 1 and 99"))
            else:
                missing = [w for w in levels if not np.any(np.abs(self.consumption.levels - w) <= 1e-9)]
                if missing:
                    issues.append(("consumption.betas", f"no coefficients for levels {missing[:5]}"))
        if self.n_bins < 2:
            issues.append(("convolution.bins", "must be >= 2"))
        if not 0 <= self.padding <= 10:
            issues.append(("convolution.padding", "must lie in [0, 10]"))
        if set(self.seasons) != set(range(1, 13)):
            issues.append(("seasons", "every month 1..12 needs a season"))
        if issues:
            raise ValidationError(issues)

    @property
    def levels(self) -> np.ndarray:
        return default_levels(self.level_lo, self.level_hi, self.level_step)
