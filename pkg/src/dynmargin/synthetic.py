"""Deterministic synthetic operating year for end-to-end checks.

Mechanisms built in:

* consumption is higher in winter and has a morning peak (06-10 UTC) that is
  amplified in winter, so consumption error grows with it;
* more conventional units run in winter, and winter mornings add start-ups,
  so the producing-only outage component widens;
* wind production and its forecast band are larger in winter.

The year ships with its own configuration: the default consumption model is
replaced by a zero-median one whose spread grows with the forecast level and
the anticipation period (see :func:`synthetic_config_dict`).

Each hourly ``t0`` gets one projection instant ``t = t0 + 60 min`` and study
instants ``T = t + horizon``.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from importlib import resources

import numpy as np

from .conventional import FleetSnapshot
from .ingestion import default_config_dict, load_config
from .fitting import lognormal_from_moments
from .margins import DEFAULT_HORIZONS, compute_margin_set
from .model import ForecastSnapshot, make_row
from .series import rows_from_results

WINTER = (11, 12, 1, 2, 3)
HEATING_MW = 9_000.0
WINTER_WIND_MW = 2_000.0
WIND_BAND = 0.06
CONV_WINTER_STD = 300.0
BIDIR_MEAN = -30.0
BIDIR_STD = 40.0

# consumption error spread: CONS_PER_MW * v + CONS_PER_MIN * f, in MW per unit alpha
CONS_PER_MW = 0.003
CONS_PER_MIN = 3.07

DATA = resources.files("dynmargin").joinpath("data")
SERIES_FILE = "synthetic_year_series.csv"
CONFIG_FILE = "synthetic_year_config.json"


def synthetic_config_dict() -> dict:
    doc = copy.deepcopy(default_config_dict())
    doc["consumption"]["location"] = [0.0] * 7
    doc["consumption"]["scale"] = [0.0, CONS_PER_MW, CONS_PER_MIN, CONS_PER_MIN, 0.0, 1.0, 400.0]
    return doc


def synthetic_config():
    """Configuration shipped with the synthetic year."""
    with resources.as_file(DATA.joinpath(CONFIG_FILE)) as path:
        return load_config(path)


def shipped_series():
    """Margin rows of the shipped synthetic year."""
    from .series import read_series

    with resources.as_file(DATA.joinpath(SERIES_FILE)) as path:
        return read_series(path)


def _bump(hour: float, centre: float, width: float) -> float:
    return math.exp(-0.5 * ((hour - centre) / width) ** 2)


def _heating(ts: datetime) -> float:
    """1 during the heating season, 0 otherwise."""
    return 1.0 if ts.month in WINTER else 0.0


def _winterness(ts: datetime) -> float:
    """1 in mid-January, 0 in mid-July."""
    doy = ts.timetuple().tm_yday
    return 0.5 * (1.0 + math.cos(2.0 * math.pi * (doy - 15) / 365.25))


@dataclass(frozen=True)
class SyntheticYear:
    year: int = 2022
    days: tuple = (1, 8, 15, 22)
    hours: tuple = tuple(range(24))
    lead: int = 60
    horizons: tuple = DEFAULT_HORIZONS
    seed: int = 7

    def t0s(self):
        for month in range(1, 13):
            for day in self.days:
                for hour in self.hours:
                    yield datetime(self.year, month, day, hour, tzinfo=timezone.utc)

    def consumption(self, ts: datetime) -> float:
        w, heating = _winterness(ts), _heating(ts)
        h = ts.hour + ts.minute / 60.0
        base = 42_000.0 + 6_000.0 * w + HEATING_MW * heating
        shape = (1.0 + (0.08 + 0.10 * heating) * _bump(h, 8.0, 1.5) + 0.05 * _bump(h, 19.0, 1.5)
                 - 0.12 * _bump(h, 3.5, 2.0))
        return base * shape

    def wind(self, ts: datetime, rng) -> tuple[float, float, float]:
        w, heating = _winterness(ts), _heating(ts)
        expected = (2_500.0 + 1_000.0 * w + WINTER_WIND_MW * heating) * (0.8 + 0.4 * rng.random())
        width = expected * WIND_BAND
        return expected, expected - width, expected + width

    def fleet(self, ts: datetime) -> FleetSnapshot:
        heating = _heating(ts)
        morning = _bump(ts.hour + ts.minute / 60.0, 8.0, 1.5)
        mean = 100.0 + 100.0 * heating + 150.0 * heating * morning
        std = 120.0 + CONV_WINTER_STD * heating + 250.0 * heating * morning
        return FleetSnapshot(lognormal_from_moments(mean, std),
                             lognormal_from_moments(BIDIR_MEAN, BIDIR_STD, sign=-1))

    def snapshot(self, t0: datetime) -> ForecastSnapshot:
        rng = np.random.default_rng([self.seed, int(t0.timestamp()) // 60])
        t = t0 + timedelta(minutes=self.lead)
        rows = []
        for h in self.horizons:
            T = t + timedelta(minutes=h)
            rows.append(make_row(t0, T, wind=self.wind(T, rng), consumption=self.consumption(T)))
        return ForecastSnapshot(t0, tuple(rows), {"wind", "consumption", "conventional"}, self.fleet(t))

    def pairs(self, t0: datetime):
        t = t0 + timedelta(minutes=self.lead)
        return [(t, t + timedelta(minutes=h)) for h in self.horizons]

    def compute(self, config, t0s=None):
        """Margin rows for the given (default: all) computation instants."""
        rows, failures = [], []
        for t0 in (self.t0s() if t0s is None else t0s):
            batch = compute_margin_set(self.snapshot(t0), self.pairs(t0), config)
            rows.extend(rows_from_results(batch.results))
            failures.extend(batch.failures)
        return sorted(rows, key=lambda r: r.sort_key), failures
