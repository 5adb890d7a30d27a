"""Wind and PV forecast-error distributions.

Both drivers start from an expected forecast and its 10 %/90 % quantile
forecasts, turn them into forecast-error quantiles, fit a normal law, then
rescale it to the anticipation period with an empirical horizon function.
Wind applies the rescaling to sigma after the fit, PV rescales its two error
quantiles before the fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .core import QuantileGrid, TimeTriple, alpha, as_utc, default_levels
from .errors import DomainError, ValidationError

WIND = "wind"
PV = "pv"

# 2 * z_0.9; equals sqrt(2) * (erfinv(0.8) - erfinv(-0.8))
_NORMAL_10_90_WIDTH = 2.0 * alpha(90.0)

DEFAULT_CONTINUITY_TOL = 1e-6


@dataclass(frozen=True)
class RenewableForecast:
    kind: str
    expected: float
    q10_forecast: float
    q90_forecast: float
    t0: datetime
    T: datetime

    def __post_init__(self):
        issues = []
        if self.kind not in (WIND, PV):
            issues.append(("kind", f"expected 'wind' or 'pv', got {self.kind!r}"))
        for name in ("expected", "q10_forecast", "q90_forecast"):
            if not math.isfinite(getattr(self, name)):
                issues.append((name, "must be finite"))
        if not issues:
            if self.q10_forecast > self.q90_forecast:
                issues.append(("q90_forecast", f"90% forecast {self.q90_forecast} is below "
                                               f"10% forecast {self.q10_forecast}"))
            if self.kind == PV and self.expected < 0:
                issues.append(("expected", "PV expected production must be >= 0"))
        if issues:
            raise ValidationError(issues)
        object.__setattr__(self, "t0", as_utc(self.t0))
        object.__setattr__(self, "T", as_utc(self.T))


@dataclass(frozen=True)
class NormalParams:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValidationError([("sigma", f"must be >= 0, got {self.sigma}")])


@dataclass(frozen=True)
class WindGammaConstants:
    """Constants of the wind horizon function, in minutes.

    The square-root branch (up to 300 min) and the linear branch must meet at
    300 min within ``tolerance``.
    """

    a: float = 15.0
    b: float = 0.0
    c: float = 300.0 / math.sqrt(20.0)
    tolerance: float = DEFAULT_CONTINUITY_TOL

    def __post_init__(self):
        issues = []
        if not self.a > 0:
            issues.append(("a", "must be > 0"))
        if not self.c > 0:
            issues.append(("c", "must be > 0"))
        if not issues:
            residual = self.continuity_residual
            if residual > self.tolerance:
                issues.append(("c", f"horizon function discontinuous at 300 min: residual "
                                    f"{residual:.3g} exceeds tolerance {self.tolerance:g}"))
        if issues:
            raise ValidationError(issues)

    @property
    def continuity_residual(self) -> float:
        return abs(math.sqrt(300.0 / self.a) - (300.0 + self.b) / self.c)


def forecast_to_error_quantiles(f: RenewableForecast) -> tuple[float, float]:
    """Production quantile forecasts to error quantiles ``(q10_err, q90_err)``.

    The error quantile at level ``100 - i`` is ``expected - forecast_i``, so
    the 10 % production forecast gives the 90 % error.
    """
    return f.expected - f.q90_forecast, f.expected - f.q10_forecast


def error_quantiles_to_normal(q10_err: float, q90_err: float) -> NormalParams:
    if q10_err > q90_err:
        raise ValidationError([("q10_err", f"inverted error quantiles: q10={q10_err} > q90={q90_err}")])
    return NormalParams((q10_err + q90_err) / 2.0, (q90_err - q10_err) / _NORMAL_10_90_WIDTH)


def gamma_wind(delta_T: float, k: WindGammaConstants) -> float:
    """Wind horizon function; ``delta_T`` in minutes."""
    if delta_T < 0:
        raise DomainError(f"anticipation period must be >= 0, got {delta_T}")
    if delta_T <= 300:
        return math.sqrt(delta_T / k.a)
    return (delta_T + k.b) / k.c


def gamma_pv(level: int, delta_T: float) -> float:
    """PV horizon function for the 10 % or 90 % error quantile; ``delta_T`` in hours."""
    if delta_T < 0:
        raise DomainError(f"anticipation period must be >= 0, got {delta_T}")
    if level == 10:
        if delta_T < 2.5:
            return -423.0 + 45.0 * delta_T
        if delta_T < 6.0:
            return -310.5 - 10.0 * (delta_T - 2.5)
        return -345.5 - 0.5 * (delta_T - 6.0)
    if level == 90:
        if delta_T < 6.0:
            return 370.0 + 45.0 * delta_T
        return 640.0 + (delta_T - 6.0)
    raise DomainError(f"PV horizon function defined for levels 10 and 90 only, got {level!r}")


def wind_scale(triple: TimeTriple, k: WindGammaConstants) -> float:
    denominator = gamma_wind(triple.lead, k)
    if denominator == 0:
        raise DomainError("wind horizon function vanishes at T - t0; need T > t0")
    return gamma_wind(triple.delta_T, k) / denominator


def wind_error_quantile(params: NormalParams, triple: TimeTriple, k: WindGammaConstants, level):
    """Wind error quantile exactly as the horizon-scaled normal formula reads.

    Note the minus sign: the returned value *decreases* with ``level``. Use
    :func:`renewable_grid` for a proper (non-decreasing) quantile grid.
    """
    return params.mu - wind_scale(triple, k) * params.sigma * alpha(level)


def scale_error_quantiles(q10_err: float, q90_err: float, r10: float, r90: float) -> NormalParams:
    """Rescale the PV 10/90 error quantiles by their horizon ratios, then fit."""
    return error_quantiles_to_normal(q10_err * r10, q90_err * r90)


def pv_ratios(triple: TimeTriple) -> tuple[float, float]:
    dt_h = triple.delta_T / 60.0
    lead_h = triple.lead / 60.0
    ratios = []
    for level in (10, 90):
        denominator = gamma_pv(level, lead_h)
        if denominator == 0:
            raise DomainError(f"PV horizon function {level} vanishes at T - t0")
        ratios.append(gamma_pv(level, dt_h) / denominator)
    return ratios[0], ratios[1]


def pv_adjusted_normal(f: RenewableForecast, triple: TimeTriple) -> NormalParams:
    q10_err, q90_err = forecast_to_error_quantiles(f)
    r10, r90 = pv_ratios(triple)
    return scale_error_quantiles(q10_err, q90_err, r10, r90)


def pv_error_quantile(f: RenewableForecast, triple: TimeTriple, level):
    params = pv_adjusted_normal(f, triple)
    return params.mu + params.sigma * alpha(level)


def renewable_grid(f: RenewableForecast, triple: TimeTriple, k: WindGammaConstants,
                   levels=None) -> QuantileGrid:
    """Forecast-error quantile grid of one renewable driver at ``triple``.

    For wind the decreasing formula is mirrored through its mean: the entry at
    level ``w`` is the formula's value at ``100 - w``.
    """
    levels = default_levels() if levels is None else np.asarray(levels, dtype=float)
    if f.kind == WIND:
        params = error_quantiles_to_normal(*forecast_to_error_quantiles(f))
        values = wind_error_quantile(params, triple, k, 100.0 - levels)
    else:
        values = pv_error_quantile(f, triple, levels)
    return QuantileGrid(levels, values)
