"""Offline helpers used to produce shipped parameter sets.

Nothing here is called by the margin engine. ``statsmodels`` is only needed
for :func:`fit_consumption_location_scale`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .consumption import HOLIDAY_BRANCH_MAX, SHORT_BRANCH_MAX
from .conventional import LogNormalSpec
from .core import alpha

FIT_LEVELS = (5.0, 10.0, 25.0, 50.0, 75.0, 90.0, 95.0)


def regression_features(v, delta_T, day_value) -> np.ndarray:
    """Design matrix of the consumption regression, before the ``dT / f`` factor."""
    v = np.asarray(v, float)
    dt = np.asarray(delta_T, float)
    day_value = np.asarray(day_value, float)
    f = np.maximum(30.0, dt)
    short = (dt <= SHORT_BRANCH_MAX).astype(float)
    near = (dt <= HOLIDAY_BRANCH_MAX).astype(float)
    return np.column_stack([np.ones_like(v), v, f * short, f * (1 - short), 1 - short,
                            f * near * day_value, (1 - near) * day_value])


@dataclass(frozen=True)
class SyntheticConsumptionErrors:
    """Heteroscedastic error generator with a known location-scale structure."""

    location: tuple = (10.0, 0.0, 0.0, 0.0, 0.0, -1.0, -600.0)
    scale: tuple = (0.0, 0.006, 4.0, 4.0, 0.0, 2.0, 1200.0)
    holiday_share: float = 0.1

    def draw(self, n: int, seed: int = 0):
        rng = np.random.default_rng(seed)
        v = rng.uniform(30_000.0, 90_000.0, n)
        dt = rng.choice(np.arange(15, 735, 15), n).astype(float)
        day_value = np.where(rng.random(n) < self.holiday_share, rng.uniform(0.2, 1.0, n), 0.0)
        X = regression_features(v, dt, day_value)
        loc = X @ np.asarray(self.location)
        sc = X @ np.asarray(self.scale)
        error = (loc + sc * rng.standard_normal(n)) * dt / np.maximum(30.0, dt)
        return v, dt, day_value, error


def fit_consumption_location_scale(v, delta_T, day_value, error, levels=FIT_LEVELS):
    """Quantile-regress ``error`` at ``levels``, then project each coefficient on
    ``location + alpha(level) * scale`` so the expanded table cannot cross.

    Returns ``(location, scale, raw)`` where ``raw`` maps level to its
    unconstrained coefficient vector.
    """
    from statsmodels.regression.quantile_regression import QuantReg

    dt = np.asarray(delta_T, float)
    keep = dt > 0
    X = regression_features(np.asarray(v)[keep], dt[keep], np.asarray(day_value)[keep])
    # divide out the dT/f factor so the model is linear in the coefficients
    y = np.asarray(error)[keep] * np.maximum(30.0, dt[keep]) / dt[keep]
    # unit-scale columns; IRLS stalls on raw MW magnitudes
    norms = np.maximum(np.abs(X).max(axis=0), 1e-12)
    raw = {}
    for w in levels:
        fit = QuantReg(y, X / norms).fit(q=w / 100.0, max_iter=5000)
        raw[w] = np.asarray(fit.params) / norms
    z = alpha(np.asarray(levels))
    A = np.column_stack([np.ones_like(z), z])
    B = np.vstack([raw[w] for w in levels])
    (location, scale), *_ = np.linalg.lstsq(A, B, rcond=None)
    return location, scale, raw


def simulate_bernoulli_outages(capacities, probabilities, n: int, seed: int = 0) -> np.ndarray:
    """Lost MW per draw when each unit trips independently."""
    rng = np.random.default_rng(seed)
    caps = np.asarray(capacities, float)
    trips = rng.random((n, caps.size)) < np.asarray(probabilities, float)
    return trips.astype(float) @ caps


def lognormal_from_moments(mean: float, std: float, shift: float = 0.0, sign: int = 1) -> LogNormalSpec:
    """Log-normal component whose mean and std (after shift/sign) match."""
    m = sign * (mean - shift)
    if m <= 0:
        raise ValueError("mean must lie on the positive side of shift")
    s2 = math.log1p((std / m) ** 2)
    return LogNormalSpec(mu_ln=math.log(m) - s2 / 2.0, sigma_ln=math.sqrt(s2), scale=1.0, shift=shift, sign=sign)


def lognormal_for_fleet(capacities, probabilities, shift: float = 0.0, sign: int = 1) -> LogNormalSpec:
    """Moment-matched log-normal for independent Bernoulli unit outages."""
    caps = np.asarray(capacities, float)
    p = np.asarray(probabilities, float)
    mean = float(np.dot(caps, p))
    std = float(np.sqrt(np.dot(caps ** 2, p * (1 - p))))
    return lognormal_from_moments(shift + sign * mean, std, shift, sign)
