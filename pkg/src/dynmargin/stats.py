"""Aggregate statistics over a margin series.

Months and hours are taken from the study instant ``T`` (UTC). A row
*exceeds* when its final margin is strictly above the deterministic one.
"""

from __future__ import annotations

import numpy as np
import pandas as pd

from .model import DEFAULT_SEASONS
from .series import to_frame

BOX_COLUMNS = ["season", "delta_T", "direction", "count", "min", "q25", "median", "q75", "max", "mean"]


def _frame(series) -> pd.DataFrame:
    return series if isinstance(series, pd.DataFrame) else to_frame(series)


def exceedance_ratio(series) -> pd.DataFrame:
    """Share of rows per (month, delta_T, direction) whose final margin exceeds
    the deterministic floor. Groups with no rows are absent."""
    df = _frame(series)
    if df.empty:
        raise ValueError("exceedance ratio of an empty series")
    df = df.assign(month=df["T"].map(lambda ts: f"{ts.year:04d}-{ts.month:02d}"),
                   exceeds=df["final"] > df["det"])
    grouped = df.groupby(["month", "delta_T", "direction"], sort=True)
    out = grouped.agg(count=("exceeds", "size"), exceeding=("exceeds", "sum")).reset_index()
    out["ratio"] = out["exceeding"] / out["count"]
    return out[["month", "delta_T", "direction", "count", "exceeding", "ratio"]]


def seasonal_boxstats(series, seasons=None) -> pd.DataFrame:
    """Order statistics of ``proba`` over exceeding rows per (season, delta_T, direction).

    Quartiles use linear interpolation between order statistics.
    """
    seasons = DEFAULT_SEASONS if seasons is None else seasons
    df = _frame(series)
    df = df[df["final"] > df["det"]]
    if df.empty:
        return pd.DataFrame(columns=BOX_COLUMNS)
    df = df.assign(season=df["T"].map(lambda ts: seasons[ts.month]))
    records = []
    for (season, dt, direction), grp in df.groupby(["season", "delta_T", "direction"], sort=True):
        values = np.sort(grp["proba"].to_numpy())
        q25, median, q75 = np.quantile(values, [0.25, 0.5, 0.75])
        records.append({"season": season, "delta_T": dt, "direction": direction, "count": values.size,
                        "min": values[0], "q25": q25, "median": median, "q75": q75, "max": values[-1],
                        "mean": values.mean()})
    return pd.DataFrame(records, columns=BOX_COLUMNS)


def hourly_means(series, seasons=None, by_horizon: bool = False) -> pd.DataFrame:
    """Mean probabilistic margin per (hour of day, season, direction)."""
    seasons = DEFAULT_SEASONS if seasons is None else seasons
    df = _frame(series)
    keys = ["hour", "season", "direction"] + (["delta_T"] if by_horizon else [])
    if df.empty:
        return pd.DataFrame(columns=keys + ["count", "mean_proba"])
    df = df.assign(hour=df["T"].map(lambda ts: ts.hour), season=df["T"].map(lambda ts: seasons[ts.month]))
    out = df.groupby(keys, sort=True)["proba"].agg(count="size", mean_proba="mean").reset_index()
    return out[keys + ["count", "mean_proba"]]
