"""Probabilistic, deterministic and final required margins."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import TYPE_CHECKING

import numpy as np

from .conventional import conventional_grid
from .consumption import consumption_grid
from .convolution import convolve, convolve_grids, density_to_grid, quantile_to_density
from .core import Direction, QuantileGrid, TimeTriple, as_utc, format_instant, grid_quantile
from .errors import DomainError, DynMarginError, ValidationError
from .renewables import renewable_grid

if TYPE_CHECKING:
    from .model import EngineConfig, ForecastSnapshot

UP_LEVEL = 99.0
DOWN_LEVEL = 1.0
DEFAULT_HORIZONS = (15, 30, 60, 120)


@dataclass(frozen=True)
class DeterministicTable:
    """Deterministic floor in MW, linear between anchors and floored to whole MW.

    ``anchors`` holds ``(delta_T minutes, upward MW, downward MW)`` rows. The
    default anchors (15 and 120 min) reproduce the usual 15/30/60/120 table.
    """

    anchors: tuple[tuple[float, float, float], ...] = ((15, 1500, 500), (120, 2300, 1250))

    def __post_init__(self):
        rows = tuple(tuple(float(x) for x in row) for row in self.anchors)
        issues = []
        if len(rows) < 2:
            issues.append(("anchors", "at least two anchors are required"))
        if any(len(r) != 3 for r in rows):
            issues.append(("anchors", "each anchor is (delta_T, upward, downward)"))
        elif rows:
            arr = np.array(rows)
            if np.any(np.diff(arr[:, 0]) <= 0):
                issues.append(("anchors", "anchor horizons must be strictly increasing"))
            if np.any(np.diff(arr[:, 1]) < 0):
                issues.append(("anchors", "upward values must be non-decreasing in delta_T"))
            if np.any(np.diff(arr[:, 2]) < 0):
                issues.append(("anchors", "downward values must be non-decreasing in delta_T"))
        if issues:
            raise ValidationError(issues)
        object.__setattr__(self, "anchors", rows)

    @property
    def horizon_range(self) -> tuple[float, float]:
        return self.anchors[0][0], self.anchors[-1][0]

    def margin(self, delta_T: float, direction: Direction) -> int:
        return deterministic_margin(self, delta_T, direction)


def deterministic_margin(table: DeterministicTable, delta_T: float, direction: Direction) -> int:
    lo, hi = table.horizon_range
    if not lo <= delta_T <= hi:
        raise DomainError(f"delta_T={delta_T:g} min outside deterministic table range [{lo:g}, {hi:g}]")
    column = 1 if Direction(direction) is Direction.UP else 2
    xs = [row[0] for row in table.anchors]
    ys = [row[column] for row in table.anchors]
    value = float(np.interp(delta_T, xs, ys))
    # guard against 1613.9999999 style rounding before flooring
    return int(math.floor(value + 1e-9))


def probabilistic_margins(global_grid: QuantileGrid) -> tuple[float, float]:
    """Upward (99 % quantile) and signed downward (1 % quantile) margins."""
    if global_grid.levels[0] > DOWN_LEVEL or global_grid.levels[-1] < UP_LEVEL:
        raise DomainError("global distribution grid must cover levels 1 and 99")
    return grid_quantile(global_grid, UP_LEVEL), grid_quantile(global_grid, DOWN_LEVEL)


@dataclass(frozen=True)
class MarginResult:
    """Margins for one (t, T). ``down_proba`` is the signed 1 % quantile of the
    imbalance; ``down_final`` compares its negation, a positive MW need, with
    the downward floor."""

    triple: TimeTriple
    up_proba: float
    down_proba: float
    up_det: float
    down_det: float
    up_final: float
    down_final: float

    @property
    def delta_T(self) -> int:
        return self.triple.delta_T

    def proba(self, direction: Direction) -> float:
        """Probabilistic requirement as a positive-is-needed MW figure."""
        return self.up_proba if Direction(direction) is Direction.UP else -self.down_proba

    def det(self, direction: Direction) -> float:
        return self.up_det if Direction(direction) is Direction.UP else self.down_det

    def final(self, direction: Direction) -> float:
        return self.up_final if Direction(direction) is Direction.UP else self.down_final


def final_margins(proba: tuple[float, float], table: DeterministicTable, delta_T: float) -> dict:
    up_proba, down_proba = proba
    up_det = table.margin(delta_T, Direction.UP)
    down_det = table.margin(delta_T, Direction.DOWN)
    return {
        "up_proba": up_proba,
        "down_proba": down_proba,
        "up_det": up_det,
        "down_det": down_det,
        "up_final": max(up_det, up_proba),
        "down_final": max(down_det, -down_proba),
    }


@dataclass(frozen=True)
class PairFailure:
    t: datetime
    T: datetime
    message: str

    def __str__(self):
        return f"t={format_instant(self.t)} T={format_instant(self.T)}: {self.message}"


@dataclass
class MarginBatch:
    results: list[MarginResult] = field(default_factory=list)
    failures: list[PairFailure] = field(default_factory=list)

    def __iter__(self):
        return iter(self.results)

    def __len__(self):
        return len(self.results)


def driver_grids(snapshot: "ForecastSnapshot", triple: TimeTriple, config: "EngineConfig"):
    """Direction-independent driver grids plus the up/down conventional grids."""
    levels = config.levels
    row = snapshot.at(triple.T)
    shared = []
    if "wind" in snapshot.drivers:
        shared.append(renewable_grid(row.wind, triple, config.wind_gamma, levels))
    if "pv" in snapshot.drivers:
        shared.append(renewable_grid(row.pv, triple, config.wind_gamma, levels))
    if "consumption" in snapshot.drivers:
        shared.append(consumption_grid(config.consumption, row.consumption, triple, levels))
    conventional = {}
    if "conventional" in snapshot.drivers:
        for direction in Direction:
            conventional[direction] = conventional_grid(snapshot.fleet, direction, levels,
                                                        config.n_bins, config.padding)
    return shared, conventional


def global_distributions(snapshot, triple, config) -> dict[Direction, QuantileGrid]:
    """Global imbalance grid per direction for one (t, T)."""
    shared, conventional = driver_grids(snapshot, triple, config)
    base = convolve_grids(shared, config.n_bins, config.padding) if shared else None
    out = {}
    for direction in Direction:
        density = base
        if direction in conventional:
            extra = quantile_to_density(conventional[direction], config.n_bins, config.padding)
            density = extra if density is None else convolve(density, extra)
        out[direction] = density_to_grid(density, config.levels)
    return out


def compute_margin(snapshot, t: datetime, T: datetime, config) -> MarginResult:
    triple = TimeTriple(snapshot.t0, t, T)
    grids = global_distributions(snapshot, triple, config)
    up, _ = probabilistic_margins(grids[Direction.UP])
    _, down = probabilistic_margins(grids[Direction.DOWN])
    return MarginResult(triple, **final_margins((up, down), config.deterministic, triple.delta_T))


def compute_margin_set(snapshot, pairs, config, workers: int = 1) -> MarginBatch:
    """Margins for every ``(t, T)`` pair; failing pairs are reported, not raised."""
    pairs = [(as_utc(t), as_utc(T)) for t, T in pairs]

    def run(pair):
        try:
            return compute_margin(snapshot, pair[0], pair[1], config)
        except (DynMarginError, ValueError) as exc:
            return PairFailure(pair[0], pair[1], str(exc))

    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, pairs))
    else:
        outcomes = [run(p) for p in pairs]
    batch = MarginBatch()
    for outcome in outcomes:
        if isinstance(outcome, PairFailure):
            batch.failures.append(outcome)
        else:
            batch.results.append(outcome)
    return batch


def horizon_pairs(snapshot, horizons=DEFAULT_HORIZONS):
    """``(t, T)`` pairs with ``t = T - horizon`` for every study instant of the
    snapshot; pairs whose projection instant precedes ``t0`` are skipped."""
    pairs = []
    for T in snapshot.instants:
        for h in horizons:
            t = T - timedelta(minutes=int(h))
            if t >= snapshot.t0:
                pairs.append((t, T))
    return pairs
