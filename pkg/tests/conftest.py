import math

import numpy as np
from datetime import datetime, timezone
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


def utc(*args) -> datetime:
    return datetime(*args, tzinfo=timezone.utc)


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def bisect_normal_quantile(p: float, tol: float = 1e-13) -> float:
    """Independent standard-normal quantile: bisection on the erfc-based CDF."""
    lo, hi = -40.0, 40.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if normal_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.fixture
def golden_snapshot_path():
    return DATA / "golden_snapshot.csv"


@pytest.fixture
def golden_series_path():
    return DATA / "golden_series.csv"


def random_series(rng, n_rows, seasons_months=range(1, 13)):
    """Small random margin series with duplicates and ties across groups."""
    from datetime import timedelta

    from dynmargin.core import Direction
    from dynmargin.series import MarginRow

    det_up = {15: 1500, 30: 1614, 60: 1842, 120: 2300}
    det_down = {15: 500, 30: 607, 60: 821, 120: 1250}
    months = list(seasons_months)
    rows = []
    for _ in range(n_rows):
        T = utc(2022, int(rng.choice(months)), int(rng.integers(1, 29)), int(rng.integers(0, 24)))
        dt = int(rng.choice([15, 30, 60, 120]))
        direction = Direction.UP if rng.random() < 0.5 else Direction.DOWN
        det = (det_up if direction is Direction.UP else det_down)[dt]
        proba = float(np.round(rng.uniform(0.3, 1.6) * det, int(rng.integers(0, 3))))
        t = T - timedelta(minutes=dt)
        rows.append(MarginRow(t - timedelta(minutes=60), t, T, dt, direction, proba, float(det), max(det, proba)))
    return rows


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record the verdict of one acceptance criterion for the terminal summary."""

    def record(number: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
