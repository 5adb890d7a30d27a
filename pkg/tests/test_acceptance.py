"""Acceptance criteria 1 to 8, each run at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the pytest
terminal summary under "acceptance criteria".
"""

import math
import socket
import statistics
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import timedelta

import httpx
import numpy as np
import pytest
import uvicorn

from dynmargin.conventional import FleetSnapshot, LogNormalSpec
from dynmargin.convolution import extended_inverse_cdf, global_distribution
from dynmargin.core import Direction, QuantileGrid, TimeTriple
from dynmargin.ingestion import default_config
from dynmargin.margins import compute_margin, deterministic_margin, driver_grids
from dynmargin.model import DEFAULT_SEASONS, ForecastSnapshot, make_row
from dynmargin.renewables import RenewableForecast, error_quantiles_to_normal, gamma_pv, renewable_grid
from dynmargin.service import create_app
from dynmargin.stats import exceedance_ratio, hourly_means
from dynmargin.synthetic import shipped_series

from conftest import bisect_normal_quantile, random_series, utc
from oracles import check_statistics

UP, DOWN = Direction.UP, Direction.DOWN


def test_c1_deterministic_table(acceptance):
    table = default_config().deterministic
    expected = {(15, UP): 1500, (30, UP): 1614, (60, UP): 1842, (120, UP): 2300,
                (15, DOWN): 500, (30, DOWN): 607, (60, DOWN): 821, (120, DOWN): 1250}
    got = {key: deterministic_margin(table, *key) for key in expected}
    anchors = {UP: (1500, 2300), DOWN: (500, 1250)}
    # floored interpolation written out in integer arithmetic
    interpolated = {(h, d): a + (b - a) * (h - 15) // 105 for (a, b), d in
                    ((anchors[d], d) for d in (UP, DOWN)) for h in (30, 60)}
    ok = got == expected and all(got[k] == v for k, v in interpolated.items())
    acceptance(1, ok, f"table {sorted((k[0], k[1].value, v) for k, v in got.items())}")
    assert ok


def test_c2_normal_fit_round_trip(acceptance):
    rng = np.random.default_rng(2)
    z90 = statistics.NormalDist().inv_cdf(0.9)
    mus, sigmas = rng.uniform(-5_000, 5_000, 1000), rng.uniform(1, 2_000, 1000)
    start = time.perf_counter()
    worst = 0.0
    for mu, sigma in zip(mus, sigmas):
        fit = error_quantiles_to_normal(mu - z90 * sigma, mu + z90 * sigma)
        worst = max(worst, abs(fit.mu - mu) / abs(mu), abs(fit.sigma - sigma) / sigma)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 1.0
    acceptance(2, ok, f"worst relative error {worst:.2e} (<= 1e-9), {elapsed:.3f} s (< 1 s)")
    assert ok


def test_c3_convolution_vs_analytic(acceptance):
    rng = np.random.default_rng(3)
    z99 = bisect_normal_quantile(0.99)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        mu1, mu2 = rng.uniform(-2_000, 2_000, 2)
        s1, s2 = rng.uniform(10, 1_500, 2)
        combined = math.hypot(s1, s2)
        q99 = global_distribution([QuantileGrid.from_normal(mu1, s1),
                                   QuantileGrid.from_normal(mu2, s2)], n_bins=4096).quantile(99.0)
        worst = max(worst, abs(q99 - (z99 * combined + mu1 + mu2)) / combined)
    elapsed = time.perf_counter() - start
    ok = worst <= 0.01 and elapsed < 30
    acceptance(3, ok, f"worst q99 error {100 * worst:.3f}% of combined sigma (<= 1%), {elapsed:.1f} s (< 30 s)")
    assert ok


def random_driver_set(rng):
    t0 = utc(2022, 1, 1) + timedelta(minutes=15 * int(rng.integers(0, 35_000)))
    delta_T = int(rng.choice([15, 30, 60, 120]))
    lead = delta_T + int(rng.integers(0, 480))
    T = t0 + timedelta(minutes=lead)
    expected = rng.uniform(1_000, 9_000)
    lo, hi = sorted(expected * (1 + rng.uniform(-0.25, 0.25, 2)))
    fleet = FleetSnapshot(LogNormalSpec(rng.uniform(3, 6), rng.uniform(0.2, 1.0), 1.0, rng.uniform(-50, 0), 1),
                          LogNormalSpec(rng.uniform(2, 5), rng.uniform(0.2, 0.8), 1.0, rng.uniform(0, 50), -1))
    row = make_row(t0, T, wind=(expected, lo, hi), consumption=rng.uniform(30_000, 90_000))
    snapshot = ForecastSnapshot(t0, (row,), {"wind", "consumption", "conventional"}, fleet)
    return snapshot, T - timedelta(minutes=delta_T), T


def test_c4_one_percent_criterion(acceptance):
    config = default_config()
    rng = np.random.default_rng(4)
    n = 1_000_000
    start = time.perf_counter()
    up_rates, down_rates = [], []
    for _ in range(10):
        snapshot, t, T = random_driver_set(rng)
        result = compute_margin(snapshot, t, T, config)
        shared, _ = driver_grids(snapshot, TimeTriple(snapshot.t0, t, T), config)
        common = sum(extended_inverse_cdf(g, rng.random(n)) for g in shared)
        bidirectional = snapshot.fleet.bidirectional.sample(rng.standard_normal(n))
        upward = common + bidirectional + snapshot.fleet.positive_only.sample(rng.standard_normal(n))
        downward = common + bidirectional
        up_rates.append(np.mean(upward > result.up_proba))
        down_rates.append(np.mean(downward < result.down_proba))
    elapsed = time.perf_counter() - start
    rates = np.array(up_rates + down_rates)
    ok = bool(np.all(np.abs(rates - 0.01) <= 0.001)) and elapsed < 120
    acceptance(4, ok, f"up exceedance {100 * min(up_rates):.3f}..{100 * max(up_rates):.3f}%, "
                      f"down {100 * min(down_rates):.3f}..{100 * max(down_rates):.3f}% "
                      f"(1% +/- 0.1%), {elapsed:.1f} s (< 120 s)")
    assert ok


def test_c5_gamma_continuity_and_monotonicity(acceptance):
    # left limit at each breakpoint by exact linear extrapolation of the left piece
    residuals = []
    for level, breakpoint in ((10, 2.5), (10, 6.0), (90, 6.0)):
        a, b = gamma_pv(level, breakpoint - 0.5), gamma_pv(level, breakpoint - 0.25)
        residuals.append(abs(b + (b - a) - gamma_pv(level, breakpoint)))
    pv_ok = all(r == 0.0 for r in residuals)

    k = default_config().wind_gamma
    wind_ok = k.continuity_residual <= k.tolerance

    t0 = utc(2022, 3, 1)
    T = t0 + timedelta(minutes=720)
    forecast = RenewableForecast("wind", 5_000, 4_400, 5_700, t0, T)
    widths = []
    for delta_T in range(1, 721):
        g = renewable_grid(forecast, TimeTriple(t0, T - timedelta(minutes=delta_T), T), k)
        widths.append((g.quantile(90.0) - g.quantile(10.0)) / 2)
    mono_ok = bool(np.all(np.diff(widths) >= 0))

    ok = pv_ok and wind_ok and mono_ok
    acceptance(5, ok, f"PV breakpoint gaps {residuals} (exact 0), wind residual {k.continuity_residual:.2e} "
                      f"(<= {k.tolerance:g}), half-width non-decreasing over 1..720 min: {mono_ok}")
    assert ok


def test_c6_qualitative_trends(acceptance):
    rows = shipped_series()
    ratios = exceedance_ratio(rows)
    ratios["winter"] = ratios["month"].str[5:].astype(int).map(DEFAULT_SEASONS) == "winter"
    gaps = {}
    for (delta_T, direction), group in ratios[ratios["delta_T"].isin([30, 60, 120])].groupby(["delta_T", "direction"]):
        gaps[(delta_T, direction)] = (group.loc[group["winter"], "ratio"].min(),
                                      group.loc[~group["winter"], "ratio"].max())
    a_ok = len(gaps) == 6 and all(w > s for w, s in gaps.values())

    hourly = hourly_means(rows, DEFAULT_SEASONS)
    winter_up = hourly[(hourly["season"] == "winter") & (hourly["direction"] == "up")]
    peak = int(winter_up.loc[winter_up["mean_proba"].idxmax(), "hour"])
    b_ok = 6 <= peak <= 10

    mean_up = np.mean([r.proba for r in rows if r.direction is UP])
    mean_down = np.mean([r.proba for r in rows if r.direction is DOWN])
    c_ok = mean_up > mean_down

    ok = a_ok and b_ok and c_ok
    detail = ", ".join(f"{d}/{dt}: winter min {w:.3f} > summer max {s:.3f}"
                       for (dt, d), (w, s) in sorted(gaps.items()))
    acceptance(6, ok, f"(a) {detail}; (b) winter upward peak hour {peak} (6..10); "
                      f"(c) mean up {mean_up:.0f} MW > mean down {mean_down:.0f} MW")
    assert ok


def test_c7_statistics_oracles(acceptance):
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    sizes = []
    for _ in range(50):
        series = random_series(rng, int(rng.integers(1, 201)))
        sizes.append(len(series))
        check_statistics(series)
    elapsed = time.perf_counter() - start
    ok = elapsed < 5
    acceptance(7, ok, f"50 series of {min(sizes)}..{max(sizes)} rows match brute force, {elapsed:.2f} s (< 5 s)")
    assert ok


@pytest.fixture
def live_server(golden_series_path):
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
    server = uvicorn.Server(uvicorn.Config(create_app(series_path=golden_series_path), host="127.0.0.1",
                                           port=port, log_level="warning"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.02)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=10)


def test_c8_service_contract(acceptance, live_server):
    query = {"t0": "2022-01-17T06:00Z", "horizon": "30", "direction": "up"}
    with httpx.Client(base_url=live_server, timeout=10) as client:
        with ThreadPoolExecutor(max_workers=20) as pool:
            responses = list(pool.map(lambda _: client.get("/margins", params=query), range(100)))
        bodies = {r.content for r in responses}
        same = all(r.status_code == 200 for r in responses) and len(bodies) == 1
        malformed = [client.get("/margins", params={**query, **bad}).status_code
                     for bad in ({"t0": "yesterday"}, {"horizon": "half"}, {"direction": "sideways"})]
        missing = [client.get("/margins", params={**query, **gone}).status_code
                   for gone in ({"horizon": "45"}, {"t0": "2023-01-17T06:00Z"})]
    ok = same and set(malformed) == {400} and set(missing) == {404}
    acceptance(8, ok, f"100 concurrent requests, {len(bodies)} distinct body; malformed -> {malformed}, "
                      f"missing -> {missing}")
    assert ok
