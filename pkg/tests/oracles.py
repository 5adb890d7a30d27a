"""Independent brute-force recomputations of the report statistics."""

from collections import defaultdict

import pytest

from dynmargin.model import DEFAULT_SEASONS
from dynmargin.stats import exceedance_ratio, hourly_means, seasonal_boxstats


def oracle_exceedance(rows):
    groups = defaultdict(lambda: [0, 0])
    for r in rows:
        g = groups[(f"{r.T.year:04d}-{r.T.month:02d}", r.delta_T, r.direction.value)]
        g[0] += 1
        g[1] += r.final > r.det
    return {k: (n, k_exc, k_exc / n) for k, (n, k_exc) in groups.items()}


def sorted_quantile(values, p):
    pos = (len(values) - 1) * p
    lo = int(pos)
    hi = min(lo + 1, len(values) - 1)
    return values[lo] + (values[hi] - values[lo]) * (pos - lo)


def oracle_box(rows, seasons):
    groups = defaultdict(list)
    for r in rows:
        if r.final > r.det:
            groups[(seasons[r.T.month], r.delta_T, r.direction.value)].append(r.proba)
    out = {}
    for k, vals in groups.items():
        v = sorted(vals)
        out[k] = (len(v), v[0], sorted_quantile(v, 0.25), sorted_quantile(v, 0.5), sorted_quantile(v, 0.75),
                  v[-1], sum(v) / len(v))
    return out


def oracle_hourly(rows, seasons):
    groups = defaultdict(list)
    for r in rows:
        groups[(r.T.hour, seasons[r.T.month], r.direction.value)].append(r.proba)
    return {k: (len(v), sum(v) / len(v)) for k, v in groups.items()}


def check_statistics(rows, seasons=DEFAULT_SEASONS):
    ex = exceedance_ratio(rows)
    expected = oracle_exceedance(rows)
    assert len(ex) == len(expected)
    for rec in ex.itertuples():
        n, k, ratio = expected[(rec.month, rec.delta_T, rec.direction)]
        assert (rec.count, rec.exceeding, rec.ratio) == (n, k, ratio)
        assert 0 <= rec.ratio <= 1

    box = seasonal_boxstats(rows, seasons)
    expected = oracle_box(rows, seasons)
    assert len(box) == len(expected)
    for rec in box.itertuples():
        n, lo, q25, med, q75, hi, mean = expected[(rec.season, rec.delta_T, rec.direction)]
        assert (rec.count, rec.min, rec.max) == (n, lo, hi)
        assert (rec.q25, rec.median, rec.q75, rec.mean) == pytest.approx((q25, med, q75, mean), rel=1e-12)
        assert rec.min <= rec.q25 <= rec.median <= rec.q75 <= rec.max

    hourly = hourly_means(rows, seasons)
    expected = oracle_hourly(rows, seasons)
    assert len(hourly) == len(expected)
    for rec in hourly.itertuples():
        n, mean = expected[(rec.hour, rec.season, rec.direction)]
        assert rec.count == n
        assert rec.mean_proba == pytest.approx(mean, rel=1e-12)
