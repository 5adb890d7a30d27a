import copy
import json
from datetime import timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynmargin.conventional import FleetSnapshot, LogNormalSpec
from dynmargin.errors import SchemaVersionError, ValidationError
from dynmargin.ingestion import (config_from_dict, default_config, default_config_dict, format_snapshot,
                                 load_config, load_season_map, load_snapshot, parse_snapshot)
from dynmargin.model import ForecastSnapshot, make_row

from conftest import utc

GOLDEN_T0 = utc(2022, 1, 17, 6)
GOLDEN = ForecastSnapshot(
    GOLDEN_T0,
    (make_row(GOLDEN_T0, utc(2022, 1, 17, 8), wind=(4200.0, 3600.0, 4900.0), consumption=68500.0),),
    frozenset({"wind", "consumption", "conventional"}),
    FleetSnapshot(LogNormalSpec(mu_ln=5.2, sigma_ln=0.8, scale=1.0, shift=0.0, sign=1),
                  LogNormalSpec(mu_ln=4.1, sigma_ln=0.6, scale=1.0, shift=0.0, sign=-1)),
)

HEADER = "# schema: dynmargin-snapshot/1\n# t0: 2022-06-01T00:00Z\n"


def issues_of(text):
    with pytest.raises(ValidationError) as err:
        parse_snapshot(text)
    return err.value.issues


class TestSnapshot:
    def test_golden_fixture(self, golden_snapshot_path):
        assert load_snapshot(golden_snapshot_path) == GOLDEN

    def test_minimal_wind_only(self):
        snap = parse_snapshot(HEADER + "T,wind_expected,wind_q10,wind_q90\n2022-06-01T01:00Z,100,80,130\n")
        assert snap.drivers == {"wind"}
        assert snap.rows[0].wind.q90_forecast == 130

    def test_inverted_band_located(self):
        issues = issues_of(HEADER + "T,wind_expected,wind_q10,wind_q90\n"
                                    "2022-06-01T01:00Z,100,80,130\n2022-06-01T02:00Z,100,130,80\n")
        assert issues[0][0] == "row 2, wind_q90"

    def test_schema_mismatch(self):
        with pytest.raises(SchemaVersionError):
            parse_snapshot("# schema: dynmargin-snapshot/9\n# t0: 2022-06-01T00:00Z\nT,consumption\n")

    @pytest.mark.parametrize("body, location", [
        ("T,consumption\n2022-06-01T00:00Z,50000\n", "row 1 (2022-06-01T00:00Z)"),
        ("T,consumption\n2022-06-01T01:00Z,abc\n", "row 1, consumption"),
        ("T,consumption\n2022-06-01T01:00Z,-5\n", "row 1, consumption"),
        ("T,consumption\nyesterday,5\n", "row 1, T"),
        ("T,wind_expected,wind_q10\n", "header"),
        ("T,humidity\n", "header"),
        ("T,consumption\n2022-06-01T01:00Z,1,2\n", "row 1"),
    ])
    def test_diagnostics(self, body, location):
        assert issues_of(HEADER + body)[0][0] == location

    def test_enabled_driver_needs_data(self):
        issues = issues_of(HEADER + "# drivers: wind,conventional\nT,wind_expected,wind_q10,wind_q90\n")
        assert ("drivers", "conventional enabled but its data is missing") in issues

    def test_bad_fleet(self):
        text = (HEADER + "# fleet.positive_only: mu_ln=1 sigma_ln=-1 scale=1 shift=0 sign=1\n"
                "# fleet.bidirectional: mu_ln=1 sigma_ln=1 scale=1 shift=0 sign=-1\nT,consumption\n")
        assert issues_of(text)[0][0] == "fleet.positive_only.sigma_ln"

    def test_missing_pv_disables_pv(self, golden_snapshot_path):
        assert "pv" not in load_snapshot(golden_snapshot_path).drivers

    def test_golden_round_trip(self, golden_snapshot_path):
        snap = load_snapshot(golden_snapshot_path)
        assert parse_snapshot(format_snapshot(snap)) == snap

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 2e4), st.floats(0, 3e3), st.floats(0, 3e3), st.floats(0, 1.2e5),
                              st.floats(0, 2e4), st.floats(0, 1e3), st.floats(0, 1e3)),
                    min_size=1, max_size=8),
           st.floats(-3, 8), st.floats(0, 2), st.floats(-1e3, 1e3))
    def test_round_trip(self, rows, mu, sigma, shift):
        t0 = utc(2022, 6, 1)
        built = tuple(make_row(t0, t0 + timedelta(minutes=15 * (i + 1)), wind=(w, w - lo, w + hi),
                               consumption=c, pv=(p, p - plo, p + phi))
                      for i, (w, lo, hi, c, p, plo, phi) in enumerate(rows))
        fleet = FleetSnapshot(LogNormalSpec(mu, sigma, 1.5, shift, 1), LogNormalSpec(mu, sigma, 1.0, 0.0, -1))
        snap = ForecastSnapshot(t0, built, frozenset({"wind", "pv", "consumption", "conventional"}), fleet)
        again = parse_snapshot(format_snapshot(snap))
        assert again == snap
        assert format_snapshot(again) == format_snapshot(snap)


class TestConfig:
    def test_shipped_default(self):
        cfg = default_config()
        assert cfg.levels.size == 199
        assert cfg.wind_gamma.continuity_residual <= cfg.wind_gamma.tolerance
        assert cfg.deterministic.anchors == ((15.0, 1500.0, 500.0), (120.0, 2300.0, 1250.0))

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(default_config_dict()))
        assert load_config(path).n_bins == 4096

    def test_continuity_violation(self):
        doc = copy.deepcopy(default_config_dict())
        doc["wind_gamma"]["c"] = 60.0
        with pytest.raises(ValidationError) as err:
            config_from_dict(doc)
        assert err.value.issues[0][0] == "wind_gamma.c"

    def test_crossing_betas_name_levels(self):
        doc = copy.deepcopy(default_config_dict())
        doc["consumption"]["scale"][1] = -0.01
        with pytest.raises(ValidationError) as err:
            config_from_dict(doc)
        assert any(loc.startswith("consumption.levels ") for loc, _ in err.value.issues)
        assert "0.5/1" in str(err.value)

    def test_table_model(self):
        levels = [float(w) for w in np.arange(0.5, 100, 0.5)]
        doc = {"schema": "dynmargin-config/1",
               "consumption": {"model": "table", "levels": levels,
                               "betas": [[w, 0, 0, 0, 0, 0, 0] for w in levels]}}
        cfg = config_from_dict(doc)
        assert cfg.consumption.coefficients(99.5)[0] == 99.5

    def test_table_model_with_crossing(self):
        levels = [float(w) for w in np.arange(0.5, 100, 0.5)]
        betas = [[w, 0, 0, 0, 0, 0, 0] for w in levels]
        betas[10][0] = 1000
        doc = {"schema": "dynmargin-config/1",
               "consumption": {"model": "table", "levels": levels, "betas": betas}}
        with pytest.raises(ValidationError) as err:
            config_from_dict(doc)
        assert "levels 5.5/6" in str(err.value)

    def test_schema(self):
        with pytest.raises(SchemaVersionError):
            config_from_dict({"schema": "other"})

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{\n  \"schema\": \n")
        with pytest.raises(ValidationError) as err:
            load_config(path)
        assert "invalid JSON" in str(err.value)

    def test_missing_coefficients_for_grid(self):
        doc = copy.deepcopy(default_config_dict())
        doc["consumption"] = {"model": "table", "levels": [1.0, 99.0], "betas": [[0] * 7, [1] + [0] * 6]}
        with pytest.raises(ValidationError) as err:
            config_from_dict(doc)
        assert "no coefficients" in str(err.value)

    def test_season_map(self, tmp_path):
        path = tmp_path / "seasons.json"
        path.write_text(json.dumps({"cold": [12, 1, 2], "mild": [3, 4, 5, 9, 10, 11], "warm": [6, 7, 8]}))
        seasons = load_season_map(path)
        assert seasons[1] == "cold" and seasons[7] == "warm"
        path.write_text(json.dumps({"cold": [12, 1, 2]}))
        with pytest.raises(ValidationError):
            load_season_map(path)
