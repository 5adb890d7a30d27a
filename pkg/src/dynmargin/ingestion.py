"""Loading and writing snapshot files and the engine configuration.

Snapshot files are CSV with ``# key: value`` metadata lines before the header
row; configuration is a JSON document. Both carry a ``schema`` tag. See
``docs/formats.md`` for the exact layout.
"""

from __future__ import annotations

import csv
import io
import json
import math
from datetime import date
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .consumption import ConsumptionForecast, ConsumptionRegression, Holiday, HolidayProfile
from .conventional import FleetSnapshot, LogNormalSpec
from .core import default_levels, format_instant, parse_instant
from .errors import SchemaVersionError, ValidationError
from .margins import DeterministicTable
from .model import DEFAULT_SEASONS, DRIVERS, EngineConfig, ForecastSnapshot, SnapshotRow
from .renewables import RenewableForecast, WindGammaConstants

SNAPSHOT_SCHEMA = "dynmargin-snapshot/1"
CONFIG_SCHEMA = "dynmargin-config/1"

RENEWABLE_COLUMNS = {
    "wind": ("wind_expected", "wind_q10", "wind_q90"),
    "pv": ("pv_expected", "pv_q10", "pv_q90"),
}
CONSUMPTION_COLUMN = "consumption"
FLEET_KEYS = {"positive_only": "fleet.positive_only", "bidirectional": "fleet.bidirectional"}
LOGNORMAL_FIELDS = ("mu_ln", "sigma_ln", "scale", "shift", "sign")


def _fmt(x: float) -> str:
    text = repr(float(x))
    return text[:-2] if text.endswith(".0") else text


# --------------------------------------------------------------------------- snapshots

def _parse_lognormal(text: str, where: str) -> LogNormalSpec:
    fields = {}
    for token in text.replace(",", " ").split():
        key, sep, value = token.partition("=")
        if not sep or key not in LOGNORMAL_FIELDS:
            raise ValidationError([(where, f"bad log-normal field {token!r}")])
        try:
            fields[key] = int(value) if key == "sign" else float(value)
        except ValueError:
            raise ValidationError([(f"{where}.{key}", f"not a number: {value!r}")]) from None
    try:
        return LogNormalSpec(**fields)
    except ValidationError as exc:
        raise ValidationError([(f"{where}.{loc}", msg) for loc, msg in exc.issues]) from None


def _format_lognormal(s: LogNormalSpec) -> str:
    return " ".join(f"{k}={getattr(s, k) if k == 'sign' else _fmt(getattr(s, k))}" for k in LOGNORMAL_FIELDS)


def parse_snapshot(text: str, source: str = "<snapshot>") -> ForecastSnapshot:
    meta = {}
    body = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if body:
                raise ValidationError([(f"line {lineno}", "metadata after the header row")], source)
            key, sep, value = stripped[1:].partition(":")
            if not sep:
                raise ValidationError([(f"line {lineno}", "metadata must read '# key: value'")], source)
            meta[key.strip()] = value.strip()
        else:
            body.append(line)

    schema = meta.get("schema")
    if schema != SNAPSHOT_SCHEMA:
        raise SchemaVersionError([("schema", f"expected {SNAPSHOT_SCHEMA!r}, got {schema!r}")], source)
    if "t0" not in meta:
        raise ValidationError([("t0", "missing '# t0:' line")], source)
    issues = []
    try:
        t0 = parse_instant(meta["t0"])
    except ValueError as exc:
        raise ValidationError([("t0", str(exc))], source) from None

    fleet = None
    present = [k for k in FLEET_KEYS.values() if k in meta]
    if present:
        if len(present) != 2:
            issues.append(("fleet", "both fleet.positive_only and fleet.bidirectional are required"))
        else:
            try:
                fleet = FleetSnapshot(_parse_lognormal(meta[FLEET_KEYS["positive_only"]], FLEET_KEYS["positive_only"]),
                                      _parse_lognormal(meta[FLEET_KEYS["bidirectional"]], FLEET_KEYS["bidirectional"]))
            except ValidationError as exc:
                issues.extend(exc.issues)

    reader = csv.reader(body)
    header = next(reader, None)
    if header is None:
        raise ValidationError([("header", "missing header row")], source)
    header = [h.strip() for h in header]
    if not header or header[0] != "T":
        issues.append(("header", "first column must be 'T'"))
    known = {"T", CONSUMPTION_COLUMN, *RENEWABLE_COLUMNS["wind"], *RENEWABLE_COLUMNS["pv"]}
    for col in header:
        if col not in known:
            issues.append(("header", f"unknown column {col!r}"))
    if len(set(header)) != len(header):
        issues.append(("header", "duplicate column"))
    available = set()
    for name, cols in RENEWABLE_COLUMNS.items():
        have = [c in header for c in cols]
        if all(have):
            available.add(name)
        elif any(have):
            issues.append(("header", f"{name} needs all of {', '.join(cols)}"))
    if CONSUMPTION_COLUMN in header:
        available.add("consumption")
    if fleet is not None:
        available.add("conventional")

    if "drivers" in meta:
        drivers = {d.strip() for d in meta["drivers"].split(",") if d.strip()}
        for d in sorted(drivers - set(DRIVERS)):
            issues.append(("drivers", f"unknown driver {d!r}"))
        for d in sorted((drivers & set(DRIVERS)) - available):
            issues.append(("drivers", f"{d} enabled but its data is missing"))
    else:
        drivers = available
    if issues:
        raise ValidationError(issues, source)

    rows = []
    for rowno, record in enumerate(reader, start=1):
        if not any(cell.strip() for cell in record):
            continue
        if len(record) != len(header):
            issues.append((f"row {rowno}", f"expected {len(header)} fields, got {len(record)}"))
            continue
        cells = dict(zip(header, (c.strip() for c in record)))
        try:
            T = parse_instant(cells["T"])
        except ValueError as exc:
            issues.append((f"row {rowno}, T", str(exc)))
            continue
        numbers = {}
        for col in header[1:]:
            try:
                numbers[col] = float(cells[col])
            except ValueError:
                issues.append((f"row {rowno}, {col}", f"not a number: {cells[col]!r}"))
                continue
            if not math.isfinite(numbers[col]):
                issues.append((f"row {rowno}, {col}", "must be finite"))
        if any(loc.startswith(f"row {rowno},") for loc, _ in issues):
            continue
        row = {}
        for name, cols in RENEWABLE_COLUMNS.items():
            if name in available:
                columns = dict(zip(("expected", "q10_forecast", "q90_forecast"), cols))
                try:
                    row[name] = RenewableForecast(name, *(numbers[c] for c in cols), t0, T)
                except ValidationError as exc:
                    issues.extend((f"row {rowno}, {columns.get(loc, name)}", msg) for loc, msg in exc.issues)
        if "consumption" in available:
            try:
                row["consumption"] = ConsumptionForecast(numbers[CONSUMPTION_COLUMN], t0, T)
            except ValidationError as exc:
                issues.extend((f"row {rowno}, {CONSUMPTION_COLUMN}", msg) for _, msg in exc.issues)
        if len(row) == len(available - {"conventional"}):
            rows.append(SnapshotRow(T, **row))
    if issues:
        raise ValidationError(issues, source)
    try:
        return ForecastSnapshot(t0, tuple(rows), frozenset(drivers), fleet)
    except ValidationError as exc:
        raise ValidationError(exc.issues, source) from None


def load_snapshot(path) -> ForecastSnapshot:
    path = Path(path)
    return parse_snapshot(path.read_text(encoding="utf-8"), str(path))


def format_snapshot(snapshot: ForecastSnapshot) -> str:
    out = io.StringIO()
    out.write(f"# schema: {SNAPSHOT_SCHEMA}\n")
    out.write(f"# t0: {format_instant(snapshot.t0)}\n")
    out.write(f"# drivers: {','.join(d for d in DRIVERS if d in snapshot.drivers)}\n")
    if snapshot.fleet is not None:
        out.write(f"# {FLEET_KEYS['positive_only']}: {_format_lognormal(snapshot.fleet.positive_only)}\n")
        out.write(f"# {FLEET_KEYS['bidirectional']}: {_format_lognormal(snapshot.fleet.bidirectional)}\n")
    rows = snapshot.rows
    header = ["T"]
    for name, cols in RENEWABLE_COLUMNS.items():
        if rows and all(getattr(r, name) is not None for r in rows):
            header.extend(cols)
    if rows and all(r.consumption is not None for r in rows):
        header.append(CONSUMPTION_COLUMN)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        line = [format_instant(r.T)]
        for name, cols in RENEWABLE_COLUMNS.items():
            if cols[0] in header:
                f = getattr(r, name)
                line.extend(_fmt(x) for x in (f.expected, f.q10_forecast, f.q90_forecast))
        if CONSUMPTION_COLUMN in header:
            line.append(_fmt(r.consumption.value))
        writer.writerow(line)
    return out.getvalue()


def save_snapshot(snapshot: ForecastSnapshot, path) -> None:
    Path(path).write_text(format_snapshot(snapshot), encoding="utf-8")


# --------------------------------------------------------------------------- config

def _section(doc: dict, key: str) -> dict:
    value = doc.get(key, {})
    if not isinstance(value, dict):
        raise ValidationError([(key, "must be an object")])
    return value


def _seasons(spec) -> dict:
    if not isinstance(spec, dict):
        raise ValidationError([("seasons", "must map season names to month lists")])
    months = {}
    for name, members in spec.items():
        for m in members:
            if not (isinstance(m, int) and 1 <= m <= 12):
                raise ValidationError([(f"seasons.{name}", f"bad month {m!r}")])
            if m in months:
                raise ValidationError([(f"seasons.{name}", f"month {m} assigned twice")])
            months[m] = name
    missing = sorted(set(range(1, 13)) - set(months))
    if missing:
        raise ValidationError([("seasons", f"months {missing} have no season")])
    return months


def load_season_map(path) -> dict:
    return _seasons(json.loads(Path(path).read_text(encoding="utf-8")))


def config_from_dict(doc: dict, source: str = "<config>") -> EngineConfig:
    if doc.get("schema") != CONFIG_SCHEMA:
        raise SchemaVersionError([("schema", f"expected {CONFIG_SCHEMA!r}, got {doc.get('schema')!r}")], source)
    issues = []

    def attempt(where, build):
        try:
            return build()
        except ValidationError as exc:
            issues.extend((f"{where}.{loc}" if loc else where, msg) for loc, msg in exc.issues)
        except (TypeError, ValueError, KeyError) as exc:
            issues.append((where, f"{type(exc).__name__}: {exc}"))
        return None

    grid = _section(doc, "grid")
    level_lo = float(grid.get("level_lo", 0.5))
    level_hi = float(grid.get("level_hi", 99.5))
    level_step = float(grid.get("level_step", 0.5))
    levels = attempt("grid", lambda: default_levels(level_lo, level_hi, level_step))

    wind_gamma = attempt("wind_gamma", lambda: WindGammaConstants(**{k: float(v) for k, v in
                                                                     _section(doc, "wind_gamma").items()}))

    holidays = attempt("holidays", lambda: HolidayProfile(tuple(
        Holiday(date.fromisoformat(h["date"]), float(h["peak"]), int(h.get("ramp_in_days", 0)),
                int(h.get("ramp_out_days", 0))) for h in doc.get("holidays", []))))

    cons = _section(doc, "consumption")

    def build_regression():
        vr = cons.get("validation_range", {})
        extra = dict(holidays=holidays or HolidayProfile(),
                     consumption_range=tuple(float(x) for x in vr.get("consumption_mw", (20_000.0, 110_000.0))),
                     max_delta_T=float(vr.get("max_delta_T", 1440.0)))
        model = cons.get("model", "table")
        if model == "location_scale":
            return ConsumptionRegression.location_scale(cons["location"], cons["scale"], levels, **extra)
        if model == "table":
            return ConsumptionRegression(cons["levels"], cons["betas"], **extra)
        raise ValidationError([("model", f"unknown consumption model {model!r}")])

    regression = attempt("consumption", build_regression) if levels is not None else None

    det = _section(doc, "deterministic")
    deterministic = attempt("deterministic", lambda: DeterministicTable(
        tuple(tuple(row) for row in det.get("anchors", DeterministicTable().anchors))))

    conv = _section(doc, "convolution")
    seasons = attempt("seasons", lambda: _seasons(doc["seasons"]) if "seasons" in doc else dict(DEFAULT_SEASONS))
    if issues:
        raise ValidationError(issues, source)
    try:
        return EngineConfig(level_lo=level_lo, level_hi=level_hi, level_step=level_step,
                            wind_gamma=wind_gamma, consumption=regression, deterministic=deterministic,
                            n_bins=int(conv.get("bins", 4096)), padding=float(conv.get("padding", 0.1)),
                            seasons=seasons)
    except ValidationError as exc:
        raise ValidationError(exc.issues, source) from None


def load_config(path) -> EngineConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError([(f"line {exc.lineno}", f"invalid JSON: {exc.msg}")], str(path)) from None
    return config_from_dict(doc, str(path))


@lru_cache(maxsize=1)
def default_config_dict() -> dict:
    text = resources.files("dynmargin").joinpath("data/default_config.json").read_text(encoding="utf-8")
    return json.loads(text)


@lru_cache(maxsize=1)
def default_config() -> EngineConfig:
    return config_from_dict(default_config_dict(), "default_config.json")
