"""Margin series: the tabular output of ``compute`` and input of the reports
and the query service.

Each row holds one (t0, t, T, direction). ``proba_mw`` is the probabilistic
requirement as a positive-is-needed figure, so for the downward direction it
is the negated 1 % imbalance quantile; ``final_mw = max(det_mw, proba_mw)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import pandas as pd

from .core import Direction, format_instant, minutes_between, parse_instant
from .errors import SchemaVersionError, ValidationError

SERIES_SCHEMA = "dynmargin-series/1"
COLUMNS = ("t0", "t", "T", "delta_T", "direction", "proba_mw", "det_mw", "final_mw")


@dataclass(frozen=True)
class MarginRow:
    t0: datetime
    t: datetime
    T: datetime
    delta_T: int
    direction: Direction
    proba: float
    det: float
    final: float

    @property
    def sort_key(self):
        return (self.t0, self.delta_T, self.direction.value != "up", self.T)

    def record(self) -> dict:
        return {"t0": format_instant(self.t0), "t": format_instant(self.t), "T": format_instant(self.T),
                "delta_T": self.delta_T, "direction": self.direction.value,
                "proba_mw": self.proba, "det_mw": self.det, "final_mw": self.final}


def rows_from_results(results) -> list[MarginRow]:
    rows = []
    for r in results:
        tr = r.triple
        for d in Direction:
            rows.append(MarginRow(tr.t0, tr.t, tr.T, tr.delta_T, d,
                                  float(r.proba(d)), float(r.det(d)), float(r.final(d))))
    return sorted(rows, key=lambda row: row.sort_key)


def _num(x: float) -> str:
    text = repr(float(x))
    return text[:-2] if text.endswith(".0") else text


def format_series(rows) -> str:
    out = io.StringIO()
    out.write(f"# schema: {SERIES_SCHEMA}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in sorted(rows, key=lambda row: row.sort_key):
        writer.writerow([format_instant(r.t0), format_instant(r.t), format_instant(r.T), r.delta_T,
                         r.direction.value, _num(r.proba), _num(r.det), _num(r.final)])
    return out.getvalue()


def write_series(rows, path) -> None:
    Path(path).write_text(format_series(rows), encoding="utf-8")


def parse_series(text: str, source: str = "<series>") -> list[MarginRow]:
    lines = text.splitlines()
    meta = {}
    while lines and lines[0].startswith("#"):
        key, _, value = lines.pop(0)[1:].partition(":")
        meta[key.strip()] = value.strip()
    if meta.get("schema") != SERIES_SCHEMA:
        raise SchemaVersionError([("schema", f"expected {SERIES_SCHEMA!r}, got {meta.get('schema')!r}")], source)
    reader = csv.reader(lines)
    header = tuple(h.strip() for h in next(reader, ()))
    if header != COLUMNS:
        raise ValidationError([("header", f"expected columns {','.join(COLUMNS)}")], source)
    rows, issues = [], []
    for n, rec in enumerate(reader, start=1):
        if not rec:
            continue
        try:
            cells = dict(zip(COLUMNS, (c.strip() for c in rec), strict=True))
            row = MarginRow(parse_instant(cells["t0"]), parse_instant(cells["t"]), parse_instant(cells["T"]),
                            int(cells["delta_T"]), Direction.parse(cells["direction"]),
                            float(cells["proba_mw"]), float(cells["det_mw"]), float(cells["final_mw"]))
        except ValueError as exc:
            issues.append((f"row {n}", str(exc)))
            continue
        if row.delta_T != minutes_between(row.t, row.T):
            issues.append((f"row {n}, delta_T", "does not equal T - t"))
        if row.final < row.det:
            issues.append((f"row {n}, final_mw", "final margin below deterministic margin"))
        rows.append(row)
    if issues:
        raise ValidationError(issues, source)
    return sorted(rows, key=lambda row: row.sort_key)


def read_series(path) -> list[MarginRow]:
    path = Path(path)
    return parse_series(path.read_text(encoding="utf-8"), str(path))


def to_frame(rows) -> pd.DataFrame:
    frame = pd.DataFrame([{"t0": r.t0, "t": r.t, "T": r.T, "delta_T": r.delta_T, "direction": r.direction.value,
                           "proba": r.proba, "det": r.det, "final": r.final} for r in rows],
                         columns=["t0", "t", "T", "delta_T", "direction", "proba", "det", "final"])
    return frame
