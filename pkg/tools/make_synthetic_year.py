"""Regenerate src/dynmargin/data/synthetic_year_series.csv.

Writes the synthetic year's configuration next to the series, then computes
margins over the deterministic synthetic year with it.

    python tools/make_synthetic_year.py [--year 2022] [--days 1,8,15,22]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from dynmargin.ingestion import config_from_dict
from dynmargin.series import write_series
from dynmargin.synthetic import CONFIG_FILE, SERIES_FILE, SyntheticYear, synthetic_config_dict

DATA = Path(__file__).resolve().parents[1] / "src" / "dynmargin" / "data"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--year", type=int, default=2022)
    parser.add_argument("--days", default="1,8,15,22")
    parser.add_argument("--out", type=Path, default=DATA / SERIES_FILE)
    args = parser.parse_args(argv)
    doc = synthetic_config_dict()
    (DATA / CONFIG_FILE).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    year = SyntheticYear(year=args.year, days=tuple(int(d) for d in args.days.split(",")))
    rows, failures = year.compute(config_from_dict(doc))
    for f in failures:
        print(f"error: {f}", file=sys.stderr)
    write_series(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
