"""Regenerate src/dynmargin/data/default_config.json.

Fits the consumption location-scale coefficients on the seeded synthetic
error dataset and writes them next to the other shipped defaults. Requires
statsmodels.

    python tools/make_default_config.py [--rows 40000] [--seed 20210515]
"""

from __future__ import annotations

import argparse
import json
import math
from pathlib import Path

from dynmargin.fitting import SyntheticConsumptionErrors, fit_consumption_location_scale
from dynmargin.ingestion import CONFIG_SCHEMA

OUT = Path(__file__).resolve().parents[1] / "src" / "dynmargin" / "data" / "default_config.json"

# fixed-date French public holidays
FIXED_HOLIDAYS = ("01-01", "05-01", "05-08", "07-14", "08-15", "11-01", "11-11", "12-25")


def build(rows: int, seed: int) -> dict:
    v, dt, day, err = SyntheticConsumptionErrors().draw(rows, seed)
    location, scale, _ = fit_consumption_location_scale(v, dt, day, err)
    holidays = [{"date": f"{year}-{md}", "peak": 1.0, "ramp_in_days": 2, "ramp_out_days": 2}
                for year in range(2020, 2031) for md in FIXED_HOLIDAYS]
    return {
        "schema": CONFIG_SCHEMA,
        "grid": {"level_lo": 0.5, "level_hi": 99.5, "level_step": 0.5},
        "wind_gamma": {"a": 15.0, "b": 0.0, "c": 300.0 / math.sqrt(20.0), "tolerance": 1e-6},
        "consumption": {
            "model": "location_scale",
            "location": [round(float(x), 6) for x in location],
            "scale": [round(float(x), 6) for x in scale],
            "validation_range": {"consumption_mw": [20000.0, 110000.0], "max_delta_T": 1440.0},
            "fit": {"dataset": "dynmargin.fitting.SyntheticConsumptionErrors", "rows": rows, "seed": seed},
        },
        "holidays": holidays,
        "deterministic": {"anchors": [[15, 1500, 500], [120, 2300, 1250]]},
        "convolution": {"bins": 4096, "padding": 0.1},
        "seasons": {"winter": [11, 12, 1, 2, 3], "summer": [4, 5, 6, 7, 8, 9, 10]},
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=40_000)
    parser.add_argument("--seed", type=int, default=20210515)
    parser.add_argument("--out", type=Path, default=OUT)
    args = parser.parse_args()
    doc = build(args.rows, args.seed)
    args.out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {args.out}")
    print("location:", doc["consumption"]["location"])
    print("scale:   ", doc["consumption"]["scale"])


if __name__ == "__main__":
    main()
