"""SVG renderings of the report tables (needs matplotlib, no display)."""

from __future__ import annotations

from pathlib import Path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_exceedance(table, out_dir) -> list[Path]:
    plt = _pyplot()
    paths = []
    for direction, grp in table.groupby("direction"):
        fig, ax = plt.subplots(figsize=(8, 4))
        for dt, sub in grp.groupby("delta_T"):
            ax.plot(sub["month"], sub["ratio"], marker="o", label=f"{dt} min")
        ax.set_ylim(0, 1)
        ax.set_ylabel("share above deterministic margin")
        ax.set_title(f"Monthly exceedance ratio ({direction})")
        ax.tick_params(axis="x", rotation=60)
        ax.legend()
        fig.tight_layout()
        path = Path(out_dir) / f"exceedance_{direction}.svg"
        fig.savefig(path, format="svg")
        plt.close(fig)
        paths.append(path)
    return paths


def plot_boxstats(table, out_dir) -> list[Path]:
    plt = _pyplot()
    paths = []
    for direction, grp in table.groupby("direction"):
        stats = [{"label": f"{r.delta_T} {r.season[0]}", "whislo": r["min"], "q1": r.q25, "med": r.median,
                  "q3": r.q75, "whishi": r["max"], "mean": r.mean} for _, r in grp.iterrows()]
        fig, ax = plt.subplots(figsize=(8, 4))
        if stats:
            ax.bxp(stats, showmeans=True, showfliers=False)
        ax.set_ylabel("MW")
        ax.set_title(f"Probabilistic margin above the floor, per season ({direction})")
        fig.tight_layout()
        path = Path(out_dir) / f"boxstats_{direction}.svg"
        fig.savefig(path, format="svg")
        plt.close(fig)
        paths.append(path)
    return paths


def plot_hourly(table, out_dir) -> list[Path]:
    plt = _pyplot()
    paths = []
    for direction, grp in table.groupby("direction"):
        fig, ax = plt.subplots(figsize=(8, 4))
        for season, sub in grp.groupby("season"):
            ax.plot(sub["hour"], sub["mean_proba"], marker=".", label=season)
        ax.set_xlabel("hour of day (UTC)")
        ax.set_ylabel("mean probabilistic margin (MW)")
        ax.set_title(f"Hourly mean margin ({direction})")
        ax.legend()
        fig.tight_layout()
        path = Path(out_dir) / f"hourly_{direction}.svg"
        fig.savefig(path, format="svg")
        plt.close(fig)
        paths.append(path)
    return paths
