"""Line plots with 95% CI error bars from the simulator's results CSV.

This package consumes only the CSV contract (18 fixed columns); it never
imports the simulator. Rendering is deterministic: fixed style, sorted series,
no timestamps or software tags in the output files.
"""

from __future__ import annotations

import csv
import math
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

CSV_COLUMNS = (
    "scenario_id",
    "seed",
    "protocol",
    "sr_mode",
    "sr_p",
    "sr_n",
    "node_count",
    "drop_p",
    "speed_mps",
    "nwb_index",
    "origin",
    "connected",
    "covered",
    "transmissions",
    "coverage",
    "norm_overhead",
    "hello_tx",
    "quiescent",
)

Z95 = 1.959963984540054

_MARKERS = ("o", "s", "^", "v", "D", "x", "*", "P")


@dataclass
class Series:
    label: str
    xs: list[float]
    means: list[float]
    ci95: list[float]


def read_rows(path: str) -> list[dict]:
    """Quiescent rows only; a protocol that loses all its rows is warned about."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if reader.fieldnames is None or c not in reader.fieldnames]
        if missing:
            raise ValueError(f"CSV is missing expected columns: {', '.join(missing)}")
        all_rows = list(reader)
    rows = [row for row in all_rows if row["quiescent"] == "1"]
    lost = {r["protocol"] for r in all_rows} - {r["protocol"] for r in rows}
    for label in sorted(lost):
        print(f"warning: series {label!r} has no quiescent rows, skipped", file=sys.stderr)
    return rows


def sr_label(row: dict) -> str:
    mode = row["sr_mode"]
    if mode == "counter":
        return f"counter SR n={row['sr_n']}"
    if mode == "probabilistic":
        return f"prob SR p={row['sr_p']}"
    return "no SR"


def collect_series(rows, x_col: str, y_col: str, with_sr_in_label: bool) -> list[Series]:
    groups: dict[str, dict[float, list[float]]] = {}
    for row in rows:
        label = row["protocol"]
        if with_sr_in_label:
            label = f"{label}, {sr_label(row)}"
        x = float(row[x_col])
        groups.setdefault(label, {}).setdefault(x, []).append(float(row[y_col]))
    series = []
    for label in sorted(groups):
        pts = groups[label]
        xs = sorted(pts)
        means, cis = [], []
        for x in xs:
            vals = pts[x]
            mean = math.fsum(vals) / len(vals)
            if len(vals) > 1:
                var = math.fsum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
                ci = Z95 * math.sqrt(var) / math.sqrt(len(vals))
            else:
                ci = 0.0
            means.append(mean)
            cis.append(ci)
        series.append(Series(label, xs, means, cis))
    return series


def plot_series(series: list[Series], x_label: str, y_label: str, title: str, out_path: str) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for i, s in enumerate(series):
        ax.errorbar(
            s.xs,
            s.means,
            yerr=s.ci95,
            marker=_MARKERS[i % len(_MARKERS)],
            capsize=3,
            linewidth=1.4,
            markersize=5,
            label=s.label,
        )
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    # Empty metadata keeps the PNG bytes identical across renders.
    fig.savefig(out_path, dpi=150, metadata={"Software": None})
    plt.close(fig)


def _coverage_vs_drop(rows, out_dir):
    series = collect_series(rows, "drop_p", "coverage", with_sr_in_label=False)
    path = f"{out_dir}/coverage_vs_drop.png"
    plot_series(series, "drop probability", "coverage", "Node coverage under controlled drop", path)
    return {path: series}


def _overhead_vs_drop(rows, out_dir):
    series = collect_series(rows, "drop_p", "norm_overhead", with_sr_in_label=False)
    path = f"{out_dir}/overhead_vs_drop.png"
    plot_series(series, "drop probability", "normalized overhead", "Normalized overhead under controlled drop", path)
    return {path: series}


def _sr_comparison(rows, out_dir):
    out = {}
    cov = collect_series(rows, "drop_p", "coverage", with_sr_in_label=True)
    cov_path = f"{out_dir}/sr_coverage_vs_drop.png"
    plot_series(cov, "drop probability", "coverage", "Coverage with selective rebroadcast", cov_path)
    out[cov_path] = cov
    ovh = collect_series(rows, "drop_p", "norm_overhead", with_sr_in_label=True)
    ovh_path = f"{out_dir}/sr_overhead_vs_drop.png"
    plot_series(ovh, "drop probability", "normalized overhead", "Overhead with selective rebroadcast", ovh_path)
    out[ovh_path] = ovh
    return out


def _mobility_coverage(rows, out_dir):
    series = collect_series(rows, "speed_mps", "coverage", with_sr_in_label=True)
    path = f"{out_dir}/mobility_coverage.png"
    plot_series(series, "mean speed (m/s)", "coverage", "Node coverage under random waypoint mobility", path)
    return {path: series}


FAMILIES = {
    "coverage_vs_drop": _coverage_vs_drop,
    "overhead_vs_drop": _overhead_vs_drop,
    "sr_comparison": _sr_comparison,
    "mobility_coverage": _mobility_coverage,
}


def render_family(family: str, csv_path: str, out_dir: str) -> dict[str, list[Series]]:
    """Render one figure family; returns the plotted data per output file."""
    if family not in FAMILIES:
        known = ", ".join(sorted(FAMILIES))
        raise ValueError(f"unknown figure family '{family}' (available: {known})")
    rows = read_rows(csv_path)
    if not rows:
        raise ValueError("no quiescent rows in input CSV")
    return FAMILIES[family](rows, out_dir)
