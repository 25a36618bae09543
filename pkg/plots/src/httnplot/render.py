"""Render the decay-ratio figure from experiment CSV output.

Input rows follow the decay CSV schema (one row per error-rate grid point);
the figure shows the measured noisy-to-ideal ratio against the error rate
on a log axis, one series per layer count, with the closed-form prediction
dashed on top. Rendering never modifies its inputs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

REQUIRED_COLUMNS = ("N", "L", "d", "epsilon", "seed", "noisy", "noiseless",
                    "ratio", "predicted_ratio", "qem_value",
                    "variance_multiplier")

# one place for every styling constant
STYLE = {
    "figsize": (6.4, 4.4),
    "measured_marker": "o",
    "measured_linestyle": "-",
    "predicted_linestyle": "--",
    "grid_alpha": 0.3,
    "xlabel": "error rate",
    "ylabel": "noisy / ideal ratio",
    "dpi": 160,
}


class SchemaError(ValueError):
    """The CSV does not carry the decay-sweep columns."""


@dataclass(frozen=True)
class PlotJob:
    """What to read and where to draw."""

    csv_paths: tuple
    out_path: str
    group_key: str = "L"

    def __post_init__(self):
        object.__setattr__(self, "csv_paths", tuple(str(p) for p in self.csv_paths))


def load_rows(csv_path: str) -> list[dict]:
    """Parse one CSV; raises :class:`SchemaError` on missing columns."""
    with open(csv_path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(
                f"{csv_path}: missing required columns: {', '.join(missing)}")
        rows = []
        for raw in reader:
            rows.append({key: float(raw[key]) for key in REQUIRED_COLUMNS})
    if not rows:
        raise SchemaError(f"{csv_path}: no data rows")
    return rows


def _series(rows: list[dict], group_key: str) -> dict:
    groups: dict = {}
    for row in rows:
        groups.setdefault(row[group_key], []).append(row)
    for bucket in groups.values():
        bucket.sort(key=lambda r: r["epsilon"])
    return dict(sorted(groups.items()))


def render_ratio_figure(job: PlotJob) -> list[str]:
    """Draw measured and predicted ratio curves; write SVG and PNG.

    Returns the written file paths. The x axis is logarithmic when all
    error rates are positive and symmetric-log otherwise (so zero-rate
    rows still show).
    """
    rows = []
    for path in job.csv_paths:
        rows.extend(load_rows(path))
    groups = _series(rows, job.group_key)

    fig, ax = plt.subplots(figsize=STYLE["figsize"])
    for value, bucket in groups.items():
        eps = [r["epsilon"] for r in bucket]
        label = f"{job.group_key}={value:g}"
        ax.plot(eps, [r["ratio"] for r in bucket],
                STYLE["measured_marker"], linestyle=STYLE["measured_linestyle"],
                label=f"measured, {label}")
        ax.plot(eps, [r["predicted_ratio"] for r in bucket],
                linestyle=STYLE["predicted_linestyle"], color="black",
                alpha=0.7, label=f"predicted, {label}")
    if all(r["epsilon"] > 0 for r in rows):
        ax.set_xscale("log")
    else:
        positives = [r["epsilon"] for r in rows if r["epsilon"] > 0]
        ax.set_xscale("symlog", linthresh=min(positives) if positives else 1e-6)
    ax.set_xlabel(STYLE["xlabel"])
    ax.set_ylabel(STYLE["ylabel"])
    ax.grid(True, alpha=STYLE["grid_alpha"])
    ax.legend(fontsize=8)
    fig.tight_layout()

    out = Path(job.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    targets = {".svg": out.with_suffix(".svg"), ".png": out.with_suffix(".png")}
    written = []
    for suffix, target in targets.items():
        fig.savefig(target, format=suffix.lstrip("."), dpi=STYLE["dpi"])
        written.append(str(target))
    plt.close(fig)
    return written
