"""Render orbit/trace/scan/variation CSV files to static images.

Strict layering: this package only reads the decimal columns the CSV
files carry ('inf' becomes a gap); it never parses exact rationals and
never recomputes anything.  Output is deterministic: fixed style, no
timestamps, so a rerun on the same input is byte-identical.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

KINDS = ("phase-portrait", "trace", "height-scan", "variation")

_STYLE = {
    "figure.figsize": (6.0, 6.0),
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
}

# strip volatile metadata so identical inputs give identical bytes
_PNG_METADATA = {"Software": None}


class SchemaError(ValueError):
    """Input CSV does not carry the columns the figure kind needs."""


@dataclass(frozen=True)
class PlotJob:
    kind: str
    inputs: tuple
    output: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SchemaError("need at least one input CSV")


def read_csv_columns(path) -> dict[str, list[float]]:
    """Column-major float table; '#' lines skipped, 'inf' and empty
    cells become NaN so lines break instead of exploding the axes."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise SchemaError(f"{path}: empty CSV")
    header, data = rows[0], rows[1:]
    cols: dict[str, list[float]] = {name: [] for name in header}
    for row in data:
        if len(row) != len(header):
            raise SchemaError(f"{path}: ragged row {row!r}")
        for name, cell in zip(header, row):
            cols[name].append(_cell(cell))
    return cols


def _cell(text: str) -> float:
    if text == "" or text == "inf" or text == "-inf":
        return math.nan
    try:
        return float(text)
    except ValueError as e:
        raise SchemaError(f"non-numeric cell {text!r}") from e


def _need(cols, names, path):
    missing = [n for n in names if n not in cols]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")


def render(job: PlotJob) -> None:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for path in job.inputs:
            cols = read_csv_columns(path)
            _DRAW[job.kind](ax, cols, Path(path))
        _FINISH[job.kind](ax)
        fig.tight_layout()
        fig.savefig(job.output, format="png", metadata=_PNG_METADATA)
        plt.close(fig)


def _draw_portrait(ax, cols, path):
    _need(cols, ("x", "y"), path)
    ax.plot(cols["x"], cols["y"], ",", color="black", markersize=0.5)


def _finish_portrait(ax):
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("phase portrait")
    ax.set_aspect("equal", adjustable="datalim")


def _draw_trace(ax, cols, path):
    if "nu_x" in cols:
        _need(cols, ("t", "nu_x"), path)
        ax.step(cols["t"], cols["nu_x"], where="post", lw=0.8, label=path.stem)
    elif "nu" in cols:
        ax.step(cols["t"], cols["nu"], where="post", lw=0.8, label=path.stem)
    else:
        raise SchemaError(f"{path}: trace needs a nu_x or nu column")


def _finish_trace(ax):
    ax.set_xlabel("t")
    ax.set_ylabel("valuation")
    ax.set_title("valuation along the orbit")


def _draw_scan(ax, cols, path):
    hp_cols = sorted(
        (name for name in cols if name.startswith("hp_T")),
        key=lambda s: int(s[4:]),
    )
    if not hp_cols:
        raise SchemaError(f"{path}: scan needs hp_T* columns")
    xs = cols["x0"] if "x0" in cols else cols.get("i")
    if xs is None:
        raise SchemaError(f"{path}: scan needs x0 or i column")
    for name in hp_cols:
        ax.plot(xs, cols[name], lw=0.9, label=f"T={name[4:]}")


def _finish_scan(ax):
    ax.set_xlabel("initial condition")
    ax.set_ylabel("finite-T local height")
    ax.set_title("local height along the segment")
    ax.legend()


def _draw_variation(ax, cols, path):
    _need(cols, ("T", "V"), path)
    ax.plot(cols["T"], cols["V"], "o-", lw=1.0, label=path.stem)


def _finish_variation(ax):
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("T")
    ax.set_ylabel("V(T)")
    ax.set_title("normalised total variation")


_DRAW = {
    "phase-portrait": _draw_portrait,
    "trace": _draw_trace,
    "height-scan": _draw_scan,
    "variation": _draw_variation,
}
_FINISH = {
    "phase-portrait": _finish_portrait,
    "trace": _finish_trace,
    "height-scan": _finish_scan,
    "variation": _finish_variation,
}
