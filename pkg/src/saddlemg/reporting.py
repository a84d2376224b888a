"""Delimited output and figures for experiment runs."""

from __future__ import annotations

import csv
import os
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import CellResult  # noqa: E402

CSV_FIELDS = ["table", "t", "N", "cycle", "pre", "post", "omega_pre",
              "omega_post", "smoother", "iterations", "final_relres",
              "seconds"]


def format_csv_rows(cells: Sequence[CellResult]) -> List[str]:
    lines = [",".join(CSV_FIELDS)]
    for c in cells:
        d = c.csv_row()
        lines.append(",".join(_fmt(d[k]) for k in CSV_FIELDS))
    return lines


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def write_csv(path: str, cells: Sequence[CellResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for c in cells:
            d = c.csv_row()
            w.writerow([_fmt(d[k]) for k in CSV_FIELDS])


def _cell_label(c: CellResult) -> str:
    if c.table == 1:
        return "omega=%g" % c.omega_post
    if c.table == 2:
        return "nu=(%d,%d)" % (c.pre, c.post)
    if c.table == 3:
        return c.cycle
    return c.smoother


def write_figure(path: str, cells: Sequence[CellResult]) -> None:
    """Iteration counts against t, measured solid and published dashed."""
    groups: Dict[str, List[CellResult]] = {}
    for c in cells:
        groups.setdefault(_cell_label(c), []).append(c)
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for label, cs in groups.items():
        cs = sorted(cs, key=lambda c: c.t)
        ts = [c.t for c in cs]
        line, = ax.plot(ts, [c.iterations for c in cs], "o-", label=label)
        ax.plot(ts, [c.reference for c in cs], "--", lw=1.0,
                color=line.get_color(), alpha=0.6)
    ax.set_xlabel("t  (n = 2^t + 1)")
    ax.set_ylabel("iterations")
    ax.set_xticks(sorted({c.t for c in cells}))
    table = cells[0].table if cells else 0
    ax.set_title("table %d counts (dashed: published)" % table)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def figure_path_for(csv_path: str) -> str:
    stem, _ = os.path.splitext(csv_path)
    return stem + ".png"
