"""Render success-vs-time and median-cost-vs-time panels from a benchmark
summary document.

One figure per (problem, dim) group: planners overlaid, shaded nonparametric
CI bands around the median cost, shared log-time axis. Vector output is
byte-deterministic for a fixed summary (hashed ids are salted, no timestamp
metadata), so figures can be golden-tested.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

SUMMARY_FORMAT = 1

_COLORS = plt.rcParams["axes.prop_cycle"].by_key()["color"]


class SchemaMismatch(ValueError):
    pass


class MissingCells(ValueError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    summary_path: str
    out_dir: str
    planners: tuple[str, ...] | None = None
    problems: tuple[str, ...] | None = None
    dims: tuple[int, ...] | None = None
    image_format: str = "svg"
    log_time: bool = True


def _parse_inf(obj):
    if obj == "inf":
        return math.inf
    if obj == "-inf":
        return -math.inf
    if isinstance(obj, dict):
        return {k: _parse_inf(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_parse_inf(v) for v in obj]
    return obj


def load_summary(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = _parse_inf(json.load(fh))
    if doc.get("format") != SUMMARY_FORMAT:
        raise SchemaMismatch(f"summary format {doc.get('format')!r}, expected {SUMMARY_FORMAT}")
    return doc


def _select_cells(doc: dict, spec: FigureSpec) -> list[dict]:
    cells = doc["cells"]
    if spec.planners is not None:
        missing = set(spec.planners) - {c["planner"] for c in cells}
        if missing:
            raise MissingCells(f"planners not in summary: {sorted(missing)}")
        cells = [c for c in cells if c["planner"] in spec.planners]
    if spec.problems is not None:
        missing = set(spec.problems) - {c["problem"] for c in cells}
        if missing:
            raise MissingCells(f"problems not in summary: {sorted(missing)}")
        cells = [c for c in cells if c["problem"] in spec.problems]
    if spec.dims is not None:
        missing = set(spec.dims) - {c["dim"] for c in cells}
        if missing:
            raise MissingCells(f"dims not in summary: {sorted(missing)}")
        cells = [c for c in cells if c["dim"] in spec.dims]
    if not cells:
        raise MissingCells("selection matched no cells")
    return cells


def _finite_top(cells: list[dict]) -> float:
    finite = [
        v
        for c in cells
        for series in (c["median"], c["ci_upper"], c["ci_lower"])
        for v in series
        if math.isfinite(v)
    ]
    return max(finite) * 1.05 if finite else 1.0


def _draw_group(group: list[dict], time_grid: np.ndarray, spec: FigureSpec, title: str):
    fig, (ax_success, ax_cost) = plt.subplots(
        2, 1, sharex=True, figsize=(6.0, 5.0), height_ratios=[1.0, 1.4]
    )
    y_top = _finite_top(group)
    for idx, cell in enumerate(sorted(group, key=lambda c: c["planner"])):
        color = _COLORS[idx % len(_COLORS)]
        success = 100.0 * np.asarray(cell["success"])
        ax_success.step(time_grid, success, where="post", color=color, label=cell["planner"])

        median = np.asarray(cell["median"], dtype=float)
        lo = np.asarray(cell["ci_lower"], dtype=float)
        hi = np.asarray(cell["ci_upper"], dtype=float)
        finite = np.isfinite(median)
        if finite.any():
            med_plot = np.where(finite, median, np.nan)
            lo_plot = np.clip(np.where(np.isfinite(lo), lo, np.nan), None, y_top)
            hi_plot = np.clip(np.where(np.isfinite(hi), hi, y_top), None, y_top)
            ax_cost.fill_between(time_grid, lo_plot, hi_plot, color=color, alpha=0.2, linewidth=0)
            ax_cost.plot(time_grid, med_plot, color=color, label=cell["planner"])
        infs = ~finite
        if infs.any():
            # unsolved medians sit clipped at the axis top with a marker
            marked = time_grid[infs][:: max(1, int(np.count_nonzero(infs) / 20))]
            ax_cost.plot(
                marked, np.full(marked.size, y_top), linestyle="none",
                marker="^", markersize=3, color=color,
            )

    ax_success.set_ylabel("success [%]")
    ax_success.set_ylim(-2, 102)
    ax_success.set_title(title)
    ax_success.legend(fontsize=8, loc="lower right")
    ax_cost.set_ylabel("median cost")
    ax_cost.set_xlabel("time [s]")
    ax_cost.set_ylim(top=y_top * 1.02)
    if spec.log_time:
        ax_cost.set_xscale("log")
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> list[str]:
    """Write one figure per (problem, dim) group; returns the file paths."""
    doc = load_summary(spec.summary_path)
    cells = _select_cells(doc, spec)
    time_grid = np.asarray(doc["time_grid"], dtype=float)
    os.makedirs(spec.out_dir, exist_ok=True)

    groups: dict[tuple[str, int], list[dict]] = {}
    for cell in cells:
        groups.setdefault((cell["problem"], cell["dim"]), []).append(cell)

    with plt.rc_context({"svg.hashsalt": "plotkit", "figure.max_open_warning": 0}):
        written = []
        for (problem, dim), group in sorted(groups.items()):
            fig = _draw_group(group, time_grid, spec, title=f"{problem} (R^{dim})")
            path = os.path.join(spec.out_dir, f"{problem}_{dim}d.{spec.image_format}")
            fig.savefig(path, format=spec.image_format, metadata=_metadata(spec.image_format))
            plt.close(fig)
            written.append(path)
    return written


def _metadata(image_format: str) -> dict | None:
    if image_format == "svg":
        return {"Date": None}
    if image_format == "pdf":
        return {"CreationDate": None}
    return None
