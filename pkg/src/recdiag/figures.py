"""Figure rendering: per-panel SVG files and matplotlib composite grids.

Trace panels plot step i against the estimate on the first p + i - 1
observations, one line per permutation, starting at the ensemble's
trimmed first step.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402

from . import svg  # noqa: E402
from .cusum import Boundary, CusumPath  # noqa: E402
from .engine import TraceEnsemble  # noqa: E402

FULL_COLOR = "#c0392b"
REDUCED_COLOR = "#000000"
ENSEMBLE_COLOR = "#1f4e79"


@dataclass(frozen=True)
class Quantity:
    key: str
    title: str
    filename: str


def quantities(labels: Sequence[str]) -> list[Quantity]:
    """Panel rows: each coefficient, then R^2, then sigma^2."""
    rows = [Quantity(f"beta{j}", f"beta_{j} ({lab})", f"beta_{j}_{_slug(lab)}")
            for j, lab in enumerate(labels)]
    rows.append(Quantity("r2", "R^2", "r2"))
    rows.append(Quantity("sigma2", "sigma^2", "sigma2"))
    return rows


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_").lower() or "x"


def trace_lines(ens: TraceEnsemble, key: str) -> list[tuple[np.ndarray, np.ndarray]]:
    keep = ens.exported_mask()
    steps = np.arange(1, len(keep) + 1)[keep]
    lines = []
    for tr in ens.valid_traces:
        if key.startswith("beta"):
            values = tr.beta[:, int(key[4:])]
        else:
            values = getattr(tr, key)
        lines.append((steps, values[keep]))
    return lines


def write_trace_svgs(out_dir, layers: Sequence[tuple[TraceEnsemble, str]], title_prefix: str = "") -> list[Path]:
    """One SVG per quantity; each layer is (ensemble, colour). Returns the paths written."""
    out_dir = Path(out_dir)
    written = []
    for q in quantities(layers[0][0].data.labels):
        panel = svg.Panel(f"{title_prefix}{q.title}", xlabel="step i", ylabel=q.title)
        for ens, color in layers:
            for x, y in trace_lines(ens, q.key):
                panel.series.append(svg.Series(x.astype(float), y, color))
        path = out_dir / f"{q.filename}.svg"
        svg.write_panel(path, panel)
        written.append(path)
    return written


def write_cusum_svg(path, paths: Sequence[CusumPath], boundary: Boundary, title: str = "CUSUM") -> Path:
    panel = svg.Panel(title, xlabel="t", ylabel="X_n(t)")
    t_end = max((float(p.t[-1]) for p in paths), default=1.0)
    tb = np.linspace(0.0, t_end, 201)
    panel.guides.append(svg.Series(tb, boundary.upper(tb), "#777777", 1.0, 1.0))
    panel.guides.append(svg.Series(tb, boundary.lower(tb), "#777777", 1.0, 1.0))
    for p in paths:
        panel.series.append(svg.Series(p.t, p.x, ENSEMBLE_COLOR))
    svg.write_panel(path, panel)
    return Path(path)


def trace_grid_figure(path, columns: Sequence[tuple[str, Sequence[tuple[TraceEnsemble, str]]]], dpi: int = 110) -> Path:
    """Rows of quantities by columns of scenarios; each cell overlays its layers."""
    rows = quantities(columns[0][1][0][0].data.labels)
    fig, axes = plt.subplots(len(rows), len(columns), figsize=(3.2 * len(columns), 2.2 * len(rows)),
                             squeeze=False)
    for c, (col_title, layers) in enumerate(columns):
        for r, q in enumerate(rows):
            ax = axes[r, c]
            for ens, color in layers:
                segs = [np.column_stack([x, y]) for x, y in trace_lines(ens, q.key)]
                ax.add_collection(LineCollection(segs, colors=color, linewidths=0.5, alpha=0.5))
            ax.autoscale()
            ax.tick_params(labelsize=7)
            if r == 0:
                ax.set_title(col_title, fontsize=9)
            if c == 0:
                ax.set_ylabel(q.title, fontsize=8)
            if r == len(rows) - 1:
                ax.set_xlabel("step i", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi, metadata={"Software": None})
    plt.close(fig)
    return Path(path)


def cusum_grid_figure(path, columns: Sequence[tuple[str, Sequence[CusumPath], Boundary]], dpi: int = 110) -> Path:
    fig, axes = plt.subplots(1, len(columns), figsize=(3.2 * len(columns), 2.8), squeeze=False)
    for c, (title, paths, boundary) in enumerate(columns):
        ax = axes[0, c]
        segs = [np.column_stack([p.t, p.x]) for p in paths]
        ax.add_collection(LineCollection(segs, colors=ENSEMBLE_COLOR, linewidths=0.5, alpha=0.5))
        tb = np.linspace(0.0, 1.0, 201)
        ax.plot(tb, boundary.upper(tb), color="0.4", lw=1, ls="--")
        ax.plot(tb, boundary.lower(tb), color="0.4", lw=1, ls="--")
        ax.autoscale()
        ax.set_title(title, fontsize=9)
        ax.set_xlabel("t", fontsize=8)
        ax.tick_params(labelsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi, metadata={"Software": None})
    plt.close(fig)
    return Path(path)
