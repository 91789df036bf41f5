"""
Static SVG figures: line charts of CSV columns, closed-loop responses and the
membership functions of a tuned controller.

Output is byte-deterministic for identical input (fixed SVG hash salt, no
timestamp, text kept as text).
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from src.fuzzytune.control.closed_loop import Trace
from src.fuzzytune.control.fuzzy import ControllerParams, MembershipTriple, control_surface
from src.fuzzytune.data.files import read_columns


_SVG_RC = {
    "svg.hashsalt": "fuzzytune",
    "svg.fonttype": "none",
    "path.simplify": False,
}

COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"]
TERM_LABELS = ("N", "Z", "P")


def _save(fig, path: str | Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# --------------------------------------------------
# Line charts
# --------------------------------------------------
def line_chart(
    x: Sequence[float],
    series: Mapping[str, Sequence[float]],
    path: str | Path,
    x_label: str = "",
    y_label: str = "",
    title: str | None = None,
) -> None:
    """
    One polyline per entry of series against x.

    Each line's SVG group id is ``series-<name>`` so the output can be
    inspected structurally.
    """
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        for i, (name, y) in enumerate(series.items()):
            (line,) = ax.plot(x, y, label=name, linewidth=1.5, color=COLORS[i % len(COLORS)])
            line.set_gid(f"series-{name}")

        ax.set_xlabel(x_label)
        ax.set_ylabel(y_label)
        if title:
            ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best")
        fig.tight_layout()
        _save(fig, path)


def plot_csv(in_path: str | Path, x: str, ys: Sequence[str], out_path: str | Path) -> None:
    df = read_columns(in_path, x, ys)
    line_chart(
        df[x].to_numpy(),
        {y: df[y].to_numpy() for y in ys},
        out_path,
        x_label=x,
        y_label=", ".join(ys),
    )


def response_chart(traces: Mapping[str, Trace], path: str | Path, title: str | None = None) -> None:
    """θ(t) of several closed-loop runs on one axis (robustness figure)."""
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        for i, (label, trace) in enumerate(traces.items()):
            (line,) = ax.plot(trace.t, trace.theta, label=label, linewidth=1.5, color=COLORS[i % len(COLORS)])
            line.set_gid(f"series-{i}")
        ax.axhline(0.0, color="black", linewidth=0.8)
        ax.set_xlabel("t (s)")
        ax.set_ylabel("theta (rad)")
        if title:
            ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend(loc="upper right")
        fig.tight_layout()
        _save(fig, path)


# --------------------------------------------------
# Membership functions
# --------------------------------------------------
def _triangles(triple: MembershipTriple) -> list[tuple[list[float], list[float]]]:
    a1, a2, a3 = triple.as_tuple()
    return [
        ([-1.0, a1, a2, 1.0], [1.0, 1.0, 0.0, 0.0]),
        ([-1.0, a1, a2, a3, 1.0], [0.0, 0.0, 1.0, 0.0, 0.0]),
        ([-1.0, a2, a3, 1.0], [0.0, 0.0, 1.0, 1.0]),
    ]


def membership_figure(params: ControllerParams, path: str | Path) -> None:
    """Input triangles, output singletons and the normalised control surface."""
    with plt.rc_context(_SVG_RC):
        fig, axes = plt.subplots(2, 2, figsize=(10, 7))

        for ax, triple, name in (
            (axes[0, 0], params.e_mf, "e (normalised)"),
            (axes[0, 1], params.de_mf, "de (normalised)"),
        ):
            for i, (xs, ys) in enumerate(_triangles(triple)):
                ax.plot(xs, ys, color=COLORS[i], label=TERM_LABELS[i], linewidth=1.5)
            ax.set_xlim(-1.0, 1.0)
            ax.set_ylim(0.0, 1.05)
            ax.set_xlabel(name)
            ax.set_ylabel("membership")
            ax.legend(loc="center right")

        ax = axes[1, 0]
        for i, c in enumerate(params.singletons):
            ax.vlines(c, 0.0, 1.0, color=COLORS[i], linewidth=2.0, label=f"c{i + 1} ({TERM_LABELS[i]})")
        ax.set_xlim(-1.0, 1.0)
        ax.set_ylim(0.0, 1.05)
        ax.set_xlabel("u (normalised)")
        ax.legend(loc="center right")

        ax = axes[1, 1]
        e_grid, de_grid, surface = control_surface(params)
        contour = ax.contourf(e_grid, de_grid, surface, levels=np.linspace(-1.0, 1.0, 21), cmap="RdBu_r")
        fig.colorbar(contour, ax=ax, label="u (normalised)")
        ax.set_xlabel("e (normalised)")
        ax.set_ylabel("de (normalised)")

        fig.tight_layout()
        _save(fig, path)
