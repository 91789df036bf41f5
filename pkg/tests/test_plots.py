import re

import numpy as np
import pytest

from src.fuzzytune.control.closed_loop import SimConfig, simulate
from src.fuzzytune.control.fuzzy import Gains
from src.fuzzytune.control.plant import PlantParams
from src.fuzzytune.data.files import write_history, write_trace
from src.fuzzytune.errors import MissingColumn
from src.fuzzytune.optim.hybrid import optimize
from src.fuzzytune.viz.plots import line_chart, membership_figure, plot_csv, response_chart


def polyline(svg: str, gid: str) -> np.ndarray:
    """Vertices of the path drawn inside the group with the given id."""
    match = re.search(rf'<g id="{re.escape(gid)}">\s*<path d="([^"]*)"', svg)
    assert match, f"no series {gid!r} in SVG"
    points = re.findall(r"[ML] (-?[\d.]+) (-?[\d.]+)", match.group(1))
    return np.array(points, dtype=float)


def test_line_chart_tags_each_series(tmp_path):
    path = tmp_path / "chart.svg"
    x = np.linspace(0.0, 1.0, 11)
    line_chart(x, {"theta": np.sin(x), "u": np.cos(x)}, path, x_label="t")
    svg = path.read_text(encoding="utf-8")
    assert svg.startswith("<?xml")
    assert len(polyline(svg, "series-theta")) == 11
    assert len(polyline(svg, "series-u")) == 11


def test_charts_are_byte_deterministic(tmp_path):
    x = np.arange(5.0)
    line_chart(x, {"y": x**2}, tmp_path / "a.svg")
    line_chart(x, {"y": x**2}, tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_plot_trace_has_one_polyline(tmp_path, symmetric_params, fast_sim):
    csv = tmp_path / "trace_best.csv"
    write_trace(simulate(symmetric_params, PlantParams(), fast_sim), csv)
    out = tmp_path / "theta.svg"
    plot_csv(csv, "t", ["theta"], out)
    svg = out.read_text(encoding="utf-8")
    assert svg.count('<g id="series-') == 1
    assert len(polyline(svg, "series-theta")) > 1


def test_plot_history_ordinates_never_rise(tmp_path, small_hybrid, fast_sim):
    csv = tmp_path / "history.csv"
    write_history(optimize(small_hybrid, PlantParams(), fast_sim, Gains()).history, csv)
    out = tmp_path / "history.svg"
    plot_csv(csv, "evaluations", ["best_mse"], out)
    points = polyline(out.read_text(encoding="utf-8"), "series-best_mse")
    # SVG y grows downwards, so a non-increasing fitness never moves up
    assert np.all(np.diff(points[:, 1]) >= 0)
    assert np.all(np.diff(points[:, 0]) > 0)


def test_plot_unknown_column(tmp_path, symmetric_params, fast_sim):
    csv = tmp_path / "trace.csv"
    write_trace(simulate(symmetric_params, PlantParams(), fast_sim), csv)
    with pytest.raises(MissingColumn):
        plot_csv(csv, "t", ["omega"], tmp_path / "out.svg")
    assert not (tmp_path / "out.svg").exists()


def test_response_chart_one_series_per_trace(tmp_path, symmetric_params):
    traces = {
        f"theta0 = {theta0}": simulate(symmetric_params, PlantParams(), SimConfig(horizon=0.3, theta0=theta0))
        for theta0 in (0.1, 0.2, 0.3)
    }
    path = tmp_path / "response.svg"
    response_chart(traces, path)
    svg = path.read_text(encoding="utf-8")
    for i in range(3):
        assert f'<g id="series-{i}">' in svg


def test_membership_figure(tmp_path, symmetric_params):
    path = tmp_path / "membership.svg"
    membership_figure(symmetric_params, path)
    svg = path.read_text(encoding="utf-8")
    assert svg.startswith("<?xml")
    assert "c1 (N)" in svg
