from __future__ import annotations

import io
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import polars as pl
from dotenv.parser import parse_stream

from src.fuzzytune.control.closed_loop import Trace
from src.fuzzytune.control.fuzzy import GAIN_NAMES, PARAM_NAMES, ControllerParams, Gains, decode, encode
from src.fuzzytune.data.config import RunConfig
from src.fuzzytune.errors import ConfigError, InvalidParams, MissingColumn
from src.fuzzytune.optim.hybrid import OptimizationHistory


PARAM_KEYS = PARAM_NAMES + GAIN_NAMES
SWEEP_COLUMNS = ["theta0", "settled", "settling_time", "final_abs_theta"]


# --------------------------------------------------
# Controller parameter file
# --------------------------------------------------
def format_decimal(value: float) -> str:
    """Positional decimal with 17 significant digits (exact float round-trip)."""
    return np.format_float_positional(
        float(value), precision=17, unique=False, fractional=False, trim="k"
    )


def params_to_text(params: ControllerParams) -> str:
    gains = params.gains
    values = [*encode(params), gains.Ge, gains.Gde, gains.Gu]
    return "".join(f"{key} = {format_decimal(v)}\n" for key, v in zip(PARAM_KEYS, values))


def write_params(params: ControllerParams, path: str | Path) -> None:
    Path(path).write_text(params_to_text(params), encoding="utf-8", newline="\n")


def params_from_text(text: str, path: str | None = None) -> ControllerParams:
    """
    Parse a controller parameter file.

    Raises:
        ConfigError: a line is malformed, a key is unknown/duplicated or a
            value is not a number.
        InvalidParams: a key is missing or an ordering/range/gain invariant
            fails; the message names the invariant.
    """
    values: dict[str, float] = {}
    for binding in parse_stream(io.StringIO(text)):
        line = binding.original.line
        if binding.error or (binding.key is not None and binding.value is None):
            raise ConfigError(f"cannot parse {binding.original.string.strip()!r}", path, line)
        if binding.key is None:
            continue
        if binding.key not in PARAM_KEYS:
            raise ConfigError(f"unknown key {binding.key!r}", path, line)
        if binding.key in values:
            raise ConfigError(f"duplicate key {binding.key!r}", path, line)
        try:
            values[binding.key] = float(binding.value)
        except ValueError:
            raise ConfigError(f"invalid number {binding.value!r} for {binding.key!r}", path, line) from None

    missing = [k for k in PARAM_KEYS if k not in values]
    if missing:
        raise InvalidParams(f"missing parameter(s): {', '.join(missing)}")

    try:
        gains = Gains(*(values[k] for k in GAIN_NAMES))
    except ValueError as err:
        raise InvalidParams(f"gains: {err.args[0]}") from None
    return decode([values[k] for k in PARAM_NAMES], gains)


def read_params(path: str | Path) -> ControllerParams:
    path = Path(path)
    return params_from_text(path.read_text(encoding="utf-8"), str(path))


# --------------------------------------------------
# CSV artifacts
# --------------------------------------------------
def format_csv_float(value: float) -> str:
    """17 significant digits, trailing zeros kept: 0.01 -> 0.010000000000000000."""
    return f"{value:#.17g}"


def write_csv(frame: pl.DataFrame, path: str | Path) -> None:
    """Write frame with every Float64 column spelled out by format_csv_float."""
    floats = [name for name, dtype in frame.schema.items() if dtype == pl.Float64]
    frame.with_columns(
        [pl.col(name).map_elements(format_csv_float, return_dtype=pl.Utf8) for name in floats]
    ).write_csv(path)


def write_trace(trace: Trace, path: str | Path) -> None:
    write_csv(trace.to_frame(), path)


def write_history(history: OptimizationHistory, path: str | Path) -> None:
    write_csv(history.to_frame(), path)


def sweep_frame(rows: Sequence[Mapping[str, object]]) -> pl.DataFrame:
    dtypes = (pl.Float64, pl.Boolean, pl.Float64, pl.Float64)
    return pl.DataFrame(list(rows), schema=dict(zip(SWEEP_COLUMNS, dtypes)))


def write_sweep(rows: Sequence[Mapping[str, object]], path: str | Path) -> None:
    write_csv(sweep_frame(rows), path)


def read_columns(path: str | Path, x: str, ys: Sequence[str]) -> pl.DataFrame:
    """Load the x and y columns of a CSV, raising MissingColumn if one is absent."""
    df = pl.read_csv(path)
    missing = [c for c in (x, *ys) if c not in df.columns]
    if missing:
        raise MissingColumn(f"{path}: no column(s) {', '.join(missing)}; have {', '.join(df.columns)}")
    try:
        return df.select([x, *ys]).cast(pl.Float64)
    except (pl.ComputeError, pl.InvalidOperationError) as err:
        raise ValueError(f"{path}: plotted columns must be numeric ({err})") from None


# --------------------------------------------------
# Run metadata
# --------------------------------------------------
def run_meta_text(config: RunConfig, meta: Mapping[str, object]) -> str:
    """
    Metadata as comment lines followed by the normalised config echo, so the
    file itself loads back as the run's configuration.
    """
    header = "".join(f"# {key} = {value}\n" for key, value in meta.items())
    return "# fuzzytune run metadata\n" + header + config.to_text()


def write_run_meta(config: RunConfig, meta: Mapping[str, object], path: str | Path) -> None:
    Path(path).write_text(run_meta_text(config, meta), encoding="utf-8", newline="\n")
