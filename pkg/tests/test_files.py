import polars as pl
import pytest
from hypothesis import given, strategies as st

from src.fuzzytune.control.closed_loop import TRACE_COLUMNS, SimConfig, simulate
from src.fuzzytune.control.fuzzy import Gains, decode
from src.fuzzytune.control.plant import PlantParams
from src.fuzzytune.data.config import RunConfig, parse_config
from src.fuzzytune.data.files import (
    PARAM_KEYS,
    SWEEP_COLUMNS,
    format_csv_float,
    format_decimal,
    params_from_text,
    params_to_text,
    read_columns,
    read_params,
    run_meta_text,
    sweep_frame,
    write_params,
    write_sweep,
    write_trace,
)
from src.fuzzytune.errors import ConfigError, InvalidParams, MissingColumn


TUNED = decode(
    [-0.31234567890123456, 0.01, 0.7, -0.9, -0.2, 0.35, -0.8, 0.123456789, 0.99],
    Gains(Ge=1.1, Gde=0.3, Gu=25.0),
)


def with_line(key, value):
    """Parameter text of TUNED with the line for key replaced."""
    lines = [f"{key} = {value}" if line.startswith(f"{key} = ") else line for line in params_to_text(TUNED).splitlines()]
    return "\n".join(lines) + "\n"


# --------------------------------------------------
# Parameter file
# --------------------------------------------------
@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_format_decimal_is_exact(value):
    text = format_decimal(value)
    assert "e" not in text
    assert float(text) == value


def test_params_file_round_trip(tmp_path):
    path = tmp_path / "best_params.txt"
    write_params(TUNED, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert [line.split(" = ")[0] for line in lines] == list(PARAM_KEYS)
    assert read_params(path) == TUNED


def test_params_text_is_stable():
    assert params_to_text(params_from_text(params_to_text(TUNED))) == params_to_text(TUNED)


def test_params_missing_key_is_invalid():
    text = "".join(line + "\n" for line in params_to_text(TUNED).splitlines() if not line.startswith("c3"))
    with pytest.raises(InvalidParams, match="c3"):
        params_from_text(text)


def test_params_ordering_violation_is_invalid():
    text = with_line("a1", "0.5")
    with pytest.raises(InvalidParams, match="e_mf: a1 < a2"):
        params_from_text(text)


def test_params_zero_input_gain_is_invalid():
    text = with_line("Ge", "0")
    with pytest.raises(InvalidParams, match="gains"):
        params_from_text(text)


@pytest.mark.parametrize(
    "extra, message",
    [
        ("d1 = 0.5\n", "unknown key"),
        ("a1 = 0.1\n", "duplicate key"),
        ("", None),
    ],
)
def test_params_structural_errors(extra, message):
    text = params_to_text(TUNED) + extra
    if message is None:
        assert params_from_text(text) == TUNED
    else:
        with pytest.raises(ConfigError, match=message):
            params_from_text(text, "p.txt")


def test_params_bad_number():
    text = with_line("Gu", "lots")
    with pytest.raises(ConfigError, match="invalid number"):
        params_from_text(text)


# --------------------------------------------------
# CSV helpers
# --------------------------------------------------
def significant_digits(text: str) -> int:
    mantissa = text.lstrip("-").split("e")[0].replace(".", "")
    return len(mantissa.lstrip("0")) or len(mantissa)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_csv_floats_keep_nine_or_more_digits(value):
    text = format_csv_float(value)
    assert float(text) == value
    assert significant_digits(text) >= 9


def test_trace_csv_round_trips_exactly(tmp_path, symmetric_params):
    trace = simulate(symmetric_params, PlantParams(), SimConfig(horizon=0.3))
    path = tmp_path / "trace.csv"
    write_trace(trace, path)

    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    for line in lines[1:]:
        assert all(significant_digits(field) >= 9 for field in line.split(","))

    frame = pl.read_csv(path)
    for name, column in zip(TRACE_COLUMNS, (trace.t, trace.theta, trace.theta_dot, trace.u, trace.e)):
        assert frame[name].to_list() == column.tolist()


def test_sweep_csv_reads_back(tmp_path):
    rows = [
        {"theta0": 0.22, "settled": True, "settling_time": 0.5, "final_abs_theta": 1e-4},
        {"theta0": 0.8, "settled": False, "settling_time": None, "final_abs_theta": 1.2},
    ]
    path = tmp_path / "sweep_summary.csv"
    write_sweep(rows, path)
    assert path.read_text(encoding="utf-8").splitlines()[1].startswith("0.22000000000000000,true,")

    frame = pl.read_csv(path)
    assert frame.columns == SWEEP_COLUMNS
    assert frame["settled"].to_list() == [True, False]
    assert frame["settling_time"].to_list() == [0.5, None]
    assert frame["final_abs_theta"].to_list() == [1e-4, 1.2]


def test_sweep_frame_schema():
    frame = sweep_frame(
        [
            {"theta0": 0.1, "settled": True, "settling_time": 1.2, "final_abs_theta": 0.001},
            {"theta0": 0.9, "settled": False, "settling_time": None, "final_abs_theta": 1.6},
        ]
    )
    assert frame.columns == SWEEP_COLUMNS
    assert frame["settled"].dtype == pl.Boolean
    assert frame["settling_time"].null_count() == 1


def test_read_columns(tmp_path):
    path = tmp_path / "data.csv"
    pl.DataFrame({"t": [0.0, 0.1], "theta": [0.2, 0.1], "label": ["a", "b"]}).write_csv(path)

    frame = read_columns(path, "t", ["theta"])
    assert frame.columns == ["t", "theta"]

    with pytest.raises(MissingColumn, match="omega"):
        read_columns(path, "t", ["omega"])
    with pytest.raises(ValueError, match="numeric"):
        read_columns(path, "t", ["label"])


# --------------------------------------------------
# Run metadata
# --------------------------------------------------
def test_run_meta_loads_back_as_config():
    config = RunConfig().with_seed(5)
    text = run_meta_text(config, {"seed": 5, "seed_source": "cli", "prng": "numpy.PCG64/SeedSequence.spawn"})
    assert text.startswith("# fuzzytune run metadata\n# seed = 5\n# seed_source = cli\n")
    assert parse_config(text) == config
