"""
Flat ``key = value`` run configuration.

Every tunable of the optimiser, the simulation, the plant and the controller
gains lives in one file. Lines are parsed with python-dotenv's parser so that
comments, blank lines and quoting behave like a .env file, and every problem
is reported with its line number.
"""

from __future__ import annotations

import enum
import io
from pathlib import Path
from typing import Any, Callable, Mapping

import attrs
from attrs import evolve, field, frozen
from dotenv.parser import parse_stream

from src.fuzzytune.control.closed_loop import SimConfig
from src.fuzzytune.control.fuzzy import Gains
from src.fuzzytune.control.plant import PlantForm, PlantParams
from src.fuzzytune.errors import ConfigError
from src.fuzzytune.optim.hybrid import HybridConfig, TsScope
from src.fuzzytune.optim.pso import PsoConfig
from src.fuzzytune.optim.tabu import TabuConfig


DEFAULT_OUT_DIR = "runs/latest"


@frozen
class RunConfig:
    hybrid: HybridConfig = field(factory=HybridConfig)
    sim: SimConfig = field(factory=SimConfig)
    plant: PlantParams = field(factory=PlantParams)
    gains: Gains = field(factory=Gains)
    out_dir: str = DEFAULT_OUT_DIR

    @property
    def seed(self) -> int:
        return self.hybrid.pso.seed

    def with_seed(self, seed: int) -> "RunConfig":
        pso = evolve(self.hybrid.pso, seed=seed)
        return evolve(self, hybrid=evolve(self.hybrid, pso=pso))

    def to_text(self) -> str:
        """Normalised file form: every key, fixed order, LF line endings."""
        lines = ["# fuzzytune run configuration"]
        for key, (section, name, _) in KEYS.items():
            lines.append(f"{key} = {_format(getattr(_section(self, section), name))}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------
# Key table: key -> (section, attribute, parser)
# --------------------------------------------------
def _parse_int(text: str) -> int:
    return int(text, 10)


KEYS: Mapping[str, tuple[str, str, Callable[[str], Any]]] = {
    "seed": ("pso", "seed", _parse_int),
    "out_dir": ("run", "out_dir", str),
    "n_jobs": ("hybrid", "n_jobs", _parse_int),
    "generations": ("hybrid", "generations", _parse_int),
    "ts_scope": ("hybrid", "ts_scope", TsScope),
    "swarm_size": ("pso", "swarm_size", _parse_int),
    "w": ("pso", "w", float),
    "c1": ("pso", "c1", float),
    "c2": ("pso", "c2", float),
    "vmax": ("pso", "vmax", float),
    "pmin": ("pso", "pmin", float),
    "pmax": ("pso", "pmax", float),
    "ts_iterations": ("tabu", "iterations", _parse_int),
    "neighborhood_size": ("tabu", "neighborhood_size", _parse_int),
    "sigma": ("tabu", "sigma", float),
    "list_capacity": ("tabu", "list_capacity", _parse_int),
    "quantum": ("tabu", "quantum", float),
    "ts_stream": ("tabu", "stream", _parse_int),
    "T": ("sim", "T", float),
    "horizon": ("sim", "horizon", float),
    "theta0": ("sim", "theta0", float),
    "theta_dot0": ("sim", "theta_dot0", float),
    "reference": ("sim", "reference", float),
    "abort_angle": ("sim", "abort_angle", float),
    "M": ("plant", "M", float),
    "m": ("plant", "m", float),
    "l": ("plant", "l", float),
    "g": ("plant", "g", float),
    "b": ("plant", "b", float),
    "form": ("plant", "form", PlantForm),
    "input_sign": ("plant", "input_sign", float),
    "Ge": ("gains", "Ge", float),
    "Gde": ("gains", "Gde", float),
    "Gu": ("gains", "Gu", float),
}


def _section(config: RunConfig, section: str):
    if section == "run":
        return config
    if section in ("pso", "tabu"):
        return getattr(config.hybrid, section)
    return getattr(config, section)


def _format(value: Any) -> str:
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


# --------------------------------------------------
# Parsing
# --------------------------------------------------
def _binding_line(binding) -> int:
    original = binding.original
    leading = original.string[: len(original.string) - len(original.string.lstrip())]
    return original.line + leading.count("\n")


def _failed_key(err: Exception, section: str) -> str | None:
    """Map an attrs validation error back to the config key it came from."""
    names = [arg.name for arg in err.args if isinstance(arg, attrs.Attribute)]
    message = str(err.args[0]) if err.args else ""
    for key, (sec, name, _) in KEYS.items():
        if sec == section and (name in names or f"'{name}'" in message):
            return key
    return None


def parse_config(text: str, path: str | None = None) -> RunConfig:
    """
    Parse run-config text.

    Unknown, duplicated or malformed keys and invalid values raise
    ConfigError carrying the offending line number; absent keys keep their
    defaults.
    """
    values: dict[str, dict[str, Any]] = {s: {} for s in ("run", "hybrid", "pso", "tabu", "sim", "plant", "gains")}
    lines: dict[str, int] = {}

    for binding in parse_stream(io.StringIO(text)):
        line = _binding_line(binding)
        if binding.error:
            raise ConfigError(f"cannot parse {binding.original.string.strip()!r}", path, line)
        if binding.key is None:
            continue
        if binding.value is None:
            raise ConfigError(f"expected 'key = value', got {binding.key!r}", path, line)
        if binding.key not in KEYS:
            raise ConfigError(f"unknown key {binding.key!r}", path, line)
        if binding.key in lines:
            raise ConfigError(f"duplicate key {binding.key!r} (first on line {lines[binding.key]})", path, line)

        section, name, parse = KEYS[binding.key]
        try:
            values[section][name] = parse(binding.value.strip())
        except ValueError:
            raise ConfigError(f"invalid value {binding.value!r} for {binding.key!r}", path, line) from None
        lines[binding.key] = line

    def build(section: str, factory, **extra):
        try:
            return factory(**values[section], **extra)
        except (ValueError, TypeError) as err:
            key = _failed_key(err, section)
            raise ConfigError(f"invalid setting: {err.args[0] if err.args else err}", path, lines.get(key)) from None

    pso = build("pso", PsoConfig)
    tabu = build("tabu", TabuConfig)
    return RunConfig(
        hybrid=build("hybrid", HybridConfig, pso=pso, tabu=tabu),
        sim=build("sim", SimConfig),
        plant=build("plant", PlantParams),
        gains=build("gains", Gains),
        **values["run"],
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), str(path))
