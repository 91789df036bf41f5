from __future__ import annotations

import pytest

from src.fuzzytune.control.closed_loop import SimConfig
from src.fuzzytune.control.fuzzy import ControllerParams, Gains, MembershipTriple
from src.fuzzytune.data.files import write_params
from src.fuzzytune.optim.hybrid import HybridConfig
from src.fuzzytune.optim.pso import PsoConfig
from src.fuzzytune.optim.tabu import TabuConfig


FAST_CONFIG = """\
# small run for tests
seed = 7
swarm_size = 4
generations = 1
ts_iterations = 1
neighborhood_size = 2
horizon = 0.2
"""


@pytest.fixture
def symmetric_params() -> ControllerParams:
    return ControllerParams(
        e_mf=MembershipTriple(-0.5, 0.0, 0.5),
        de_mf=MembershipTriple(-0.5, 0.0, 0.5),
        singletons=(-1.0, 0.0, 1.0),
        gains=Gains(),
    )


@pytest.fixture
def fast_sim() -> SimConfig:
    return SimConfig(T=0.01, horizon=0.3)


@pytest.fixture
def small_hybrid() -> HybridConfig:
    return HybridConfig(
        generations=2,
        pso=PsoConfig(swarm_size=4, seed=7),
        tabu=TabuConfig(iterations=2, neighborhood_size=3),
    )


@pytest.fixture
def params_file(tmp_path, symmetric_params):
    path = tmp_path / "params.txt"
    write_params(symmetric_params, path)
    return path


@pytest.fixture
def fast_config_file(tmp_path):
    path = tmp_path / "fast.conf"
    path.write_text(FAST_CONFIG, encoding="utf-8")
    return path
