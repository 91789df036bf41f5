import math

import numpy as np
import pytest
from attrs import evolve

from src.fuzzytune.control.closed_loop import (
    TRACE_COLUMNS,
    Evaluator,
    SimConfig,
    Trace,
    evaluate,
    evaluate_many,
    mse,
    settling_band,
    settling_time,
    simulate,
)
from src.fuzzytune.control.fuzzy import Gains, encode
from src.fuzzytune.control.plant import PlantForm, PlantParams


STANDARD = PlantParams(form=PlantForm.STANDARD)
OPEN_LOOP = Gains(Gu=0.0)


def make_trace(theta, T=0.1, aborted=False, theta_end=None):
    theta = np.asarray(theta, dtype=float)
    t = np.arange(len(theta)) * T
    zeros = np.zeros_like(theta)
    e_end = None if theta_end is None else -theta_end
    return Trace(t=t, theta=theta, theta_dot=zeros, u=zeros, e=-theta, aborted=aborted, e_end=e_end)


# --------------------------------------------------
# simulate
# --------------------------------------------------
def test_equilibrium_trace_is_zero(symmetric_params, fast_sim):
    trace = simulate(symmetric_params, STANDARD, evolve(fast_sim, theta0=0.0))
    assert not trace.aborted
    assert len(trace) == fast_sim.n_samples
    for column in (trace.theta, trace.theta_dot, trace.u, trace.e):
        assert np.all(column == 0.0)
    assert trace.e_end == 0.0


def test_open_loop_pendulum_falls(symmetric_params):
    params = evolve(symmetric_params, gains=OPEN_LOOP)
    sim = SimConfig()
    trace = simulate(params, STANDARD, sim)
    assert trace.aborted
    assert trace.abort_step is not None and trace.abort_step < sim.n_samples
    assert trace.e_end is None
    assert np.all(trace.u == 0.0)
    assert np.all(np.abs(trace.theta) <= sim.abort_angle)


def test_trace_sampling(symmetric_params, fast_sim):
    trace = simulate(symmetric_params, STANDARD, fast_sim)
    assert trace.t[0] == 0.0
    np.testing.assert_allclose(np.diff(trace.t), fast_sim.T)
    assert trace.theta[0] == fast_sim.theta0
    np.testing.assert_array_equal(trace.e, fast_sim.reference - trace.theta)


def test_initial_angle_beyond_abort_records_nothing(symmetric_params):
    trace = simulate(symmetric_params, STANDARD, SimConfig(theta0=2.0))
    assert trace.aborted
    assert trace.abort_step == 0
    assert len(trace) == 0


def test_trace_frame_schema(symmetric_params, fast_sim):
    trace = simulate(symmetric_params, STANDARD, fast_sim)
    frame = trace.to_frame()
    assert frame.columns == TRACE_COLUMNS
    assert frame.height == len(trace)


def test_sim_config_validation():
    with pytest.raises(ValueError):
        SimConfig(T=0.0)
    with pytest.raises(ValueError, match="horizon"):
        SimConfig(T=0.1, horizon=0.05)
    assert SimConfig(T=0.01, horizon=5.0).n_samples == 500


# --------------------------------------------------
# mse
# --------------------------------------------------
def test_mse_zero_error():
    assert mse(make_trace([0.0] * 10, theta_end=0.0), 10, 0.1) == 0.0


def test_mse_unit_errors():
    # e(1..4) = 1: three recorded samples after the first plus the final state
    assert mse(make_trace([1.0] * 4, T=0.01, theta_end=1.0), 4, 0.01) == 100.0


def test_mse_skips_initial_offset():
    assert mse(make_trace([0.22, 0.0, 0.0, 0.0], T=0.01, theta_end=0.0), 4, 0.01) == 0.0


def test_mse_penalises_missing_samples():
    empty = Trace.from_rows([], aborted=True, abort_step=0)
    assert mse(empty, 100, 0.01) == pytest.approx(100 * math.pi**2)


def test_mse_partial_abort():
    # e(1) recorded; e(2..4) never reached
    trace = make_trace([1.0, 1.0], T=0.01, aborted=True)
    expected = (1.0 + 3 * math.pi**2) / (4 * 0.01)
    assert mse(trace, 4, 0.01) == pytest.approx(expected)


def test_simulated_mse_sums_post_initial_samples(symmetric_params, fast_sim):
    trace = simulate(symmetric_params, STANDARD, fast_sim)
    assert not trace.aborted
    assert trace.e_end is not None
    n = fast_sim.n_samples
    errors = [*trace.e[1:], trace.e_end]
    assert len(errors) == n
    expected = math.fsum(e * e for e in errors) / (n * fast_sim.T)
    assert mse(trace, n, fast_sim.T) == pytest.approx(expected, rel=1e-15)


def test_mse_rejects_bad_arguments():
    with pytest.raises(ValueError):
        mse(make_trace([0.0]), 0, 0.01)


# --------------------------------------------------
# settling_time
# --------------------------------------------------
def test_settling_all_zero():
    assert settling_time(make_trace([0.0] * 5), 0.01) == 0.0


def test_settling_monotone_decay():
    t = np.arange(11) * 0.1
    trace = make_trace(1.0 - t)
    assert settling_time(trace, 0.5) == pytest.approx(0.5)


def test_settling_none_when_aborted():
    assert settling_time(make_trace([0.0] * 5, aborted=True), 0.01) is None


def test_settling_none_when_last_sample_outside():
    assert settling_time(make_trace([0.0, 0.0, 0.3]), 0.01) is None


def test_settling_band_policy():
    assert settling_band(0.22) == pytest.approx(0.011)
    assert settling_band(0.0) == 0.01
    assert settling_band(-1.0) == pytest.approx(0.05)
    with pytest.raises(ValueError):
        settling_time(make_trace([0.0]), 0.0)


# --------------------------------------------------
# evaluate
# --------------------------------------------------
def test_evaluate_is_deterministic(symmetric_params, fast_sim):
    position = encode(symmetric_params)
    first = evaluate(position, STANDARD, fast_sim, Gains())
    second = evaluate(position, STANDARD, fast_sim, Gains())
    assert first == second


def test_evaluate_repairs_before_decoding(fast_sim):
    unsorted = [0.4, -0.3, 0.0, 0.2, -0.6, 0.0, 0.9, -0.8, 0.1]
    ordered = [-0.3, 0.0, 0.4, -0.6, 0.0, 0.2, -0.8, 0.1, 0.9]
    assert evaluate(unsorted, STANDARD, fast_sim, Gains()) == evaluate(ordered, STANDARD, fast_sim, Gains())


def test_open_loop_fitness_is_fall_penalty(symmetric_params):
    sim = SimConfig()
    params = evolve(symmetric_params, gains=OPEN_LOOP)
    expected = mse(simulate(params, STANDARD, sim), sim.n_samples, sim.T)
    assert evaluate(encode(symmetric_params), STANDARD, sim, OPEN_LOOP) == expected
    # every sample after the fall is charged pi^2
    assert expected > math.pi**2 / 2


def test_evaluate_many_keeps_order(fast_sim):
    evaluator = Evaluator(plant=STANDARD, sim=fast_sim, gains=Gains())
    rng = np.random.default_rng(3)
    positions = [rng.uniform(-1.0, 1.0, 9) for _ in range(4)]
    serial = [evaluator(p) for p in positions]
    assert evaluate_many(evaluator, positions) == serial
    assert evaluate_many(evaluator, positions, n_jobs=2) == serial
