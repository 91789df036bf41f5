"""
Closed-loop simulation of the fuzzy controller on the pendulum, the MSE
fitness built on it and the settling-time metric.
"""

from __future__ import annotations

import logging
import math
from typing import Iterable, Sequence

import numpy as np
import polars as pl
from attrs import field, frozen, validators
from joblib import Parallel, delayed

from src.fuzzytune.control.fuzzy import ControllerParams, Gains, control, decode, repair
from src.fuzzytune.control.plant import PlantParams, PlantState, step_rk4
from src.fuzzytune.errors import DegenerateDynamics, NonFiniteState


logger = logging.getLogger(__name__)

# Squared error charged for every sample lost to an early abort.
ABORT_PENALTY_ERROR = math.pi

TRACE_COLUMNS = ["t", "theta", "theta_dot", "u", "e"]


def _check_horizon(instance: "SimConfig", attribute, value: float) -> None:
    if value < instance.T:
        raise ValueError(f"'{attribute.name}' must be at least T = {instance.T!r}: {value!r}")


@frozen
class SimConfig:
    T: float = field(default=0.01, converter=float, validator=validators.gt(0.0))
    horizon: float = field(default=5.0, converter=float, validator=_check_horizon)
    theta0: float = field(default=0.22, converter=float)
    theta_dot0: float = field(default=0.0, converter=float)
    reference: float = field(default=0.0, converter=float)
    abort_angle: float = field(default=math.pi / 2, converter=float, validator=validators.gt(0.0))

    @property
    def n_samples(self) -> int:
        return max(1, round(self.horizon / self.T))


@frozen(eq=False)
class Trace:
    """
    Samples k = 0..len-1 at t = k*T; the command u(k) is held over [t, t+T).

    ``e_end`` is the error e(n) after the last held command, or None when the
    run aborted before reaching it.
    """

    t: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    u: np.ndarray
    e: np.ndarray
    aborted: bool = False
    abort_step: int | None = None
    e_end: float | None = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def final_abs_theta(self) -> float:
        return float(abs(self.theta[-1])) if len(self) else math.nan

    @property
    def post_initial_errors(self) -> np.ndarray:
        """e(1), e(2), ... as far as the run got; e(0) is the initial offset."""
        tail = [] if self.e_end is None else [self.e_end]
        return np.concatenate([self.e[1:], tail])

    def to_frame(self) -> pl.DataFrame:
        columns = (self.t, self.theta, self.theta_dot, self.u, self.e)
        return pl.DataFrame(
            dict(zip(TRACE_COLUMNS, columns)),
            schema={name: pl.Float64 for name in TRACE_COLUMNS},
        )

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[tuple[float, float, float, float, float]],
        aborted: bool,
        abort_step: int | None,
        e_end: float | None = None,
    ) -> "Trace":
        columns = np.array(rows, dtype=float).reshape(-1, len(TRACE_COLUMNS)).T
        return cls(*columns, aborted=aborted, abort_step=abort_step, e_end=e_end)


# --------------------------------------------------
# Simulation
# --------------------------------------------------
def simulate(params: ControllerParams, plant: PlantParams, sim: SimConfig) -> Trace:
    """
    Run the sampled control loop for n = round(horizon / T) steps.

    At step k the error e(k) = reference - θ(k) and its backward difference
    (zero at k = 0) feed the controller; its command is held for one RK4 step.
    The run stops early, with ``aborted`` set, once |θ| exceeds the abort
    angle or the plant integration fails. The state reached after the last
    step is checked the same way and its error kept as ``e_end``.
    """
    n = sim.n_samples
    T = sim.T
    state = PlantState(theta=sim.theta0, theta_dot=sim.theta_dot0)

    rows: list[tuple[float, float, float, float, float]] = []
    e_prev = sim.reference - sim.theta0
    aborted = False
    abort_step = None
    e_end = None

    for k in range(n):
        if not state.is_finite() or abs(state.theta) > sim.abort_angle:
            aborted, abort_step = True, k
            break

        e = sim.reference - state.theta
        de = (e - e_prev) / T
        u = control(e, de, params)
        if not math.isfinite(u):
            aborted, abort_step = True, k
            break

        rows.append((k * T, state.theta, state.theta_dot, u, e))
        try:
            state = step_rk4(state, plant.input_sign * u, T, plant)
        except (DegenerateDynamics, NonFiniteState):
            aborted, abort_step = True, k + 1
            break
        e_prev = e
    else:
        if state.is_finite() and abs(state.theta) <= sim.abort_angle:
            e_end = sim.reference - state.theta
        else:
            aborted, abort_step = True, n

    return Trace.from_rows(rows, aborted=aborted, abort_step=abort_step, e_end=e_end)


# --------------------------------------------------
# Metrics
# --------------------------------------------------
def mse(trace: Trace, n: int, T: float) -> float:
    """
    Mean square error (1 / (n T)) * sum e(k)^2 over the samples k = 1..n.

    e(0) is the initial offset, the same for every controller, and is left
    out. Samples an aborted run never reached are charged
    ABORT_PENALTY_ERROR each.
    """
    if n < 1 or not T > 0:
        raise ValueError(f"need n >= 1 and T > 0, got n={n!r}, T={T!r}")
    errors = trace.post_initial_errors[:n]
    total = math.fsum(float(e) * float(e) for e in errors)
    if trace.aborted:
        total += (n - len(errors)) * ABORT_PENALTY_ERROR**2
    return total / (n * T)


def settling_time(trace: Trace, band: float) -> float | None:
    """First time after which |θ| stays within band, or None if it never does."""
    if not band > 0:
        raise ValueError(f"band must be positive, got {band!r}")
    if trace.aborted or len(trace) == 0:
        return None

    outside = np.flatnonzero(np.abs(trace.theta) > band)
    if outside.size == 0:
        return float(trace.t[0])
    last = int(outside[-1])
    if last == len(trace) - 1:
        return None
    return float(trace.t[last + 1])


def settling_band(theta0: float) -> float:
    return max(0.05 * abs(theta0), 0.01)


# --------------------------------------------------
# Fitness
# --------------------------------------------------
def evaluate(
    position: Sequence[float], plant: PlantParams, sim: SimConfig, gains: Gains
) -> float:
    """Fitness of a raw particle position: repair, decode, simulate, MSE."""
    params = decode(repair(position), gains)
    trace = simulate(params, plant, sim)
    return mse(trace, sim.n_samples, sim.T)


@frozen
class Evaluator:
    """Particle-to-fitness function bound to one plant/simulation/gain setup."""

    plant: PlantParams = field(factory=PlantParams)
    sim: SimConfig = field(factory=SimConfig)
    gains: Gains = field(factory=Gains)

    def __call__(self, position: Sequence[float]) -> float:
        return evaluate(position, self.plant, self.sim, self.gains)


def evaluate_many(
    evaluator: Evaluator, positions: Iterable[Sequence[float]], n_jobs: int = 1
) -> list[float]:
    """Evaluate positions, optionally in parallel; results keep input order."""
    positions = [np.asarray(p, dtype=float) for p in positions]
    if n_jobs == 1 or len(positions) < 2:
        return [evaluator(p) for p in positions]
    logger.debug(f"Evaluating {len(positions)} positions with n_jobs={n_jobs}")
    return list(Parallel(n_jobs=n_jobs)(delayed(evaluator)(p) for p in positions))
