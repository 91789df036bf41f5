"""
Hybrid PSO / tabu search optimisation of the fuzzy controller.

Each generation evaluates the swarm, updates pbest/gbest, moves every
particle once and then refines with tabu search, either around gbest only
(default) or around every particle's pbest.
"""

from __future__ import annotations

import enum
import logging
from typing import Iterator

import numpy as np
import polars as pl
from attrs import define, evolve, field, frozen, validators

from src.fuzzytune.control.closed_loop import Evaluator, SimConfig, evaluate_many
from src.fuzzytune.control.fuzzy import ControllerParams, Gains, decode, repair
from src.fuzzytune.control.plant import PlantParams
from src.fuzzytune.optim.pso import (
    PRNG_ID,
    GlobalBest,
    Particle,
    PsoConfig,
    init_swarm,
    make_streams,
    step_swarm,
    update_bests,
)
from src.fuzzytune.optim.tabu import TabuConfig, tabu_search


logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["phase", "generation", "iteration", "evaluations", "best_mse"]


class TsScope(enum.Enum):
    GBEST = "gbest"
    ALL = "all"


class Phase(enum.Enum):
    PSO = "pso"
    TS = "ts"


def _check_n_jobs(instance: "HybridConfig", attribute, value: int) -> None:
    # joblib: positive worker count, or negative for "all CPUs but |n| - 1"
    if value == 0:
        raise ValueError(f"'{attribute.name}' must be non-zero: {value!r}")


@frozen
class HybridConfig:
    generations: int = field(default=2, converter=int, validator=validators.ge(1))
    ts_scope: TsScope = field(default=TsScope.GBEST, converter=TsScope)
    pso: PsoConfig = field(factory=PsoConfig)
    tabu: TabuConfig = field(factory=TabuConfig)
    n_jobs: int = field(default=1, converter=int, validator=_check_n_jobs)


# --------------------------------------------------
# History
# --------------------------------------------------
@frozen(eq=False)
class HistoryRecord:
    phase: Phase
    generation: int
    iteration: int
    evaluations: int
    best_fitness: float
    best_position: np.ndarray


@define
class OptimizationHistory:
    records: list[HistoryRecord] = field(factory=list)

    def append(
        self,
        phase: Phase,
        generation: int,
        iteration: int,
        evaluations: int,
        best_fitness: float,
        best_position: np.ndarray,
    ) -> None:
        self.records.append(
            HistoryRecord(
                phase=phase,
                generation=generation,
                iteration=iteration,
                evaluations=evaluations,
                best_fitness=float(best_fitness),
                best_position=np.array(best_position, dtype=float),
            )
        )

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[HistoryRecord]:
        return iter(self.records)

    @property
    def best_fitness(self) -> list[float]:
        return [r.best_fitness for r in self.records]

    def to_frame(self) -> pl.DataFrame:
        rows = [
            (r.phase.value, r.generation, r.iteration, r.evaluations, r.best_fitness)
            for r in self.records
        ]
        dtypes = (pl.Utf8, pl.Int64, pl.Int64, pl.Int64, pl.Float64)
        return pl.DataFrame(rows, schema=list(zip(HISTORY_COLUMNS, dtypes)), orient="row")


@frozen(eq=False)
class OptimizationResult:
    params: ControllerParams
    fitness: float
    position: np.ndarray
    history: OptimizationHistory
    evaluations: int
    initial_best_fitness: float
    seed: int
    prng: str = PRNG_ID


# --------------------------------------------------
# Budget and streams
# --------------------------------------------------
def total_evaluations(hybrid: HybridConfig) -> int:
    """Fitness evaluations one optimize() call spends under this config."""
    searches = 1 if hybrid.ts_scope is TsScope.GBEST else hybrid.pso.swarm_size
    return (
        hybrid.pso.swarm_size * hybrid.generations
        + hybrid.generations * hybrid.tabu.iterations * hybrid.tabu.neighborhood_size * searches
    )


def spawn_streams(
    seed: int, swarm_size: int, ts_streams: int
) -> tuple[list[np.random.Generator], list[np.random.Generator]]:
    """Per-particle PSO streams and tabu-search streams from one seed."""
    pso_root, ts_root = np.random.SeedSequence(seed).spawn(2)
    return make_streams(pso_root, swarm_size), make_streams(ts_root, ts_streams)


# --------------------------------------------------
# Optimisation
# --------------------------------------------------
def optimize(
    hybrid: HybridConfig,
    plant: PlantParams,
    sim: SimConfig,
    gains: Gains,
) -> OptimizationResult:
    """
    Run the hybrid search and return the best controller found.

    History gets one record after every swarm evaluation and one after every
    tabu-search iteration; its best fitness never increases.
    """
    pso, tabu = hybrid.pso, hybrid.tabu
    bounds = (pso.pmin, pso.pmax)
    evaluator = Evaluator(plant=plant, sim=sim, gains=gains)

    def batch(positions: list[np.ndarray]) -> list[float]:
        return evaluate_many(evaluator, positions, hybrid.n_jobs)

    particle_streams, ts_streams = spawn_streams(
        pso.seed, pso.swarm_size, tabu.stream + pso.swarm_size
    )
    swarm = init_swarm(pso, particle_streams)
    gbest = GlobalBest(position=swarm[0].position.copy())
    history = OptimizationHistory()
    evaluations = 0
    initial_best = None

    for generation in range(1, hybrid.generations + 1):
        # --------------------------------------------
        # PSO phase
        # --------------------------------------------
        fitnesses = batch([p.position for p in swarm])
        evaluations += len(fitnesses)
        if initial_best is None:
            initial_best = min(fitnesses)

        swarm, gbest = update_bests(swarm, fitnesses, gbest)
        history.append(Phase.PSO, generation, 0, evaluations, gbest.fitness, gbest.position)
        logger.info(
            f"Generation {generation}/{hybrid.generations}: swarm best MSE {gbest.fitness:.6g} "
            f"({evaluations} evaluations)"
        )

        swarm = step_swarm(swarm, gbest, pso, particle_streams)

        # --------------------------------------------
        # Tabu search phase
        # --------------------------------------------
        if tabu.iterations == 0:
            continue

        if hybrid.ts_scope is TsScope.GBEST:
            spent_before = evaluations

            def record(iteration, spent, best_fitness, best_position):
                history.append(
                    Phase.TS, generation, iteration, spent_before + spent, best_fitness, best_position
                )

            result = tabu_search(
                gbest.position,
                gbest.fitness,
                evaluator,
                tabu,
                ts_streams[tabu.stream],
                bounds=bounds,
                evaluate_many=batch,
                on_iteration=record,
            )
            evaluations += result.evaluations
            if result.fitness < gbest.fitness:
                gbest = GlobalBest(position=result.position.copy(), fitness=result.fitness)
        else:
            swarm, gbest, evaluations = _refine_all(
                swarm, gbest, evaluations, generation, hybrid, evaluator, batch, ts_streams, history
            )

        logger.info(f"Generation {generation}: after tabu search best MSE {gbest.fitness:.6g}")

    best_position = repair(gbest.position)
    return OptimizationResult(
        params=decode(best_position, gains),
        fitness=gbest.fitness,
        position=best_position,
        history=history,
        evaluations=evaluations,
        initial_best_fitness=float(initial_best),
        seed=pso.seed,
    )


def _refine_all(
    swarm: list[Particle],
    gbest: GlobalBest,
    evaluations: int,
    generation: int,
    hybrid: HybridConfig,
    evaluator: Evaluator,
    batch,
    ts_streams: list[np.random.Generator],
    history: OptimizationHistory,
) -> tuple[list[Particle], GlobalBest, int]:
    """Tabu search from every particle's pbest; improvements move the particle."""
    tabu = hybrid.tabu
    bounds = (hybrid.pso.pmin, hybrid.pso.pmax)
    refined = []

    for i, particle in enumerate(swarm):
        spent_before = evaluations
        incumbent = gbest

        def record(iteration, spent, best_fitness, best_position):
            if best_fitness < incumbent.fitness:
                fitness, position = best_fitness, best_position
            else:
                fitness, position = incumbent.fitness, incumbent.position
            history.append(Phase.TS, generation, iteration, spent_before + spent, fitness, position)

        result = tabu_search(
            particle.pbest_position,
            particle.pbest_fitness,
            evaluator,
            tabu,
            ts_streams[tabu.stream + i],
            bounds=bounds,
            evaluate_many=batch,
            on_iteration=record,
        )
        evaluations += result.evaluations

        if result.fitness < particle.pbest_fitness:
            particle = evolve(
                particle,
                position=result.position.copy(),
                pbest_position=result.position.copy(),
                pbest_fitness=result.fitness,
            )
        if particle.pbest_fitness < gbest.fitness:
            gbest = GlobalBest(position=particle.pbest_position.copy(), fitness=particle.pbest_fitness)
        refined.append(particle)

    return refined, gbest, evaluations
