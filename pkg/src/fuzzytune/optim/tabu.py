"""
Tabu search refinement around a point of the continuous parameter space.

Neighbours are Gaussian perturbations of the current point. Visited points
are remembered as quantised keys in a bounded FIFO list; a tabu neighbour is
still admissible when it beats the best fitness found so far (aspiration).
The search always moves to the best admissible neighbour, even uphill.
"""

from __future__ import annotations

import logging
from collections import deque
from typing import Callable, Hashable, Sequence

import numpy as np
from attrs import field, frozen, validators


logger = logging.getLogger(__name__)

Key = tuple[int, ...]
EvaluateMany = Callable[[list[np.ndarray]], list[float]]
IterationHook = Callable[[int, int, float, np.ndarray], None]


@frozen
class TabuConfig:
    iterations: int = field(default=5, converter=int, validator=validators.ge(0))
    neighborhood_size: int = field(default=10, converter=int, validator=validators.ge(1))
    sigma: float = field(default=0.05, converter=float, validator=validators.gt(0.0))
    list_capacity: int = field(default=7, converter=int, validator=validators.ge(1))
    quantum: float = field(default=0.01, converter=float, validator=validators.gt(0.0))
    stream: int = field(default=0, converter=int, validator=validators.ge(0))


class TabuList:
    """Bounded FIFO memory of solution keys; the oldest key is evicted first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._keys: deque[Hashable] = deque(maxlen=capacity)

    def push(self, key: Hashable) -> None:
        self._keys.append(key)

    def __contains__(self, key: Hashable) -> bool:
        return key in self._keys

    def __len__(self) -> int:
        return len(self._keys)

    def __iter__(self):
        return iter(self._keys)


@frozen(eq=False)
class TabuResult:
    position: np.ndarray
    fitness: float
    evaluations: int


# --------------------------------------------------
# Building blocks
# --------------------------------------------------
def quantize_key(position: Sequence[float], quantum: float) -> Key:
    """Round every component to a multiple of quantum."""
    if not quantum > 0:
        raise ValueError(f"quantum must be positive, got {quantum!r}")
    steps = np.rint(np.asarray(position, dtype=float) / quantum)
    return tuple(int(s) for s in steps)


def neighbors(
    center: Sequence[float],
    config: TabuConfig,
    rng: np.random.Generator,
    bounds: tuple[float, float] = (-1.0, 1.0),
) -> list[np.ndarray]:
    """neighborhood_size Gaussian perturbations of center, clipped to bounds."""
    center = np.asarray(center, dtype=float)
    noise = rng.normal(0.0, config.sigma, size=(config.neighborhood_size, center.shape[0]))
    candidates = np.clip(center + noise, bounds[0], bounds[1])
    return [row.copy() for row in candidates]


def select_move(
    keys: Sequence[Hashable],
    fitnesses: Sequence[float],
    tabu: TabuList,
    best_fitness: float,
) -> int:
    """
    Index of the candidate to move to.

    A candidate is admissible when its key is not tabu or its fitness is
    strictly below best_fitness. The best admissible candidate wins, lowest
    index first on ties; with no admissible candidate the least-bad one is
    taken.
    """
    admissible = [
        i for i, (key, fit) in enumerate(zip(keys, fitnesses)) if key not in tabu or fit < best_fitness
    ]
    pool = admissible or range(len(fitnesses))
    return min(pool, key=lambda i: fitnesses[i])


def _serial(evaluate: Callable[[np.ndarray], float]) -> EvaluateMany:
    return lambda positions: [float(evaluate(p)) for p in positions]


# --------------------------------------------------
# Search
# --------------------------------------------------
def tabu_search(
    start: Sequence[float],
    start_fitness: float,
    evaluate: Callable[[np.ndarray], float],
    config: TabuConfig,
    rng: np.random.Generator,
    bounds: tuple[float, float] = (-1.0, 1.0),
    evaluate_many: EvaluateMany | None = None,
    on_iteration: IterationHook | None = None,
) -> TabuResult:
    """
    Refine start for config.iterations rounds.

    The tabu list starts empty apart from the start point on every call.
    Returns the best point seen (the start included), its fitness and the
    number of evaluations spent.

    Args:
        evaluate: fitness of a single position
        evaluate_many: optional batch evaluator (e.g. parallel); must return
            fitnesses in candidate order
        on_iteration: called after each round with
            (iteration, evaluations, best_fitness, best_position)
    """
    batch = evaluate_many or _serial(evaluate)

    current = np.asarray(start, dtype=float).copy()
    best_position, best_fitness = current.copy(), float(start_fitness)

    tabu = TabuList(config.list_capacity)
    tabu.push(quantize_key(current, config.quantum))
    evaluations = 0

    for iteration in range(1, config.iterations + 1):
        candidates = neighbors(current, config, rng, bounds)
        fitnesses = batch(candidates)
        evaluations += len(candidates)

        keys = [quantize_key(c, config.quantum) for c in candidates]
        chosen = select_move(keys, fitnesses, tabu, best_fitness)

        current = candidates[chosen]
        tabu.push(keys[chosen])
        if fitnesses[chosen] < best_fitness:
            best_position, best_fitness = current.copy(), float(fitnesses[chosen])

        logger.debug(
            f"TS iteration {iteration}/{config.iterations}: "
            f"moved to {fitnesses[chosen]:.6g}, best {best_fitness:.6g}"
        )
        if on_iteration is not None:
            on_iteration(iteration, evaluations, best_fitness, best_position)

    return TabuResult(position=best_position, fitness=best_fitness, evaluations=evaluations)

