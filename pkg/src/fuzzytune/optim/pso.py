"""
Particle swarm over the nine controller parameters.

Velocity update with inertia and cognitive/social attraction, magnitude
clamping of velocity (Vmax) and position ([pmin, pmax]), and pbest/gbest
bookkeeping with strict-improvement, keep-incumbent tie breaking.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from attrs import define, evolve, field, frozen, validators

from src.fuzzytune.control.fuzzy import N_PARAMS, repair


PRNG_ID = "numpy.PCG64/SeedSequence.spawn"


def _check_bounds(instance: "PsoConfig", attribute, value: float) -> None:
    if not instance.pmin < value:
        raise ValueError(f"'{attribute.name}' must be above pmin {instance.pmin!r}: {value!r}")


@frozen
class PsoConfig:
    swarm_size: int = field(default=20, converter=int, validator=validators.ge(2))
    w: float = field(default=0.729, converter=float, validator=[validators.ge(0.0), validators.le(1.0)])
    c1: float = field(default=1.49445, converter=float, validator=validators.ge(0.0))
    c2: float = field(default=1.49445, converter=float, validator=validators.ge(0.0))
    vmax: float = field(default=0.4, converter=float, validator=validators.gt(0.0))
    pmin: float = field(default=-1.0, converter=float)
    pmax: float = field(default=1.0, converter=float, validator=_check_bounds)
    dim: int = field(default=N_PARAMS, converter=int, validator=validators.ge(1))
    seed: int = field(default=12345, converter=int, validator=[validators.ge(0), validators.lt(2**64)])


@define
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    pbest_position: np.ndarray
    pbest_fitness: float = math.inf


@frozen(eq=False)
class GlobalBest:
    position: np.ndarray
    fitness: float = math.inf


# --------------------------------------------------
# Random streams
# --------------------------------------------------
def make_streams(seed: int | np.random.SeedSequence, count: int) -> list[np.random.Generator]:
    """Independent generators derived deterministically from one seed."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.PCG64(child)) for child in root.spawn(count)]


# --------------------------------------------------
# Swarm operations
# --------------------------------------------------
def init_swarm(config: PsoConfig, streams: Sequence[np.random.Generator]) -> list[Particle]:
    """Scatter swarm_size particles uniformly; particle i draws from streams[i].

    Positions are repaired so the first generation evaluates ordered
    controllers; velocities are uniform in [-vmax, vmax].
    """
    if len(streams) < config.swarm_size:
        raise ValueError(f"need {config.swarm_size} streams, got {len(streams)}")

    swarm = []
    for rng in streams[: config.swarm_size]:
        raw = rng.uniform(config.pmin, config.pmax, config.dim)
        position = repair(raw) if config.dim == N_PARAMS else raw
        position = np.clip(position, config.pmin, config.pmax)
        velocity = rng.uniform(-config.vmax, config.vmax, config.dim)
        swarm.append(
            Particle(
                position=position,
                velocity=velocity,
                pbest_position=position.copy(),
            )
        )
    return swarm


def clamp_magnitude(v, bound: float):
    """sign(v) * min(|v|, bound), elementwise for arrays."""
    if not bound > 0:
        raise ValueError(f"bound must be positive, got {bound!r}")
    return np.sign(v) * np.minimum(np.abs(v), bound)


def update_velocity(
    particle: Particle, gbest: GlobalBest, config: PsoConfig, rng: np.random.Generator
) -> np.ndarray:
    """Inertia plus attraction to pbest and gbest, clamped to vmax.

    R1 and R2 are drawn per component.
    """
    dim = particle.position.shape[0]
    r1 = rng.random(dim)
    r2 = rng.random(dim)
    velocity = (
        config.w * particle.velocity
        + config.c1 * r1 * (particle.pbest_position - particle.position)
        + config.c2 * r2 * (gbest.position - particle.position)
    )
    return clamp_magnitude(velocity, config.vmax)


def update_position(particle: Particle, config: PsoConfig) -> np.ndarray:
    """p + V, confined to [pmin, pmax]. Expects the velocity already updated."""
    return np.clip(particle.position + particle.velocity, config.pmin, config.pmax)


def update_bests(
    swarm: Sequence[Particle], fitnesses: Sequence[float], gbest: GlobalBest
) -> tuple[list[Particle], GlobalBest]:
    """Refresh pbest of every particle and the swarm's gbest.

    A record is replaced only by a strictly lower fitness; on ties the
    incumbent, and among particles the lowest index, wins.
    """
    if len(fitnesses) != len(swarm):
        raise ValueError(f"{len(fitnesses)} fitnesses for {len(swarm)} particles")

    updated = []
    for particle, fitness in zip(swarm, fitnesses):
        fitness = float(fitness)
        if fitness < particle.pbest_fitness:
            particle = evolve(
                particle,
                pbest_position=particle.position.copy(),
                pbest_fitness=fitness,
            )
        updated.append(particle)

    best = min(range(len(updated)), key=lambda i: updated[i].pbest_fitness)
    if updated[best].pbest_fitness < gbest.fitness:
        gbest = GlobalBest(
            position=updated[best].pbest_position.copy(),
            fitness=updated[best].pbest_fitness,
        )
    return updated, gbest


def step_swarm(
    swarm: Sequence[Particle],
    gbest: GlobalBest,
    config: PsoConfig,
    streams: Sequence[np.random.Generator],
) -> list[Particle]:
    """Move every particle once: velocity first, then position."""
    moved = []
    for particle, rng in zip(swarm, streams):
        velocity = update_velocity(particle, gbest, config, rng)
        particle = evolve(particle, velocity=velocity)
        moved.append(evolve(particle, position=update_position(particle, config)))
    return moved
