"""Binary particle swarm optimization over bit masks.

Velocities follow the classic inertia + cognitive + social update, are
squashed through a sigmoid into flip probabilities, and positions are
resampled bitwise. Inertia decreases linearly over the run while the
cognitive coefficient ramps up and the social coefficient ramps down.
Personal and global bests replace only on strict improvement, so the
global best fitness is non-increasing by construction.

Every particle owns an independent RNG stream spawned from the config
seed: results are bit-for-bit reproducible and independent of the order
in which fitness evaluations complete.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SwarmConfig",
    "SwarmState",
    "BpsoResult",
    "schedule_inertia",
    "schedule_accel",
    "update_velocity",
    "transfer",
    "update_position",
    "update_bests",
    "run",
]

VELOCITY_CLAMP = 6.0


@dataclass(frozen=True)
class SwarmConfig:
    """Swarm geometry, iteration budget, and schedule endpoints.

    The cognitive coefficient runs c1_min -> c1_max over the run; the
    social coefficient runs the opposite way, c2_max -> c2_min.
    ``max_iter=0`` is allowed and returns the best of the random initial
    population.
    """

    swarm_size: int
    dims: int
    max_iter: int
    w_max: float = 0.9
    w_min: float = 0.4
    c1_min: float = 0.5
    c1_max: float = 2.5
    c2_min: float = 0.5
    c2_max: float = 2.5
    rng_seed: int = 0
    v_max: float = VELOCITY_CLAMP

    def __post_init__(self) -> None:
        if self.swarm_size < 1:
            raise ValueError(f"swarm_size must be >= 1, got {self.swarm_size}")
        if self.dims < 1:
            raise ValueError(f"dims must be >= 1, got {self.dims}")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be >= 0, got {self.max_iter}")
        if not self.w_max > self.w_min:
            raise ValueError("w_max must exceed w_min")
        if self.v_max <= 0:
            raise ValueError("v_max must be positive")


def schedule_inertia(t: int, total: int, w_max: float = 0.9, w_min: float = 0.4) -> float:
    """Linearly decreasing inertia: w_max at t=0 down to w_min at t=total."""
    if total == 0:
        raise ValueError("schedule undefined for a zero iteration budget")
    if not 0 <= t <= total:
        raise ValueError(f"iteration {t} outside [0, {total}]")
    return w_max - (w_max - w_min) * t / total


def schedule_accel(t: int, total: int, config: SwarmConfig) -> tuple[float, float]:
    """Linearly scheduled acceleration coefficients at iteration t.

    c1 rises from c1_min to c1_max; c2 falls from c2_max to c2_min, its
    endpoints deliberately traversed in the opposite direction.
    """
    if total == 0:
        raise ValueError("schedule undefined for a zero iteration budget")
    if not 0 <= t <= total:
        raise ValueError(f"iteration {t} outside [0, {total}]")
    frac = t / total
    c1 = (config.c1_max - config.c1_min) * frac + config.c1_min
    c2 = (config.c2_min - config.c2_max) * frac + config.c2_max
    return c1, c2


def update_velocity(
    velocity,
    position,
    pbest_position,
    gbest_position,
    w: float,
    c1: float,
    c2: float,
    rng: np.random.Generator,
    v_max: float = VELOCITY_CLAMP,
) -> np.ndarray:
    """Inertia + cognitive + social pull, clamped to [-v_max, v_max].

    r1 and r2 are drawn independently per dimension.
    """
    velocity = np.asarray(velocity, dtype=float)
    position = np.asarray(position, dtype=float)
    r1 = rng.random(velocity.shape)
    r2 = rng.random(velocity.shape)
    v = (
        w * velocity
        + c1 * r1 * (np.asarray(pbest_position) - position)
        + c2 * r2 * (np.asarray(gbest_position) - position)
    )
    return np.clip(v, -v_max, v_max)


def transfer(v):
    """Sigmoid transfer: velocity to bit-set probability, strictly increasing."""
    return 1.0 / (1.0 + np.exp(-np.asarray(v, dtype=float)))


def update_position(v, rng: np.random.Generator) -> np.ndarray:
    """Resample each bit: 1 iff a fresh uniform draw falls below transfer(v)."""
    v = np.asarray(v, dtype=float)
    return (rng.random(v.shape) < transfer(v)).astype(np.int8)


@dataclass
class SwarmState:
    """Mutable best-so-far bookkeeping for one run."""

    pbest_positions: np.ndarray  # (N, D) bits
    pbest_fitness: np.ndarray  # (N,)
    gbest_position: np.ndarray  # (D,) bits
    gbest_fitness: float
    iteration: int = 0


def _sanitize(fitness: float) -> float:
    f = float(fitness)
    return f if np.isfinite(f) else np.inf


def update_bests(state: SwarmState, positions, fitnesses) -> None:
    """Strict-improvement replacement of personal bests, then the global best.

    Equal fitness never replaces; non-finite fitness is treated as +inf and
    therefore rejected.
    """
    for i, fit in enumerate(fitnesses):
        f = _sanitize(fit)
        if f < state.pbest_fitness[i]:
            state.pbest_fitness[i] = f
            state.pbest_positions[i] = positions[i]
            if f < state.gbest_fitness:
                state.gbest_fitness = f
                state.gbest_position = positions[i].copy()


@dataclass
class BpsoResult:
    position: np.ndarray
    fitness: float
    history: list[float] = field(default_factory=list)


def run(config: SwarmConfig, fitness_fn, repair=None) -> BpsoResult:
    """Full optimization loop; returns the best mask found and its history.

    ``fitness_fn`` maps a bit vector to a scalar to minimize and must be
    deterministic. ``repair``, when given, maps (bits, rng) -> bits and is
    applied to every position before evaluation (and before recording), so
    recorded bests always satisfy the repaired form. ``history`` holds the
    global best fitness after initialization and after each iteration.
    """
    n, d, total = config.swarm_size, config.dims, config.max_iter
    streams = [
        np.random.default_rng(c)
        for c in np.random.SeedSequence(config.rng_seed).spawn(n)
    ]
    positions = np.empty((n, d), dtype=np.int8)
    velocities = np.empty((n, d), dtype=float)
    for i, rng in enumerate(streams):
        positions[i] = (rng.random(d) < 0.5).astype(np.int8)
        velocities[i] = rng.uniform(-1.0, 1.0, d)
        if repair is not None:
            positions[i] = repair(positions[i], rng)
    fits = np.array([_sanitize(fitness_fn(p)) for p in positions])
    best = int(np.argmin(fits))
    state = SwarmState(
        pbest_positions=positions.copy(),
        pbest_fitness=fits.copy(),
        gbest_position=positions[best].copy(),
        gbest_fitness=float(fits[best]),
    )
    history = [state.gbest_fitness]
    for t in range(total):
        w = schedule_inertia(t, total, config.w_max, config.w_min)
        c1, c2 = schedule_accel(t, total, config)
        for i, rng in enumerate(streams):
            velocities[i] = update_velocity(
                velocities[i],
                positions[i],
                state.pbest_positions[i],
                state.gbest_position,
                w,
                c1,
                c2,
                rng,
                config.v_max,
            )
            pos = update_position(velocities[i], rng)
            if repair is not None:
                pos = repair(pos, rng)
            positions[i] = pos
        fits = [fitness_fn(p) for p in positions]
        update_bests(state, positions, fits)
        state.iteration = t + 1
        history.append(state.gbest_fitness)
    return BpsoResult(
        position=state.gbest_position.copy(),
        fitness=state.gbest_fitness,
        history=history,
    )
