import math

import numpy as np

from utils.environment import (
    DEFAULT_TARGET_TOLERANCE,
    DEFAULT_VEHICLE_RADIUS,
    MAX_BARRIERS,
    Barrier,
    WorldConfig,
    initial_state,
    success,
)
from utils.errors import ConfigurationError
from utils.geometry import Vec2

MAX_ATTEMPTS = 10_000

POSITION_RANGE = (0.05, 0.95)
BARRIER_CENTER_RANGE = (0.1, 0.9)
BARRIER_LENGTH_RANGE = (0.1, 0.5)


def random_barrier(rng):
    return Barrier(
        center=Vec2(float(rng.uniform(*BARRIER_CENTER_RANGE)), float(rng.uniform(*BARRIER_CENTER_RANGE))),
        rotation=float(rng.uniform(0.0, math.pi)),
        length=float(rng.uniform(*BARRIER_LENGTH_RANGE)),
    )


def random_start_target(rng, barriers, target_tolerance=DEFAULT_TARGET_TOLERANCE,
                        vehicle_radius=DEFAULT_VEHICLE_RADIUS):
    """
    Draw target and vehicle start uniformly until the world is valid and the
    vehicle does not already sit on the target.

    Args:
        rng: numpy Generator
        barriers: Barriers to keep fixed
        target_tolerance: Arrival tolerance per axis
        vehicle_radius: Vehicle radius
    """
    lo, hi = POSITION_RANGE
    for _ in range(MAX_ATTEMPTS):
        target = Vec2(float(rng.uniform(lo, hi)), float(rng.uniform(lo, hi)))
        start = Vec2(float(rng.uniform(lo, hi)), float(rng.uniform(lo, hi)))
        config = WorldConfig(target, start, tuple(barriers), target_tolerance, vehicle_radius)
        try:
            state = initial_state(config)
        except ConfigurationError:
            continue
        if not success(config, state):
            return config
    raise ConfigurationError(f"no valid start/target found in {MAX_ATTEMPTS} attempts")


def random_world(rng, nbarriers, target_tolerance=DEFAULT_TARGET_TOLERANCE,
                 vehicle_radius=DEFAULT_VEHICLE_RADIUS):
    """Generate a world with nbarriers random barriers and a random start/target."""
    if not 0 <= nbarriers <= MAX_BARRIERS:
        raise ConfigurationError(f"nbarriers {nbarriers} outside [0, {MAX_BARRIERS}]")
    barriers = tuple(random_barrier(rng) for _ in range(nbarriers))
    return random_start_target(rng, barriers, target_tolerance, vehicle_radius)


def _bar(x, y, rotation, length):
    return Barrier(Vec2(x, y), rotation, length)


def local_minimum_world():
    """
    Two fixed barriers meeting in a corner that opens towards the start, so
    the X agent is blocked while Y reaches its target, or both are blocked
    in the corner.
    """
    return WorldConfig(
        target=Vec2(0.8, 0.7),
        vehicle_start=Vec2(0.2, 0.3),
        barriers=(
            _bar(0.5, 0.45, math.pi / 2, 0.6),
            _bar(0.375, 0.75, 0.0, 0.25),
        ),
    )


def no_local_minimum_world():
    """Three barriers that all lie off the greedy diagonal path."""
    return WorldConfig(
        target=Vec2(0.9, 0.9),
        vehicle_start=Vec2(0.1, 0.1),
        barriers=(
            _bar(0.25, 0.7, 0.0, 0.3),
            _bar(0.75, 0.3, math.pi / 2, 0.3),
            _bar(0.5, 0.15, 0.0, 0.2),
        ),
    )


def unsolvable_world():
    """Three barriers and the left world edge form a closed box around the vehicle."""
    return WorldConfig(
        target=Vec2(0.7, 0.5),
        vehicle_start=Vec2(0.15, 0.5),
        barriers=(
            _bar(0.3, 0.5, math.pi / 2, 0.6),
            _bar(0.15, 0.8, 0.0, 0.4),
            _bar(0.15, 0.2, 0.0, 0.4),
        ),
    )


FIXTURES = {
    "local_minimum": local_minimum_world,
    "no_local_minimum": no_local_minimum_world,
    "unsolvable": unsolvable_world,
}


def get_fixture(name):
    try:
        return FIXTURES[name]()
    except KeyError:
        raise ConfigurationError(f"unknown fixture {name!r}; known: {', '.join(sorted(FIXTURES))}") from None


def world_stream(master_seed, run_index):
    """Generator used to draw the world of one batch run."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(run_index, 0)))
