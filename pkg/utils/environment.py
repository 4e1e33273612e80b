"""World configuration, per-axis status flags and vehicle movement."""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy import ndimage

from utils.errors import ConfigurationError
from utils.geometry import (
    CONTACT_EPS,
    Axis,
    BlockedBy,
    Segment,
    Vec2,
    capsule_segment_intersects,
    check_clearance,
    point_segment_distance,
    swept_axis_move,
)

logger = logging.getLogger(__name__)

MAX_BARRIERS = 3
MAX_STEP = 0.005
DEFAULT_TARGET_TOLERANCE = 0.02
DEFAULT_VEHICLE_RADIUS = 0.01

# Fraction of the commanded step below which a blocked move counts as a collision.
STUCK_PROGRESS = 0.1
ARRIVAL_SLACK = 1e-12

ORACLE_GRID = 400


@dataclass(frozen=True)
class Barrier:
    """A line barrier given by centre, rotation (radians) and length."""

    center: Vec2
    rotation: float
    length: float

    def __post_init__(self):
        if not 0.0 <= self.rotation < math.pi:
            raise ConfigurationError(f"barrier rotation {self.rotation} outside [0, pi)")
        if not 0.0 < self.length <= 1.0:
            raise ConfigurationError(f"barrier length {self.length} outside (0, 1]")
        for end in (self.segment.a, self.segment.b):
            if not (-0.5 <= end.x <= 1.5 and -0.5 <= end.y <= 1.5):
                raise ConfigurationError(f"barrier endpoint ({end.x}, {end.y}) outside [-0.5, 1.5]^2")

    @cached_property
    def segment(self):
        half = self.length / 2.0
        dx, dy = half * math.cos(self.rotation), half * math.sin(self.rotation)
        return Segment(
            Vec2(self.center.x - dx, self.center.y - dy),
            Vec2(self.center.x + dx, self.center.y + dy),
        )


@dataclass(frozen=True)
class WorldConfig:
    target: Vec2
    vehicle_start: Vec2
    barriers: tuple = ()
    target_tolerance: float = DEFAULT_TARGET_TOLERANCE
    vehicle_radius: float = DEFAULT_VEHICLE_RADIUS

    def __post_init__(self):
        object.__setattr__(self, "barriers", tuple(self.barriers))

    @cached_property
    def segments(self):
        return tuple(barrier.segment for barrier in self.barriers)


@dataclass(frozen=True)
class StatusFlags:
    collided_edge: bool = False
    stuck: bool = False
    target_known: bool = False
    access: bool = False
    arrived: bool = False


@dataclass(frozen=True)
class WorldState:
    vehicle: Vec2
    flags_x: StatusFlags = field(default_factory=StatusFlags)
    flags_y: StatusFlags = field(default_factory=StatusFlags)
    tick: int = 0

    def flags(self, axis):
        return self.flags_x if axis is Axis.X else self.flags_y


def validate_world(config):
    """
    Check the WorldConfig invariants, raising ConfigurationError on the first
    violation.
    """
    if len(config.barriers) > MAX_BARRIERS:
        raise ConfigurationError(f"{len(config.barriers)} barriers, at most {MAX_BARRIERS} allowed")
    if config.vehicle_radius <= 0.0:
        raise ConfigurationError("vehicle_radius must be positive")
    if config.target_tolerance <= 0.0:
        raise ConfigurationError("target_tolerance must be positive")
    for name, point in (("target", config.target), ("vehicle_start", config.vehicle_start)):
        if not (0.0 <= point.x <= 1.0 and 0.0 <= point.y <= 1.0):
            raise ConfigurationError(f"{name} ({point.x}, {point.y}) outside the unit square")
    check_clearance(config.vehicle_start, config.segments, config.vehicle_radius)
    for seg in config.segments:
        if point_segment_distance(config.target, seg) < config.target_tolerance:
            raise ConfigurationError(
                f"target ({config.target.x}, {config.target.y}) closer than "
                f"{config.target_tolerance} to a barrier"
            )
    return config


def initial_state(config):
    validate_world(config)
    return WorldState(vehicle=config.vehicle_start)


def compute_access(config, state, axis):
    """True if no barrier lies between the vehicle and the target along axis."""
    goal = state.vehicle.with_axis(axis, config.target.get(axis))
    radius = config.vehicle_radius - CONTACT_EPS
    return not any(
        capsule_segment_intersects(state.vehicle, goal, radius, seg) for seg in config.segments
    )


def compute_arrived(config, state, axis):
    gap = abs(state.vehicle.get(axis) - config.target.get(axis))
    return gap <= config.target_tolerance + ARRIVAL_SLACK


def perceive(config, state, axis, target_known):
    """
    Snapshot the full StatusFlags of one agent: collision flags come from its
    last move, access and arrival from the current position.
    """
    moved = state.flags(axis)
    arrived = compute_arrived(config, state, axis)
    return StatusFlags(
        collided_edge=moved.collided_edge,
        stuck=moved.stuck and not arrived,
        target_known=target_known,
        access=compute_access(config, state, axis),
        arrived=arrived,
    )


def apply_axis_move(config, state, axis, delta, held=False):
    """
    Move the vehicle along one axis and record the collision flags.

    A zero command keeps the collision flags of the last real move, so an
    agent that stops against a barrier stays stuck. An agent held still by
    its access gate cannot progress either and is reported stuck.

    Args:
        config: WorldConfig
        state: Current WorldState
        axis: Axis moved by this agent
        delta: Signed command, |delta| <= MAX_STEP
        held: The access gate is holding this agent in place

    Returns:
        (new WorldState, MoveResult)
    """
    if abs(delta) > MAX_STEP + 1e-12:
        raise ValueError(f"command {delta} exceeds the maximum step {MAX_STEP}")

    vehicle, result = swept_axis_move(
        state.vehicle, axis, delta, config.segments, config.vehicle_radius
    )
    previous = state.flags(axis)
    if delta == 0.0:
        moved = replace(previous, stuck=previous.stuck or held)
    else:
        weak = abs(result.achieved) < STUCK_PROGRESS * abs(delta)
        moved = replace(
            previous,
            stuck=result.blocked_by is BlockedBy.BARRIER and weak,
            collided_edge=result.blocked_by is BlockedBy.EDGE and weak,
        )
    if axis is Axis.X:
        return replace(state, vehicle=vehicle, flags_x=moved), result
    return replace(state, vehicle=vehicle, flags_y=moved), result


def success(config, state):
    return compute_arrived(config, state, Axis.X) and compute_arrived(config, state, Axis.Y)


def occupancy_grid(config, resolution=ORACLE_GRID):
    """
    Boolean free-space mask over cell centres of a resolution x resolution
    grid. A cell is blocked only if every point in it lies within
    vehicle_radius of a barrier or the bounds, so the mask never loses a
    gap the vehicle fits through. Row index is y, column index is x.
    """
    centres = (np.arange(resolution) + 0.5) / resolution
    xs, ys = np.meshgrid(centres, centres)
    half = 0.5 / resolution
    r = config.vehicle_radius
    free = (xs >= r - half) & (xs <= 1.0 - r + half) & (ys >= r - half) & (ys <= 1.0 - r + half)
    # a cell touches the free region if its centre is within half a diagonal of it
    reach = r - math.sqrt(2.0) * half
    for seg in config.segments:
        ax, ay, bx, by = seg.a.x, seg.a.y, seg.b.x, seg.b.y
        dx, dy = bx - ax, by - ay
        t = np.clip(((xs - ax) * dx + (ys - ay) * dy) / (dx * dx + dy * dy), 0.0, 1.0)
        dist = np.hypot(xs - (ax + t * dx), ys - (ay + t * dy))
        free &= dist >= reach
    return free


def _cell(value, resolution):
    return min(resolution - 1, max(0, int(value * resolution)))


def solvable(config, resolution=ORACLE_GRID):
    """
    Reachability oracle: is there a 4-connected path of free grid cells from
    the vehicle to a cell holding a point that satisfies arrival on both axes?
    """
    free = occupancy_grid(config, resolution)
    labels, _ = ndimage.label(free)

    col, row = _cell(config.vehicle_start.x, resolution), _cell(config.vehicle_start.y, resolution)
    lo_r, hi_r = max(0, row - 2), min(resolution, row + 3)
    lo_c, hi_c = max(0, col - 2), min(resolution, col + 3)
    start_labels = set(np.unique(labels[lo_r:hi_r, lo_c:hi_c])) - {0}
    if not start_labels:
        logger.debug("vehicle start has no free cell nearby")
        return False

    centres = (np.arange(resolution) + 0.5) / resolution
    tol = config.target_tolerance + 0.5 / resolution
    near_x = np.abs(centres - config.target.x) <= tol
    near_y = np.abs(centres - config.target.y) <= tol
    goal_labels = set(np.unique(labels[np.ix_(near_y, near_x)])) - {0}
    return bool(start_labels & goal_labels)
