import math
from dataclasses import dataclass
from enum import Enum

from utils.errors import ConfigurationError

# Distances within this of the vehicle radius count as touching, not overlapping.
CONTACT_EPS = 1e-9

UNIT_BOUNDS = (0.0, 1.0)


class Axis(str, Enum):
    X = "x"
    Y = "y"

    @property
    def other(self):
        return Axis.Y if self is Axis.X else Axis.X


class BlockedBy(str, Enum):
    NONE = "none"
    BARRIER = "barrier"
    EDGE = "edge"


@dataclass(frozen=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinate ({self.x}, {self.y})")

    def get(self, axis):
        return self.x if axis is Axis.X else self.y

    def with_axis(self, axis, value):
        if axis is Axis.X:
            return Vec2(value, self.y)
        return Vec2(self.x, value)


@dataclass(frozen=True)
class Segment:
    a: Vec2
    b: Vec2

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("zero-length segment")


@dataclass(frozen=True)
class MoveResult:
    achieved: float
    blocked_by: BlockedBy = BlockedBy.NONE


def _point_segment_distance(px, py, ax, ay, bx, by):
    dx, dy = bx - ax, by - ay
    length_sq = dx * dx + dy * dy
    if length_sq == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / length_sq
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _cross(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def point_segment_distance(point, seg):
    """Minimum distance from a point to the closed segment."""
    return _point_segment_distance(point.x, point.y, seg.a.x, seg.a.y, seg.b.x, seg.b.y)


def segment_distance(p, q, seg):
    """Minimum distance between the segment p->q (possibly a point) and seg."""
    ax, ay, bx, by = seg.a.x, seg.a.y, seg.b.x, seg.b.y
    d1 = _cross(ax, ay, bx, by, p.x, p.y)
    d2 = _cross(ax, ay, bx, by, q.x, q.y)
    d3 = _cross(p.x, p.y, q.x, q.y, ax, ay)
    d4 = _cross(p.x, p.y, q.x, q.y, bx, by)
    if d1 * d2 < 0.0 and d3 * d4 < 0.0:
        return 0.0
    return min(
        _point_segment_distance(p.x, p.y, ax, ay, bx, by),
        _point_segment_distance(q.x, q.y, ax, ay, bx, by),
        _point_segment_distance(ax, ay, p.x, p.y, q.x, q.y),
        _point_segment_distance(bx, by, p.x, p.y, q.x, q.y),
    )


def segment_circle_intersects(seg, center, radius):
    return point_segment_distance(center, seg) <= radius


def capsule_segment_intersects(path_a, path_b, radius, seg):
    """True if seg comes within radius of the path path_a -> path_b."""
    return segment_distance(path_a, path_b, seg) <= radius


def _first_contact(u_a, v_a, u_b, v_b, radius):
    """
    Earliest travel t >= 0 at which a circle centred at (t, 0) touches the
    segment (u_a, v_a)-(u_b, v_b), or inf. Coordinates are in the mover's
    frame: u along the direction of travel, v across it.
    """
    best = math.inf
    r_sq = radius * radius

    for eu, ev in ((u_a, v_a), (u_b, v_b)):
        if abs(ev) > radius:
            continue
        half = math.sqrt(max(0.0, r_sq - ev * ev))
        if eu - half >= 0.0:
            best = min(best, eu - half)
        elif eu > 0.0:
            # already inside the endpoint disk and heading for its centre
            return 0.0

    du, dv = u_b - u_a, v_b - v_a
    length = math.hypot(du, dv)
    n_u, n_v = -dv / length, du / length
    if n_u == 0.0:
        return best

    s0 = -n_u * u_a - n_v * v_a
    if s0 * n_u > 0.0:
        # moving away from the line
        return best
    if abs(s0) <= radius:
        t = 0.0
    else:
        side = 1.0 if s0 > 0.0 else -1.0
        t = (side * radius - s0) / n_u

    lam = ((t - u_a) * du - v_a * dv) / (length * length)
    if 0.0 <= lam <= 1.0:
        best = min(best, t)
    return best


def check_clearance(pos, barriers, radius, bounds=UNIT_BOUNDS):
    """
    Raise ConfigurationError if a vehicle of the given radius at pos
    overlaps a barrier or leaves the bounds.

    Args:
        pos: Vehicle centre
        barriers: Iterable of Segment
        radius: Vehicle radius
        bounds: (low, high) of the square world
    """
    lo, hi = bounds[0] + radius, bounds[1] - radius
    for value in (pos.x, pos.y):
        if value < lo - CONTACT_EPS or value > hi + CONTACT_EPS:
            raise ConfigurationError(f"position ({pos.x}, {pos.y}) outside bounds inset by {radius}")
    for seg in barriers:
        if point_segment_distance(pos, seg) < radius - CONTACT_EPS:
            raise ConfigurationError(f"position ({pos.x}, {pos.y}) overlaps barrier {seg}")


def swept_axis_move(pos, axis, delta, barriers, radius, bounds=UNIT_BOUNDS):
    """
    Move a circular vehicle along one axis as far as it can go.

    The vehicle stops at the first contact with a barrier or with the bounds
    inset by its radius; contact is resolved analytically so no speed can
    tunnel through a barrier.

    Args:
        pos: Start position (must be collision-free)
        axis: Axis.X or Axis.Y
        delta: Signed commanded travel
        barriers: Sequence of Segment
        radius: Vehicle radius
        bounds: (low, high) of the square world

    Returns:
        (new position, MoveResult)
    """
    check_clearance(pos, barriers, radius, bounds)
    if delta == 0.0:
        return pos, MoveResult(0.0)

    direction = 1.0 if delta > 0.0 else -1.0
    distance = abs(delta)
    coord = pos.get(axis)
    lo, hi = bounds[0] + radius, bounds[1] - radius
    room = max(0.0, hi - coord if direction > 0.0 else coord - lo)

    contact = math.inf
    for seg in barriers:
        if axis is Axis.X:
            t = _first_contact(
                direction * (seg.a.x - pos.x), seg.a.y - pos.y,
                direction * (seg.b.x - pos.x), seg.b.y - pos.y,
                radius,
            )
        else:
            t = _first_contact(
                direction * (seg.a.y - pos.y), seg.a.x - pos.x,
                direction * (seg.b.y - pos.y), seg.b.x - pos.x,
                radius,
            )
        contact = min(contact, t)

    if contact < distance and contact <= room:
        return pos.with_axis(axis, coord + direction * contact), MoveResult(
            direction * contact, BlockedBy.BARRIER
        )
    if room < distance:
        return pos.with_axis(axis, hi if direction > 0.0 else lo), MoveResult(
            direction * room, BlockedBy.EDGE
        )
    return pos.with_axis(axis, coord + delta), MoveResult(delta)
