"""
One-dimensional perceptual-control agent.

Each agent controls one coordinate of the vehicle: it compares its
perception with a reference, multiplies the error by the loop gain and
sends the (clamped) result to the actuator. Which reference it uses is
decided every tick by `arbitrate` from its own status flags, the flags its
partner transmitted and its 4-bit cooperation level [bcde].
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

from utils.environment import MAX_STEP
from utils.geometry import Axis

DEFAULT_GAIN = 0.01
DEFAULT_BACKOFF_MS = 1000
ACTION_DEADBAND = 1e-6


@dataclass(frozen=True, order=True)
class CoopLevel:
    """Cooperation mask written "[bcde]", e.g. CoopLevel.parse("0110")."""

    b_random: bool = False
    c_arrived_stuck: bool = False
    d_stuck_stuck: bool = False
    e_access_gate: bool = False

    @classmethod
    def parse(cls, text):
        bits = text.strip().strip("[]")
        if len(bits) != 4 or set(bits) - {"0", "1"}:
            raise ValueError(f"cooperation level must be four 0/1 digits, got {text!r}")
        return cls(*(bit == "1" for bit in bits))

    @classmethod
    def from_index(cls, index):
        """Index in the order [0000],[1000],[0100],[1100],[0010],... (b is the low bit)."""
        if not 0 <= index < 16:
            raise ValueError(f"cooperation index {index} outside [0, 16)")
        return cls(bool(index & 1), bool(index & 2), bool(index & 4), bool(index & 8))

    @property
    def index(self):
        return (
            int(self.b_random)
            + 2 * int(self.c_arrived_stuck)
            + 4 * int(self.d_stuck_stuck)
            + 8 * int(self.e_access_gate)
        )

    def __str__(self):
        return "".join(
            "1" if bit else "0"
            for bit in (self.b_random, self.c_arrived_stuck, self.d_stuck_stuck, self.e_access_gate)
        )


def all_levels():
    return [CoopLevel.from_index(i) for i in range(16)]


@dataclass(frozen=True)
class AgentParams:
    gain: float = DEFAULT_GAIN
    backoff_ms: int = DEFAULT_BACKOFF_MS
    target_view: bool = True
    max_step: float = MAX_STEP

    def __post_init__(self):
        if not 0.0 < self.gain < 1.0:
            raise ValueError(f"gain {self.gain} outside (0, 1)")
        if self.backoff_ms <= 0:
            raise ValueError(f"backoff_ms {self.backoff_ms} must be positive")
        if not 0.0 < self.max_step <= MAX_STEP:
            raise ValueError(f"max_step {self.max_step} outside (0, {MAX_STEP}]")


class Mode(str, Enum):
    NORMAL = "normal"
    BACK_OFF = "back_off"
    ROAM = "roam"


@dataclass(frozen=True)
class AgentState:
    axis: Axis
    coop: CoopLevel
    mode: Mode = Mode.NORMAL
    remaining_ms: int = 0
    temp_reference: float | None = None
    # the access gate withheld approach at the last non-continuing arbitration
    gate_held: bool = False

    @property
    def active(self):
        return self.mode is not Mode.NORMAL and self.remaining_ms > 0


class DirectiveKind(str, Enum):
    APPROACH_TARGET = "approach"
    STOP = "stop"
    RANDOM_MOVE = "random"
    BACK_OFF = "back_off"


class Rule(str, Enum):
    CONTINUE = "continue"
    TARGET = "a"
    RANDOM = "b"
    ARRIVED_STUCK = "c"
    STUCK_STUCK = "d"
    ACCESS_GATE = "e"
    STOP = "stop"


@dataclass(frozen=True)
class Directive:
    kind: DirectiveKind
    rule: Rule


class Action(str, Enum):
    FORWARD = "forward"
    REVERSE = "reverse"
    STOP = "stop"


def control_step(reference, perception, params):
    """Negative-feedback output: gain times error, clamped to the maximum step."""
    output = params.gain * (reference - perception)
    return min(params.max_step, max(-params.max_step, output))


def classify_action(command):
    if command > ACTION_DEADBAND:
        return Action.FORWARD
    if command < -ACTION_DEADBAND:
        return Action.REVERSE
    return Action.STOP


def arbitrate(self_flags, other_flags, coop, state):
    """
    Pick this tick's directive.

    Precedence: an active back-off or roam runs to completion; then
    stuck+stuck (d); arrived+stuck (c); approach when the target is known,
    gated on access+access when e is set; random movement (b); stop.

    Args:
        self_flags: This agent's StatusFlags snapshot
        other_flags: Partner flags as received this tick
        coop: CoopLevel of this agent
        state: AgentState of this agent
    """
    if state.active:
        if state.mode is Mode.BACK_OFF:
            return Directive(DirectiveKind.BACK_OFF, Rule.CONTINUE)
        return Directive(DirectiveKind.RANDOM_MOVE, Rule.CONTINUE)

    if coop.d_stuck_stuck and self_flags.stuck and other_flags.stuck:
        return Directive(DirectiveKind.BACK_OFF, Rule.STUCK_STUCK)
    if coop.c_arrived_stuck and self_flags.arrived and other_flags.stuck:
        return Directive(DirectiveKind.BACK_OFF, Rule.ARRIVED_STUCK)

    if self_flags.target_known:
        if not coop.e_access_gate:
            return Directive(DirectiveKind.APPROACH_TARGET, Rule.TARGET)
        if self_flags.access and other_flags.access:
            return Directive(DirectiveKind.APPROACH_TARGET, Rule.ACCESS_GATE)

    if coop.b_random:
        return Directive(DirectiveKind.RANDOM_MOVE, Rule.RANDOM)
    return Directive(DirectiveKind.STOP, Rule.STOP)


def gate_withheld(directive, self_flags, coop):
    """True if the access gate refused an approach and arbitration fell through to b or stop."""
    return (
        coop.e_access_gate
        and self_flags.target_known
        and directive.rule in (Rule.RANDOM, Rule.STOP)
    )


def hold_gate(state, directive, self_flags):
    """Record whether the gate is holding this agent; continuing modes keep the old value."""
    if directive.rule is Rule.CONTINUE:
        return state
    held = gate_withheld(directive, self_flags, state.coop)
    return state if held == state.gate_held else replace(state, gate_held=held)


def consumed_partner_flags(directive, state):
    """
    True if the partner's transmitted flags decided this directive: a fresh
    c/d firing, a back-off started by one, or the access gate releasing an
    agent it held back.

    Args:
        directive: Directive returned by arbitrate
        state: AgentState the directive was arbitrated from
    """
    if directive.rule in (Rule.ARRIVED_STUCK, Rule.STUCK_STUCK):
        return True
    if directive.rule is Rule.CONTINUE:
        return state.mode is Mode.BACK_OFF
    if directive.rule is Rule.ACCESS_GATE:
        return state.gate_held
    return False


def _draw_reference(rng):
    return float(rng.uniform(0.0, 1.0))


def begin_backoff(state, rng, backoff_ms):
    """Abandon the target for a random temporary reference on this axis."""
    return replace(
        state, mode=Mode.BACK_OFF, remaining_ms=backoff_ms, temp_reference=_draw_reference(rng)
    )


def roam_reference(state, rng, backoff_ms, position=None, tolerance=0.0):
    """
    Start or refresh random roaming.

    A fresh reference is drawn when not already roaming, when the hold time
    has expired, or when position is within tolerance of the current one.
    """
    if state.active and state.mode is Mode.ROAM:
        reached = position is not None and abs(position - state.temp_reference) <= tolerance
        if not reached:
            return state
    return replace(state, mode=Mode.ROAM, remaining_ms=backoff_ms, temp_reference=_draw_reference(rng))


def advance_timer(state, tick_ms):
    """Count one tick off an active back-off/roam; at zero return to Normal."""
    if state.mode is Mode.NORMAL:
        return state
    remaining = state.remaining_ms - tick_ms
    if remaining <= 0:
        return replace(state, mode=Mode.NORMAL, remaining_ms=0, temp_reference=None)
    return replace(state, remaining_ms=remaining)


def backoff_ticks(backoff_ms, tick_ms):
    return math.ceil(backoff_ms / tick_ms)
