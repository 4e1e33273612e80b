"""
Fixed-timestep run loop.

Per tick: snapshot both agents' flags, exchange messages, arbitrate,
compute commands, move X then Y, update the communication ledger.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from utils.agent import (
    AgentParams,
    AgentState,
    CoopLevel,
    DirectiveKind,
    Mode,
    advance_timer,
    arbitrate,
    begin_backoff,
    consumed_partner_flags,
    control_step,
    gate_withheld,
    hold_gate,
    roam_reference,
)
from utils.comms import CommLedger, exchange, record_communication
from utils.environment import (
    StatusFlags,
    WorldConfig,
    WorldState,
    apply_axis_move,
    initial_state,
    perceive,
    success,
)
from utils.errors import ConfigurationError
from utils.geometry import Axis

TICK_MS = 10
CAP_MS = 30_000

AXES = (Axis.X, Axis.Y)


@dataclass(frozen=True)
class RunConfig:
    world: WorldConfig
    coop_x: CoopLevel = field(default_factory=CoopLevel)
    coop_y: CoopLevel = field(default_factory=CoopLevel)
    params_x: AgentParams = field(default_factory=AgentParams)
    params_y: AgentParams = field(default_factory=AgentParams)
    seed: int = 0
    tick_ms: int = TICK_MS
    cap_ms: int = CAP_MS
    trace: bool = False

    def coop(self, axis):
        return self.coop_x if axis is Axis.X else self.coop_y

    def params(self, axis):
        return self.params_x if axis is Axis.X else self.params_y

    @property
    def max_ticks(self):
        return self.cap_ms // self.tick_ms


@dataclass(frozen=True)
class TraceRow:
    tick: int
    x: float
    y: float
    directive_x: str
    directive_y: str
    flags_x: StatusFlags
    flags_y: StatusFlags
    comm_x: bool
    comm_y: bool


@dataclass(frozen=True)
class RunResult:
    solved: bool
    st_ms: int | None
    comm_pct_x: float
    comm_pct_y: float
    ticks: int
    seed: int
    coop_x: CoopLevel
    coop_y: CoopLevel
    trace: tuple | None = None

    @property
    def comm_pct_mean(self):
        return (self.comm_pct_x + self.comm_pct_y) / 2.0


@dataclass
class RunState:
    config: RunConfig
    world: WorldState
    agents: dict
    rngs: dict
    ledger: CommLedger = field(default_factory=CommLedger)
    trace: list = field(default_factory=list)
    last_fired: tuple = (False, False)
    # the last tick changed nothing and drew nothing; every later tick repeats it
    fixed_point: bool = False


def agent_streams(seed):
    """Independent generators for the X and Y agent of one run."""
    return {
        axis: np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        for i, axis in enumerate(AXES)
    }


def validate_run_config(config):
    if config.tick_ms <= 0:
        raise ConfigurationError("tick_ms must be positive")
    if config.cap_ms <= 0 or config.cap_ms % config.tick_ms:
        raise ConfigurationError(f"cap_ms {config.cap_ms} is not a positive multiple of tick_ms {config.tick_ms}")
    if config.seed < 0:
        raise ConfigurationError("seed must be non-negative")
    return config


def start(config):
    validate_run_config(config)
    return RunState(
        config=config,
        world=initial_state(config.world),
        agents={axis: AgentState(axis, config.coop(axis)) for axis in AXES},
        rngs=agent_streams(config.seed),
    )


def _command(directive, state, flags, position, target, params):
    kind = directive.kind
    if kind is DirectiveKind.STOP:
        return 0.0
    if kind is DirectiveKind.APPROACH_TARGET:
        return 0.0 if flags.arrived else control_step(target, position, params)
    return control_step(state.temp_reference, position, params)


def step(rs):
    """Advance the run by one tick (mutates and returns rs)."""
    config, world = rs.config, rs.config.world
    before = rs.world
    tick = before.tick

    flags = {
        axis: perceive(world, before, axis, config.params(axis).target_view) for axis in AXES
    }
    inbox_x, inbox_y = exchange(tick, flags[Axis.X], flags[Axis.Y])
    inbox = {Axis.X: inbox_x, Axis.Y: inbox_y}
    agents_before = dict(rs.agents)

    commands, directives, fired, held = {}, {}, {}, {}
    drew = False
    for axis in AXES:
        state = rs.agents[axis]
        params = config.params(axis)
        position = before.vehicle.get(axis)
        directive = arbitrate(flags[axis], inbox[axis].as_flags(), state.coop, state)
        fired[axis] = consumed_partner_flags(directive, state)
        held[axis] = gate_withheld(directive, flags[axis], state.coop)

        updated = state
        if directive.kind is DirectiveKind.BACK_OFF and not state.active:
            updated = begin_backoff(state, rs.rngs[axis], params.backoff_ms)
        elif directive.kind is DirectiveKind.RANDOM_MOVE:
            updated = roam_reference(
                state, rs.rngs[axis], params.backoff_ms, position, world.target_tolerance
            )
        drew = drew or updated is not state
        updated = hold_gate(updated, directive, flags[axis])

        commands[axis] = _command(
            directive, updated, flags[axis], position, world.target.get(axis), params
        )
        directives[axis] = directive
        rs.agents[axis] = updated

    after = before
    for axis in AXES:
        after, _ = apply_axis_move(world, after, axis, commands[axis], held=held[axis])
    after = replace(after, tick=tick + 1)

    rs.fixed_point = (
        not drew
        and all(rs.agents[axis].mode is Mode.NORMAL for axis in AXES)
        and all(rs.agents[axis] == agents_before[axis] for axis in AXES)
        and after.vehicle == before.vehicle
        and after.flags_x == before.flags_x
        and after.flags_y == before.flags_y
    )
    for axis in AXES:
        rs.agents[axis] = advance_timer(rs.agents[axis], config.tick_ms)

    rs.ledger = record_communication(rs.ledger, tick, fired[Axis.X], fired[Axis.Y])
    rs.last_fired = (fired[Axis.X], fired[Axis.Y])
    rs.world = after

    if config.trace:
        rs.trace.append(TraceRow(
            tick=tick,
            x=after.vehicle.x,
            y=after.vehicle.y,
            directive_x=directives[Axis.X].kind.value,
            directive_y=directives[Axis.Y].kind.value,
            flags_x=flags[Axis.X],
            flags_y=flags[Axis.Y],
            comm_x=fired[Axis.X],
            comm_y=fired[Axis.Y],
        ))
    return rs


def _result(rs, solved):
    config = rs.config
    ticks = rs.world.tick
    return RunResult(
        solved=solved,
        st_ms=ticks * config.tick_ms if solved else None,
        comm_pct_x=rs.ledger.percent(Axis.X),
        comm_pct_y=rs.ledger.percent(Axis.Y),
        ticks=ticks,
        seed=config.seed,
        coop_x=config.coop_x,
        coop_y=config.coop_y,
        trace=tuple(rs.trace) if config.trace else None,
    )


def run(config):
    """
    Run one simulation to success or to the time cap.

    Raises:
        ConfigurationError: invalid world or timing before the first tick
    """
    rs = start(config)
    max_ticks = config.max_ticks
    if success(config.world, rs.world):
        return _result(rs, solved=True)

    while rs.world.tick < max_ticks:
        step(rs)
        if success(config.world, rs.world):
            return _result(rs, solved=True)
        if rs.fixed_point and not config.trace:
            remaining = max_ticks - rs.world.tick
            if remaining:
                rs.ledger = record_communication(
                    rs.ledger, rs.world.tick, *rs.last_fired, ticks=remaining
                )
                rs.world = replace(rs.world, tick=max_ticks)
            break
    return _result(rs, solved=False)
