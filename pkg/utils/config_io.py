"""
TOML configuration files.

    [world]
    target = [0.8, 0.7]
    vehicle_start = [0.2, 0.3]
    barriers = [[0.5, 0.45, 1.5708, 0.6]]   # x, y, rotation, length
    target_tolerance = 0.02
    vehicle_radius = 0.01

    [agents.x]
    coop = "0110"
    gain = 0.01
    backoff_ms = 1000
    target_view = true

    [agents.y]
    coop = "0110"

    [experiment]
    nruns = 200
    nbarriers = 3
    barrier_mode = "random"
    master_seed = 0
    randomize_start_target = true
    tick_ms = 10
    cap_ms = 30000
"""

import re
import tomllib
from dataclasses import dataclass, field

from utils.agent import DEFAULT_BACKOFF_MS, DEFAULT_GAIN, AgentParams, CoopLevel
from utils.environment import (
    DEFAULT_TARGET_TOLERANCE,
    DEFAULT_VEHICLE_RADIUS,
    MAX_BARRIERS,
    Barrier,
    WorldConfig,
    validate_world,
)
from utils.errors import ConfigFileError, ConfigurationError
from utils.experiment import DEFAULT_NRUNS, BarrierMode, ExperimentConfig, default_workers
from utils.geometry import Vec2
from utils.simulation import CAP_MS, TICK_MS, RunConfig

WORLD_KEYS = {"target", "vehicle_start", "barriers", "target_tolerance", "vehicle_radius"}
AGENT_KEYS = {"coop", "gain", "backoff_ms", "target_view"}
EXPERIMENT_KEYS = {
    "nruns", "nbarriers", "barrier_mode", "master_seed",
    "randomize_start_target", "tick_ms", "cap_ms",
}

# Experiment variable -> (config section, key, command-line flag or None)
EXPERIMENT_VARIABLES = {
    "number of runs": ("experiment", "nruns", "--nruns"),
    "number of barriers": ("experiment", "nbarriers", "--barriers"),
    "barrier location, orientation and size": ("world", "barriers", "--fixture"),
    "initial vehicle position": ("world", "vehicle_start", None),
    "initial target position": ("world", "target", None),
    "cooperation level x": ("agents.x", "coop", "--coop-x"),
    "cooperation level y": ("agents.y", "coop", "--coop-y"),
    "loop gain": ("agents.x", "gain", None),
    "back-off time": ("agents.x", "backoff_ms", None),
    "target view": ("agents.x", "target_view", None),
    "master seed": ("experiment", "master_seed", "--seed"),
}

_HEADER = re.compile(r"^\s*\[\s*([^\]]+?)\s*\]")
_KEY = re.compile(r"^\s*([A-Za-z0-9_-]+)\s*=")
_DECODE_LINE = re.compile(r"line (\d+)")


@dataclass(frozen=True)
class ConfigFile:
    world: WorldConfig
    coop_x: CoopLevel
    coop_y: CoopLevel
    params_x: AgentParams = field(default_factory=AgentParams)
    params_y: AgentParams = field(default_factory=AgentParams)
    nruns: int = DEFAULT_NRUNS
    nbarriers: int = 3
    barrier_mode: BarrierMode = BarrierMode.RANDOM
    master_seed: int = 0
    randomize_start_target: bool = True
    tick_ms: int = TICK_MS
    cap_ms: int = CAP_MS

    def experiment_config(self, workers=None):
        return ExperimentConfig(
            nruns=self.nruns,
            nbarriers=self.nbarriers,
            barrier_mode=self.barrier_mode,
            world=self.world,
            master_seed=self.master_seed,
            randomize_start_target=self.randomize_start_target,
            params_x=self.params_x,
            params_y=self.params_y,
            pairs=((self.coop_x, self.coop_y),),
            tick_ms=self.tick_ms,
            cap_ms=self.cap_ms,
            workers=default_workers() if workers is None else workers,
        )

    def run_config(self, seed=None, trace=False):
        return RunConfig(
            world=self.world,
            coop_x=self.coop_x,
            coop_y=self.coop_y,
            params_x=self.params_x,
            params_y=self.params_y,
            seed=self.master_seed if seed is None else seed,
            tick_ms=self.tick_ms,
            cap_ms=self.cap_ms,
            trace=trace,
        )


def _key_lines(text):
    """Map (section, key) and (section, None) to 1-based line numbers."""
    lines = {}
    section = ""
    for number, line in enumerate(text.splitlines(), start=1):
        header = _HEADER.match(line)
        if header:
            section = header.group(1).replace(" ", "")
            lines.setdefault((section, None), number)
            continue
        key = _KEY.match(line)
        if key:
            lines.setdefault((section, key.group(1)), number)
    return lines


class _Collector:
    """Gathers line-anchored errors while reading one document."""

    def __init__(self, text):
        self.lines = _key_lines(text)
        self.errors = []

    def error(self, section, key, message):
        line = self.lines.get((section, key)) or self.lines.get((section, None))
        where = f"{section}.{key}" if key else section
        self.errors.append((line, f"{where}: {message}"))

    def table(self, data, section, allowed):
        table = data
        for part in section.split("."):
            table = table.get(part) if isinstance(table, dict) else None
        if table is None:
            return {}
        if not isinstance(table, dict):
            self.error(section, None, "must be a table")
            return {}
        for key in table:
            if key not in allowed:
                self.error(section, key, "unknown key")
        return table

    def number(self, table, section, key, default, low=None, high=None,
               low_open=False, high_open=False, integer=False):
        if key not in table:
            if default is None:
                self.error(section, None, f"missing required key {key!r}")
            return default
        value = table[key]
        kinds = (int,) if integer else (int, float)
        if isinstance(value, bool) or not isinstance(value, kinds):
            self.error(section, key, f"expected {'an integer' if integer else 'a number'}, got {value!r}")
            return default
        too_low = low is not None and (value <= low if low_open else value < low)
        too_high = high is not None and (value >= high if high_open else value > high)
        if too_low or too_high:
            lo = "(" if low_open else "["
            hi = ")" if high_open else "]"
            self.error(section, key, f"{value} out of range {lo}{low}, {high}{hi}")
            return default
        return value if integer else float(value)

    def flag(self, table, section, key, default):
        value = table.get(key, default)
        if not isinstance(value, bool):
            self.error(section, key, f"expected true or false, got {value!r}")
            return default
        return value

    def point(self, table, section, key):
        value = table.get(key)
        if value is None:
            self.error(section, None, f"missing required key {key!r}")
            return None
        if (not isinstance(value, list) or len(value) != 2
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)):
            self.error(section, key, f"expected [x, y], got {value!r}")
            return None
        if not all(0.0 <= v <= 1.0 for v in value):
            self.error(section, key, f"{value} outside the unit square")
            return None
        return Vec2(float(value[0]), float(value[1]))


def _read_barriers(collector, table):
    rows = table.get("barriers", [])
    if not isinstance(rows, list):
        collector.error("world", "barriers", "expected a list of [x, y, rotation, length] rows")
        return ()
    if len(rows) > MAX_BARRIERS:
        collector.error("world", "barriers", f"{len(rows)} barriers, at most {MAX_BARRIERS} allowed")
        return ()
    barriers = []
    for i, row in enumerate(rows):
        if (not isinstance(row, list) or len(row) != 4
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in row)):
            collector.error("world", "barriers", f"row {i} malformed, expected [x, y, rotation, length]")
            continue
        x, y, rotation, length = (float(v) for v in row)
        try:
            barriers.append(Barrier(Vec2(x, y), rotation, length))
        except (ConfigurationError, ValueError) as exc:
            collector.error("world", "barriers", f"row {i}: {exc}")
    return tuple(barriers)


def _read_agent(collector, data, axis_name):
    section = f"agents.{axis_name}"
    table = collector.table(data, section, AGENT_KEYS)
    coop = None
    if "coop" not in table:
        collector.error(section, None, "missing required key 'coop'")
    else:
        try:
            coop = CoopLevel.parse(str(table["coop"]))
        except ValueError as exc:
            collector.error(section, "coop", str(exc))
    gain = collector.number(table, section, "gain", DEFAULT_GAIN, 0.0, 1.0, low_open=True, high_open=True)
    backoff = collector.number(table, section, "backoff_ms", DEFAULT_BACKOFF_MS, 0, None, low_open=True, integer=True)
    view = collector.flag(table, section, "target_view", True)
    return coop, AgentParams(gain=gain, backoff_ms=backoff, target_view=view)


def parse_config(text):
    """
    Parse and validate a config document.

    Raises:
        ConfigFileError: with every (line, message) problem found
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        if line is None:
            found = _DECODE_LINE.search(str(exc))
            line = int(found.group(1)) if found else None
        raise ConfigFileError([(line, str(exc))]) from exc

    collector = _Collector(text)
    for section, value in data.items():
        if section not in ("world", "agents", "experiment"):
            collector.error(section, None, "unknown section")
        elif section == "agents" and isinstance(value, dict):
            for name in value:
                if name not in ("x", "y"):
                    collector.error(f"agents.{name}", None, "unknown agent, expected x or y")

    if "world" not in data:
        collector.error("world", None, "missing section [world]")
    world_table = collector.table(data, "world", WORLD_KEYS)
    target = collector.point(world_table, "world", "target")
    start = collector.point(world_table, "world", "vehicle_start")
    barriers = _read_barriers(collector, world_table)
    tolerance = collector.number(world_table, "world", "target_tolerance", DEFAULT_TARGET_TOLERANCE, 0.0, 1.0, low_open=True)
    radius = collector.number(world_table, "world", "vehicle_radius", DEFAULT_VEHICLE_RADIUS, 0.0, 0.5, low_open=True)

    coop_x, params_x = _read_agent(collector, data, "x")
    coop_y, params_y = _read_agent(collector, data, "y")

    exp = collector.table(data, "experiment", EXPERIMENT_KEYS)
    nruns = collector.number(exp, "experiment", "nruns", DEFAULT_NRUNS, 1, None, integer=True)
    nbarriers = collector.number(exp, "experiment", "nbarriers", 3, 0, MAX_BARRIERS, integer=True)
    mode_name = exp.get("barrier_mode", BarrierMode.RANDOM.value)
    try:
        mode = BarrierMode(mode_name)
    except ValueError:
        collector.error("experiment", "barrier_mode", f"expected 'fixed' or 'random', got {mode_name!r}")
        mode = BarrierMode.RANDOM
    seed = collector.number(exp, "experiment", "master_seed", 0, 0, None, integer=True)
    randomize = collector.flag(exp, "experiment", "randomize_start_target", True)
    tick_ms = collector.number(exp, "experiment", "tick_ms", TICK_MS, 0, None, low_open=True, integer=True)
    cap_ms = collector.number(exp, "experiment", "cap_ms", CAP_MS, 0, None, low_open=True, integer=True)
    if cap_ms % tick_ms:
        collector.error("experiment", "cap_ms", f"{cap_ms} is not a multiple of tick_ms {tick_ms}")

    world = None
    if target is not None and start is not None:
        world = WorldConfig(target, start, barriers, tolerance, radius)
        try:
            validate_world(world)
        except ConfigurationError as exc:
            collector.error("world", None, str(exc))

    if collector.errors:
        raise ConfigFileError(collector.errors)
    return ConfigFile(
        world=world,
        coop_x=coop_x,
        coop_y=coop_y,
        params_x=params_x,
        params_y=params_y,
        nruns=nruns,
        nbarriers=nbarriers,
        barrier_mode=mode,
        master_seed=seed,
        randomize_start_target=randomize,
        tick_ms=tick_ms,
        cap_ms=cap_ms,
    )


def _toml_bool(value):
    return "true" if value else "false"


def _agent_block(axis_name, coop, params):
    return [
        f"[agents.{axis_name}]",
        f'coop = "{coop}"',
        f"gain = {params.gain!r}",
        f"backoff_ms = {params.backoff_ms}",
        f"target_view = {_toml_bool(params.target_view)}",
        "",
    ]


def serialize_config(config):
    """Render a ConfigFile as TOML text that parse_config reads back unchanged."""
    world = config.world
    rows = ",\n".join(
        f"    [{b.center.x!r}, {b.center.y!r}, {b.rotation!r}, {b.length!r}]" for b in world.barriers
    )
    lines = [
        "[world]",
        f"target = [{world.target.x!r}, {world.target.y!r}]",
        f"vehicle_start = [{world.vehicle_start.x!r}, {world.vehicle_start.y!r}]",
        f"barriers = [\n{rows},\n]" if rows else "barriers = []",
        f"target_tolerance = {world.target_tolerance!r}",
        f"vehicle_radius = {world.vehicle_radius!r}",
        "",
        *_agent_block("x", config.coop_x, config.params_x),
        *_agent_block("y", config.coop_y, config.params_y),
        "[experiment]",
        f"nruns = {config.nruns}",
        f"nbarriers = {config.nbarriers}",
        f'barrier_mode = "{config.barrier_mode.value}"',
        f"master_seed = {config.master_seed}",
        f"randomize_start_target = {_toml_bool(config.randomize_start_target)}",
        f"tick_ms = {config.tick_ms}",
        f"cap_ms = {config.cap_ms}",
    ]
    return "\n".join(lines) + "\n"
