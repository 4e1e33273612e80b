"""
Batch runner and the cooperation sweeps.

Every run of a batch gets its own world stream and run seed derived from
(master_seed, run index), so run i sees the same world whichever
cooperation pair is being measured and whether or not runs execute in
parallel.
"""

import logging
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from multiprocessing import Pool

import numpy as np

from utils.agent import AgentParams, CoopLevel, all_levels
from utils.environment import MAX_BARRIERS, WorldConfig, solvable
from utils.errors import ConfigurationError
from utils.metrics import histogram, summarize
from utils.simulation import CAP_MS, TICK_MS, RunConfig, run
from utils.world_generator import random_start_target, random_world, world_stream

logger = logging.getLogger(__name__)

DEFAULT_NRUNS = 200
HISTOGRAM_BIN_MS = 1000

INCREMENTAL_LEVELS = ("1000", "1100", "1110", "1111")
CENSUS_LEVELS = ("0111", "0110", "1110", "0010")
BARRIER_COUNTS = (0, 1, 2, 3)


def default_workers():
    return max(1, int(os.getenv("COOPSIM_WORKERS", "1")))


class BarrierMode(str, Enum):
    FIXED = "fixed"
    RANDOM = "random"


@dataclass(frozen=True)
class ExperimentConfig:
    nruns: int = DEFAULT_NRUNS
    nbarriers: int = 3
    barrier_mode: BarrierMode = BarrierMode.RANDOM
    # fixed mode: barriers (and start/target unless randomized) come from here
    world: WorldConfig | None = None
    master_seed: int = 0
    randomize_start_target: bool = True
    # random mode: draw MAX_BARRIERS barriers and keep the first nbarriers, so
    # runs with different barrier counts share start, target and barriers
    nested_barriers: bool = False
    params_x: AgentParams = field(default_factory=AgentParams)
    params_y: AgentParams = field(default_factory=AgentParams)
    pairs: tuple = ()
    tick_ms: int = TICK_MS
    cap_ms: int = CAP_MS
    workers: int = field(default_factory=default_workers)

    def __post_init__(self):
        if self.nruns < 1:
            raise ConfigurationError(f"nruns {self.nruns} must be at least 1")
        if not 0 <= self.nbarriers <= MAX_BARRIERS:
            raise ConfigurationError(f"nbarriers {self.nbarriers} outside [0, {MAX_BARRIERS}]")
        if self.barrier_mode is BarrierMode.FIXED and self.world is None:
            raise ConfigurationError("fixed barrier mode needs a world")
        if self.master_seed < 0:
            raise ConfigurationError("master_seed must be non-negative")


@dataclass(frozen=True)
class BarrierSweepRow:
    nbarriers: int
    summary: object


@dataclass(frozen=True)
class IncrementalResult:
    summaries: list
    histograms: dict


@dataclass(frozen=True)
class Census:
    nruns: int
    unsolvable: int
    without_cooperation: int
    with_cooperation: int
    unresolved: int

    def fraction(self, name):
        return getattr(self, name) / self.nruns


def run_seed(master_seed, run_index):
    """64-bit seed of run run_index, independent of the world stream."""
    state = np.random.SeedSequence(master_seed, spawn_key=(run_index, 1)).generate_state(1, dtype=np.uint64)
    return int(state[0])


def world_for_run(config, run_index):
    if config.barrier_mode is BarrierMode.RANDOM:
        stream = world_stream(config.master_seed, run_index)
        if not config.nested_barriers:
            return random_world(stream, config.nbarriers)
        world = random_world(stream, MAX_BARRIERS)
        return replace(world, barriers=world.barriers[:config.nbarriers])
    base = config.world
    if not config.randomize_start_target:
        return base
    return random_start_target(
        world_stream(config.master_seed, run_index),
        base.barriers,
        base.target_tolerance,
        base.vehicle_radius,
    )


def run_config_for(config, coop_x, coop_y, run_index, world=None):
    return RunConfig(
        world=world if world is not None else world_for_run(config, run_index),
        coop_x=coop_x,
        coop_y=coop_y,
        params_x=config.params_x,
        params_y=config.params_y,
        seed=run_seed(config.master_seed, run_index),
        tick_ms=config.tick_ms,
        cap_ms=config.cap_ms,
    )


def _run_task(task):
    config, coop_x, coop_y, run_index = task
    try:
        return run(run_config_for(config, coop_x, coop_y, run_index))
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), run_index=run_index) from exc


def _map(func, tasks, workers):
    if workers <= 1 or len(tasks) < 2:
        return [func(task) for task in tasks]
    chunksize = max(1, len(tasks) // (workers * 8))
    with Pool(workers) as pool:
        return pool.map(func, tasks, chunksize=chunksize)


def run_batch(config, coop_x, coop_y):
    """Run config.nruns simulations for one cooperation pair, in run order."""
    tasks = [(config, coop_x, coop_y, i) for i in range(config.nruns)]
    results = _map(_run_task, tasks, config.workers)
    logger.debug("batch %s+%s: %d/%d solved", coop_x, coop_y, sum(r.solved for r in results), len(results))
    return results


def sweep(config, pairs=None):
    """
    Run and summarize every (coop_x, coop_y) pair.

    Args:
        config: ExperimentConfig
        pairs: Sequence of (CoopLevel, CoopLevel); defaults to config.pairs
    """
    pairs = list(pairs if pairs is not None else config.pairs)
    if not pairs:
        raise ConfigurationError("no cooperation pairs to sweep")
    tasks = [(config, cx, cy, i) for cx, cy in pairs for i in range(config.nruns)]
    results = _map(_run_task, tasks, config.workers)

    summaries = []
    for k, (cx, cy) in enumerate(pairs):
        summary = summarize(results[k * config.nruns:(k + 1) * config.nruns])
        logger.info(
            "%s+%s: gm=%s dnf=%d/%d comm=%.2f%%",
            cx, cy,
            "n/a" if summary.gm is None else f"{summary.gm:.4f}",
            summary.dnf_count, summary.nruns, summary.comm_pct_total,
        )
        summaries.append(summary)
    return summaries


def sweep_matched(config):
    """The sixteen matched levels, coop_x = coop_y, in cooperation-index order."""
    return sweep(config, [(level, level) for level in all_levels()])


def sweep_full(config):
    """All 256 ordered pairs; coop_y is the outer loop, coop_x the inner one."""
    levels = all_levels()
    return sweep(config, [(cx, cy) for cy in levels for cx in levels])


def sweep_barriers(config, pair_a, pair_b, counts=BARRIER_COUNTS):
    """
    Compare two cooperation pairs over random worlds with each barrier count.

    Run i at every count uses the same start, target and run seed, and its
    barriers are the first `count` of one three-barrier draw.

    Returns:
        list of BarrierSweepRow, pair_a then pair_b for every count
    """
    rows = []
    for count in counts:
        per_count = replace(
            config, barrier_mode=BarrierMode.RANDOM, nbarriers=count, world=None, nested_barriers=True
        )
        summary_a, summary_b = sweep(per_count, [pair_a, pair_b])
        rows.append(BarrierSweepRow(count, summary_a))
        rows.append(BarrierSweepRow(count, summary_b))
    return rows


def sweep_incremental(config, levels=INCREMENTAL_LEVELS, bin_ms=HISTOGRAM_BIN_MS):
    """
    Matched runs at increasing cooperation on one barrier layout, with the
    solution-time distribution of each level.
    """
    coops = [CoopLevel.parse(level) for level in levels]
    pairs = [(c, c) for c in coops]
    tasks = [(config, cx, cy, i) for cx, cy in pairs for i in range(config.nruns)]
    results = _map(_run_task, tasks, config.workers)

    summaries, histograms = [], {}
    for k, coop in enumerate(coops):
        batch = results[k * config.nruns:(k + 1) * config.nruns]
        summaries.append(summarize(batch))
        histograms[str(coop)] = histogram([r.st_ms for r in batch if r.solved], bin_ms)
    return IncrementalResult(summaries, histograms)


def _census_task(task):
    config, run_index, levels = task
    world = world_for_run(config, run_index)
    if not solvable(world):
        return "unsolvable"
    baseline = CoopLevel()
    if run(run_config_for(config, baseline, baseline, run_index, world)).solved:
        return "without_cooperation"
    for level in levels:
        if run(run_config_for(config, level, level, run_index, world)).solved:
            return "with_cooperation"
    return "unresolved"


def census(config, levels=CENSUS_LEVELS):
    """
    Classify each world of the batch as unsolvable, solved without
    cooperation, solved only with one of the cooperative matched levels,
    or left unresolved.
    """
    coops = tuple(CoopLevel.parse(level) for level in levels)
    tasks = [(config, i, coops) for i in range(config.nruns)]
    labels = _map(_census_task, tasks, config.workers)
    counts = {name: labels.count(name) for name in
              ("unsolvable", "without_cooperation", "with_cooperation", "unresolved")}
    logger.info("census over %d worlds: %s", config.nruns, counts)
    return Census(nruns=config.nruns, **counts)
