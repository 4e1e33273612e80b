import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from utils.agent import CoopLevel
from utils.config_io import parse_config
from utils.environment import solvable
from utils.errors import ConfigurationError
from utils.experiment import (
    BarrierMode,
    ExperimentConfig,
    census,
    run_batch,
    run_config_for,
    sweep_barriers,
    sweep_full,
    sweep_incremental,
    sweep_matched,
    world_for_run,
)
from utils.metrics import rank_by_goodness
from utils.simulation import run
from utils.world_generator import get_fixture
from views.heatmap import GRID_VALUES, emit_grid, emit_heatmap
from views.runs import emit_oracle_csv, emit_run_csv, emit_trace_csv
from views.summary_table import (
    emit_barrier_csv,
    emit_census_csv,
    emit_histogram_csv,
    emit_summary_csv,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _coop(text):
    try:
        return CoopLevel.parse(text)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None


def _pair(text):
    """'0110+0010' -> (CoopLevel, CoopLevel); a single level means a matched pair."""
    parts = text.split("+")
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2:
        raise ConfigurationError(f"expected COOP_X+COOP_Y, got {text!r}")
    return _coop(parts[0]), _coop(parts[1])


def load_config(path):
    if path is None:
        return None
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text)


def build_experiment(args):
    """
    ExperimentConfig and coop pair from --config, then the command-line overrides.

    Returns:
        (ExperimentConfig, coop_x, coop_y)
    """
    file = load_config(args.config)
    if file is not None:
        config = file.experiment_config(workers=args.workers)
        coop_x, coop_y = file.coop_x, file.coop_y
    else:
        config = ExperimentConfig()
        if args.workers is not None:
            config = replace(config, workers=args.workers)
        coop_x = coop_y = CoopLevel()

    overrides = {}
    if args.nruns is not None:
        overrides["nruns"] = args.nruns
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.barriers is not None:
        overrides.update(nbarriers=args.barriers, barrier_mode=BarrierMode.RANDOM, world=None)
    if args.fixture is not None:
        overrides.update(world=get_fixture(args.fixture), barrier_mode=BarrierMode.FIXED)
    if args.randomize_start_target is not None:
        overrides["randomize_start_target"] = args.randomize_start_target
    if overrides:
        config = replace(config, **overrides)

    if getattr(args, "coop_x", None) is not None:
        coop_x = _coop(args.coop_x)
    if getattr(args, "coop_y", None) is not None:
        coop_y = _coop(args.coop_y)
    return config, coop_x, coop_y


def cmd_run(args):
    config, coop_x, coop_y = build_experiment(args)
    run_config = replace(run_config_for(config, coop_x, coop_y, 0), trace=args.trace)
    result = run(run_config)
    logger.info("run %s+%s: solved=%s ticks=%d", coop_x, coop_y, result.solved, result.ticks)
    return emit_trace_csv(result) if args.trace else emit_run_csv([result])


def cmd_batch(args):
    config, coop_x, coop_y = build_experiment(args)
    return emit_run_csv(run_batch(config, coop_x, coop_y))


def cmd_sweep_matched(args):
    config, _, _ = build_experiment(args)
    summaries = sweep_matched(config)
    if args.rank:
        summaries = rank_by_goodness(summaries)
    return emit_summary_csv(summaries)


def cmd_sweep_full(args):
    config, _, _ = build_experiment(args)
    summaries = sweep_full(config)
    if args.grid:
        return emit_grid(summaries, args.grid)
    return emit_heatmap(summaries)


def cmd_sweep_barriers(args):
    config, _, _ = build_experiment(args)
    return emit_barrier_csv(sweep_barriers(config, _pair(args.pair_a), _pair(args.pair_b)))


def cmd_oracle(args):
    config, _, _ = build_experiment(args)
    labels = []
    for i in range(config.nruns):
        world = world_for_run(config, i)
        labels.append((len(world.barriers), solvable(world)))
    logger.info("oracle: %d of %d worlds solvable", sum(ok for _, ok in labels), len(labels))
    return emit_oracle_csv(labels)


def cmd_sweep_incremental(args):
    config, _, _ = build_experiment(args)
    if config.barrier_mode is BarrierMode.RANDOM and args.barriers is None:
        config = replace(config, world=get_fixture("local_minimum"), barrier_mode=BarrierMode.FIXED)
    levels = args.levels.split(",") if args.levels else None
    result = sweep_incremental(config, levels) if levels else sweep_incremental(config)
    if args.histograms:
        Path(args.histograms).write_text(emit_histogram_csv(result.histograms), encoding="utf-8")
    return emit_summary_csv(result.summaries)


def cmd_census(args):
    config, _, _ = build_experiment(args)
    levels = args.levels.split(",") if args.levels else None
    return emit_census_csv(census(config, levels) if levels else census(config))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="coopsim",
        description="Two-agent cooperative steering simulator and experiment runner.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for progress, -vv for per-run detail")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file; flags override its values")
    common.add_argument("--nruns", type=int)
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--barriers", type=int, help="random worlds with this many barriers (0-3)")
    common.add_argument("--fixture", help="fixed barrier layout: local_minimum, no_local_minimum, unsolvable")
    common.add_argument("--randomize-start-target", action=argparse.BooleanOptionalAction, default=None)
    common.add_argument("--workers", type=int, help="worker processes (default COOPSIM_WORKERS or 1)")
    common.add_argument("--out", help="output path (default stdout)")

    pair = argparse.ArgumentParser(add_help=False)
    pair.add_argument("--coop-x", help="cooperation level of the X agent, e.g. 0110")
    pair.add_argument("--coop-y", help="cooperation level of the Y agent")

    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("run", parents=[common, pair], help="one simulation (run 0 of the batch)")
    sub.add_argument("--trace", action="store_true", help="emit per-tick telemetry instead of the run row")
    sub.set_defaults(handler=cmd_run)

    sub = commands.add_parser("batch", parents=[common, pair], help="nruns simulations of one coop pair")
    sub.set_defaults(handler=cmd_batch)

    sub = commands.add_parser("sweep-matched", parents=[common], help="the sixteen matched levels")
    sub.add_argument("--rank", action="store_true", help="order rows by goodness, best first")
    sub.set_defaults(handler=cmd_sweep_matched)

    sub = commands.add_parser("sweep-full", parents=[common], help="all 256 pairs as a heatmap table")
    sub.add_argument("--grid", choices=GRID_VALUES,
                     help="emit one column as a 16x16 table, rows coop_y, columns coop_x")
    sub.set_defaults(handler=cmd_sweep_full)

    sub = commands.add_parser("sweep-barriers", parents=[common], help="two pairs over 0-3 random barriers")
    sub.add_argument("--pair-a", default="0110+0110")
    sub.add_argument("--pair-b", default="1111+0010")
    sub.set_defaults(handler=cmd_sweep_barriers)

    sub = commands.add_parser("oracle", parents=[common], help="solvability label of each batch world")
    sub.set_defaults(handler=cmd_oracle)

    sub = commands.add_parser("sweep-incremental", parents=[common],
                              help="matched levels of increasing cooperation on one layout")
    sub.add_argument("--levels", help="comma separated, default 1000,1100,1110,1111")
    sub.add_argument("--histograms", help="also write solution-time histograms to this path")
    sub.set_defaults(handler=cmd_sweep_incremental)

    sub = commands.add_parser("census", parents=[common], help="which worlds need cooperation")
    sub.add_argument("--levels", help="cooperative levels tried, default 0111,0110,1110,0010")
    sub.set_defaults(handler=cmd_census)
    return parser


def _log_level(verbose):
    if verbose >= 2:
        return logging.DEBUG
    if verbose == 1:
        return logging.INFO
    return os.getenv("COOPSIM_LOG_LEVEL", "WARNING").upper()


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=_log_level(args.verbose),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        text = args.handler(args)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        logger.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
