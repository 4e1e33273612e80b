from dataclasses import replace

import numpy as np
import pytest

from utils.agent import CoopLevel, all_levels
from utils.environment import WorldConfig, solvable
from utils.errors import ConfigurationError
from utils.experiment import (
    BarrierMode,
    ExperimentConfig,
    census,
    run_batch,
    run_seed,
    sweep,
    sweep_barriers,
    sweep_full,
    sweep_incremental,
    sweep_matched,
    world_for_run,
)
from utils.geometry import Vec2
from utils.metrics import goodness, pearson
from utils.simulation import RunConfig, run
from utils.world_generator import get_fixture
from views.summary_table import emit_summary_csv

L = CoopLevel.parse


def random_config(nruns, nbarriers=3, seed=0, workers=1):
    return ExperimentConfig(nruns=nruns, nbarriers=nbarriers, master_seed=seed, workers=workers)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        ExperimentConfig(nruns=0)
    with pytest.raises(ConfigurationError):
        ExperimentConfig(nbarriers=4)
    with pytest.raises(ConfigurationError):
        ExperimentConfig(barrier_mode=BarrierMode.FIXED)


def test_run_seeds_are_stable_and_distinct():
    assert run_seed(0, 3) == run_seed(0, 3)
    assert len({run_seed(0, i) for i in range(100)}) == 100
    assert run_seed(0, 3) != run_seed(1, 3)


def test_worlds_do_not_depend_on_coop_pair():
    config = random_config(5)
    a = [r.seed for r in run_batch(config, L("0000"), L("0000"))]
    b = [r.seed for r in run_batch(config, L("1111"), L("0010"))]
    assert a == b
    assert world_for_run(config, 2) == world_for_run(config, 2)


def test_fixed_mode_keeps_barriers(fixed_experiment):
    config = fixed_experiment("local_minimum", randomize=True)
    barriers = get_fixture("local_minimum").barriers
    worlds = [world_for_run(config, i) for i in range(4)]
    assert all(w.barriers == barriers for w in worlds)
    assert len({w.vehicle_start for w in worlds}) == 4
    assert world_for_run(replace(config, randomize_start_target=False), 0) == get_fixture("local_minimum")


def test_batch_is_reproducible():
    config = random_config(10, seed=4)
    assert run_batch(config, L("0110"), L("0110")) == run_batch(config, L("0110"), L("0110"))


def test_unsolvable_fixture_is_all_dnf(fixed_experiment):
    results = run_batch(fixed_experiment("unsolvable"), L("1111"), L("1111"))
    assert len(results) == 10
    assert not any(r.solved for r in results)


def test_run_index_is_attached_to_configuration_errors():
    overlapping = WorldConfig(
        target=Vec2(0.8, 0.8), vehicle_start=Vec2(0.5, 0.5),
        barriers=get_fixture("local_minimum").barriers,
    )
    config = ExperimentConfig(
        nruns=1, barrier_mode=BarrierMode.FIXED, world=overlapping,
        randomize_start_target=False, workers=1,
    )
    with pytest.raises(ConfigurationError) as info:
        run_batch(config, L("0000"), L("0000"))
    assert info.value.run_index == 0
    assert str(info.value).startswith("run 0: ")


def test_parallel_and_serial_agree():
    serial = random_config(6, seed=2)
    parallel = replace(serial, workers=2)
    pairs = [(L("0110"), L("0110")), (L("1000"), L("0010"))]
    assert sweep(serial, pairs) == sweep(parallel, pairs)
    assert emit_summary_csv(sweep(serial, pairs)) == emit_summary_csv(sweep(parallel, pairs))


def test_sweep_needs_pairs():
    with pytest.raises(ConfigurationError):
        sweep(random_config(1))


def test_sweep_matched_rows():
    summaries = sweep_matched(random_config(3, seed=1))
    assert [s.coop_x for s in summaries] == [str(level) for level in all_levels()]
    assert all(s.coop_x == s.coop_y for s in summaries)
    for summary in summaries:
        if summary.gm is not None:
            assert summary.gm == goodness(summary.mean_st_ms, summary.dnf_count, summary.nruns)


def test_no_partner_bits_means_no_communication():
    config = random_config(20, seed=11)
    for cx in ("0000", "1000"):
        for cy in ("0000", "1000"):
            for r in run_batch(config, L(cx), L(cy)):
                assert r.comm_pct_x == 0.0
                assert r.comm_pct_y == 0.0


def test_sweep_full_order_on_empty_worlds():
    summaries = sweep_full(random_config(1, nbarriers=0))
    levels = [str(level) for level in all_levels()]
    assert len(summaries) == 256
    for k, summary in enumerate(summaries):
        assert summary.coop_y == levels[k // 16]
        assert summary.coop_x == levels[k % 16]
        assert summary.dnf_count == 0


def test_sweep_barriers_rows():
    rows = sweep_barriers(random_config(2), (L("0110"), L("0110")), (L("1111"), L("0010")), counts=(0, 1))
    assert [(r.nbarriers, r.summary.coop_x, r.summary.coop_y) for r in rows] == [
        (0, "0110", "0110"), (0, "1111", "0010"), (1, "0110", "0110"), (1, "1111", "0010"),
    ]


def test_sweep_barriers_without_barriers_is_pair_independent():
    rows = sweep_barriers(random_config(10), (L("0110"), L("0110")), (L("1111"), L("0010")), counts=(0,))
    # nothing to get stuck on, so cooperation bits never fire
    assert rows[0].summary.gm == rows[1].summary.gm
    assert rows[0].summary.comm_pct_total == rows[1].summary.comm_pct_total == 0.0


def test_barrier_counts_share_nested_worlds():
    config = replace(random_config(4), nested_barriers=True)
    for i in range(4):
        full = world_for_run(config, i)
        assert len(full.barriers) == 3
        for count in range(3):
            fewer = world_for_run(replace(config, nbarriers=count), i)
            assert (fewer.vehicle_start, fewer.target) == (full.vehicle_start, full.target)
            assert fewer.barriers == full.barriers[:count]


def test_sweep_incremental(fixed_experiment):
    result = sweep_incremental(fixed_experiment("local_minimum", nruns=6, randomize=True))
    assert [s.coop_x for s in result.summaries] == ["1000", "1100", "1110", "1111"]
    assert set(result.histograms) == {"1000", "1100", "1110", "1111"}
    for summary in result.summaries:
        counted = sum(count for _, count in result.histograms[summary.coop_x])
        assert counted == summary.solved_count


def test_census_of_fixtures(fixed_experiment):
    boxed = census(fixed_experiment("unsolvable", nruns=2))
    assert (boxed.unsolvable, boxed.nruns) == (2, 2)
    assert boxed.fraction("unsolvable") == 1.0
    open_world = census(fixed_experiment("no_local_minimum", nruns=2))
    assert open_world.without_cooperation == 2


@pytest.mark.slow
def test_zero_communication_over_random_worlds():
    config = random_config(200, seed=21)
    for cx in ("0000", "1000"):
        for cy in ("0000", "1000"):
            assert all(r.comm_pct_x == r.comm_pct_y == 0.0 for r in run_batch(config, L(cx), L(cy)))


@pytest.mark.slow
def test_incremental_cooperation_ordering(fixed_experiment):
    summaries = {
        s.coop_x: s
        for s in sweep_incremental(fixed_experiment("local_minimum", nruns=200, randomize=True)).summaries
    }
    assert summaries["1110"].gm < summaries["1100"].gm < summaries["1000"].gm
    assert (summaries["1111"].dnf_count <= summaries["1110"].dnf_count
            < summaries["1100"].dnf_count < summaries["1000"].dnf_count)


@pytest.mark.slow
def test_matched_sweep_orderings():
    summaries = {s.coop_x: s for s in sweep_matched(random_config(200, seed=31))}
    d_on = [s for level, s in summaries.items() if L(level).d_stuck_stuck]
    d_off = [s for level, s in summaries.items() if not L(level).d_stuck_stuck]
    assert np.mean([s.gm for s in d_on]) < np.mean([s.gm for s in d_off])

    def comm(levels):
        return np.mean([summaries[level].comm_pct_total for level in levels])

    d_levels = [level for level in summaries if L(level).d_stuck_stuck]
    c_only = ["0100", "1100"]
    e_only = ["0001", "1001"]
    assert comm(d_levels) > comm(c_only) > comm(e_only) >= 0.0
    assert comm(e_only) < 1.0
    assert summaries["0001"].dnf_count >= summaries["0000"].dnf_count


@pytest.mark.slow
def test_barrier_count_monotonicity():
    rows = sweep_barriers(random_config(200, seed=41), (L("0110"), L("0110")), (L("1111"), L("0010")))
    matched = [r.summary for r in rows[0::2]]
    mismatched = [r.summary for r in rows[1::2]]
    for series in (matched, mismatched):
        gms = [s.gm for s in series]
        assert all(a < b for a, b in zip(gms, gms[1:]))
    assert abs(matched[0].gm - mismatched[0].gm) < 0.02
    assert mismatched[3].comm_pct_total <= matched[3].comm_pct_total


@pytest.mark.slow
def test_communication_correlates_with_solution_time():
    results = run_batch(random_config(500, seed=51), L("0111"), L("0111"))
    solved = [r for r in results if r.solved]
    r = pearson([s.comm_pct_mean for s in solved], [s.st_ms for s in solved])
    assert 0.1 <= r <= 0.7


@pytest.mark.slow
def test_heatmap_symmetry():
    summaries = sweep_full(random_config(100, seed=61, workers=4))
    cells = {(s.coop_x, s.coop_y): s for s in summaries}
    levels = [str(level) for level in all_levels()]
    close, total = 0, 0
    for i, a in enumerate(levels):
        for b in levels[i + 1:]:
            ab, ba = cells[(a, b)], cells[(b, a)]
            if ab.gm is None or ba.gm is None or ab.gm_se is None or ba.gm_se is None:
                continue
            total += 1
            pooled = (ab.gm_se ** 2 + ba.gm_se ** 2) ** 0.5
            close += abs(ab.gm - ba.gm) <= 2 * pooled
    assert close >= 0.9 * total


def test_gate_held_agents_communicate_on_random_worlds():
    results = run_batch(random_config(20, seed=51), L("0111"), L("0111"))
    assert max(r.comm_pct_mean for r in results) > 0.0


def _greedy_path_is_clear(world):
    """No barrier comes near the box spanned by start and target, which a free approach never leaves."""
    corners = np.array([[world.vehicle_start.x, world.vehicle_start.y], [world.target.x, world.target.y]])
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    t = np.linspace(0.0, 1.0, 400)[:, None]
    for seg in world.segments:
        points = np.array([seg.a.x, seg.a.y]) + t * np.array([seg.b.x - seg.a.x, seg.b.y - seg.a.y])
        gap = np.maximum(np.maximum(lo - points, points - hi), 0.0)
        if np.hypot(gap[:, 0], gap[:, 1]).min() < world.vehicle_radius + 0.005:
            return False
    return True


def _check_oracle_soundness(nworlds, seed=71):
    config = random_config(nworlds, seed=seed)
    worlds = [get_fixture(name) for name in ("unsolvable", "local_minimum", "no_local_minimum")]
    worlds += [world_for_run(config, i) for i in range(nworlds)]
    pairs = np.random.default_rng(seed)
    unsolvable = 0
    for i, world in enumerate(worlds):
        if not solvable(world):
            unsolvable += 1
            for k in pairs.choice(256, size=4, replace=False):
                coop_x, coop_y = CoopLevel.from_index(int(k) % 16), CoopLevel.from_index(int(k) // 16)
                result = run(RunConfig(world=world, coop_x=coop_x, coop_y=coop_y, seed=run_seed(seed, i)))
                assert not result.solved, f"world {i} labelled unsolvable was solved by {coop_x}+{coop_y}"
        elif _greedy_path_is_clear(world):
            assert run(RunConfig(world=world, seed=run_seed(seed, i))).solved, f"greedy world {i} not solved"
    assert unsolvable >= 1


def test_oracle_is_sound():
    _check_oracle_soundness(12)


@pytest.mark.slow
def test_oracle_is_sound_full():
    _check_oracle_soundness(50)
