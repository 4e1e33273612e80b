import math

import numpy as np
import pytest

from conftest import make_summary
from utils.agent import CoopLevel
from utils.metrics import (
    bootstrap_gm_ci,
    goodness,
    goodness_standard_error,
    histogram,
    iqr,
    pearson,
    rank_by_goodness,
    summarize,
)
from utils.simulation import RunResult

COOP = CoopLevel.parse("0110")


def result(st_ms=None, comm_x=0.0, comm_y=0.0):
    return RunResult(
        solved=st_ms is not None,
        st_ms=st_ms,
        comm_pct_x=comm_x,
        comm_pct_y=comm_y,
        ticks=3000 if st_ms is None else st_ms // 10,
        seed=0,
        coop_x=COOP,
        coop_y=COOP,
    )


@pytest.mark.parametrize("nruns", [1, 10, 1000])
def test_goodness_of_one_second_without_dnf(nruns):
    assert goodness(1000, 0, nruns) == pytest.approx(3.0)


def test_goodness_inverts_to_mean_solution_time():
    # gm 6.0828 at a 64% DNF rate
    mean_st = 10 ** (6.0828 / 1.64)
    assert mean_st == pytest.approx(5117, rel=0.01)
    assert goodness(mean_st, 64, 100) == pytest.approx(6.0828)


def test_goodness_undefined_when_nothing_finished():
    assert goodness(None, 10, 10) is None


@pytest.mark.parametrize("args", [(1000, 0, 0), (1000, 11, 10), (1000, -1, 10), (0, 1, 10)])
def test_goodness_preconditions(args):
    with pytest.raises(ValueError):
        goodness(*args)


def test_standard_error():
    assert goodness_standard_error(3000.0, 100.0, 1, 0, 1) is None
    se = goodness_standard_error(3000.0, 300.0, 100, 0, 100)
    # no DNF: only the mean term, (1 / (m ln 10)) * s / sqrt(n)
    assert se == pytest.approx(300.0 / 10 / (3000.0 * math.log(10)))
    assert goodness_standard_error(3000.0, 300.0, 50, 50, 100) > se


def test_bootstrap_interval_brackets_the_estimate():
    rng = np.random.default_rng(0)
    st = list(rng.normal(3000, 300, size=150)) + [np.nan] * 50
    low, high = bootstrap_gm_ci(st, np.random.default_rng(1))
    gm = goodness(np.nanmean(st), 50, 200)
    assert low < gm < high


def test_bootstrap_interval_undefined_when_all_dnf():
    assert bootstrap_gm_ci([np.nan] * 5, np.random.default_rng(0)) == (None, None)


def test_pearson():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert pearson([1, 1, 1], [1, 2, 3]) is None
    with pytest.raises(ValueError):
        pearson([1, 2], [1, 2, 3])


def test_histogram_is_contiguous():
    assert histogram([1200, 1900, 4100], 1000) == [(1000, 2), (2000, 0), (3000, 0), (4000, 1)]
    assert histogram([], 1000) == []
    with pytest.raises(ValueError):
        histogram([1], 0)


def test_iqr():
    assert iqr([1, 2, 3, 4, 5]) == pytest.approx(2.0)
    assert iqr([]) == 0.0


def test_summarize_mixed_batch():
    results = [result(2000, 10.0, 20.0), result(4000, 30.0, 10.0), result(None, 5.0, 0.0), result(3000, 20.0, 30.0)]
    summary = summarize(results)
    assert summary.coop_x == "0110"
    assert summary.nruns == 4
    assert summary.dnf_count == 1
    assert summary.solved_count == 3
    assert summary.mean_st_ms == pytest.approx(3000.0)
    assert summary.median_st_ms == pytest.approx(3000.0)
    assert summary.gm == goodness(summary.mean_st_ms, 1, 4)
    assert summary.comm_x_mean == pytest.approx(16.25)
    assert summary.comm_pct_total == pytest.approx((16.25 + 15.0) / 2)
    assert summary.gm_ci_low is not None
    assert summary.pearson_r is not None


def test_summarize_all_dnf():
    summary = summarize([result(None), result(None)])
    assert summary.gm is None
    assert summary.mean_st_ms is None
    assert summary.gm_se is None
    assert summary.pearson_r is None
    assert summary.dnf_count == 2


def test_summarize_is_reproducible():
    results = [result(1000 + 10 * i, float(i), float(i)) for i in range(30)]
    assert summarize(results) == summarize(results)


def test_summarize_rejects_empty():
    with pytest.raises(ValueError):
        summarize([])


def test_rank_by_goodness_puts_undefined_last():
    ranked = rank_by_goodness([
        make_summary("0000", gm=None),
        make_summary("1000", gm=4.0),
        make_summary("0100", gm=3.5),
    ])
    assert [s.coop_x for s in ranked] == ["0100", "1000", "0000"]
