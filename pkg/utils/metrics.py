import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

logger = logging.getLogger(__name__)

BOOTSTRAP_RESAMPLES = 1000
BOOTSTRAP_SEED = 0
CI_LEVEL = 0.95


@dataclass(frozen=True)
class ExperimentSummary:
    """Aggregate of one batch of runs for one (coop_x, coop_y) pair."""

    coop_x: str
    coop_y: str
    nruns: int
    dnf_count: int
    mean_st_ms: float | None
    median_st_ms: float | None
    st_std_ms: float | None
    gm: float | None
    gm_se: float | None
    gm_ci_low: float | None
    gm_ci_high: float | None
    comm_x_mean: float
    comm_x_std: float
    comm_x_iqr: float
    comm_y_mean: float
    comm_y_std: float
    comm_y_iqr: float
    pearson_r: float | None

    @property
    def solved_count(self):
        return self.nruns - self.dnf_count

    @property
    def comm_pct_total(self):
        return (self.comm_x_mean + self.comm_y_mean) / 2.0


def goodness(mean_st_ms, dnf, nruns):
    """
    Goodness measure (low is good): (1 + dnf/nruns) * log10(mean ST in ms).

    Returns None when no run finished.
    """
    if nruns < 1:
        raise ValueError("nruns must be at least 1")
    if not 0 <= dnf <= nruns:
        raise ValueError(f"dnf {dnf} outside [0, {nruns}]")
    if dnf == nruns:
        return None
    if mean_st_ms is None or mean_st_ms <= 0:
        raise ValueError(f"mean solution time must be positive, got {mean_st_ms}")
    return (1.0 + dnf / nruns) * math.log10(mean_st_ms)


def goodness_standard_error(mean_st_ms, st_std_ms, solved, dnf, nruns):
    """
    Delta-method standard error of the goodness measure, combining the
    spread of solution times with the binomial DNF fraction.
    """
    if solved < 2 or mean_st_ms is None or mean_st_ms <= 0 or st_std_ms is None:
        return None
    fraction = dnf / nruns
    se_mean = st_std_ms / math.sqrt(solved)
    d_mean = (1.0 + fraction) / (mean_st_ms * math.log(10.0))
    d_fraction = math.log10(mean_st_ms)
    var_fraction = fraction * (1.0 - fraction) / nruns
    return math.sqrt((d_mean * se_mean) ** 2 + d_fraction ** 2 * var_fraction)


def bootstrap_gm_ci(st_values, rng, resamples=BOOTSTRAP_RESAMPLES, level=CI_LEVEL):
    """
    Percentile bootstrap interval for the goodness measure.

    Args:
        st_values: Solution time per run, NaN for a DNF
        rng: numpy Generator
        resamples: Number of bootstrap resamples
        level: Coverage of the interval
    """
    st = np.asarray(st_values, dtype=float)
    n = st.size
    if n == 0 or np.isnan(st).all():
        return None, None
    idx = rng.integers(0, n, size=(resamples, n))
    sample = st[idx]
    solved = ~np.isnan(sample)
    counts = solved.sum(axis=1)
    usable = (counts > 0)
    means = np.where(usable, np.nansum(sample, axis=1) / np.maximum(counts, 1), np.nan)
    usable &= means > 0
    if not usable.any():
        return None, None
    gm = (1.0 + (n - counts[usable]) / n) * np.log10(means[usable])
    alpha = (1.0 - level) / 2.0
    low, high = np.quantile(gm, [alpha, 1.0 - alpha])
    return float(low), float(high)


def pearson(xs, ys):
    """Pearson correlation, or None when either input is constant."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape:
        raise ValueError("inputs must have equal length")
    if x.size < 2:
        raise ValueError("need at least two points")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        logger.debug("constant input, correlation undefined")
        return None
    r = stats.pearsonr(x, y)[0]
    return float(min(1.0, max(-1.0, r)))


def histogram(st_values, bin_ms):
    """
    Count solution times into bins of width bin_ms, from the first occupied
    bin to the last one (empty bins in between included).

    Returns:
        list of (bin start, count)
    """
    if bin_ms <= 0:
        raise ValueError("bin_ms must be positive")
    values = np.asarray(list(st_values), dtype=float)
    if values.size == 0:
        return []
    bins = np.floor(values / bin_ms).astype(int)
    first = bins.min()
    counts = np.bincount(bins - first)
    return [(int((first + i) * bin_ms), int(c)) for i, c in enumerate(counts)]


def iqr(values):
    if len(values) == 0:
        return 0.0
    q1, q3 = np.percentile(values, [25, 75])
    return float(q3 - q1)


def summarize(results, rng=None):
    """
    Fold a list of RunResult into an ExperimentSummary.

    Solution-time statistics and the correlation use solved runs only;
    communication statistics use every run.

    Args:
        results: Non-empty list of RunResult for one coop pair
        rng: Generator for the bootstrap interval (seeded default if None)
    """
    if not results:
        raise ValueError("cannot summarize an empty result list")
    nruns = len(results)
    solved = [r for r in results if r.solved]
    dnf = nruns - len(solved)

    st = np.array([r.st_ms for r in solved], dtype=float)
    mean_st = float(st.mean()) if st.size else None
    median_st = float(np.median(st)) if st.size else None
    std_st = float(st.std(ddof=1)) if st.size > 1 else None

    gm = None
    if mean_st is not None and mean_st > 0:
        gm = goodness(mean_st, dnf, nruns)
    elif solved:
        logger.warning("all solved runs finished at 0 ms, goodness undefined")

    if rng is None:
        rng = np.random.default_rng(BOOTSTRAP_SEED)
    st_all = [r.st_ms if r.solved else np.nan for r in results]
    ci_low, ci_high = bootstrap_gm_ci(st_all, rng) if gm is not None else (None, None)

    comm_x = np.array([r.comm_pct_x for r in results])
    comm_y = np.array([r.comm_pct_y for r in results])

    r_value = None
    if len(solved) >= 2:
        r_value = pearson([r.comm_pct_mean for r in solved], st)

    return ExperimentSummary(
        coop_x=str(results[0].coop_x),
        coop_y=str(results[0].coop_y),
        nruns=nruns,
        dnf_count=dnf,
        mean_st_ms=mean_st,
        median_st_ms=median_st,
        st_std_ms=std_st,
        gm=gm,
        gm_se=goodness_standard_error(mean_st, std_st, len(solved), dnf, nruns) if gm is not None else None,
        gm_ci_low=ci_low,
        gm_ci_high=ci_high,
        comm_x_mean=float(comm_x.mean()),
        comm_x_std=float(comm_x.std(ddof=1)) if nruns > 1 else 0.0,
        comm_x_iqr=iqr(comm_x),
        comm_y_mean=float(comm_y.mean()),
        comm_y_std=float(comm_y.std(ddof=1)) if nruns > 1 else 0.0,
        comm_y_iqr=iqr(comm_y),
        pearson_r=r_value,
    )


def rank_by_goodness(summaries):
    """Order summaries best first; undefined GM goes last."""
    return sorted(
        summaries,
        key=lambda s: (s.gm is None, s.gm if s.gm is not None else 0.0, s.coop_x, s.coop_y),
    )
