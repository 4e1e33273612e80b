from dataclasses import asdict

import pandas as pd

from views.runs import to_csv_text

SUMMARY_COLUMNS = [
    "coop_x", "coop_y", "nruns", "dnf", "mean_st_ms", "median_st_ms", "st_std_ms",
    "gm", "gm_se", "gm_ci_low", "gm_ci_high",
    "comm_pct_x", "comm_pct_x_std", "comm_pct_x_iqr",
    "comm_pct_y", "comm_pct_y_std", "comm_pct_y_iqr",
    "comm_pct_total", "pearson_r",
]
BARRIER_COLUMNS = [
    "nbarriers", "coop_x", "coop_y", "gm", "dnf", "mean_st_ms",
    "comm_pct_x", "comm_pct_y", "comm_pct_total",
]
CENSUS_CATEGORIES = ("unsolvable", "without_cooperation", "with_cooperation", "unresolved")

_RENAMES = {
    "dnf_count": "dnf",
    "comm_x_mean": "comm_pct_x",
    "comm_x_std": "comm_pct_x_std",
    "comm_x_iqr": "comm_pct_x_iqr",
    "comm_y_mean": "comm_pct_y",
    "comm_y_std": "comm_pct_y_std",
    "comm_y_iqr": "comm_pct_y_iqr",
}
_OPTIONAL_FLOATS = [
    "mean_st_ms", "median_st_ms", "st_std_ms", "gm", "gm_se",
    "gm_ci_low", "gm_ci_high", "pearson_r",
]


def summary_frame(summaries):
    rows = []
    for summary in summaries:
        row = {_RENAMES.get(k, k): v for k, v in asdict(summary).items()}
        row["comm_pct_total"] = summary.comm_pct_total
        rows.append(row)
    frame = pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
    return frame.astype({name: float for name in _OPTIONAL_FLOATS})


def emit_summary_csv(summaries):
    """Sweep summaries, one row per coop pair, in the order given."""
    return to_csv_text(summary_frame(summaries))


def emit_histogram_csv(histograms):
    """
    Args:
        histograms: dict of coop label -> list of (bin start ms, count)
    """
    rows = [
        {"coop": label, "bin_start_ms": start, "count": count}
        for label, bins in histograms.items()
        for start, count in bins
    ]
    return to_csv_text(pd.DataFrame(rows, columns=["coop", "bin_start_ms", "count"]))


def emit_barrier_csv(rows):
    records = [
        {
            "nbarriers": row.nbarriers,
            "coop_x": row.summary.coop_x,
            "coop_y": row.summary.coop_y,
            "gm": row.summary.gm,
            "dnf": row.summary.dnf_count,
            "mean_st_ms": row.summary.mean_st_ms,
            "comm_pct_x": row.summary.comm_x_mean,
            "comm_pct_y": row.summary.comm_y_mean,
            "comm_pct_total": row.summary.comm_pct_total,
        }
        for row in rows
    ]
    frame = pd.DataFrame(records, columns=BARRIER_COLUMNS)
    return to_csv_text(frame.astype({"gm": float, "mean_st_ms": float}))


def emit_census_csv(census):
    frame = pd.DataFrame(
        [
            {"category": name, "count": getattr(census, name), "fraction": census.fraction(name)}
            for name in CENSUS_CATEGORIES
        ],
        columns=["category", "count", "fraction"],
    )
    return to_csv_text(frame)
