import pandas as pd

RUN_COLUMNS = ["run", "solved", "st_ms", "comm_pct_x", "comm_pct_y", "seed"]
FLAG_FIELDS = ("collided_edge", "stuck", "access", "arrived")


def to_csv_text(frame):
    """Every CSV in this package: 6 significant digits, empty for missing, LF endings."""
    return frame.to_csv(index=False, float_format="%.6g", na_rep="", lineterminator="\n")


def _bool(value):
    return "true" if value else "false"


def run_frame(results):
    """One row per RunResult, in run order."""
    rows = [
        {
            "run": i,
            "solved": _bool(r.solved),
            "st_ms": r.st_ms,
            "comm_pct_x": float(r.comm_pct_x),
            "comm_pct_y": float(r.comm_pct_y),
            # uint64 seeds do not fit an int64 column
            "seed": str(r.seed),
        }
        for i, r in enumerate(results)
    ]
    frame = pd.DataFrame(rows, columns=RUN_COLUMNS)
    frame["st_ms"] = frame["st_ms"].astype("Int64")
    return frame


def emit_run_csv(results):
    return to_csv_text(run_frame(results))


def emit_trace_csv(result):
    """
    Per-tick telemetry of a traced run.

    Columns: tick, x, y, directive_x, directive_y, then the flags of each
    agent (collided_edge, stuck, access, arrived), then comm_x, comm_y.
    """
    if result.trace is None:
        raise ValueError("run was not traced")
    rows = []
    for row in result.trace:
        record = {
            "tick": row.tick,
            "x": row.x,
            "y": row.y,
            "directive_x": row.directive_x,
            "directive_y": row.directive_y,
        }
        for suffix, flags in (("x", row.flags_x), ("y", row.flags_y)):
            for name in FLAG_FIELDS:
                record[f"{name}_{suffix}"] = _bool(getattr(flags, name))
        record["comm_x"] = _bool(row.comm_x)
        record["comm_y"] = _bool(row.comm_y)
        rows.append(record)
    columns = ["tick", "x", "y", "directive_x", "directive_y"]
    columns += [f"{name}_{suffix}" for suffix in ("x", "y") for name in FLAG_FIELDS]
    columns += ["comm_x", "comm_y"]
    return to_csv_text(pd.DataFrame(rows, columns=columns))


def emit_oracle_csv(labels):
    """
    Args:
        labels: list of (nbarriers, solvable) per generated world, in run order
    """
    frame = pd.DataFrame(
        [{"run": i, "nbarriers": n, "solvable": _bool(ok)} for i, (n, ok) in enumerate(labels)],
        columns=["run", "nbarriers", "solvable"],
    )
    return to_csv_text(frame)
