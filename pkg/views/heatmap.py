import pandas as pd

from utils.agent import all_levels
from utils.errors import StructuralError
from views.runs import to_csv_text

HEATMAP_COLUMNS = ["coop_x", "coop_y", "gm", "dnf", "mean_st_ms", "comm_pct_total"]
GRID_VALUES = HEATMAP_COLUMNS[2:]


def _index_cells(summaries):
    cells = {}
    for summary in summaries:
        key = (summary.coop_x, summary.coop_y)
        if key in cells:
            raise StructuralError(f"duplicate heatmap cell {key[0]}+{key[1]}")
        cells[key] = summary
    return cells


def heatmap_frame(summaries):
    """
    The 16x16 grid as rows, coop_y the outer and coop_x the inner loop,
    both in cooperation-index order.

    Raises:
        StructuralError: a cell is missing or repeated
    """
    cells = _index_cells(summaries)
    levels = [str(level) for level in all_levels()]
    rows = []
    for cy in levels:
        for cx in levels:
            summary = cells.pop((cx, cy), None)
            if summary is None:
                raise StructuralError(f"heatmap cell {cx}+{cy} missing")
            rows.append({
                "coop_x": cx,
                "coop_y": cy,
                "gm": summary.gm,
                "dnf": summary.dnf_count,
                "mean_st_ms": summary.mean_st_ms,
                "comm_pct_total": summary.comm_pct_total,
            })
    if cells:
        extra = ", ".join(f"{cx}+{cy}" for cx, cy in cells)
        raise StructuralError(f"cells outside the 16x16 grid: {extra}")
    frame = pd.DataFrame(rows, columns=HEATMAP_COLUMNS)
    return frame.astype({"gm": float, "mean_st_ms": float})


def emit_heatmap(summaries):
    return to_csv_text(heatmap_frame(summaries))


def gm_grid(summaries, value="gm"):
    """Pivot of one heatmap column: rows coop_y, columns coop_x, index order kept."""
    frame = heatmap_frame(summaries)
    levels = [str(level) for level in all_levels()]
    grid = frame.pivot(index="coop_y", columns="coop_x", values=value)
    return grid.reindex(index=levels, columns=levels)


def emit_grid(summaries, value="gm"):
    """The pivot as CSV: a coop_y column, then one column per coop_x."""
    grid = gm_grid(summaries, value).rename_axis(index="coop_y", columns=None)
    return to_csv_text(grid.reset_index())
