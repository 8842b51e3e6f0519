"""Plain-text result files: CSV for grids and bound curves, JSON for simulation results."""

import csv
import dataclasses
import io
import json
from pathlib import Path
from typing import Iterable, Union

from perm_converse.services.bounds import BoundCurve
from perm_converse.services.channel_sim import SimResult
from perm_converse.services.simplex_covering import GridK
from perm_converse.utils import fmt_float

PathLike = Union[str, Path]

CURVE_HEADER = ("kind", "n", "log_m_upper_bits", "rate_upper")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def format_grid_csv(grid: GridK) -> str:
    header = ["index"] + [f"coord_{j + 1}" for j in range(grid.dim)]
    rows = ([str(i)] + [fmt_float(v) for v in row] for i, row in enumerate(grid.points))
    return _csv_text(header, rows)


def format_curves_csv(curves: Iterable[BoundCurve]) -> str:
    """One row per (kind, n), sorted by kind then n."""
    rows = sorted(
        ((curve.kind.value, pt.n, pt.log_m_upper, pt.rate_upper) for curve in curves for pt in curve.points),
        key=lambda r: (r[0], r[1]),
    )
    return _csv_text(CURVE_HEADER, ([k, str(n), fmt_float(lm), fmt_float(r)] for k, n, lm, r in rows))


def format_sim_json(result: SimResult) -> str:
    return json.dumps(dataclasses.asdict(result), indent=2) + "\n"


def _write(path: PathLike, text: str) -> Path:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    return p


def write_grid_csv(grid: GridK, path: PathLike) -> Path:
    return _write(path, format_grid_csv(grid))


def write_curves_csv(curves: Iterable[BoundCurve], path: PathLike) -> Path:
    return _write(path, format_curves_csv(curves))


def write_sim_json(result: SimResult, path: PathLike) -> Path:
    return _write(path, format_sim_json(result))
