"""Tests for CSV / JSON artifact formatting."""

import json

from perm_converse.services.bounds import BoundCurve, BoundKind, CurvePoint
from perm_converse.services.channel_sim import SimResult
from perm_converse.services.export import (
    format_curves_csv,
    format_grid_csv,
    format_sim_json,
    write_curves_csv,
    write_grid_csv,
    write_sim_json,
)
from perm_converse.services.simplex_covering import lambda_1d, lambda_2d, lambda_k


def test_grid_csv_layout():
    text = format_grid_csv(lambda_2d(1.0))
    assert text.splitlines() == ["index,coord_1,coord_2", "0,0,1", "1,0.5,0.5", "2,1,0"]


def test_grid_csv_is_full_precision():
    grid = lambda_2d(0.04)
    rows = format_grid_csv(grid).splitlines()[1:]
    parsed = [float(r.split(",")[1]) for r in rows]
    assert parsed == list(lambda_1d(0.04).points)


def test_grid_csv_header_for_k3():
    assert format_grid_csv(lambda_k(3, 0.3)).splitlines()[0] == "index,coord_1,coord_2,coord_3"


def test_curves_csv_sorted_by_kind_then_n():
    curves = [
        BoundCurve(BoundKind.THIRD_ORDER, (CurvePoint.from_log_m(2000, 5.0), CurvePoint.from_log_m(1000, 4.0))),
        BoundCurve(BoundKind.EXACT, (CurvePoint.from_log_m(1000, 4.5),)),
    ]
    lines = format_curves_csv(curves).splitlines()
    assert lines[0] == "kind,n,log_m_upper_bits,rate_upper"
    assert [tuple(line.split(",")[:2]) for line in lines[1:]] == [("exact", "1000"), ("third_order", "1000"),
                                                            ("third_order", "2000")]
    assert float(lines[1].split(",")[2]) == 4.5


def test_sim_json_fields():
    result = SimResult(trials=10, errors=1, p_e_hat=0.1, ci95_halfwidth=0.18, seed=3)
    data = json.loads(format_sim_json(result))
    assert set(data) == {"trials", "errors", "p_e_hat", "ci95_halfwidth", "seed"}
    assert data["p_e_hat"] == 0.1


def test_writers_create_identical_files(tmp_path):
    grid = lambda_2d(0.01)
    a = write_grid_csv(grid, tmp_path / "a" / "grid.csv")
    b = write_grid_csv(grid, tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()
    curves = [BoundCurve(BoundKind.EXACT, (CurvePoint.from_log_m(1000, 4.5),))]
    assert write_curves_csv(curves, tmp_path / "c.csv").read_text(encoding="utf-8").endswith("\n")
    result = SimResult(trials=10, errors=0, p_e_hat=0.0, ci95_halfwidth=0.0, seed=1)
    assert json.loads(write_sim_json(result, tmp_path / "s.json").read_text(encoding="utf-8"))["seed"] == 1
