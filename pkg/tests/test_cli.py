import csv
import io
import json
import math

import numpy as np
import pytest

from hbvm import build_rk, import_tableau
from hbvm.cli import fmt, get_problem, parse_and_dispatch, run_order_study, run_rkn_equiv
from hbvm.legendre import UnsupportedTruncationError


def run(capsys, *argv):
    code = parse_and_dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_fmt_shortest_roundtrip():
    assert fmt(0.1) == "0.1"
    assert float(fmt(1 / 3)) == 1 / 3
    assert fmt(math.nan) == "NA"


def test_tableau_json_stdout(capsys):
    code, out, _ = run(capsys, "tableau", "--k", "3", "--s", "2", "--family", "rk", "--format", "json")
    assert code == 0
    assert import_tableau(out.encode(), "json") == build_rk(3, 2)


@pytest.mark.parametrize("family", ["rk", "rkn", "lowrank"])
def test_tableau_csv_directory(tmp_path, capsys, family):
    out = tmp_path / "tab"
    code, _, _ = run(capsys, "tableau", "--k", "4", "--s", "2", "--family", family,
                     "--format", "csv", "--out", str(out))
    assert code == 0
    files = {p.name: p.read_bytes() for p in out.iterdir()}
    assert {"meta.csv", "c.csv", "b.csv"} <= set(files)
    again = tmp_path / "tab2"
    run(capsys, "tableau", "--k", "4", "--s", "2", "--family", family,
        "--format", "csv", "--out", str(again))
    assert files == {p.name: p.read_bytes() for p in again.iterdir()}


@pytest.mark.parametrize("command", ["tableau", "integrate", "order-study", "drift-study", "rkn-equiv"])
def test_k_below_s_is_usage_error(capsys, command):
    code, out, err = run(capsys, command, "--k", "1", "--s", "2")
    assert code == 1
    assert out == ""
    assert "k >= s required" in err and "--k" in err


def test_bad_flag_values(capsys):
    assert run(capsys, "integrate", "--k", "2", "--s", "2", "--h", "-1")[0] == 1
    assert run(capsys, "integrate", "--k", "2", "--s", "2", "--problem", "kepler:1.5")[0] == 1
    code, _, err = run(capsys, "order-study", "--k", "2", "--s", "2", "--h-list", "0.1,0.2,0.3,0.4")
    assert code == 1 and "--h-list" in err
    code, _, err = run(capsys, "order-study", "--k", "2", "--s", "2", "--h-list", "0.1,x")
    assert code == 1 and "--h-list" in err
    code, _, err = run(capsys, "bogus")
    assert code == 1 and "invalid choice" in err
    assert run(capsys, "tableau", "--help")[0] == 0


def test_numerical_failure_exit_code(capsys):
    code, out, err = run(capsys, "integrate", "--problem", "polyosc:10", "--k", "2", "--s", "2",
                         "--h", "3", "--steps", "5")
    assert code == 2
    assert "numerical failure" in err


def test_drift_study_writes_csv(tmp_path, capsys):
    out = tmp_path / "drift.csv"
    code, _, _ = run(capsys, "drift-study", "--problem", "polyosc:4", "--k", "4", "--s", "2",
                     "--h", "0.1", "--steps", "1000", "--out", str(out))
    assert code == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["step", "time", "H", "drift"]
    assert len(rows) == 1002
    assert max(abs(float(r[3])) for r in rows[1:]) <= 1e-10


def test_outputs_are_deterministic(tmp_path, capsys):
    argv = ["integrate", "--problem", "kepler:0.3", "--k", "3", "--s", "2", "--h", "0.05",
            "--steps", "50"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert parse_and_dispatch(argv + ["--out", str(a)]) == 0
    assert parse_and_dispatch(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_integrate_json(capsys):
    code, out, _ = run(capsys, "integrate", "--problem", "harmonic", "--k", "2", "--s", "2",
                       "--h", "0.1", "--steps", "10", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert len(data["times"]) == 11
    assert abs(data["q"][-1][0] - math.cos(1.0)) < 1e-6


def test_order_study_harmonic_midpoint():
    rows = run_order_study(get_problem("harmonic"), 1, 1, [0.2, 0.1, 0.05, 0.025])
    assert all(1.75 <= r[2] <= 2.25 for r in rows[:-1])
    assert math.isnan(rows[-1][2])


def test_order_study_pendulum_gauss2():
    rows = run_order_study(get_problem("pendulum"), 2, 2, [0.2, 0.1, 0.05, 0.025])
    assert all(abs(r[2] - 4) <= 0.25 for r in rows[:-1])


def test_order_study_free_reports_na(capsys):
    code, out, _ = run(capsys, "order-study", "--problem", "free", "--k", "2", "--s", "1",
                       "--h-list", "0.2,0.1,0.05,0.025")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["h", "error", "order"]
    assert all(float(r[1]) == 0.0 and r[2] == "NA" for r in rows[1:])


def test_rkn_equiv_kepler_and_free(capsys):
    rep = run_rkn_equiv(get_problem("kepler:0.3"), 2, 3, 0.05, 100)
    assert rep["max_q_deviation"] <= 1e-10 and rep["max_p_deviation"] <= 1e-10
    rep = run_rkn_equiv(get_problem("free"), 2, 3, 0.1, 20)
    assert rep["max_q_deviation"] == 0.0 and rep["max_p_deviation"] == 0.0


def test_rkn_equiv_rejects_s1(capsys):
    with pytest.raises(UnsupportedTruncationError, match="s >= 2"):
        run_rkn_equiv(get_problem("harmonic"), 1, 2, 0.1, 10)
    code, _, err = run(capsys, "rkn-equiv", "--k", "2", "--s", "1")
    assert code == 1 and "--s" in err and "s >= 2" in err


def test_harmonic_drift_any_ks():
    from hbvm.cli import run_drift_study
    for k, s in [(1, 1), (3, 1), (2, 2), (5, 3)]:
        rows = run_drift_study(get_problem("harmonic"), s, k, 0.1, 100)
        assert max(abs(r[3]) for r in rows) <= 1e-12
