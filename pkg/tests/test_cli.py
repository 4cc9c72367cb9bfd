"""CLI contract: formats, precedence, determinism, and exit codes."""

import csv
import json
import math

import numpy as np
import pytest

from noisyqec import analytics
from noisyqec.cli import CSV_HEADER, TOPT_HEADER, main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_csv_header_and_values(tmp_path):
    out = tmp_path / "run.csv"
    rc = main(["run", "--code", "3bit", "--kappa", "1e-3,2e-3",
               "--T", "40,60", "--output", str(out)])
    assert rc == 0
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert "\r" not in text
    rows = read_csv(str(out))
    assert len(rows) == 4
    assert [(r["kappa"], r["T"]) for r in rows] == [
        ("0.001", "40"), ("0.001", "60"), ("0.002", "40"), ("0.002", "60")]
    for r in rows:
        assert 0.0 <= float(r["m_nec"]) <= 1.0
        assert 0.0 <= float(r["m_ec"]) <= 1.0
        assert r["stderr"] == ""  # master method is deterministic


def test_json_and_csv_agree(tmp_path):
    args = ["run", "--code", "3bit", "--kappa", "1.5e-3", "--T", "45"]
    out_csv, out_json = tmp_path / "a.csv", tmp_path / "a.json"
    assert main(args + ["--output", str(out_csv)]) == 0
    assert main(args + ["--format", "json", "--output", str(out_json)]) == 0
    row = read_csv(str(out_csv))[0]
    rec = json.loads(out_json.read_text())["records"][0]
    for field in CSV_HEADER:
        if row[field] == "":
            assert rec[field] is None
        else:
            # 17 significant digits: text round-trips to the exact float
            assert float(row[field]) == rec[field]


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["run", "--code", "3bit", "--kappa", "1e-3", "--T", "40"]
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_zero_kappa_log_fields_empty(tmp_path):
    out = tmp_path / "zero.csv"
    assert main(["run", "--code", "3bit", "--kappa", "0",
                 "--T", "30", "--output", str(out)]) == 0
    row = read_csv(str(out))[0]
    assert row["log_ratio"] == "" and row["log_ratio_analytic"] == ""
    out_json = tmp_path / "zero.json"
    assert main(["run", "--code", "3bit", "--kappa", "0", "--T", "30",
                 "--format", "json", "--output", str(out_json)]) == 0
    rec = json.loads(out_json.read_text())["records"][0]
    assert rec["log_ratio"] is None


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        "# experiment configuration\n"
        "code = 3bit\n"
        "kappa = 5e-3\n"
        "T = 40\n"
    )
    out = tmp_path / "out.csv"
    assert main(["run", "--config", str(cfg), "--T", "60",
                 "--output", str(out)]) == 0
    rows = read_csv(str(out))
    assert len(rows) == 1
    assert float(rows[0]["kappa"]) == 5e-3 and float(rows[0]["T"]) == 60.0


def test_usage_errors_exit_2(tmp_path, capsys):
    bad_cfg = tmp_path / "bad.cfg"
    bad_cfg.write_text("kapa = 1e-3\n")
    assert main(["run", "--config", str(bad_cfg)]) == 2
    assert main(["run", "--kappa-log", "1e-3:1e-2"]) == 2  # needs MIN:MAX:COUNT
    assert main(["run", "--kappa", "1e-3", "--kappa-log", "1e-3:1e-2:3"]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert main(["analytic", "--n", "5", "--T", "100", "--Delta", "20"]) == 2
    assert main(["analytic", "--n", "4", "--kappa", "1e-3",
                 "--T", "100", "--Delta", "20"]) == 2
    capsys.readouterr()


def test_numerical_failure_exit_3(capsys):
    with np.errstate(over="ignore", invalid="ignore"):
        assert main(["run", "--code", "3bit", "--kappa", "300", "--T", "50"]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_sweep_topt_sidecar(tmp_path):
    out = tmp_path / "grid.csv"
    assert main(["sweep", "--code", "3bit", "--kappa", "1e-3,2e-3",
                 "--T", "30,40,50", "--output", str(out)]) == 0
    rows = read_csv(str(out))
    assert len(rows) == 6
    side = tmp_path / "grid_topt.csv"
    assert side.exists()
    text = side.read_text()
    assert text.splitlines()[0] == ",".join(TOPT_HEADER)
    topt = read_csv(str(side))
    assert len(topt) == 2
    expect = analytics.t_opt(3, 2e-3, 10.0)
    assert abs(float(topt[0]["t_opt"]) - expect) < 1e-12
    assert float(topt[0]["T_argmax_R"]) in (30.0, 40.0, 50.0)


def test_sweep_json_topt_curve(tmp_path):
    out = tmp_path / "grid.json"
    assert main(["sweep", "--code", "3bit", "--kappa", "1e-3", "--T", "30,40",
                 "--format", "json", "--output", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert len(payload["records"]) == 2
    assert len(payload["t_opt_curve"]) == 1
    assert set(payload["t_opt_curve"][0]) == set(TOPT_HEADER)


def test_thread_count_invisible_in_output(tmp_path, monkeypatch):
    args = ["run", "--code", "3bit", "--method", "qsd",
            "--n-trajectories", "80", "--kappa", "1e-3", "--T", "30"]
    a, b = tmp_path / "t1.csv", tmp_path / "t4.csv"
    monkeypatch.setenv("NOISYQEC_THREADS", "1")
    assert main(args + ["--output", str(a)]) == 0
    monkeypatch.setenv("NOISYQEC_THREADS", "4")
    assert main(args + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert float(read_csv(str(a))[0]["stderr"]) > 0.0


def test_master_grid_threading_deterministic(tmp_path, monkeypatch):
    args = ["sweep", "--code", "3bit", "--kappa", "1e-3,3e-3",
            "--T", "30,40,50"]
    a, b = tmp_path / "m1.csv", tmp_path / "m4.csv"
    monkeypatch.setenv("NOISYQEC_THREADS", "1")
    assert main(args + ["--output", str(a)]) == 0
    monkeypatch.setenv("NOISYQEC_THREADS", "4")
    assert main(args + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_single_qubit_benchmark(tmp_path):
    out = tmp_path / "sq.csv"
    assert main(["run", "--code", "5bit", "--single-qubit", "--kappa", "1e-3",
                 "--T", "50", "--output", str(out)]) == 0
    row = read_csv(str(out))[0]
    assert row["m_ec"] == "" and row["m_analytic"] == ""
    expect = 0.5 * (1.0 - math.exp(-4.0 * 1e-3 * 50.0))
    assert abs(float(row["m_nec"]) - expect) < 1e-9


def test_delta_flag_changes_only_closed_forms(tmp_path):
    base, shifted = tmp_path / "b.csv", tmp_path / "s.csv"
    args = ["run", "--code", "5bit", "--kappa", "1e-3", "--T", "60"]
    assert main(args + ["--output", str(base)]) == 0
    assert main(args + ["--Delta", "40", "--output", str(shifted)]) == 0
    r0, r1 = read_csv(str(base))[0], read_csv(str(shifted))[0]
    assert r0["m_ec"] == r1["m_ec"]
    assert r0["m_nec"] == r1["m_nec"]
    assert r0["m_analytic"] != r1["m_analytic"]


def test_analytic_subcommand(tmp_path):
    out = tmp_path / "a.csv"
    assert main(["analytic", "--n", "5", "--kappa", "1e-3",
                 "--T", "100", "--Delta", "20", "--output", str(out)]) == 0
    table = {r["quantity"]: float(r["value"]) for r in read_csv(str(out))}
    assert abs(table["t_opt"] - 50.0) < 1e-12
    assert abs(table["n_opt"] - 2.0) < 1e-12
    assert abs(table["kappa_n"] - 4e-3) < 1e-18
    assert "failure_at_n_opt" in table
    out2 = tmp_path / "c.csv"
    assert main(["analytic", "--n", "3", "--crossover",
                 "--output", str(out2)]) == 0
    table = {r["quantity"]: float(r["value"]) for r in read_csv(str(out2))}
    assert abs(table["crossover_kT"] - math.log(2.0)) < 1e-9


def test_derive_table_lists_all_syndromes(capsys):
    assert main(["derive-table", "--code", "5bit"]) == 0
    out = capsys.readouterr().out
    lines = [ln for ln in out.strip().splitlines() if ln]
    assert len(lines) == 17  # header + 16 outcomes
    assert any("1111" in ln and "y" in ln for ln in lines)
    assert main(["derive-table", "--code", "3bit"]) == 0
    out = capsys.readouterr().out
    assert len([ln for ln in out.strip().splitlines() if ln]) == 5


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert out.count("PASS") >= 10
