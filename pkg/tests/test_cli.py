import csv
import json

import pytest

from clusterft import cli


def run(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_grid_syntax():
    g = cli.parse_grid("0.005:0.05:8log")
    assert len(g) == 8 and g[0] == pytest.approx(0.005) and g[-1] == pytest.approx(0.05)
    assert g[1] / g[0] == pytest.approx(g[2] / g[1])
    assert cli.parse_grid("0.01:0.03:3lin") == pytest.approx([0.01, 0.02, 0.03])
    assert cli.parse_grid("0.01,0.02") == [0.01, 0.02]
    with pytest.raises(cli.ConfigError):
        cli.parse_grid("0.01:0.02:xlog")


def test_resource_command(capsys):
    code, out, err = run(["resource", "--K", "100", "--Q", "1000", "--k", "6", "--q", "4",
                          "--f", "500", "--pv", "0.7", "--N", "10"], capsys)
    assert code == 0 and float(out.strip()) == pytest.approx(2.61e12, rel=1e-3)
    assert "52198" in err
    code, out, _ = run(["resource", "--K", "12", "--Q", "12", "--f", "500", "--pv", "0.7",
                        "--optimize"], capsys)
    assert code == 0 and out.startswith("k=1 q=1")


@pytest.mark.parametrize("args", [
    ["sweep", "--trials", "0"],
    ["sweep", "--pe", "0.02,0.01"],
    ["sweep", "--scenario", "iv"],
    ["sweep", "--threads", "many"],
    ["resource", "--K", "10", "--Q", "10", "--k", "1", "--q", "1", "--f", "5", "--pv", "0"],
    ["nonsense"],
])
def test_config_errors_exit_2(args, capsys):
    code, _, err = run(args, capsys)
    assert code == 2 and err


def test_bad_config_file(tmp_path, capsys):
    p = tmp_path / "cfg.json"
    p.write_text("{not json", encoding="utf-8")
    code, _, err = run(["sweep", "--config", str(p)], capsys)
    assert code == 2 and "cannot read config" in err
    p.write_text(json.dumps({"trails": 5}), encoding="utf-8")
    assert run(["sweep", "--config", str(p)], capsys)[0] == 2


def test_flags_override_config(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"scenario": "i", "trials": 7, "pe_grid": "0.01:0.02:2lin",
                             "seed": 3}), encoding="utf-8")
    args = cli.build_parser().parse_args(["sweep", "--config", str(p), "--trials", "9"])
    cfg = cli.config_from_args(args)
    assert cfg.scenario == "i" and cfg.trials == 9 and cfg.seed == 3
    assert cfg.pe_grid == pytest.approx([0.01, 0.02])


def _sweep(tmp_path, name, threads, extra=()):
    out = tmp_path / name
    code = cli.main(["sweep", "--scenario", "iii", "--pe", "0.01:0.04:3log", "--trials", "4096",
                     "--seed", "42", "--no-adaptive", "--pv-trials", "1000",
                     "--threads", str(threads), "--out", str(out), *extra])
    return code, out


def test_sweep_outputs(tmp_path, capsys):
    code, out = _sweep(tmp_path, "a", 1)
    assert code == 0
    text = (out / "sweep.csv").read_bytes()
    assert b"\r" not in text
    rows = list(csv.reader(text.decode().splitlines()))
    assert tuple(rows[0]) == cli.CSV_HEADER and len(rows) == 4
    summary = json.loads((out / "summary.json").read_text())
    assert summary["config"]["seed"] == 42 and summary["version"]
    assert "threshold" in summary and len(summary["points"]) == 3


def test_sweep_csv_is_thread_independent(tmp_path, capsys):
    _, a = _sweep(tmp_path, "a", 1)
    _, b = _sweep(tmp_path, "b", 2)
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()


def test_threshold_exit_codes(tmp_path, capsys):
    below = tmp_path / "below.csv"
    below.write_text(",".join(cli.CSV_HEADER) + "\n0.01,1,1,1,1,0.001,0,1\n0.02,1,1,1,1,0.004,0,1\n")
    assert run(["threshold", str(below)], capsys)[0] == 3
    cross = tmp_path / "cross.csv"
    cross.write_text(",".join(cli.CSV_HEADER) + "\n0.01,1,1,1,1,0.005,0,1\n0.05,1,1,1,1,0.08,0,1\n")
    code, out, _ = run(["threshold", str(cross)], capsys)
    assert code == 0 and float(out.split()[0]) == pytest.approx(0.026093, abs=1e-6)
    code, _ = _sweep(tmp_path, "c", 1, ("--pe", "0.002,0.003", "--threshold"))
    assert code == 3


def test_point_and_pvf(tmp_path, capsys):
    code, out, _ = run(["point", "--scenario", "i", "--pe", "0.01", "--trials", "2000",
                        "--no-adaptive", "--pv-trials", "0", "--out", str(tmp_path)], capsys)
    assert code == 0 and out.startswith("p_L = ")
    code, out, _ = run(["pvf", "--pe", "0.01", "--trials", "2000"], capsys)
    assert code == 0 and "p_v = " in out and "f = " in out


def test_selftest_quick(capsys):
    code, out, _ = run(["selftest", "--quick"], capsys)
    assert code == 0 and "FAIL" not in out and out.count("PASS") == 7
