import csv
import json
import math
import subprocess
import sys

import pytest

from robinweyl.cli import run


def test_oned_prints_ground_energy(capsys):
    assert run(["oned", "--T", "10"]) == 0
    line = capsys.readouterr().out.strip()
    value = float(line.split("lambda_1=")[1])
    assert value == pytest.approx(-1 + 4 * math.exp(-20), abs=1e-12)


def test_theorem2_csv(tmp_path, capsys):
    out = tmp_path / "t2.csv"
    code = run(["theorem2", "--curve", "circle", "--R", "1", "--h-grid", "1e-2,1e-3,1e-4", "--output", str(out)])
    assert code == 0
    assert "PASS" in capsys.readouterr().out
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == ["h", "N_full", "N_effective", "weyl", "ratio1", "ratio2"]
    assert abs(float(rows[-1]["ratio1"]) - 1) <= 0.10
    assert rows[-1]["N_effective"] == "201"
    assert (tmp_path / "t2.json").exists()


def test_disk_json_to_stdout(capsys):
    assert run(["disk", "--R", "1", "--h", "0.01", "--ceiling", "0", "--format", "json"]) == 0
    captured = capsys.readouterr()
    data = json.loads(captured.out)
    assert len(data["eigenvalues"]) == 21
    assert data["meta"]["operator"] == "robin_disk"
    assert captured.err.startswith("disk R=1")


def test_out_of_range_exits_2(capsys):
    assert run(["disk", "--h", "1.5"]) == 2
    assert run(["oned", "--T", "0.5"]) == 2
    assert run(["tube", "--curve", "ellipse", "--h", "0.05", "--delta", "0.5"]) == 2
    assert run(["theorem2", "--h-grid", "1e-3,1e-2"]) == 2
    assert run(["disk", "--ceiling", "0.5"]) == 2


def test_usage_errors_print_subcommand_help(capsys):
    assert run(["disk", "--bogus", "1"]) == 2
    err = capsys.readouterr().err
    assert "usage:" in err and "disk" in err and "--ceiling" in err
    assert run([]) == 2
    assert run(["nonsense"]) == 2


def test_config_merge_and_strictness(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"R": 2.0, "h": 0.5}))
    assert run(["disk", "--config", str(cfg), "--h", "0.1"]) == 0
    assert "R=2 h=0.1" in capsys.readouterr().out  # flags win over the file
    cfg.write_text(json.dumps({"R": 2.0, "colour": "blue"}))
    assert run(["disk", "--config", str(cfg)]) == 2
    cfg.write_text(json.dumps({"R": "wide"}))
    assert run(["disk", "--config", str(cfg)]) == 2


def test_failed_experiment_exits_1(capsys):
    code = run(["sandwich", "--h-grid", "0.1,0.05", "--C-plus", "0", "--C-minus", "0"])
    assert code == 1
    assert "FAIL" in capsys.readouterr().out


def test_deterministic_outputs(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert run(["effective", "--curve", "ellipse", "--h", "0.01", "--output", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_other_subcommands(tmp_path, capsys):
    assert run(["geometry", "--curve", "star", "--R", "1", "--eps", "0.1", "--k", "3", "--format", "csv", "--output", str(tmp_path / "g.csv")]) == 0
    assert (tmp_path / "g.csv").read_text().startswith("theta,x,y,kappa")
    assert run(["tube", "--h", "0.05", "--delta", "0.5", "--n-eigs", "3"]) == 0
    efn = tmp_path / "u.csv"
    assert run(["fem", "--h", "0.1", "--n-eigs", "2", "--eigenfunction-csv", str(efn)]) == 0
    assert efn.read_text().startswith("x,y,value")
    assert run(["theorem1", "--E", "1", "--h-grid", "1e-2,1e-3,1e-4", "--threads", "2"]) == 0
    assert run(["bracketing", "--h-grid", "0.05", "--delta", "0.3,0.5,0.8"]) == 0
    out = capsys.readouterr().out
    assert "theorem1 PASS" in out and "bracketing PASS" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "robinweyl", "oned", "--T", "5"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("oned T=5")
