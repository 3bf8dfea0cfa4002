import csv
import json
import subprocess
import sys

import pytest

from oraclegame.harness.cli import main


def test_price_record(capsys):
    assert main(["price", "--k", "10", "--alpha", "0.5"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["P"] == pytest.approx(3.4375)
    assert rec["delta"] == pytest.approx(0.65625)
    assert rec["alpha_eff"] == pytest.approx(215 / 231)


def test_price_rejects_bad_weight(capsys):
    assert main(["price", "--k", "10", "--alpha", "1.5"]) == 2
    assert "error" in capsys.readouterr().err


def test_run_writes_csv(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tasks": 12, "N": 20}))
    out = tmp_path / "m.csv"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--seed", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["rows"] == 12
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 12 and rows[0]["task"] == "0"


def test_run_bad_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lam": 2}))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "x.csv")]) == 2


def test_sweep_to_stdout(capsys):
    assert main(["sweep", "--axis", "M", "--values", "3,5", "--seeds", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("axis,value")
    assert len(lines) == 5


def test_payoffs_file(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["payoffs", "--trials", "4", "--seeds", "2", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 5


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "oraclegame", "price", "--k", "1", "--alpha", "1"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(res.stdout)["P"] == pytest.approx(1.0)
