import csv
import io
import json
import subprocess
import sys

import jsonschema
import pytest

from degenflow.cli import SCHEMA_PATH, Config, load_config, parse_grid, run

SCHEMA = json.loads(SCHEMA_PATH.read_text())
SMALL = ["--kmax", "4", "--count", "2", "--mgrid", "32"]


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_norm_example():
    code, out, _ = call("norm", "--family", "separable", "--k", "1", "--beta", "1", "--s", "0.75", "--gamma", "0")
    assert code == 0
    assert float(out.split()[1]) == pytest.approx(3.0, abs=1e-6)


def test_toy_example():
    code, out, _ = call("toy", "--branch", "(m-0.5)^2", "--lambda", "0.0625")
    assert code == 0 and out.strip() == "4.0"


def test_toy_critical_exit():
    code, _, err = call("toy", "--branch", "(m-0.5)^2", "--lambda", "0")
    assert code == 2 and "critical value" in err and "E'(0.5)" in err


@pytest.mark.parametrize("argv", [["rate", "--bogus"], ["frobnicate"], ["toy", "--lambda", "0.1", "extra"]])
def test_unknown_flag_exit(argv):
    code, _, err = call(*argv)
    assert code == 64 and "usage" in err


@pytest.mark.parametrize("argv", [
    ["rate", "--s", "0.4"],
    ["rate", "--alpha", "2", "--gamma", "0"],
    ["rate", "--T", "1:2"],
    ["dos", "--lambda", "1.5"] + SMALL,
    ["norm", "--kmax", "x"],
])
def test_parameter_errors(argv):
    assert call(*argv)[0] == 2


def test_rate_outputs(tmp_path):
    stem = tmp_path / "rate.csv"
    code, out, _ = call("rate", "--alpha", "1", "--s", "0.75", "--gamma", "0", "--T", "1:1e4:25", "--seed", "7",
                        "--out", str(stem), "--gnuplot", "--plot", *SMALL)
    assert code == 0 and "one-sided" in out
    rows = list(csv.reader(stem.open()))
    assert rows[0] == ["T", "sup_error", "predicted_envelope"] and len(rows) == 26
    doc = json.loads((tmp_path / "rate.json").read_text())
    jsonschema.validate(doc, SCHEMA)
    assert doc["results"]["envelope_check"]["passed"]
    assert Config.from_dict(doc["config"]) == load_config(["rate", "--T", "1:1e4:25", "--out", str(stem),
                                                          "--gnuplot", "--plot", *SMALL])
    assert "logscale" in (tmp_path / "rate.gp").read_text()
    assert (tmp_path / "rate.png").stat().st_size > 0


def test_seed_determines_output(tmp_path):
    docs = []
    for name in ("a", "b"):
        call("dos", "--lambda", "0.2:0.6:3", "--seed", "5", "--out", str(tmp_path / name), *SMALL)
        docs.append(json.loads((tmp_path / f"{name}.json").read_text()))
    assert docs[0]["results"] == docs[1]["results"]
    call("dos", "--lambda", "0.2:0.6:3", "--seed", "6", "--out", str(tmp_path / "c"), *SMALL)
    assert json.loads((tmp_path / "c.json").read_text())["results"] != docs[0]["results"]


def test_dos_with_oracle(tmp_path):
    code, out, _ = call("dos", "--lambda", "0.1:0.9:5", "--oracle", "--out", str(tmp_path / "d"), *SMALL)
    assert code == 0
    doc = json.loads((tmp_path / "d.json").read_text())
    jsonschema.validate(doc, SCHEMA)
    for rec in doc["records"]:
        s, o = rec["value"], rec["oracle_value"]
        assert abs(s["re"] - o["re"]) < 1e-8


def test_spectrum_exact():
    code, out, _ = call("spectrum", "--tabulated", "1/2:1/2,1:1", "--kmax", "2")
    assert code == 0 and "gap at zero: (0, 1/2)" in out
    code, out, _ = call("spectrum", "--alpha", "1", "--kmax", "3")
    assert "band [-3.0, 3.0]" in out and "none" in out


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# test\nalpha = 2\ns = 0.8   # trailing\nkmax = 5\nlambda = 0.3\n\n", encoding="utf-8")
    c = load_config(["dos", "--config", str(cfg), "--kmax", "7"])
    assert (c.kind, c.alpha, c.s, c.kmax, c.lam) == ("dos", 2.0, 0.8, 7, "0.3")
    cfg.write_text("nonsense = 1\n")
    assert call("dos", "--config", str(cfg))[0] == 2


def test_grid_syntax():
    assert parse_grid("1:1e4:5", True).tolist() == pytest.approx([1, 10, 100, 1000, 10000])
    assert parse_grid("0.1:0.9:9", False)[4] == pytest.approx(0.5)
    assert parse_grid("0.2,0.4", False).tolist() == [0.2, 0.4]


def test_sweep(tmp_path):
    code, out, _ = call("sweep", "--alphas", "0.5,2", "--T", "10:1e3:5", "--out", str(tmp_path / "sw"), *SMALL)
    assert code == 0 and out.count("PASS") == 2
    jsonschema.validate(json.loads((tmp_path / "sw.json").read_text()), SCHEMA)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "degenflow", "toy", "--lambda", "0.0625"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "4.0"
