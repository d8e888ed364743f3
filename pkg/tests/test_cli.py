import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qgs.cli import run

from conftest import DATA


def graph(name):
    return str(DATA / f"{name}.json")


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_spectrum_interval(capsys):
    assert run(["spectrum", "--graph", graph("interval"), "--N", "5"]) == 0
    out = rows(capsys.readouterr().out)
    lam = np.array([float(r["lambda"]) for r in out])
    assert np.allclose(lam, (np.arange(5) * math.pi) ** 2, rtol=1e-12, atol=1e-12)


def test_mean_gaps_star2(tmp_path, capsys):
    out = tmp_path / "mg.csv"
    assert run(["mean-gaps", "--graph", graph("star2"), "--N", "400", "--out", str(out)]) == 0
    table = rows(out.read_text())
    assert len(table) == 400 and float(table[-1]["limit"]) == 0.5
    assert abs(float(table[-1]["empirical"]) - 0.5) <= 0.02 * 0.5
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["verdict"] == "PASS" and summary["N"] == 400


def test_fail_exit_code(capsys):
    assert run(["mean-gaps", "--graph", graph("star2"), "--N", "50", "--tol", "1e-9"]) == 2
    assert "FAIL" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--graph", "missing.json", "--N", "3"],
        ["spectrum", "--graph", graph("interval"), "--N", "0"],
        ["gaps", "--graph", graph("interval"), "--N", "3", "--sigma", "nowhere=1"],
        ["gaps", "--graph", graph("interval"), "--N", "3", "--sigma", "v0"],
        ["heat", "--graph", graph("interval"), "--point", "e1:5", "--t", "0.1"],
    ],
)
def test_input_errors_exit_one(argv, capsys):
    assert run(argv) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_malformed_graph(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"vertices": ["a"], "edges": []}')
    assert run(["spectrum", "--graph", str(p), "--N", "2"]) == 1


def test_sigma_override_and_dirichlet(capsys):
    assert run(["spectrum", "--graph", graph("interval"), "--N", "3", "--sigma", "v0=dirichlet", "--sigma", "v1=dirichlet"]) == 0
    lam = [float(r["lambda"]) for r in rows(capsys.readouterr().out)]
    assert np.allclose(lam, (np.arange(1, 4) * math.pi) ** 2, rtol=1e-12)


def test_star_oracle_matches_spectrum(capsys):
    assert run(["star-oracle", "--l", "1", "--sigma", "1", "--N", "50"]) == 0
    oracle = [float(r["lambda"]) for r in rows(capsys.readouterr().out)]
    assert run(["spectrum", "--graph", graph("star2"), "--N", "50"]) == 0
    sec = [float(r["lambda"]) for r in rows(capsys.readouterr().out)]
    assert np.allclose(oracle, sec, rtol=1e-10, atol=1e-8)


@pytest.mark.parametrize(
    "argv",
    [
        ["gaps", "--graph", graph("lasso"), "--N", "40"],
        ["local-weyl", "--graph", graph("star3"), "--N", "60", "--point", "c"],
        ["weyl", "--graph", graph("figure_eight"), "--Lambda", "2000"],
        ["heat", "--graph", graph("interval"), "--point", "v0", "--t", "0.001", "--t", "0.01"],
        ["dominate", "--graph", graph("robin_interval"), "--point", "e1:0.2", "--t", "0.1"],
        ["supnorm", "--graph", graph("star2"), "--N", "30"],
        ["cesaro", "--graph", graph("loop"), "--N", "40"],
        ["fh-check", "--graph", graph("robin_interval"), "--N", "3"],
        ["circumference", "--graph", graph("lasso"), "--eps", "0.5"],
    ],
)
def test_commands_deterministic(argv, capsys):
    first = run(argv)
    a = capsys.readouterr().out
    assert first in (0, 2)
    assert run(argv) == first
    assert capsys.readouterr().out == a and a


def test_repeated_files_identical(tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"o{i}.csv"
        assert run(["cesaro", "--graph", graph("star3"), "--N", "80", "--point", "e1:0.5", "--out", str(p), "--seed", "7"]) == 0
        outs.append((p.read_bytes(), p.with_suffix(".json").read_bytes()))
    assert outs[0] == outs[1]


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "qgs.cli", "weyl", "--graph", graph("interval"), "--Lambda", "100"], capture_output=True, text=True)
    assert r.returncode == 0
    row = rows(r.stdout)[0]
    assert int(row["count"]) == 4 and float(row["weyl"]) == pytest.approx(10 / math.pi)
