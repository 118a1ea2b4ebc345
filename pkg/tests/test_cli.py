import csv
import json
import math
import subprocess
import sys

import pytest

from confgas import cli, specfun


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_parse_grid():
    assert list(cli.parse_grid("-1:1:0.5")) == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert list(cli.parse_grid("5:20:5")) == [5.0, 10.0, 15.0, 20.0]
    assert len(cli.parse_grid("-4:4:0.05")) == 161
    assert list(cli.parse_grid("0.5,2")) == [0.5, 2.0]
    for bad in ("1:0:1", "", "1:2", "0:1:0"):
        with pytest.raises(cli.ConfigError):
            cli.parse_grid(bad)


def test_c_list_modes():
    modes = [cp.mode for cp in cli.parse_c_list("1,0.1,0,inf")]
    assert modes == ["finite", "finite", "ultraweak", "hard"]


def test_profile_three_edges(tmp_path):
    out = tmp_path / "p.csv"
    assert cli.main(["profile", "--c", "1,10,inf", "--x", "-4:4:0.05", "--out", str(out)]) == 0
    rows = _rows(out)
    assert len(rows) == 3 * 161
    assert {r["c"] for r in rows} == {"1.0", "10.0", "inf"}
    for r in rows:
        if r["c"] == "1.0":
            assert float(r["R"]) == pytest.approx(specfun.phi(2 * float(r["x"])), rel=1e-10, abs=1e-300)
    # twelve significant digits at most
    assert max(len(r["R"].split("e")[0].replace("-", "").replace(".", "").lstrip("0")) for r in rows) <= 12


def test_profile_ultraweak_tail(tmp_path):
    out = tmp_path / "p.csv"
    assert cli.main(["profile", "--c", "0", "--x", "5:20:1", "--out", str(out)]) == 0
    vals = [float(r["four_x2_R"]) for r in _rows(out)]
    assert abs(vals[-1] - 1) < 0.08
    assert all(abs(b - 1) < abs(a - 1) for a, b in zip(vals, vals[1:]))


def test_empty_grid_is_validation_error(capsys):
    assert cli.main(["profile", "--x", "1:0:1"]) == 2
    assert "empty grid" in capsys.readouterr().err


def test_kernel_table(tmp_path):
    out = tmp_path / "k.csv"
    code = cli.main(["kernel", "--n", "256,1024,4096", "--c", "1", "--x", "-6,-2,0,1", "--out", str(out)])
    assert code == 0
    rows = _rows(out)
    for r in rows:
        assert float(r["R_limit"]) == pytest.approx(specfun.phi(2 * float(r["x"])), rel=1e-10)
        if float(r["x"]) == -6:
            assert abs(float(r["R_n"]) - 1) < 0.02
    for x in ("-2", "0", "1"):
        diffs = [float(r["abs_diff"]) for r in rows if r["x"] == x]
        assert diffs[0] > diffs[1] > diffs[2]


def test_maxmod_deterministic_with_crosscheck(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["maxmod", "--n", "1000", "--samples", "3000", "--seed", "17", "--crosscheck", "--tol-override", "ks=1"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    summary = json.loads(a.with_suffix(".json").read_text())
    assert summary["seed"] == 17 and summary["n"] == 1000
    assert all(summary["checks"].values())
    assert {row["x"] for row in summary["crosscheck"]} == {-1.0, 0.0, 2.0}


def test_maxmod_failing_check_is_named(tmp_path, capsys):
    code = cli.main(["maxmod", "--n", "1000", "--samples", "500", "--out", str(tmp_path / "m.csv")])
    assert code == 1
    assert "FAILED check: ks" in capsys.readouterr().err


def test_ward_default_pass(tmp_path):
    out = tmp_path / "w.json"
    assert cli.main(["ward", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["status"] == "pass"
    assert len(report["residuals"]) == 3


def test_ward_perturbation_detected(tmp_path, capsys):
    out = tmp_path / "w.json"
    assert cli.main(["ward", "--c", "1", "--x", "0", "--perturb", "scale=1.1", "--out", str(out)]) == 1
    assert json.loads(out.read_text())["status"] == "violation detected"
    assert "mass_one[c=1]" in capsys.readouterr().err


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"command": "ward", "c": "2", "x": "-1,0", "tol": {"ward": 1e-5}}))
    out = tmp_path / "w.json"
    assert cli.main(["ward", "--config", str(cfg), "--c", "1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["residuals"][0]["c"] == 1.0


@pytest.mark.parametrize("payload", [
    {"command": "ward", "colour": 1},
    {"command": "profile"},
    {"command": "ward", "tol": {"nonsense": 1}},
    [1, 2],
])
def test_malformed_config_rejected(tmp_path, payload):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(payload))
    assert cli.main(["ward", "--config", str(cfg)]) == 2


def test_unparseable_config_and_tolerance(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert cli.main(["ward", "--config", str(cfg)]) == 2
    assert cli.main(["ward", "--tol-override", "bogus=1"]) == 2
    assert cli.main(["ward", "--tol-override", "ward"]) == 2


def test_quasipoly_profiles_skip_top_degree(tmp_path):
    out = tmp_path / "q.csv"
    args = ["quasipoly", "--n", "500", "--j", "100:500:100", "--c", "1,0.05,50", "--r", "0.5:1.2:0.1", "--out", str(out)]
    assert cli.main(args) == 0
    rows = _rows(out)
    assert {int(r["j"]) for r in rows} == {100, 200, 300, 400}
    assert {r["c"] for r in rows} == {"1", "0.05", "50"}


def test_quasipoly_tables(tmp_path):
    out = tmp_path / "p1.csv"
    assert cli.main(["quasipoly", "--table", "p1", "--n", "256,1024,4096", "--c", "1", "--out", str(out)]) == 0
    errs = [float(r["p1_error"]) for r in _rows(out)]
    assert errs[0] > errs[1] > errs[2]
    out = tmp_path / "pw.csv"
    assert cli.main(["quasipoly", "--table", "pointwise", "--n", "256,1024,4096", "--c", "1", "--out", str(out)]) == 0


def test_growth_table(tmp_path):
    out = tmp_path / "g.csv"
    assert cli.main(["growth", "--potential", "ginibre", "--tau", "0.2:1:0.2", "--out", str(out)]) == 0
    rows = _rows(out)
    for r in rows:
        assert float(r["rho_tau"]) == pytest.approx(math.sqrt(float(r["tau"])), rel=1e-12)


def test_threads_env_and_stdout(monkeypatch, capsys):
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    assert cli.main(["profile", "--c", "1,2", "--x", "0"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "c,x,R,four_x2_R" and len(lines) == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "confgas", "growth", "--tau", "0.5,1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("tau,rho_tau")
