import json
import subprocess
import sys

import pytest

from ggcmix import __version__
from ggcmix.cli import EXIT_FAIL, EXIT_NUMERIC, EXIT_PASS, EXIT_USAGE, run

UNIFORM_JSON = '{"family":"uniform","params":{"a":0,"b":1}}'
BROWNIAN = '{"kind":"brownian","a":-1,"sigma2":2}'


def report(capsys, argv, code):
    assert run(argv + ["--no-timestamp"]) == code
    out = capsys.readouterr().out
    return json.loads(out) if out else None


def test_uniform_is_hm1(capsys):
    r = report(capsys, ["check-hm", "--density", UNIFORM_JSON, "--order", "1"], EXIT_PASS)
    assert r["verdict"] == "pass" and r["witnesses"] == []
    assert set(r) == {"command", "config", "verdict", "witnesses", "metrics", "version"}
    assert r["version"] == __version__
    assert r["config"]["density"] == {"family": "uniform", "params": {"a": 0.0, "b": 1.0}}
    assert r["config"]["order"] == 1 and r["config"]["threads"] == 1


def test_stieltjes_of_uniform_on_1_2_has_hcm_witness(capsys):
    r = report(capsys, ["check-hcm", "--stieltjes", "--k", "2", "--density", "uniform:1,2"], EXIT_FAIL)
    assert r["witnesses"]


def test_verify_eq2eq3(capsys):
    r = report(capsys, ["verify", "--identity", "eq2eq3", "--k", "3", "--trials", "100", "--seed", "1"],
               EXIT_PASS)
    assert r["verdict"] == "pass"
    assert r["config"]["seed"] == 1 and r["config"]["trials"] == 100


def test_unknown_subcommand(capsys):
    assert run(["frobnicate"]) == EXIT_USAGE
    assert "invalid choice" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    [],
    ["check-hm", "--density", "{not json", "--order", "1"],
    ["check-hm", "--density", '{"family":"nope","params":{}}', "--order", "1"],
    ["check-hm", "--density", "uniform:2,1", "--order", "1"],
    ["check-hm", "--order", "1"],
    ["check-hm", "--density", "gamma:2,1", "--order", "1", "--bogus"],
    ["check-cm", "--expr", "s + t"],
    ["catalog", "--name", "E1"],
    ["simulate", "--levy", '{"kind":"brownian","a":1,"sigma2":2}'],
])
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv) == EXIT_USAGE
    err = capsys.readouterr().err
    assert err.startswith("ggcmix:")


def test_numeric_failure_exit_3(capsys):
    assert run(["simulate", "--levy", BROWNIAN, "--n", "50", "--horizon", "1"]) == EXIT_NUMERIC
    err = capsys.readouterr().err
    assert "HorizonError" in err and "suggested horizon" in err


def test_violation_exit_1_with_witnesses(capsys):
    r = report(capsys, ["check-cm", "--expr", "sin(s) + 2"], EXIT_FAIL)
    assert r["verdict"] == "fail" and r["witnesses"]
    r = report(capsys, ["check-hm", "--density", "uniform:0,1", "--order", "2", "--n-u", "9", "--n-w", "17"],
               EXIT_FAIL)
    assert r["witnesses"]


def test_witnesses_iff_exit_1(capsys):
    for argv in (["check-cm", "--expr", "exp(-s)"], ["check-cm", "--expr", "sin(s) + 2"],
                 ["catalog", "--check"]):
        code = run(argv + ["--no-timestamp"])
        r = json.loads(capsys.readouterr().out)
        assert (code == EXIT_FAIL) == bool(r["witnesses"])
        assert code in (EXIT_PASS, EXIT_FAIL)


def test_byte_identical_reports(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        assert run(["simulate", "--levy", BROWNIAN, "--n", "200", "--dt", "0.01", "--seed", "5",
                    "--no-timestamp", "--out", str(path)]) == EXIT_PASS
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert b"\r" not in outs[0] and outs[0].endswith(b"\n")
    assert b"timestamp" not in outs[0]


def test_timestamp_present_by_default(capsys):
    assert run(["check-cm", "--expr", "exp(-s)", "--n-max", "2", "--n-s", "5"]) == EXIT_PASS
    assert "timestamp" in json.loads(capsys.readouterr().out)


def test_mix_csv_has_lf_rows(tmp_path, capsys):
    csv = tmp_path / "m.csv"
    r = report(capsys, ["mix", "--left", "gamma:2,1", "--right", "uniform:0,1", "--grid", "0.1", "5", "5",
                        "--csv", str(csv)], EXIT_PASS)
    data = csv.read_bytes()
    assert b"\r" not in data
    lines = data.decode("utf-8").splitlines()
    assert lines[0] == "x,f" and len(lines) == 6
    assert abs(r["metrics"]["normalization"] - 1) < 1e-6


def test_simulate_csv_and_checks(tmp_path, capsys):
    csv = tmp_path / "s.csv"
    spec = '{"kind":"drift-minus-subordinator","a":-0.5,"rate":1,"jump":{"family":"gamma","params":{"shape":2,"rate":3}}}'
    r = report(capsys, ["simulate", "--levy", spec, "--n", "100", "--csv", str(csv)], EXIT_PASS)
    assert r["metrics"]["max"] <= r["metrics"]["bound"]
    assert len(csv.read_text().splitlines()) >= 100


def test_catalog_values(capsys):
    r = report(capsys, ["catalog", "--name", "Y/U", "--s", "1", "--x", "0.0001"], EXIT_PASS)
    row = r["metrics"]["entries"][0]
    assert row["lt"]["1.0"] == pytest.approx(0.30685281944005469, rel=1e-12)  # 1 - log 2
    assert row["pdf"]["0.0001"] == pytest.approx(0.49996666791664866, rel=1e-12)


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ggcmix.cli", "frobnicate"], capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE
    proc = subprocess.run([sys.executable, "-m", "ggcmix.cli", "check-cm", "--expr", "exp(-s)", "--n-max", "2",
                           "--n-s", "5", "--no-timestamp"], capture_output=True, text=True)
    assert proc.returncode == EXIT_PASS and json.loads(proc.stdout)["verdict"] == "pass"
