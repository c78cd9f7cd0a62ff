import json
import subprocess
import sys

import pytest

from marketeq.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, run
from marketeq.io import serialize_instance
from instances import two_linear_exchange, two_linear_fisher


@pytest.fixture
def files(tmp_path):
    def put(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return put


@pytest.fixture
def fixtures_dir(tmp_path):
    out = tmp_path / "fx"
    assert run(["fixtures", "--output-dir", str(out)]) == EXIT_OK
    return out


def test_fixtures_written(fixtures_dir):
    names = sorted(p.name for p in fixtures_dir.iterdir())
    assert names == ["midpoint.json", "price1.json", "price2.json",
                     "table1.json"]
    mid = json.loads((fixtures_dir / "midpoint.json").read_text())
    assert mid["p"] == [0, 0.5, 2.5]


@pytest.mark.parametrize("price", ["price1.json", "price2.json"])
def test_verify_fixture_prices(fixtures_dir, price, capsys):
    code = run(["verify", "--input", str(fixtures_dir / "table1.json"),
                "--candidate", str(fixtures_dir / price),
                "--sigma", "1e-7", "--lambda", "1e-7", "--thrifty"])
    assert code == EXIT_OK
    assert capsys.readouterr().out.startswith("verdict: PASS")


def test_verify_failure_exit_code(fixtures_dir, files, capsys):
    mid = json.loads((fixtures_dir / "midpoint.json").read_text())
    cand = files("mid.json", json.dumps(
        {"x": mid["x"], "p": mid["p"], "sigma": 0, "lambda": 0,
         "thrifty": True}))
    code = run(["verify", "--input", str(fixtures_dir / "table1.json"),
                "--candidate", cand, "--json"])
    assert code == EXIT_FAIL
    assert json.loads(capsys.readouterr().out)["passed"] is False


def test_solve_then_verify(files, tmp_path, capsys):
    inst = files("two.json", serialize_instance(two_linear_fisher()))
    out = str(tmp_path / "cand.json")
    code = run(["solve", "--mode", "fixed-agents", "--sigma", "0.25",
                "--input", inst, "--output", out, "--threads", "1"])
    assert code == EXIT_OK
    assert "verdict: PASS" in capsys.readouterr().out
    # the emitted candidate is accepted verbatim
    assert run(["verify", "--input", inst, "--candidate", out]) == EXIT_OK


def test_solve_to_stdout(files, capsys):
    inst = files("ad.json", serialize_instance(two_linear_exchange()))
    code = run(["solve", "--mode", "ad-fixed-items", "--sigma", "0.5",
                "--input", inst])
    assert code == EXIT_OK
    captured = capsys.readouterr()
    assert set(json.loads(captured.out)) >= {"x", "p", "sigma", "lambda"}
    assert "verdict: PASS" in captured.err


def test_oracle(files, capsys):
    inst = files("two.json", serialize_instance(two_linear_fisher()))
    assert run(["oracle", "--input", inst, "--grid-step", "0.25"]) == EXIT_OK
    res = json.loads(capsys.readouterr().out)
    assert res["residual"] <= 0.25 and res["points"] > 0


@pytest.mark.parametrize("argv", [
    ["solve", "--mode", "fixed-items", "--epsilon", "2.0"],
    ["solve", "--mode", "fixed-items", "--sigma", "0.2"],
    ["solve", "--mode", "ad-fixed-agents", "--sigma", "0.25"],
    ["solve", "--mode", "fixed-items", "--epsilon", "0.1", "--threads", "0"],
    ["solve", "--mode", "nonsense", "--epsilon", "0.1"],
    ["oracle", "--grid-step", "0"],
])
def test_input_errors(files, argv, capsys):
    inst = files("two.json", serialize_instance(two_linear_fisher()))
    assert run(argv + ["--input", inst]) == EXIT_INPUT


def test_missing_and_malformed_files(files, tmp_path, capsys):
    assert run(["solve", "--mode", "fixed-items", "--epsilon", "0.1",
                "--input", str(tmp_path / "nope.json")]) == EXIT_INPUT
    bad = files("bad.json", "{\"model\": \"fisher\"}")
    assert run(["solve", "--mode", "fixed-items", "--epsilon", "0.1",
                "--input", bad]) == EXIT_INPUT
    assert "num_items" in capsys.readouterr().err


def test_dimension_mismatch(fixtures_dir, files):
    cand = files("c.json", json.dumps({"x": [[1]], "p": [1], "sigma": 0,
                                       "lambda": 0, "thrifty": False}))
    assert run(["verify", "--input", str(fixtures_dir / "table1.json"),
                "--candidate", cand]) == EXIT_INPUT


def test_no_subcommand():
    assert run([]) == EXIT_INPUT


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "marketeq.cli", "fixtures", "--output-dir",
         str(tmp_path)], capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "table1.json").exists()
