import json
import os
import subprocess
import sys
from fractions import Fraction

import jsonschema
import pytest

from lerchpade import cli
from lerchpade.determinant import MismatchError

BASE = ["--m", "1", "--alphas", "1", "--shifts", "0:1", "--n", "1"]
CRIT = ["--alphas", "1", "--shifts", "0:1", "--beta", "100"]

RUNS = {
    ("pade", "build"): BASE + ["--terms", "5"],
    ("pade", "verify"): BASE,
    ("det", "delta"): BASE,
    ("det", "chain"): ["--alphas", "1,2", "--shifts", "0:1", "--n", "1"],
    ("det", "hermite"): ["--x", "0,1/2", "--r", "1,2"],
    ("det", "m-pair"): ["--shifts", "0:1,1/2:1", "--n", "2"],
    ("criterion", "eval"): CRIT + ["--diagnostics"],
    ("criterion", "measure"): CRIT + ["--epsilon", "1/2"],
    ("criterion", "tables"): [],
    ("eval", "lerch"): ["--x", "0", "--s", "2", "--z", "1/2"],
    ("eval", "periodic"): ["--b=-1,0,1", "--w", "3,5", "--x", "1/3", "--s", "2", "--beta", "7"],
    ("check", "remainder-bound"): ["--alphas", "1,-1/2", "--shifts", "1/3:1", "--n", "1", "--beta", "10"],
    ("check", "linear-form"): CRIT + ["--cap", "4"],
}


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_every_command_is_covered():
    assert set(RUNS) == set(cli.COMMANDS)


@pytest.mark.parametrize("key", sorted(RUNS))
def test_json_reports_validate(key, capsys):
    code, out, _ = run([*key, *RUNS[key], "--format", "json"], capsys)
    assert code == 0
    jsonschema.validate(json.loads(out), cli.load_schema(*key))


@pytest.mark.parametrize("key", sorted(RUNS))
def test_outputs_are_byte_identical(key, tmp_path, capsys):
    texts = []
    for k in range(2):
        path = tmp_path / f"out{k}.json"
        code, out, _ = run([*key, *RUNS[key], "--format", "json", "--output", str(path)], capsys)
        assert code == 0 and out.strip()
        texts.append(path.read_bytes())
    assert texts[0] == texts[1]


def test_det_delta_prints_the_value(capsys):
    code, out, _ = run(["det", "delta", *BASE], capsys)
    assert (code, out) == (0, "1/2\n")


def test_pade_verify_reports_order(capsys):
    code, out, _ = run(["pade", "verify", *BASE], capsys)
    assert code == 0 and out.startswith("pass: ord >= 2")


def test_tables_csv(capsys):
    code, out, _ = run(["criterion", "tables"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 81
    assert lines[0].split(",")[:4] == ["g", "p", "q", "paper_value"]


def test_flat_csv_for_other_commands(capsys):
    code, out, _ = run(["det", "chain", *BASE, "--format", "csv"], capsys)
    assert code == 0
    rows = dict(line.split(",", 1) for line in out.strip().splitlines()[1:])
    assert rows["delta"] == "1/2"


@pytest.mark.parametrize("argv", [
    ["det", "delta", "--alphas", "1,1", "--shifts", "0:1", "--n", "1"],
    ["det", "delta", "--m", "2", "--alphas", "1", "--shifts", "0:1", "--n", "1"],
    ["det", "delta", "--alphas", "1", "--shifts", "0", "--n", "1"],
    ["det", "delta", "--alphas", "x", "--shifts", "0:1", "--n", "1"],
    ["eval", "lerch", "--x", "0", "--s", "1", "--z", "2"],
    ["criterion", "eval", *CRIT, "--place", "5"],
    ["criterion", "measure", *CRIT, "--epsilon", "5"],
    ["pade", "verify", "--alphas", "1"],
    ["pade", "nonsense"],
])
def test_invalid_input_exits_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert err.strip()


def test_structured_diagnostics(capsys):
    code, _, err = run(["det", "delta", "--alphas", "1,1", "--shifts", "0:1", "--n", "1"], capsys)
    payload = json.loads(err)
    assert payload["error"] == "invalid-input" and "distinct" in payload["message"]


def test_verification_failure_exits_1(monkeypatch, capsys):
    monkeypatch.setattr(cli.determinant, "delta_det", lambda inst: Fraction(0))
    code, _, err = run(["det", "delta", *BASE], capsys)
    assert code == 1
    assert json.loads(err)["error"] == "verification-failed"


def test_mismatch_exception_exits_1(monkeypatch, capsys):
    def boom(inst):
        raise MismatchError("|Delta| = |c det u|", {"delta": "1/2"})

    monkeypatch.setattr(cli.determinant, "chain_check", boom)
    code, _, err = run(["det", "chain", *BASE], capsys)
    assert code == 1
    assert json.loads(err)["details"] == {"delta": "1/2"}


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# base instance\nalphas = 1\nshifts = 0:1\nn = 1\nformat = text\n")
    code, out, _ = run(["det", "delta", "--config", str(cfg)], capsys)
    assert (code, out) == (0, "1/2\n")
    code, out, _ = run(["det", "delta", "--config", str(cfg), "--alphas", "2"], capsys)
    assert code == 0 and out.strip() != "1/2"
    cfg.write_text("bogus = 1\n")
    code, _, _ = run(["det", "delta", "--config", str(cfg)], capsys)
    assert code == 2


def test_precision_from_environment(monkeypatch, capsys):
    monkeypatch.setenv(cli.PRECISION_ENV, "200")
    code, out, _ = run(["eval", "lerch", "--x", "0", "--s", "1", "--z", "1/2", "--format", "json"], capsys)
    assert json.loads(out)["value"]["precision_bits"] == 200
    code, out, _ = run(["eval", "lerch", "--x", "0", "--s", "1", "--z", "1/2", "--format", "json",
                        "--precision", "96"], capsys)
    assert json.loads(out)["value"]["precision_bits"] == 96
    monkeypatch.setenv(cli.PRECISION_ENV, "lots")
    code, _, _ = run(["eval", "lerch", "--x", "0", "--s", "1", "--z", "1/2"], capsys)
    assert code == 2


def test_module_entry_point():
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "lerchpade", "det", "delta", *BASE],
                          capture_output=True, text=True, env=env, check=False)
    assert proc.returncode == 0
    assert proc.stdout == "1/2\n"
