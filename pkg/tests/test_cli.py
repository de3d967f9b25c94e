import json

import pytest

from lagsoliton.cli import EXIT_USAGE, main


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def test_verify_soliton_example(tmp_path, capsys):
    assert run(tmp_path, "verify-soliton", "--p", "2", "--q", "1") == 0
    doc = json.loads((tmp_path / "verify-soliton.json").read_text())
    residuals = [c["value"] for cell in doc["cells"] for c in cell["checks"] if c["name"].startswith("F_perp")]
    assert residuals and max(residuals) < 1e-9
    out = capsys.readouterr().out.splitlines()
    assert len(out) == len(doc["cells"]) + 1 and out[-1].startswith("pass")


def test_theorem_12_with_q1_is_usage_error(tmp_path, capsys):
    assert run(tmp_path, "theorem", "--which", "1.2", "--p", "2", "--q", "1") == EXIT_USAGE
    assert "q > 1" in capsys.readouterr().err


def test_cones_example(tmp_path):
    assert run(tmp_path, "cones", "--p", "3", "--q", "2", "--samples", "1024") == 0
    doc = json.loads((tmp_path / "cones.json").read_text())
    partition = {frozenset(c) for c in doc["cells"][0]["data"]["partition"]}
    assert partition == {frozenset(("++", "-+")), frozenset(("+-", "--"))}


@pytest.mark.parametrize("argv, message", [
    (["cones", "--p", "4", "--q", "2"], "coprime"),
    (["cones", "--p", "3"], "together"),
    (["verify-immersion", "--p", "2", "--q", "3"], "p > q"),
    (["lambda", "--lambdas", "1,0"], "nonzero"),
    (["lambda", "--lambdas", "1"], "two weights"),
    (["brakke", "--times=-1"], "positive"),
    (["theorem", "--levels", "1"], "levels"),
    (["sweep", "--tol-flow", "0"], "tol-flow"),
])
def test_validation_errors(tmp_path, capsys, argv, message):
    assert run(tmp_path, *argv) == EXIT_USAGE
    assert message in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["bogus"], ["cones", "--p", "x"], ["theorem", "--which", "2.1"], []])
def test_parser_errors_exit_64(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == EXIT_USAGE


@pytest.mark.parametrize("argv", [
    ["verify-immersion", "--p", "3", "--q", "2", "--grid", "8"],
    ["lambda", "--lambdas", "1,1", "--lambdas=1,-2,3"],
    ["brakke", "--p", "2", "--q", "1", "--times", "1"],
])
def test_commands_pass(tmp_path, argv):
    assert run(tmp_path, *argv) == 0


def test_failing_tolerance_exits_1(tmp_path):
    assert run(tmp_path, "verify-immersion", "--p", "2", "--q", "1", "--grid", "4", "--tol-lagrangian", "1e-30") == 1


def test_inconclusive_exit_code(tmp_path, monkeypatch):
    from lagsoliton import cli, report_io

    def fake(cfg):
        return report_io.SuiteReport("x", cells=[report_io.Cell("c", [report_io.Check("n", 0.0, 1.0, None)])])
    monkeypatch.setattr(cli, "build_report", fake)
    assert run(tmp_path, "cones") == 2


def test_theorem_writes_series(tmp_path):
    assert run(tmp_path, "theorem", "--which", "1.2", "--p", "3", "--q", "2", "--levels", "6") == 0
    csvs = sorted(p.name for p in tmp_path.glob("theorem_*.csv"))
    assert csvs and all(p.read_text().startswith("t,value\n") for p in tmp_path.glob("theorem_*.csv"))
