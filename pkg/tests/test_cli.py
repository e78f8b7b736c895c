import json

import pytest

from cu_kit import oracle
from cu_kit.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, EXIT_UNKNOWN, RunConfig, InputError, main, run


def test_check_laws_examples():
    report, code = run(["check-laws", "--instance", "extnat", "--cases", "1000", "--seed", "7"])
    assert code == EXIT_OK and report["passed"]
    assert run(["check-laws", "--instance", "extnat^3", "--cases", "100"])[1] == EXIT_OK
    assert run(["check-laws", "--instance", "bogus"]) == (None, EXIT_INPUT)


def test_af_compare_examples(capsys):
    assert main(["af", "compare", "--diagram", "uhf2.json", "--a", "@2:1", "--b", "@1:1", "--horizon", "40"]) == 0
    assert capsys.readouterr().out == '{"result":"LE"}\n'
    assert main(["af", "compare", "--diagram", "uhf2.json", "--a", "@1:1", "--b", "@2:1"]) == 0
    assert json.loads(capsys.readouterr().out) == {"result": "NotLE", "certificate": "perron"}


def test_af_trace_example(capsys):
    assert main(["af", "trace", "--diagram", "uhf2.json", "--a", "@1:1"]) == 0
    assert capsys.readouterr().out == '{"value":"1/2"}\n'


def test_af_trace_non_primitive_is_input_error():
    assert run(["af", "trace", "--diagram", "nonsimple", "--a", "@1:1,0"])[1] == EXIT_INPUT


def test_af_compacts_and_interpolate():
    report, code = run(["af", "compacts", "--diagram", "uhf2", "--a", "@1:inf", "--count", "3"])
    assert code == EXIT_OK and len(report["compacts"]) == 3
    report, code = run(["af", "interpolate", "--diagram", "uhf2", "--a", "@2:1", "--b", "@1:1"])
    assert code == EXIT_OK and report["interpolant"] == "@2:1"


def test_af_unknown_exit_code(monkeypatch):
    import cu_kit.cli as cli
    from cu_kit.limit import Tri, Verdict

    monkeypatch.setattr(cli.af, "af_compare", lambda b, a, c, h: Verdict(Tri.UNKNOWN, h))
    report, code = run(["af", "compare", "--diagram", "uhf2", "--a", "@1:1", "--b", "@1:1"])
    assert code == EXIT_UNKNOWN and report == {"result": "Unknown", "horizon": 40}


@pytest.mark.parametrize("argv", [
    ["af", "compare", "--diagram", "missing.json", "--a", "@1:1", "--b", "@1:1"],
    ["af", "compare", "--diagram", "uhf2", "--a", "nonsense", "--b", "@1:1"],
    ["af", "compare", "--diagram", "uhf2", "--a", "@1:1"],
    ["af", "compare", "--diagram", "uhf2", "--a", "@1:1", "--b", "@1:1", "--horizon", "0"],
    ["frobnicate"],
])
def test_input_errors(argv, capsys):
    assert run(argv) == (None, EXIT_INPUT)
    assert capsys.readouterr().out == ""


def test_bad_diagram_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"dims":[[1],[2]],"mults":[[[1],[1]]]}', encoding="utf-8")
    assert run(["af", "trace", "--diagram", str(p), "--a", "@1:1"])[1] == EXIT_INPUT


def test_horizon_from_environment(monkeypatch):
    import cu_kit.cli as cli
    from cu_kit.limit import Tri, Verdict

    monkeypatch.setenv("CU_KIT_HORIZON", "12")
    monkeypatch.setattr(cli.af, "af_compare", lambda b, a, c, h: Verdict(Tri.UNKNOWN, h))
    report, _ = run(["af", "compare", "--diagram", "uhf2", "--a", "@1:1", "--b", "@1:1"])
    assert report["horizon"] == 12
    report, _ = run(["af", "compare", "--diagram", "uhf2", "--a", "@1:1", "--b", "@1:1", "--horizon", "30"])
    assert report["horizon"] == 30


def test_oracle_selftest_smoke(tmp_path):
    out = tmp_path / "report.json"
    report, code = run(["oracle-selftest", "--cases", "10", "--seed", "1", "--output", str(out)])
    assert code == EXIT_OK and report["cases"] == 10
    assert json.loads(out.read_text(encoding="utf-8")) == report


def test_oracle_selftest_fixture(tmp_path):
    a, b = oracle.diag_element([1.0, 0.0]), oracle.diag_element([2.0, 3.0])
    doc = {"pairs": [[oracle.element_to_json(a), oracle.element_to_json(b)]]}
    good = tmp_path / "pairs.json"
    good.write_text(json.dumps(doc), encoding="utf-8")
    report, code = run(["oracle-selftest", "--fixture", str(good), "--cases", "5"])
    assert code == EXIT_OK and report["cases"] == 1
    bad = tmp_path / "broken.json"
    bad.write_text('{"pairs": [[1, 2]', encoding="utf-8")
    assert run(["oracle-selftest", "--fixture", str(bad)])[1] == EXIT_INPUT


def test_failed_check_exits_one(monkeypatch):
    import cu_kit.cli as cli
    from cu_kit.core import LawResult

    broken = LawResult("L1", cases=1, failures=1, first_counterexample="x")
    monkeypatch.setattr(cli, "check_laws", lambda *a: [broken])
    assert run(["check-laws", "--instance", "extnat", "--cases", "1"])[1] == EXIT_FAIL


def test_run_config_validation():
    with pytest.raises(InputError):
        RunConfig("check-laws", horizon=0)
    with pytest.raises(InputError):
        RunConfig("check-laws", cases=0)
