"""Command-line interface: exit codes, artifact schemas, determinism."""

import json
from pathlib import Path

import pytest

from nevlab.cli import (
    EXIT_FAIL,
    EXIT_HYPOTHESIS,
    EXIT_PARSE,
    EXIT_PASS,
    main,
    run_scenario,
)

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "nevlab" / "scenarios"


def _write_scenario(tmp_path, body, name="scenario.ini"):
    p = tmp_path / name
    p.write_text(body)
    return p


CARTAN_SMALL = """
[curve]
target = p1
components = exp(z); 1

[divisor]
hyperplane1 = 1, 0
hyperplane2 = 0, 1
hyperplane3 = 1, -1

[check]
theorem = cartan
eps = 0.05

[grid]
min = 3
max = 12
count = 8
spacing = log
"""


# -- exit codes -------------------------------------------------------------------


def test_run_pass_exit_zero(tmp_path):
    scn = _write_scenario(tmp_path, CARTAN_SMALL)
    out = tmp_path / "out"
    assert run_scenario(scn, out) == EXIT_PASS
    for name in ("growth.csv", "report.json", "zeros.csv", "plot.csv"):
        assert (out / name).exists()


def test_degenerate_scenario_exit_one(tmp_path):
    out = tmp_path / "out"
    code = run_scenario(SCENARIOS / "degenerate_probe.ini", out)
    assert code == EXIT_HYPOTHESIS
    err = json.loads((out / "error.json").read_text())
    assert err["exit_code"] == EXIT_HYPOTHESIS
    assert err["hypothesis"] == "degeneracy"
    assert err["relation"]["m"] == 2 and err["relation"]["n"] == -1


def test_bad_expression_exit_three(tmp_path):
    bad = CARTAN_SMALL.replace("exp(z); 1", "exp(; 1")
    scn = _write_scenario(tmp_path, bad)
    out = tmp_path / "out"
    assert run_scenario(scn, out) == EXIT_PARSE
    err = json.loads((out / "error.json").read_text())
    assert err["error"] == "ParseError"
    assert "offset" in err


def test_missing_section_exit_three(tmp_path):
    scn = _write_scenario(tmp_path, "[curve]\ntarget = p1\ncomponents = z; 1\n")
    assert run_scenario(scn, tmp_path / "out") == EXIT_PARSE


def test_grid_validation(tmp_path):
    bad = CARTAN_SMALL.replace("count = 8", "count = 3")
    scn = _write_scenario(tmp_path, bad)
    assert run_scenario(scn, tmp_path / "out") == EXIT_PARSE


def test_eval_command(capsys):
    assert main(["eval", "exp(z)", "0"]) == EXIT_PASS
    assert "1" in capsys.readouterr().out


def test_eval_parse_error(capsys):
    assert main(["eval", "exp(", "0"]) == EXIT_PARSE
    assert "byte 4" in capsys.readouterr().err


def test_zeros_command(capsys):
    assert main(["zeros", "z^2 - 1", "2"]) == EXIT_PASS
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "re,im,multiplicity"
    assert len(out.splitlines()) == 3


def test_wronskian_command(tmp_path, capsys):
    scn = _write_scenario(tmp_path, CARTAN_SMALL)
    assert main(["wronskian", str(scn), "1+0i"]) == EXIT_PASS
    assert capsys.readouterr().out.strip()


# -- artifact schemas ---------------------------------------------------------------


def test_report_schema(tmp_path):
    scn = _write_scenario(tmp_path, CARTAN_SMALL)
    out = tmp_path / "out"
    run_scenario(scn, out)
    payload = json.loads((out / "report.json").read_text())
    for key in ("theorem", "radii", "lhs", "rhs", "margin", "verdict", "settings"):
        assert key in payload
    assert len(payload["radii"]) == len(payload["lhs"]) == len(payload["margin"])
    plot = (out / "plot.csv").read_text().splitlines()
    assert plot[0] == "r,lhs,rhs,margin"
    assert len(plot) == len(payload["radii"]) + 1
    growth = (out / "growth.csv").read_text()
    assert growth.startswith("r,")


def test_jensen_scenario(tmp_path):
    out = tmp_path / "out"
    assert run_scenario(SCENARIOS / "jensen_corpus.ini", out) == EXIT_PASS
    payload = json.loads((out / "report.json").read_text())
    assert payload["verdict"] == "pass"
    assert payload["worst"] <= payload["tolerance"]


# -- determinism ---------------------------------------------------------------------


def test_thread_flag_does_not_change_artifacts(tmp_path):
    scn = _write_scenario(tmp_path, CARTAN_SMALL)
    outs = []
    for threads, sub in ((1, "a"), (4, "b")):
        out = tmp_path / sub
        assert run_scenario(scn, out, threads=threads) == EXIT_PASS
        outs.append(out)
    for name in ("growth.csv", "plot.csv", "zeros.csv", "report.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_grid_flag_override(tmp_path):
    scn = _write_scenario(tmp_path, CARTAN_SMALL)
    out = tmp_path / "out"
    code = main(["--out", str(out), "--grid", "3:10:8:log", "run", str(scn)])
    assert code == EXIT_PASS
    payload = json.loads((out / "report.json").read_text())
    assert len(payload["radii"]) == 8
    assert payload["radii"][0] == pytest.approx(3.0)
    assert payload["radii"][-1] == pytest.approx(10.0)
