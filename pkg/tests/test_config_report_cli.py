import json
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from surfcert.cli import main
from surfcert.config import (
    WU_EXAMPLE,
    ConfigError,
    ConfigSyntaxError,
    builtin_config,
    format_coordinate,
    format_point_list,
    parse_config,
    parse_coordinate,
    parse_point_list,
)
from surfcert.exact_arith import QuadraticField
from surfcert.pipeline import run_pipeline
from surfcert.report import (
    PLUMBING,
    CheckRecord,
    VerificationReport,
    emit_report,
    report_from_json,
)

i = QuadraticField(-1).gen


@pytest.fixture(scope="module")
def wu_report():
    return run_pipeline(builtin_config("wu-example"))


def _without(text, key):
    return "\n".join(line for line in text.splitlines() if not line.startswith(key + " ")) + "\n"


# --- configuration -------------------------------------------------------------

def test_builtin_matches_the_instance():
    c = builtin_config("wu-example")
    assert (c.a, c.b, c.d) == (0, -16, -1)
    assert (c.F, c.G) == ("x0^2 + x1^2 - x2^2", "x0^2 - x1^2")
    assert (c.gamma_numerator, c.gamma_denominator) == ("w0*w2 + w1^2 + 16*w2^2", "w0*w1 + w1*w2")
    assert c.claims_EL == [(0, 4 * i, 1), (0, -4 * i, 1), (0, 1, 0)]
    with pytest.raises(ConfigError):
        builtin_config("nope")


def test_config_roundtrip():
    c = builtin_config("wu-example")
    assert parse_config(c.to_text()) == c
    assert parse_config(parse_config(c.to_text()).to_text()).to_text() == c.to_text()


def test_empty_config_is_missing_curve():
    with pytest.raises(ConfigError, match="missing curve"):
        parse_config("")


def test_degenerate_pencil():
    text = WU_EXAMPLE.replace("pencil.G = x0^2 - x1^2", "pencil.G = x0^2 + x1^2 - x2^2")
    with pytest.raises(ConfigError, match="pencil degenerate") as info:
        parse_config(text)
    assert info.value.field == "pencil"


@pytest.mark.parametrize(
    "bad,line,col",
    [
        ("curve.a = 0\nthis line has no equals\n", 2, 1),
        ("curve.a = 0\n  colour = red\n", 2, 3),
        ("curve.a = 0\ncurve.a = 1\n", 2, 1),
        ("curve.a =\n", 1, 10),
    ],
)
def test_syntax_errors_are_positioned(bad, line, col):
    with pytest.raises(ConfigSyntaxError) as info:
        parse_config(bad)
    assert (info.value.line, info.value.col) == (line, col)


@pytest.mark.parametrize(
    "key,value,field",
    [
        ("curve.b", "0", "curve"),
        ("field.d", "4", "field.d"),
        ("pencil.F", "x0^2 + t", "pencil.F"),
        ("gamma.numerator", "w0", "gamma"),
        ("claims.EK", "(1 : 2)", "claims.EK"),
        ("prime_bound", "2", "prime_bound"),
        ("curve.a", "abc", "curve.a"),
    ],
)
def test_semantic_errors_name_the_field(key, value, field):
    text = _without(WU_EXAMPLE, key) + f"{key} = {value}\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.field == field


def test_missing_required_field():
    with pytest.raises(ConfigError) as info:
        parse_config(_without(WU_EXAMPLE, "pencil.G"))
    assert info.value.field == "pencil.G"


def test_coordinates():
    assert parse_coordinate("-4*i") == -4 * i
    assert parse_coordinate("1/2") == Fraction(1, 2)
    assert parse_coordinate("4*sqrt(3)") == QuadraticField(3)(0, 4)
    assert parse_coordinate("sqrt(-16)") == 4 * i
    assert parse_coordinate("sqrt(9)") == 3
    with pytest.raises(ValueError):
        parse_coordinate("__import__('os')")
    with pytest.raises(ValueError):
        parse_coordinate("2**3")
    assert parse_point_list("(0 : 4*i : 1); (0:1:0)", 3) == [(0, 4 * i, 1), (0, 1, 0)]
    with pytest.raises(ValueError):
        parse_point_list("(0 : 0 : 0)", 3)


fractions = st.builds(Fraction, st.integers(-999, 999), st.integers(1, 20))


@given(fractions, fractions, st.sampled_from([-1, 2, 3, -7]))
def test_coordinate_roundtrip(a, b, d):
    c = QuadraticField(d)(a, b) if b else a
    assert parse_coordinate(format_coordinate(c)) == c
    pts = [(c, 1, 0), (a, b, 1)]
    assert parse_point_list(format_point_list(pts), 3) == pts


# --- report ------------------------------------------------------------------------

def test_record_validation():
    with pytest.raises(ValueError):
        CheckRecord("x", "maybe", PLUMBING)
    with pytest.raises(ValueError):
        CheckRecord("x", "pass", "")


def test_verdict_and_exit_codes():
    ok = VerificationReport("t", [CheckRecord("a", "pass", PLUMBING)])
    assert ok.verdict == "pass" and ok.exit_code() == 0 and ok.summary_line() == "PASS"
    assumed = VerificationReport("t", [CheckRecord("a", "pass", PLUMBING), CheckRecord("r", "assumption", "rank 0")])
    assert assumed.exit_code() == 0 and assumed.summary_line() == "PASS with 1 assumption(s): r"
    bad = VerificationReport("t", [CheckRecord("a", "fail", PLUMBING), CheckRecord("r", "assumption", "rank 0")])
    assert bad.verdict == "fail" and bad.exit_code() == 1
    with pytest.raises(ValueError):
        emit_report(ok, "yaml")


def test_pipeline_verdict(wu_report):
    assert wu_report.verdict == "pass"
    assert [r.name for r in wu_report.assumptions] == ["analytic_rank_zero"]
    assert wu_report.summary_line() == "PASS with 1 assumption(s): analytic_rank_zero"
    assert all(r.anchor for r in wu_report.records)
    assert wu_report.record("local_sweeps").anchor == PLUMBING


def test_pipeline_stage_order(wu_report):
    assert [r.name for r in wu_report.records] == [
        "curve_validity", "torsion_E_K", "twist", "torsion_E_L", "analytic_rank_zero",
        "point_set_cross_check", "base_locus_disjoint", "gamma_evaluations", "gamma_degree",
        "critical_locus", "transversality", "total_space_smooth", "branch_locus", "branch_vs_expected",
        "branch_arithmetic", "etale_over_R", "surface_assembly", "fiber_identities", "surface_smooth",
        "rational_point_on_X", "local_sweeps", "wa_witness",
    ]


def test_report_roundtrip(wu_report):
    text = emit_report(wu_report, "json")
    back = report_from_json(text)
    assert [(r.name, r.status, r.anchor) for r in back.records] == [
        (r.name, r.status, r.anchor) for r in wu_report.records
    ]
    assert emit_report(back, "json") == text
    data = json.loads(text)
    assert data["schema_version"] == 1 and data["verdict"] == "pass"
    data["schema_version"] = 99
    with pytest.raises(ValueError):
        VerificationReport.from_dict(data)


def test_text_report(wu_report):
    text = emit_report(wu_report, "text")
    assert text.splitlines()[-1] == "PASS with 1 assumption(s): analytic_rank_zero"
    assert "ASSUME" in text and "claim:" in text


def test_runtime_only_on_request(wu_report):
    assert "runtime_seconds" not in emit_report(wu_report, "json")
    assert "runtime_seconds" in emit_report(wu_report, "json", include_runtime=True)


def test_bad_claims_fail_cross_check():
    c = builtin_config("wu-example")
    r = run_pipeline(c.replace(claims_EK=parse_point_list("(0 : 1 : 0); (4 : 4*sqrt(3) : 1)", 3)))
    assert [x.name for x in r.failures] == ["point_set_cross_check"]


def test_stage_errors_do_not_abort_the_run():
    c = builtin_config("wu-example").replace(G="x0^2", F="x0^2 + x1^2 - x2^2")
    r = run_pipeline(c)
    names = {x.name for x in r.failures}
    assert {"transversality", "total_space_smooth"} <= names
    assert r.record("branch_locus").status == "pass"
    assert len(r.records) == 22


# --- command line ------------------------------------------------------------------

def test_cli_builtin_pass(capsys):
    assert main(["verify", "--builtin", "wu-example"]) == 0
    out = capsys.readouterr().out
    assert out.strip().endswith("PASS with 1 assumption(s): analytic_rank_zero")


def test_cli_writes_report(tmp_path, capsys):
    dest = tmp_path / "report.json"
    assert main(["verify", "--builtin", "wu-example", "--format", "json", "--report", str(dest)]) == 0
    assert json.loads(dest.read_text())["verdict"] == "pass"
    assert "PASS" in capsys.readouterr().out


def test_cli_failing_config(tmp_path, capsys):
    cfg = tmp_path / "bad.conf"
    cfg.write_text(WU_EXAMPLE.replace("claims.EK = (0 : 1 : 0)", "claims.EK = (0 : 1 : 0); (4 : 4*sqrt(3) : 1)"))
    assert main(["verify", "--config", str(cfg)]) == 1
    assert "point_set_cross_check" in capsys.readouterr().out


def test_cli_usage_errors(tmp_path, capsys):
    assert main(["verify", "--config", str(tmp_path / "missing.conf")]) == 2
    empty = tmp_path / "empty.conf"
    empty.write_text("")
    assert main(["verify", "--config", str(empty)]) == 2
    assert "missing curve" in capsys.readouterr().err
    assert main(["verify", "--builtin", "wu-example", "--prime-bound", "2"]) == 2
    with pytest.raises(SystemExit) as info:
        main(["verify"])
    assert info.value.code == 2


def test_cli_options_reach_the_pipeline(tmp_path):
    dest = tmp_path / "r.json"
    main(["verify", "--builtin", "wu-example", "--format", "json", "--report", str(dest), "--prime-bound", "13", "--seed", "5"])
    data = json.loads(dest.read_text())
    checks = {c["name"]: c for c in data["checks"]}
    assert checks["gamma_degree"]["witness"]["draws"][0]["seed"] == 5
    assert checks["local_sweeps"]["witness"]["C_inf"]["certified_primes"] == [3, 5, 7, 11, 13]


def test_cli_json_is_deterministic_across_processes():
    cmd = [sys.executable, "-m", "surfcert", "verify", "--builtin", "wu-example", "--format", "json"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and first
