import numpy as np
import pandas as pd
import pytest

from barycenter import BarycenterResult
from reporting import (
    CHECK_COLUMNS,
    PROPERTIES,
    ExperimentReport,
    check_row,
    checks_frame,
    failed_checks,
    format_summary,
    format_table,
    merge_reports,
    residual_summary,
    result_record,
    summarize_checks,
    write_output,
)
from suites import run_suite


def test_check_row_pass_and_fail():
    assert check_row("a", 1e-10, 1e-8, "normalization: anchor")["passed"]
    assert not check_row("a", 1e-6, 1e-8, "normalization: anchor")["passed"]
    assert not check_row("a", np.nan, 1e-8, "normalization: anchor")["passed"]
    recorded = check_row("a", 5.0, 0.0, "normalization: anchor", asserted=False)
    assert recorded["passed"] and not recorded["asserted"]
    assert list(recorded) == CHECK_COLUMNS


def test_summaries():
    checks = checks_frame([
        check_row("ok", 0.0, 1.0, "continuity: x"),
        check_row("bad", 2.0, 1.0, "continuity: y"),
        check_row("open", 9.0, 0.0, "lift conjecture: z", asserted=False),
    ])
    assert failed_checks(checks)["check"].tolist() == ["bad"]
    assert summarize_checks(checks) == {"total": 3, "asserted": 2, "recorded": 1, "passed": 1, "failed": 1}
    assert summarize_checks(checks_frame([]))["total"] == 0


def test_format_table_is_fixed_format():
    text = format_table(pd.DataFrame({"x": [0.5, 1.0 / 3.0], "name": ["a", "b"]}))
    assert text == "x,name\n5.000000000000000e-01,a\n3.333333333333333e-01,b\n"


def test_format_summary():
    text = format_summary({"residual": 0.25, "point": np.array([0.5, 0.0]), "iterations": 3})
    assert text == ("residual: 2.500000000000000e-01\n"
                    "point: [5.000000000000000e-01, 0.000000000000000e+00]\n"
                    "iterations: 3\n")


def test_result_record():
    result = BarycenterResult(np.array([0.0, 0.5]), 1e-13, 4, True)
    lines = result_record(result).splitlines()
    assert lines[0] == "point: [0.000000000000000e+00, 5.000000000000000e-01]"
    assert lines[2:] == ["iterations: 4", "converged: true"]


def test_residual_summary_skips_failures():
    table = pd.DataFrame({"residual": [1e-13, np.nan, 3e-13]})
    summary = residual_summary(table)
    assert summary["points"] == 3
    assert summary["failures"] == 1
    assert summary["max"] == pytest.approx(3e-13)
    assert residual_summary(pd.DataFrame({"residual": [np.nan]})) == {"points": 1, "failures": 1}


def test_report_render_and_merge():
    first = ExperimentReport("first", checks_frame([check_row("a", 0.0, 1.0, "existence: x")]),
                             {"values": pd.DataFrame({"v": [1.0]})})
    second = ExperimentReport("second", checks_frame([check_row("b", 2.0, 1.0, "existence: y")]))
    assert first.passed and not second.passed
    text = first.render()
    assert text.startswith("# first\ncheck,value,tolerance,asserted,passed,anchor\n")
    assert "\n[values]\nv\n1.000000000000000e+00\n" in text
    assert text.endswith("failed: 0\n")

    merged = merge_reports("both", [first, second])
    assert merged.checks["check"].tolist() == ["a", "b"]
    assert list(merged.tables) == ["first: values"]
    assert not merged.passed


def test_write_output(tmp_path, capsys):
    write_output("hello\n")
    assert capsys.readouterr().out == "hello\n"
    path = tmp_path / "nested" / "out.csv"
    write_output("a,b\n", path)
    assert path.read_text() == "a,b\n"


def test_anchor_names_a_property():
    assert check_row("a", 0.0, 1.0, "z^d structure: h > 0")["anchor"] == "z^d structure: h > 0"
    with pytest.raises(ValueError):
        check_row("a", 0.0, 1.0, "the field points inwards")
    with pytest.raises(ValueError):
        check_row("a", 0.0, 1.0, "normalization")


def test_suite_anchors_carry_property_names():
    report = run_suite("naturality", seed=7, level=8)
    prefixes = report.checks["anchor"].str.split(": ", n=1).str[0]
    assert prefixes.isin(PROPERTIES).all()
