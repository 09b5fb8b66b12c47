import json

import pytest
from hypothesis import given, strategies as st

from kcq.report import (
    HEADER,
    EmptyReportError,
    ReportRow,
    all_passed,
    cppm_sweep_csv,
    emit_report,
    fmt,
    read_csv_report,
    render,
    table_csv,
)
from kcq.stats import Estimate, proportion


def rows():
    return [
        ReportRow.from_estimate("demo", "ber", {"S": 1.0, "m": 16}, proportion(123, 10_000), 0.0125),
        ReportRow("demo", "bound", {"S": 2.5}, 0.1 + 0.2, reference=0.3, gate="abs", tol=1e-12),
        ReportRow("demo", "info", {}, 1 / 3),
    ]


def test_single_row_has_header_and_one_line():
    text = render(rows()[:1])
    lines = text.splitlines()
    assert lines[0] == ",".join(HEADER)
    assert len(lines) == 2


def test_empty_report_rejected():
    with pytest.raises(EmptyReportError):
        render([])


def test_json_and_csv_agree():
    rs = rows()
    recs = json.loads(render(rs, "json"))
    table = read_csv_report(render(rs, "csv"))
    assert len(recs) == len(table) == 3
    for rec, row in zip(recs, table):
        assert float(row["estimate"]) == rec["estimate"]
        assert float(row["stdErr"]) == rec["stdErr"]
        assert row["gate"] == (rec["gate"] or "")
        ref = row["reference"]
        assert (float(ref) if ref else None) == rec["reference"]
        passed = {"true": True, "false": False, "": None}[row["passed"]]
        assert passed == rec["passed"]


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_text_round_trips(x):
    assert float(fmt(x)) == x


def test_informational_rows_have_no_verdict():
    r = rows()[2]
    assert r.passed is None
    line = render([r]).splitlines()[1]
    assert line.endswith(",,,")


def test_gate_logic():
    assert rows()[0].passed
    assert rows()[1].passed and rows()[1].gate_label == "abs<=1e-12"
    bad = ReportRow.from_estimate("x", "p", {}, Estimate(0.6, 0.001, 10_000), 0.5)
    assert bad.passed is False
    assert not all_passed(rows() + [bad])
    assert all_passed(rows())


def test_row_invariants():
    with pytest.raises(ValueError):
        ReportRow("x", "q", {}, 0.1, stderr=-1)
    with pytest.raises(ValueError):
        ReportRow("x", "q", {}, 0.1, gate="3sigma")
    with pytest.raises(ValueError):
        ReportRow("x", "q", {}, 0.1, reference=0.1, gate="close")
    r = ReportRow.from_estimate("x", "q", {}, Estimate(0.1, 0.01, 100), None)
    assert r.gate is None and r.passed is None


def test_params_text():
    assert rows()[0].params_text() == "S=1;m=16"


def test_emit_writes_file(tmp_path):
    p = tmp_path / "r.csv"
    text = emit_report(rows(), "csv", p)
    assert p.read_text() == text
    with pytest.raises(OSError):
        emit_report(rows(), "csv", tmp_path / "missing" / "r.csv")


def test_tables():
    assert table_csv(("a", "b"), [(1, 0.5), {"a": 2, "b": True}]) == "a,b\n1,0.5\n2,true\n"
    text = cppm_sweep_csv([{"m": 16, "S": 2, "eta": 1.0, "receiver": "direct",
                            "blockError": 0.1, "stdErr": 0.01}])
    assert text.splitlines()[0] == "m,S,eta,receiver,blockError,stdErr"
