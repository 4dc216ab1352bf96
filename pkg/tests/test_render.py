from __future__ import annotations

import json

from rich.console import Console

from qcap.channels import kraus_to_choi
from qcap.harness import SweepRow, describe_channel, make_check, skipped_check
from qcap.models import CapacityReport, DegradabilityCertificate, RestartRecord
from qcap.render import (
    fmt,
    render_capacity_report_json,
    render_capacity_report_plain,
    render_certificate_json,
    render_certificate_plain,
    render_channel_summary_json,
    render_checks_json,
    render_checks_plain,
    render_checks_rich,
    render_sweep_json,
    render_sweep_plain,
)
from qcap.zoo import erasure_channel, identity_channel


def sample_checks():
    return [
        make_check("ineq-12", 0.5, 0.5, 1e-3, "ge", "P1 >= Q1"),
        make_check("theorem1-eq26", 0.4, 0.5, 5e-3),
        skipped_check("additivity-n2", "not requested"),
    ]


def sample_report() -> CapacityReport:
    return CapacityReport(
        q1_raw=-0.25,
        p1_raw=0.125,
        eta=0.0,
        q_diagnostics=[RestartRecord(index=0, seed=None, value=-0.25, iterations=0, success=True, message="candidate")],
    )


def test_fmt_values() -> None:
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(None) == "-"
    assert fmt(True) == "yes"
    assert fmt(3) == "3"


def test_checks_plain_table() -> None:
    lines = render_checks_plain(sample_checks()).splitlines()
    assert lines[0].split() == ["check", "status", "lhs", "rel", "rhs", "tol", "notes"]
    assert lines[2].split()[:4] == ["ineq-12", "pass", "0.5", ">="]
    assert lines[3].split()[:2] == ["theorem1-eq26", "fail"]
    assert lines[4].split()[:2] == ["additivity-n2", "skipped"]
    assert render_checks_plain([]) == "No checks run."


def test_checks_rich_table_renders() -> None:
    console = Console(record=True, width=120, color_system=None)
    console.print(render_checks_rich(sample_checks()))
    text = console.export_text()
    assert "theorem1-eq26" in text
    assert "fail" in text


def test_capacity_report_plain_clips_values() -> None:
    # Purpose: text output shows clipped capacities while JSON keeps raw ones.
    text = render_capacity_report_plain(sample_report(), sample_checks())
    assert "Q1                 0" in text
    assert "P1                 0.125" in text
    assert "Q1 restarts" in text
    assert "theorem1-eq26" in text


def test_capacity_report_json_keeps_raw_values() -> None:
    payload = json.loads(render_capacity_report_json(sample_report()))
    assert payload["q1"] == 0.0
    assert payload["q1_raw"] == -0.25
    assert payload["p1"] == 0.125
    assert payload["eta_max"] is None
    assert payload["diagnostics"]["q1"][0]["message"] == "candidate"
    assert payload["checks"] == []


def test_certificate_renderers() -> None:
    certificate = DegradabilityCertificate(
        verdict="degradable",
        connecting_map=kraus_to_choi(identity_channel(2)),
        residual=0.0,
        iterations=3,
        tolerance=1e-6,
    )
    text = render_certificate_plain(certificate)
    assert "verdict         degradable" in text
    assert "connecting map  2 -> 2" in text
    payload = json.loads(render_certificate_json(certificate))
    assert payload["verdict"] == "degradable"
    assert payload["connecting_map"]["d_in"] == 2


def test_channel_summary_json() -> None:
    payload = json.loads(render_channel_summary_json(describe_channel(erasure_channel(0.5, 2))))
    assert payload["d_env"] == 3
    assert payload["complement"]["verdict"] in ("npt", "ppt-entangled", "ppt-undetected")


def test_sweep_renderers() -> None:
    rows = [SweepRow(value=0.1, q1=0.5, p1=None), SweepRow(value=0.2, q1=0.25, p1=None)]
    lines = render_sweep_plain("p", rows).splitlines()
    assert lines[0].split() == ["p", "Q1", "P1"]
    assert lines[2].split() == ["0.1", "0.5", "-"]
    assert json.loads(render_sweep_json("p", rows)) == [
        {"p": 0.1, "q1": 0.5, "p1": None},
        {"p": 0.2, "q1": 0.25, "p1": None},
    ]
    assert render_sweep_plain("p", []) == "No sweep points."


def test_json_numbers_carry_twelve_significant_digits() -> None:
    checks = json.loads(render_checks_json([make_check("ineq-12", 1 / 3, 2 / 3, 1e-3, "le")]))
    assert checks[0]["lhs"] == 0.333333333333
    assert checks[0]["rhs"] == 0.666666666667
    rows = json.loads(render_sweep_json("p", [SweepRow(value=0.1 + 0.2, q1=2 / 3, p1=float("nan"))]))
    assert rows == [{"p": 0.3, "q1": 0.666666666667, "p1": None}]
