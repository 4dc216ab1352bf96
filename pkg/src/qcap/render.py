"""Renderers for command output in plain, rich and JSON forms."""

from __future__ import annotations

import json
from typing import Any, Iterable, Sequence

import numpy as np

from .harness import ChannelSummary, SweepRow
from .models import (
    CapacityReport,
    DegradabilityCertificate,
    DeltaReport,
    HierarchicalEnsemble,
    QuantumState,
    RestartRecord,
    TheoremCheck,
)
from .storage import REPORT_DIGITS, certificate_payload, report_float

RELATION_SYMBOLS = {"eq": "=", "ge": ">=", "le": "<="}
CHECK_HEADERS = ("check", "status", "lhs", "rel", "rhs", "tol", "notes")
RESTART_HEADERS = ("restart", "seed", "value", "iters", "ok")


def fmt(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{REPORT_DIGITS}g}"
    return str(value)


def _status_style(status: str) -> str:
    return {
        "pass": "green",
        "fail": "bold red",
        "skipped": "dim",
        "degradable": "green",
        "anti-degradable": "green",
        "pd-feasible": "green",
        "infeasible-at-tolerance": "yellow",
        "npt": "cyan",
        "ppt-entangled": "bold magenta",
        "ppt-undetected": "yellow",
    }.get(status, "white")


def _table_plain(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> list[str]:
    widths = [len(name) for name in headers]
    for row in rows:
        widths = [max(width, len(cell)) for width, cell in zip(widths, row)]
    lines = ["  ".join(name.ljust(width) for name, width in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * width for width in widths))
    for row in rows:
        lines.append("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
    return lines


def _fields_plain(fields: Sequence[tuple[str, str]]) -> list[str]:
    width = max((len(name) for name, _ in fields), default=0)
    return [f"{name.ljust(width)}  {value}" for name, value in fields]


def _table_rich(headers: Sequence[str], rows: Sequence[Sequence[str]], status_column: int | None = None):
    from rich import box
    from rich.table import Table
    from rich.text import Text

    table = Table(
        box=box.SIMPLE_HEAVY,
        show_header=True,
        header_style="bold white",
        pad_edge=False,
    )
    for index, name in enumerate(headers):
        table.add_column(name, style="bold" if index == 0 else "", no_wrap=index != len(headers) - 1)
    for row in rows:
        cells: list[str | Text] = list(row)
        if status_column is not None:
            cells[status_column] = Text(row[status_column], style=_status_style(row[status_column]))
        table.add_row(*cells)
    return table


def _fields_rich(title: str, fields: Sequence[tuple[str, str]], highlight: str | None = None):
    from rich.text import Text

    text = Text()
    text.append(title, style="bold bright_white")
    width = max((len(name) for name, _ in fields), default=0)
    for name, value in fields:
        text.append("\n")
        text.append(name.ljust(width), style="bright_black")
        text.append("  ")
        style = _status_style(value) if name == highlight else ""
        text.append(value, style=style)
    return text


def _check_row(check: TheoremCheck) -> list[str]:
    return [
        check.name,
        check.status,
        fmt(check.lhs),
        RELATION_SYMBOLS.get(check.relation, check.relation),
        fmt(check.rhs),
        f"{check.tolerance:g}",
        check.notes,
    ]


def _restart_row(record: RestartRecord) -> list[str]:
    return [
        str(record.index),
        fmt(record.seed),
        fmt(record.value),
        str(record.iterations),
        fmt(record.success),
    ]


def check_payload(check: TheoremCheck) -> dict[str, Any]:
    return {
        "name": check.name,
        "status": check.status,
        "lhs": report_float(check.lhs),
        "rhs": report_float(check.rhs),
        "relation": check.relation,
        "tolerance": report_float(check.tolerance),
        "notes": check.notes,
    }


def render_checks_plain(checks: Iterable[TheoremCheck]) -> str:
    rows = [_check_row(check) for check in checks]
    if not rows:
        return "No checks run."
    return "\n".join(_table_plain(CHECK_HEADERS, rows))


def render_checks_rich(checks: Iterable[TheoremCheck]):
    rows = [_check_row(check) for check in checks]
    if not rows:
        return "No checks run."
    return _table_rich(CHECK_HEADERS, rows, status_column=1)


def render_checks_json(checks: Iterable[TheoremCheck]) -> str:
    return json.dumps([check_payload(check) for check in checks], indent=2)


def _summary_fields(summary: ChannelSummary) -> list[tuple[str, str]]:
    complement = summary.complement
    fields = [
        ("d_in", str(summary.d_in)),
        ("d_out", str(summary.d_out)),
        ("kraus operators", str(summary.num_operators)),
        ("environment dim", str(summary.d_env)),
        ("tp residual", f"{summary.tp_residual:.3e}"),
        ("complement", complement.verdict),
        ("min PT eigenvalue", fmt(complement.min_pt_eigenvalue)),
        ("realignment", fmt(complement.realignment)),
    ]
    if complement.notes:
        fields.append(("notes", complement.notes))
    return fields


def summary_payload(summary: ChannelSummary) -> dict[str, Any]:
    complement = summary.complement
    return {
        "d_in": summary.d_in,
        "d_out": summary.d_out,
        "num_operators": summary.num_operators,
        "d_env": summary.d_env,
        "tp_residual": report_float(summary.tp_residual),
        "complement": {
            "verdict": complement.verdict,
            "min_pt_eigenvalue": report_float(complement.min_pt_eigenvalue),
            "realignment": report_float(complement.realignment),
            "notes": complement.notes,
        },
    }


def render_channel_summary_plain(summary: ChannelSummary) -> str:
    return "\n".join(_fields_plain(_summary_fields(summary)))


def render_channel_summary_rich(summary: ChannelSummary):
    return _fields_rich("Channel", _summary_fields(summary), highlight="complement")


def render_channel_summary_json(summary: ChannelSummary) -> str:
    return json.dumps(summary_payload(summary), indent=2)


def _certificate_fields(certificate: DegradabilityCertificate) -> list[tuple[str, str]]:
    connecting = certificate.connecting_map
    fields = [
        ("verdict", certificate.verdict),
        ("residual", f"{certificate.residual:.3e}"),
        ("tolerance", f"{certificate.tolerance:g}"),
        ("iterations", str(certificate.iterations)),
        ("converged", fmt(certificate.converged)),
        ("restarts", str(certificate.restarts)),
        ("connecting map", f"{connecting.d_in} -> {connecting.d_out}"),
    ]
    if certificate.degradation_map is not None:
        degradation = certificate.degradation_map
        fields.append(("degradation map", f"{degradation.d_in} -> {degradation.d_out}"))
    return fields


def render_certificate_plain(certificate: DegradabilityCertificate) -> str:
    return "\n".join(_fields_plain(_certificate_fields(certificate)))


def render_certificate_rich(certificate: DegradabilityCertificate):
    return _fields_rich("Degradability", _certificate_fields(certificate), highlight="verdict")


def render_certificate_json(certificate: DegradabilityCertificate) -> str:
    return json.dumps(certificate_payload(certificate), indent=2)


def state_payload(state: QuantumState) -> dict[str, Any]:
    spectrum = np.linalg.eigvalsh(state.matrix)[::-1]
    return {
        "dim": state.dim,
        "eigenvalues": [report_float(value) for value in spectrum],
        "matrix": [[[report_float(v.real), report_float(v.imag)] for v in row] for row in state.matrix],
    }


def ensemble_payload(ensemble: HierarchicalEnsemble) -> dict[str, Any]:
    return {
        "outer_probs": [report_float(p) for p in ensemble.outer_probs],
        "inner": [
            {
                "probs": [report_float(p) for p in member.probs],
                "vectors": [
                    [[report_float(v.real), report_float(v.imag)] for v in _leading_vector(state)]
                    for state in member.states
                ],
            }
            for member in ensemble.inner
        ],
    }


def _leading_vector(state: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh(state)
    vector = vectors[:, int(np.argmax(values))]
    lead = vector[int(np.argmax(np.abs(vector)))]
    return vector * (abs(lead) / lead)


def capacity_payload(report: CapacityReport, checks: Sequence[TheoremCheck] = ()) -> dict[str, Any]:
    return {
        "q1": report_float(report.q1),
        "p1": report_float(report.p1),
        "q1_raw": report_float(report.q1_raw),
        "p1_raw": report_float(report.p1_raw),
        "eta": report_float(report.eta),
        "eta_max": report_float(report.eta_max),
        "delta": report_float(report.delta),
        "converged": report.converged,
        "best_state": state_payload(report.best_state) if report.best_state is not None else None,
        "best_input": ensemble_payload(report.best_input) if report.best_input is not None else None,
        "diagnostics": {
            "q1": [_record_payload(record) for record in report.q_diagnostics],
            "p1": [_record_payload(record) for record in report.p_diagnostics],
        },
        "checks": [check_payload(check) for check in [*report.theorem_flags, *checks]],
    }


def _record_payload(record: RestartRecord) -> dict[str, Any]:
    return {
        "index": record.index,
        "seed": record.seed,
        "value": report_float(record.value),
        "iterations": record.iterations,
        "success": record.success,
        "message": record.message,
    }


def _capacity_fields(report: CapacityReport) -> list[tuple[str, str]]:
    fields = []
    if report.q1_raw is not None:
        fields.append(("Q1", fmt(report.q1)))
    if report.p1_raw is not None:
        fields.append(("P1", fmt(report.p1)))
    if report.eta is not None:
        fields.append(("eta at P1 optimum", fmt(report.eta)))
    if report.eta_max is not None:
        fields.append(("eta max", fmt(report.eta_max)))
    if report.delta is not None:
        fields.append(("Delta", fmt(report.delta)))
    fields.append(("converged", fmt(report.converged)))
    return fields


def render_capacity_report_plain(report: CapacityReport, checks: Sequence[TheoremCheck] = ()) -> str:
    lines = _fields_plain(_capacity_fields(report))
    for label, records in (("Q1 restarts", report.q_diagnostics), ("P1 restarts", report.p_diagnostics)):
        if records:
            lines.extend(["", label])
            lines.extend(_table_plain(RESTART_HEADERS, [_restart_row(record) for record in records]))
    all_checks = [*report.theorem_flags, *checks]
    if all_checks:
        lines.extend(["", render_checks_plain(all_checks)])
    return "\n".join(lines)


def render_capacity_report_rich(report: CapacityReport, checks: Sequence[TheoremCheck] = ()):
    from rich.console import Group
    from rich.text import Text

    renderables: list[Any] = [_fields_rich("Capacities", _capacity_fields(report))]
    for label, records in (("Q1 restarts", report.q_diagnostics), ("P1 restarts", report.p_diagnostics)):
        if records:
            renderables.append(Text(""))
            renderables.append(Text(label, style="bold"))
            renderables.append(_table_rich(RESTART_HEADERS, [_restart_row(record) for record in records]))
    all_checks = [*report.theorem_flags, *checks]
    if all_checks:
        renderables.append(Text(""))
        renderables.append(render_checks_rich(all_checks))
    return Group(*renderables)


def render_capacity_report_json(report: CapacityReport, checks: Sequence[TheoremCheck] = ()) -> str:
    return json.dumps(capacity_payload(report, checks), indent=2)


def delta_payload(delta: DeltaReport, checks: Sequence[TheoremCheck] = ()) -> dict[str, Any]:
    low, high = delta.omega_interval
    return {
        "delta": report_float(delta.delta),
        "holevo_gap": report_float(delta.holevo_gap),
        "capacity_gap": report_float(delta.capacity_gap),
        "readings_gap": report_float(delta.readings_gap),
        "p_degradable": report_float(delta.p_degradable),
        "p_partially_degradable": report_float(delta.p_partially_degradable),
        "eve_holevo_degradable": report_float(delta.eve_holevo_degradable),
        "eve_holevo_degraded": report_float(delta.eve_holevo_degraded),
        "omega_interval": [report_float(low), report_float(high)],
        "best_input": ensemble_payload(delta.best_input),
        "checks": [check_payload(check) for check in checks],
    }


def _delta_fields(delta: DeltaReport) -> list[tuple[str, str]]:
    low, high = delta.omega_interval
    return [
        ("Delta", fmt(delta.delta)),
        ("capacity reading", fmt(delta.capacity_gap)),
        ("readings gap", fmt(delta.readings_gap)),
        ("P_D", fmt(delta.p_degradable)),
        ("P_PD", fmt(delta.p_partially_degradable)),
        ("chi to environment", fmt(delta.eve_holevo_degradable)),
        ("chi to degraded env", fmt(delta.eve_holevo_degraded)),
        ("omega interval", f"[{fmt(low)}, {fmt(high)}]"),
    ]


def render_delta_report_plain(delta: DeltaReport, checks: Sequence[TheoremCheck] = ()) -> str:
    lines = _fields_plain(_delta_fields(delta))
    if checks:
        lines.extend(["", render_checks_plain(checks)])
    return "\n".join(lines)


def render_delta_report_rich(delta: DeltaReport, checks: Sequence[TheoremCheck] = ()):
    from rich.console import Group
    from rich.text import Text

    renderables: list[Any] = [_fields_rich("Private capacity gap", _delta_fields(delta))]
    if checks:
        renderables.extend([Text(""), render_checks_rich(checks)])
    return Group(*renderables)


def render_delta_report_json(delta: DeltaReport, checks: Sequence[TheoremCheck] = ()) -> str:
    return json.dumps(delta_payload(delta, checks), indent=2)


def _sweep_rows(rows: Iterable[SweepRow]) -> list[list[str]]:
    return [[fmt(row.value), fmt(row.q1), fmt(row.p1)] for row in rows]


def render_sweep_plain(param: str, rows: Iterable[SweepRow]) -> str:
    rendered = _sweep_rows(rows)
    if not rendered:
        return "No sweep points."
    return "\n".join(_table_plain((param, "Q1", "P1"), rendered))


def render_sweep_rich(param: str, rows: Iterable[SweepRow]):
    rendered = _sweep_rows(rows)
    if not rendered:
        return "No sweep points."
    return _table_rich((param, "Q1", "P1"), rendered)


def render_sweep_json(param: str, rows: Iterable[SweepRow]) -> str:
    payload = [
        {param: report_float(row.value), "q1": report_float(row.q1), "p1": report_float(row.p1)} for row in rows
    ]
    return json.dumps(payload, indent=2)
