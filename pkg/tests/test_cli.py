from __future__ import annotations

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from qcap import harness
from qcap.cli import app
from qcap.harness import make_check
from qcap.storage import CONFIG_FILENAME, write_channel
from qcap.zoo import dephasing_channel

runner = CliRunner()

FAST = ["--restarts", "2", "--max-iters", "300"]


@pytest.fixture(autouse=True)
def _isolated_cwd(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("QCAP_THREADS", raising=False)


def json_output(output: str):
    """JSON document printed after any warning lines."""
    lines = output.splitlines()
    start = next(index for index, line in enumerate(lines) if line.startswith(("{", "[")))
    return json.loads("\n".join(lines[start:]))


def test_validate_builtin() -> None:
    result = runner.invoke(app, ["validate", "--builtin", "erasure:0.5,2"])
    assert result.exit_code == 0
    assert "Valid channel: d_in=2 d_out=3 kraus=3" in result.output


def test_validate_rejects_non_trace_preserving_file(tmp_path: Path) -> None:
    # Purpose: files far from CPTP are input errors and the residual is shown.
    path = tmp_path / "bad.json"
    path.write_text(
        json.dumps(
            {
                "kind": "kraus",
                "d_in": 2,
                "d_out": 2,
                "operators": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]],
            }
        ),
        encoding="utf-8",
    )
    result = runner.invoke(app, ["validate", "--file", str(path)])
    assert result.exit_code == 2
    assert "Error:" in result.output
    assert "residual 7.500e-01" in result.output


def test_channel_source_is_required() -> None:
    result = runner.invoke(app, ["validate"])
    assert result.exit_code == 2
    assert "Provide exactly one channel source" in result.output


def test_unknown_builtin_is_an_input_error() -> None:
    # Purpose: unknown builtin names map to exit code 2, not a traceback.
    result = runner.invoke(app, ["info", "--builtin", "teleporter:0.1"])
    assert result.exit_code == 2
    assert "Error:" in result.output


def test_bad_format_is_rejected() -> None:
    result = runner.invoke(app, ["info", "--builtin", "identity:2", "--format", "xml"])
    assert result.exit_code == 2
    assert "--format must be text or json" in result.output


def test_info_json() -> None:
    result = runner.invoke(app, ["info", "--builtin", "trace_replace:2", "--format", "json"])
    assert result.exit_code == 0
    payload = json_output(result.output)
    assert payload["d_in"] == 2
    assert payload["complement"]["verdict"] == "npt"


def test_complement_writes_channel_file(tmp_path: Path) -> None:
    out = tmp_path / "env.json"
    result = runner.invoke(app, ["complement", "--builtin", "amplitude_damping:0.3", "--out", str(out)])
    assert result.exit_code == 0
    assert "Complementary channel: d_in=2 d_env=2 kraus=2" in result.output
    assert f"Wrote: {out}" in result.output
    assert json.loads(out.read_text(encoding="utf-8"))["d_out"] == 2


def test_degradability_text_and_certificate(tmp_path: Path) -> None:
    out = tmp_path / "cert.json"
    result = runner.invoke(app, ["degradability", "--builtin", "amplitude_damping:0.25", "--out", str(out)])
    assert result.exit_code == 0
    assert "degradable" in result.output
    assert json.loads(out.read_text(encoding="utf-8"))["verdict"] == "degradable"


def test_degradability_with_degradation_map() -> None:
    result = runner.invoke(
        app,
        ["degradability", "--builtin", "dephasing:0.1", "--pd", "--dmap-builtin", "trace_replace:2", "--format", "json"],
    )
    assert result.exit_code == 0
    assert json_output(result.output)["verdict"] == "pd-feasible"


def test_degradability_modes_are_exclusive() -> None:
    result = runner.invoke(app, ["degradability", "--builtin", "identity:2", "--anti", "--search"])
    assert result.exit_code == 2
    assert "at most one of" in result.output
    result = runner.invoke(app, ["degradability", "--builtin", "identity:2", "--pd"])
    assert result.exit_code == 2


def test_capacity_q1_json() -> None:
    result = runner.invoke(
        app,
        ["capacity", "--which", "q1", "--builtin", "dephasing:0.1", *FAST, "--format", "json"],
    )
    assert result.exit_code == 0
    payload = json_output(result.output)
    assert payload["q1"] == pytest.approx(0.531, abs=2e-3)
    assert payload["p1"] is None
    assert len(payload["diagnostics"]["q1"]) == 2


def test_capacity_from_file(tmp_path: Path) -> None:
    path = tmp_path / "dephasing.json"
    write_channel(path, dephasing_channel(0.1))
    result = runner.invoke(app, ["capacity", "--which", "q1", "--file", str(path), *FAST])
    assert result.exit_code == 0
    assert "Q1" in result.output


def test_capacity_sweep_json() -> None:
    result = runner.invoke(
        app,
        ["capacity", "--which", "q1", "--builtin", "erasure:0.1,2", "--sweep", "p=0.25:0.5:0.25", *FAST, "--format", "json"],
    )
    assert result.exit_code == 0
    rows = json_output(result.output)
    assert [row["p"] for row in rows] == [0.25, 0.5]
    assert rows[0]["q1"] == pytest.approx(0.5, abs=1e-3)
    assert rows[1]["q1"] == pytest.approx(0.0, abs=1e-3)


def test_sweep_needs_builtin(tmp_path: Path) -> None:
    path = tmp_path / "dephasing.json"
    write_channel(path, dephasing_channel(0.1))
    result = runner.invoke(app, ["capacity", "--file", str(path), "--sweep", "p=0:0.1:0.1"])
    assert result.exit_code == 2
    assert "--sweep requires --builtin" in result.output


def test_verify_theorem1_passes_for_erasure() -> None:
    result = runner.invoke(app, ["verify", "theorem1", "--builtin", "erasure:0.5,2", *FAST])
    assert result.exit_code == 0
    assert "theorem1-eq26" in result.output
    assert "fail" not in result.output


def test_verify_exits_one_on_failed_check(monkeypatch: pytest.MonkeyPatch) -> None:
    # Purpose: a failed check still prints its report, then exits 1.
    def fake_verify(channel, cfg, **kwargs):
        return [make_check("theorem1-eq26", 0.2, 0.5, 5e-3, notes="P1 = Q1")]

    monkeypatch.setattr(harness, "verify_theorem1", fake_verify)
    result = runner.invoke(app, ["verify", "theorem1", "--builtin", "identity:2", "--format", "json"])
    assert result.exit_code == 1
    assert json_output(result.output)[0]["status"] == "fail"


def test_verify_theorem2_needs_degradation_map() -> None:
    result = runner.invoke(app, ["verify", "theorem2", "--builtin", "dephasing:0.1"])
    assert result.exit_code == 2
    assert "requires --dmap" in result.output


def test_verify_theorem2_with_identity_map() -> None:
    result = runner.invoke(
        app,
        ["verify", "theorem2", "--builtin", "dephasing:0.1", "--dmap-builtin", "identity:2", *FAST, "--format", "json"],
    )
    assert result.exit_code == 0
    payload = json_output(result.output)
    assert payload["delta"] == pytest.approx(0.0, abs=1e-9)
    assert {check["name"] for check in payload["checks"]} == {"delta-nonneg-41", "theorem2-eq43"}


def test_delta_command_reports_gap() -> None:
    result = runner.invoke(
        app,
        ["delta", "--builtin", "dephasing:0.1", "--dmap-builtin", "trace_replace:2", *FAST, "--format", "json"],
    )
    assert result.exit_code == 0
    payload = json_output(result.output)
    assert payload["eve_holevo_degraded"] <= 1e-9
    assert payload["delta"] == pytest.approx(0.469, abs=5e-3)


def test_delta_requires_one_counterpart(tmp_path: Path) -> None:
    # Purpose: the PD counterpart comes from a file or a degradation map, never both.
    path = tmp_path / "pd.json"
    write_channel(path, dephasing_channel(0.1))
    result = runner.invoke(
        app,
        ["delta", "--builtin", "dephasing:0.1", "--channel-pd", str(path), "--dmap-builtin", "identity:2"],
    )
    assert result.exit_code == 2
    assert "exactly one of --channel-pd" in result.output


def test_verify_additivity_rejects_large_input() -> None:
    result = runner.invoke(app, ["verify", "additivity", "--builtin", "identity:5"])
    assert result.exit_code != 0
    assert "additivity check supports input dimension up to 4" in result.output


def test_init_creates_then_updates(tmp_path: Path) -> None:
    first = runner.invoke(app, ["init"])
    assert first.exit_code == 0
    assert f"Created config: {tmp_path / CONFIG_FILENAME}" in first.output
    second = runner.invoke(app, ["init"])
    assert second.exit_code == 0
    assert "Updated config:" in second.output


def test_config_settings_and_warnings(tmp_path: Path) -> None:
    # Purpose: bad settings values warn and fall back while valid ones still apply.
    (tmp_path / CONFIG_FILENAME).write_text(
        "settings:\n  output:\n    format: json\n  optimizer:\n    restarts: many\n",
        encoding="utf-8",
    )
    result = runner.invoke(app, ["info", "--builtin", "identity:2"])
    assert result.exit_code == 0
    assert "Warning: Invalid settings.optimizer.restarts" in result.output
    assert json_output(result.output)["d_env"] == 1


def test_missing_explicit_config_is_an_error(tmp_path: Path) -> None:
    result = runner.invoke(app, ["info", "--builtin", "identity:2", "--config", str(tmp_path / "nope.yaml")])
    assert result.exit_code == 2
    assert "Config file not found" in result.output


def test_invalid_thread_count_warns(monkeypatch: pytest.MonkeyPatch) -> None:
    # Purpose: a bad QCAP_THREADS value warns and runs single-threaded.
    monkeypatch.setenv("QCAP_THREADS", "zero")
    result = runner.invoke(app, ["capacity", "--which", "q1", "--builtin", "identity:2", *FAST])
    assert result.exit_code == 0
    assert "Warning: Invalid QCAP_THREADS='zero'. Using 1 thread." in result.output


def test_capacity_with_theorem1_checks_and_delta() -> None:
    result = runner.invoke(
        app,
        [
            "capacity",
            "--builtin",
            "dephasing:0.1",
            "--dmap-builtin",
            "trace_replace:2",
            "--theorem1",
            *FAST,
            "--format",
            "json",
        ],
    )
    assert result.exit_code == 0
    payload = json_output(result.output)
    assert payload["delta"] == pytest.approx(0.469, abs=5e-3)
    assert {check["name"] for check in payload["checks"]} == {"eq5-identity", "ineq-12", "ineq-24", "theorem1-eq26"}


def test_theorem1_flag_needs_both_capacities() -> None:
    result = runner.invoke(app, ["capacity", "--which", "q1", "--builtin", "identity:2", "--theorem1"])
    assert result.exit_code == 2
    assert "--theorem1 requires --which both" in result.output
