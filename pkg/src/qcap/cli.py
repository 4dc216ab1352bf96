"""CLI entrypoint for qcap."""

from __future__ import annotations

import json
from pathlib import Path
import sys
from typing import Annotated, Callable, Literal

import typer

from . import harness, render, storage
from .capacities import compute_delta
from .channels import complementary_channel, degraded_wiretap, wiretap
from .degradability import (
    is_antidegradable,
    is_degradable,
    is_partially_degradable,
    search_degradation_map,
)
from .models import (
    ConfigError,
    InvalidParamsError,
    KrausChannel,
    OptimizerConfig,
    QcapError,
    Settings,
    TheoremCheck,
    tp_residual,
)
from .restarts import resolve_thread_count
from .zoo import channel_from_spec, parse_builtin_spec

OutputFormat = Literal["text", "json"]

BuiltinOption = Annotated[
    str | None,
    typer.Option("--builtin", help="Builtin channel as name:p1,p2 or name:key=value"),
]
FileOption = Annotated[Path | None, typer.Option("--file", help="Channel file (JSON, kraus or choi)")]
TolOption = Annotated[float | None, typer.Option("--tol", help="Solver tolerance")]
RestartsOption = Annotated[int | None, typer.Option("--restarts", help="Optimizer restarts")]
SeedOption = Annotated[int | None, typer.Option("--seed", help="Base seed; restart k uses seed + k")]
MaxItersOption = Annotated[int | None, typer.Option("--max-iters", help="Iteration cap per restart")]
FormatOption = Annotated[
    str | None,
    typer.Option("--format", help="Output format: text or json"),
]
ConfigOption = Annotated[Path | None, typer.Option("--config", help="Explicit qcap.yaml path")]
DmapOption = Annotated[Path | None, typer.Option("--dmap", help="Degradation map channel file")]
DmapBuiltinOption = Annotated[
    str | None,
    typer.Option("--dmap-builtin", help="Degradation map as a builtin spec"),
]

app = typer.Typer(help="Capacity workbench for degradable and partially degradable quantum channels")
verify_app = typer.Typer(help="Run theorem verification pipelines")
app.add_typer(verify_app, name="verify")


def _can_render_rich_output() -> bool:
    return sys.stdout.isatty()


def _print_rich(renderable) -> None:
    from rich.console import Console

    Console().print(renderable)


def _warn(message: str) -> None:
    typer.echo(f"Warning: {message}", err=True)


def _run_and_handle(fn: Callable[[], None]) -> None:
    try:
        fn()
    except QcapError as exc:
        typer.echo(f"Error: {exc}", err=True)
        raise typer.Exit(code=exc.exit_code) from exc


def _settings(config: Path | None) -> Settings:
    if config is not None:
        if not config.is_file():
            raise ConfigError(f"Config file not found: {config}")
        return storage.resolve_settings(config, warn=_warn)
    return storage.resolve_settings(storage.discover_config(Path.cwd()), warn=_warn)


def _optimizer(
    settings: Settings,
    tol: float | None,
    restarts: int | None,
    seed: int | None,
    max_iters: int | None,
) -> OptimizerConfig:
    base = settings.optimizer
    return OptimizerConfig(
        restarts=base.restarts if restarts is None else restarts,
        max_iters=base.max_iters if max_iters is None else max_iters,
        tol=base.tol if tol is None else tol,
        seed=base.seed if seed is None else seed,
        outer_size=base.outer_size,
        inner_size=base.inner_size,
    )


def _output_format(settings: Settings, output_format: str | None) -> OutputFormat:
    if output_format is None:
        return settings.output_format
    if output_format not in storage.OUTPUT_FORMATS:
        raise InvalidParamsError(f"--format must be text or json, got '{output_format}'")
    return output_format  # type: ignore[return-value]


def _load_channel(builtin_spec: str | None, file: Path | None, *, label: str = "channel") -> KrausChannel:
    if (builtin_spec is None) == (file is None):
        raise InvalidParamsError(f"Provide exactly one {label} source: --builtin or --file")
    if builtin_spec is not None:
        return channel_from_spec(builtin_spec)
    return storage.read_channel(file)


def _load_degradation(dmap: Path | None, dmap_builtin: str | None) -> KrausChannel | None:
    if dmap is not None and dmap_builtin is not None:
        raise InvalidParamsError("Use only one of --dmap and --dmap-builtin")
    if dmap is not None:
        return storage.read_channel(dmap)
    if dmap_builtin is not None:
        return channel_from_spec(dmap_builtin)
    return None


def _emit(
    output_format: OutputFormat,
    plain: Callable[[], str],
    rich: Callable[[], object],
    as_json: Callable[[], str],
) -> None:
    if output_format == "json":
        typer.echo(as_json())
    elif _can_render_rich_output():
        _print_rich(rich())
    else:
        typer.echo(plain())


def _exit_on_failed_checks(checks: list[TheoremCheck]) -> None:
    if any(check.status == "fail" for check in checks):
        raise typer.Exit(code=1)


@app.command("validate")
def validate_cmd(
    builtin: BuiltinOption = None,
    file: FileOption = None,
) -> None:
    """Check that a channel is CPTP and report its dimensions."""

    def _inner() -> None:
        channel = _load_channel(builtin, file)
        typer.echo(
            f"Valid channel: d_in={channel.d_in} d_out={channel.d_out} "
            f"kraus={channel.num_operators} tp_residual={tp_residual(channel.operators):.3e}"
        )

    _run_and_handle(_inner)


@app.command("info")
def info_cmd(
    builtin: BuiltinOption = None,
    file: FileOption = None,
    output_format: FormatOption = None,
    config: ConfigOption = None,
) -> None:
    """Show dimensions, environment size and complementary Choi classification."""

    def _inner() -> None:
        settings = _settings(config)
        summary = harness.describe_channel(_load_channel(builtin, file))
        _emit(
            _output_format(settings, output_format),
            lambda: render.render_channel_summary_plain(summary),
            lambda: render.render_channel_summary_rich(summary),
            lambda: render.render_channel_summary_json(summary),
        )

    _run_and_handle(_inner)


@app.command("complement")
def complement_cmd(
    builtin: BuiltinOption = None,
    file: FileOption = None,
    out: Annotated[Path | None, typer.Option("--out", help="Write the complementary channel here")] = None,
    output_format: FormatOption = None,
    config: ConfigOption = None,
) -> None:
    """Compute the complementary channel of the minimal dilation."""

    def _inner() -> None:
        settings = _settings(config)
        environment = complementary_channel(_load_channel(builtin, file))
        if out is not None:
            storage.write_channel(out, environment)
        if _output_format(settings, output_format) == "json":
            typer.echo(json.dumps(storage.channel_payload(environment), indent=2))
            return
        typer.echo(
            f"Complementary channel: d_in={environment.d_in} d_env={environment.d_out} "
            f"kraus={environment.num_operators}"
        )
        if out is not None:
            typer.echo(f"Wrote: {out}")

    _run_and_handle(_inner)


@app.command("degradability")
def degradability_cmd(
    builtin: BuiltinOption = None,
    file: FileOption = None,
    anti: Annotated[bool, typer.Option("--anti", help="Test anti-degradability")] = False,
    pd: Annotated[bool, typer.Option("--pd", help="Test partial degradability for a given map")] = False,
    dmap: DmapOption = None,
    dmap_builtin: DmapBuiltinOption = None,
    search: Annotated[bool, typer.Option("--search", help="Search for a degradation map")] = False,
    denv: Annotated[int | None, typer.Option("--denv", help="Degraded environment dimension")] = None,
    out: Annotated[Path | None, typer.Option("--out", help="Write the certificate here")] = None,
    tol: TolOption = None,
    restarts: RestartsOption = None,
    seed: SeedOption = None,
    max_iters: MaxItersOption = None,
    output_format: FormatOption = None,
    config: ConfigOption = None,
) -> None:
    """Certify degradability, anti-degradability or partial degradability."""

    def _inner() -> None:
        settings = _settings(config)
        modes = sum([anti, pd, search])
        if modes > 1:
            raise InvalidParamsError("Use at most one of --anti, --pd and --search")
        channel = _load_channel(builtin, file)
        solver_tol = settings.degradability_tol if tol is None else tol
        iters = settings.degradability_max_iters if max_iters is None else max_iters
        if pd:
            degradation = _load_degradation(dmap, dmap_builtin)
            if degradation is None:
                raise InvalidParamsError("--pd requires --dmap or --dmap-builtin")
            certificate = is_partially_degradable(channel, degradation, solver_tol, iters)
        elif search:
            if denv is None:
                raise InvalidParamsError("--search requires --denv")
            certificate = search_degradation_map(
                channel,
                denv,
                solver_tol,
                settings.degradability_restarts if restarts is None else restarts,
                iters,
                seed=settings.optimizer.seed if seed is None else seed,
                threads=resolve_thread_count(warn=_warn),
                warn=_warn,
            )
        elif anti:
            certificate = is_antidegradable(channel, solver_tol, iters)
        else:
            certificate = is_degradable(channel, solver_tol, iters)
        if not certificate.converged:
            _warn("Solver stopped at the iteration cap; residual is the best found.")
        if out is not None:
            storage.write_certificate(out, certificate)
        _emit(
            _output_format(settings, output_format),
            lambda: render.render_certificate_plain(certificate),
            lambda: render.render_certificate_rich(certificate),
            lambda: render.render_certificate_json(certificate),
        )

    _run_and_handle(_inner)


@app.command("capacity")
def capacity_cmd(
    builtin: BuiltinOption = None,
    file: FileOption = None,
    which: Annotated[
        Literal["q1", "p1", "both"],
        typer.Option("--which", help="Quantity to estimate: q1, p1 or both"),
    ] = "both",
    sweep: Annotated[
        str | None,
        typer.Option("--sweep", help="Vary a builtin parameter: NAME=start:stop:step"),
    ] = None,
    dmap: DmapOption = None,
    dmap_builtin: DmapBuiltinOption = None,
    theorem1: Annotated[bool, typer.Option("--theorem1", help="Attach the P1 = Q1 checks")] = False,
    tol: TolOption = None,
    restarts: RestartsOption = None,
    seed: SeedOption = None,
    max_iters: MaxItersOption = None,
    output_format: FormatOption = None,
    config: ConfigOption = None,
) -> None:
    """Estimate the single-letter quantum and private capacities."""
    checks: list[TheoremCheck] = []

    def _inner() -> None:
        settings = _settings(config)
        cfg = _optimizer(settings, tol, restarts, seed, max_iters)
        fmt = _output_format(settings, output_format)
        threads = resolve_thread_count(warn=_warn)
        degradation = _load_degradation(dmap, dmap_builtin)
        if sweep is not None:
            if builtin is None or file is not None:
                raise InvalidParamsError("--sweep requires --builtin")
            if degradation is not None or theorem1:
                raise InvalidParamsError("--sweep cannot be combined with --dmap or --theorem1")
            name, params = parse_builtin_spec(builtin)
            param, _ = harness.parse_sweep(sweep)
            rows = harness.sweep(name, params, sweep, cfg, which, threads=threads)
            _emit(
                fmt,
                lambda: render.render_sweep_plain(param, rows),
                lambda: render.render_sweep_rich(param, rows),
                lambda: render.render_sweep_json(param, rows),
            )
            return
        channel = _load_channel(builtin, file)
        if theorem1:
            if which != "both":
                raise InvalidParamsError("--theorem1 requires --which both")
            report = harness.theorem1_report(
                channel,
                cfg,
                equality_tol=settings.equality_tol,
                inequality_tol=settings.inequality_tol,
                degradation=degradation,
                threads=threads,
                warn=_warn,
            )
            checks.extend(report.theorem_flags)
        else:
            report = harness.capacity_report(
                channel, cfg, which, degradation=degradation, threads=threads, warn=_warn
            )
        _emit(
            fmt,
            lambda: render.render_capacity_report_plain(report),
            lambda: render.render_capacity_report_rich(report),
            lambda: render.render_capacity_report_json(report),
        )

    _run_and_handle(_inner)
    _exit_on_failed_checks(checks)


@app.command("delta")
def delta_cmd(
    builtin: BuiltinOption = None,
    file: FileOption = None,
    channel_d: Annotated[Path | None, typer.Option("--channel-d", help="Degradable channel file")] = None,
    channel_pd: Annotated[
        Path | None,
        typer.Option("--channel-pd", help="Partially degradable channel file"),
    ] = None,
    dmap: DmapOption = None,
    dmap_builtin: DmapBuiltinOption = None,
    tol: TolOption = None,
    restarts: RestartsOption = None,
    seed: SeedOption = None,
    max_iters: MaxItersOption = None,
    output_format: FormatOption = None,
    config: ConfigOption = None,
) -> None:
    """Compute the private-rate gap Delta between N_D and its PD counterpart."""

    def _inner() -> None:
        settings = _settings(config)
        cfg = _optimizer(settings, tol, restarts, seed, max_iters)
        if channel_d is not None and (builtin is not None or file is not None):
            raise InvalidParamsError("Use --channel-d or --builtin/--file for N_D, not both")
        degradable = _load_channel(builtin, channel_d if channel_d is not None else file, label="N_D")
        degradation = _load_degradation(dmap, dmap_builtin)
        if (channel_pd is None) == (degradation is None):
            raise InvalidParamsError("Provide exactly one of --channel-pd or a degradation map")
        if degradation is not None:
            counterpart = degraded_wiretap(degradable, degradation, label="pd")
        else:
            counterpart = wiretap(storage.read_channel(channel_pd), label="pd")
        delta = compute_delta(degradable, counterpart, cfg, threads=resolve_thread_count(warn=_warn))
        _emit(
            _output_format(settings, output_format),
            lambda: render.render_delta_report_plain(delta),
            lambda: render.render_delta_report_rich(delta),
            lambda: render.render_delta_report_json(delta),
        )

    _run_and_handle(_inner)


def _emit_checks(output_format: OutputFormat, checks: list[TheoremCheck]) -> None:
    _emit(
        output_format,
        lambda: render.render_checks_plain(checks),
        lambda: render.render_checks_rich(checks),
        lambda: render.render_checks_json(checks),
    )


@verify_app.command("theorem1")
def verify_theorem1_cmd(
    builtin: BuiltinOption = None,
    file: FileOption = None,
    tol: TolOption = None,
    restarts: RestartsOption = None,
    seed: SeedOption = None,
    max_iters: MaxItersOption = None,
    output_format: FormatOption = None,
    config: ConfigOption = None,
) -> None:
    """Check P1 = Q1 and the coherent-information identity."""
    checks: list[TheoremCheck] = []

    def _inner() -> None:
        settings = _settings(config)
        cfg = _optimizer(settings, tol, restarts, seed, max_iters)
        channel = _load_channel(builtin, file)
        checks.extend(
            harness.verify_theorem1(
                channel,
                cfg,
                equality_tol=settings.equality_tol,
                inequality_tol=settings.inequality_tol,
                threads=resolve_thread_count(warn=_warn),
                warn=_warn,
            )
        )
        _emit_checks(_output_format(settings, output_format), checks)

    _run_and_handle(_inner)
    _exit_on_failed_checks(checks)


@verify_app.command("theorem2")
def verify_theorem2_cmd(
    builtin: BuiltinOption = None,
    file: FileOption = None,
    dmap: DmapOption = None,
    dmap_builtin: DmapBuiltinOption = None,
    tol: TolOption = None,
    restarts: RestartsOption = None,
    seed: SeedOption = None,
    max_iters: MaxItersOption = None,
    output_format: FormatOption = None,
    config: ConfigOption = None,
) -> None:
    """Check Delta >= 0 and P_PD = P_D + Delta for a degradation map."""
    checks: list[TheoremCheck] = []

    def _inner() -> None:
        settings = _settings(config)
        cfg = _optimizer(settings, tol, restarts, seed, max_iters)
        channel = _load_channel(builtin, file)
        degradation = _load_degradation(dmap, dmap_builtin)
        if degradation is None:
            raise InvalidParamsError("verify theorem2 requires --dmap or --dmap-builtin")
        delta, found = harness.theorem2_report(
            channel,
            degradation,
            cfg,
            equality_tol=settings.equality_tol,
            inequality_tol=settings.inequality_tol,
            threads=resolve_thread_count(warn=_warn),
        )
        checks.extend(found)
        _emit(
            _output_format(settings, output_format),
            lambda: render.render_delta_report_plain(delta, checks),
            lambda: render.render_delta_report_rich(delta, checks),
            lambda: render.render_delta_report_json(delta, checks),
        )

    _run_and_handle(_inner)
    _exit_on_failed_checks(checks)


@verify_app.command("additivity")
def verify_additivity_cmd(
    builtin: BuiltinOption = None,
    file: FileOption = None,
    tol: TolOption = None,
    restarts: RestartsOption = None,
    seed: SeedOption = None,
    max_iters: MaxItersOption = None,
    output_format: FormatOption = None,
    config: ConfigOption = None,
) -> None:
    """Compare Q1 of two copies per use with Q1 of one copy."""
    checks: list[TheoremCheck] = []

    def _inner() -> None:
        settings = _settings(config)
        cfg = _optimizer(settings, tol, restarts, seed, max_iters)
        channel = _load_channel(builtin, file)
        checks.append(
            harness.additivity_check(
                channel,
                cfg,
                equality_tol=settings.equality_tol,
                threads=resolve_thread_count(warn=_warn),
            )
        )
        _emit_checks(_output_format(settings, output_format), checks)

    _run_and_handle(_inner)
    _exit_on_failed_checks(checks)


@app.command("init")
def init_cmd(config: ConfigOption = None) -> None:
    """Write default settings to qcap.yaml, keeping existing values."""

    def _inner() -> None:
        path = config if config is not None else Path.cwd() / storage.CONFIG_FILENAME
        outcome = storage.upsert_init_config(path)
        label = "Created" if outcome == "created" else "Updated"
        typer.echo(f"{label} config: {path}")

    _run_and_handle(_inner)


def main() -> None:
    app()


if __name__ == "__main__":
    main()
