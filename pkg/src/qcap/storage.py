"""Channel and certificate files, and the ``qcap.yaml`` settings file."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Callable, Literal

import numpy as np
import yaml

from .channels import choi_array, kraus_from_choi_array
from .degradability import polish_cptp
from .models import (
    FILE_TOL,
    ChannelFileError,
    ChoiMatrix,
    ConfigError,
    DegradabilityCertificate,
    InvalidParamsError,
    KrausChannel,
    OptimizerConfig,
    Settings,
    tp_residual,
)

CONFIG_FILENAME = "qcap.yaml"
CHANNEL_KINDS = ("kraus", "choi")
OUTPUT_FORMATS = ("text", "json")
REPORT_DIGITS = 12

# section -> key -> (type, minimum or None, nullable)
SETTINGS_SCHEMA: dict[str, dict[str, tuple[type, float | None, bool]]] = {
    "optimizer": {
        "restarts": (int, 1, False),
        "max_iters": (int, 1, False),
        "tol": (float, 0.0, False),
        "seed": (int, None, False),
        "outer_size": (int, 1, True),
        "inner_size": (int, 1, True),
    },
    "degradability": {
        "tol": (float, 0.0, False),
        "max_iters": (int, 1, False),
        "restarts": (int, 1, False),
    },
    "checks": {
        "equality_tol": (float, 0.0, False),
        "inequality_tol": (float, 0.0, False),
    },
    "output": {
        "format": (str, None, False),
    },
}


def report_float(value: float | None) -> float | None:
    """Reported scalar rounded to REPORT_DIGITS significant digits; non-finite values become None."""
    if value is None or not math.isfinite(value):
        return None
    return float(f"{float(value):.{REPORT_DIGITS}g}")


def encode_matrix(matrix: np.ndarray) -> list[list[list[float]]]:
    return [[[float(value.real), float(value.imag)] for value in row] for row in np.asarray(matrix)]


def decode_matrix(payload: Any, rows: int, cols: int, label: str) -> np.ndarray:
    try:
        arr = np.array(payload, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ChannelFileError(f"{label} is not a nested list of [re, im] pairs") from exc
    if arr.shape != (rows, cols, 2):
        raise ChannelFileError(f"{label} has shape {arr.shape[:-1] if arr.ndim else ()}, expected ({rows}, {cols})")
    if not np.all(np.isfinite(arr)):
        raise ChannelFileError(f"{label} has non-finite entries")
    return arr[..., 0] + 1j * arr[..., 1]


def channel_payload(channel: KrausChannel, kind: Literal["kraus", "choi"] = "kraus") -> dict[str, Any]:
    payload: dict[str, Any] = {"kind": kind, "d_in": channel.d_in, "d_out": channel.d_out}
    if kind == "kraus":
        payload["operators"] = [encode_matrix(op) for op in channel.operators]
    else:
        payload["matrix"] = encode_matrix(choi_array(channel.operators))
    return payload


def write_channel(path: Path, channel: KrausChannel, kind: Literal["kraus", "choi"] = "kraus") -> None:
    path.write_text(json.dumps(channel_payload(channel, kind), indent=2) + "\n", encoding="utf-8")


def _positive_int(payload: dict[str, Any], key: str) -> int:
    value = payload.get(key)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ChannelFileError(f"'{key}' must be a positive integer")
    return value


def _kraus_from_payload(payload: dict[str, Any], d_in: int, d_out: int) -> KrausChannel:
    operators = payload.get("operators")
    if not isinstance(operators, list) or not operators:
        raise ChannelFileError("'operators' must be a non-empty list")
    ops = np.stack(
        [decode_matrix(op, d_out, d_in, f"operator {index}") for index, op in enumerate(operators)]
    )
    residual = tp_residual(ops)
    if residual > FILE_TOL:
        raise ChannelFileError(f"Kraus operators are not trace preserving (residual {residual:.3e})", residual)
    gram = np.einsum("kai,kaj->ij", ops.conj(), ops)
    values, vectors = np.linalg.eigh((gram + gram.conj().T) / 2)
    ops = ops @ ((vectors / np.sqrt(values)) @ vectors.conj().T)
    return KrausChannel(ops)


def _choi_from_payload(payload: dict[str, Any], d_in: int, d_out: int) -> KrausChannel:
    size = d_in * d_out
    matrix = decode_matrix(payload.get("matrix"), size, size, "'matrix'")
    asym = float(np.linalg.norm(matrix - matrix.conj().T))
    matrix = (matrix + matrix.conj().T) / 2
    negativity = max(0.0, -float(np.linalg.eigvalsh(matrix)[0]))
    marginal = np.einsum("iaja->ij", matrix.reshape(d_in, d_out, d_in, d_out))
    tp = float(np.linalg.norm(marginal - np.eye(d_in)))
    residual = max(asym, negativity, tp)
    if residual > FILE_TOL:
        raise ChannelFileError(f"Choi matrix is not CPTP (residual {residual:.3e})", residual)
    polished = polish_cptp(matrix, d_in, d_out)
    return KrausChannel(kraus_from_choi_array(polished, d_in, d_out))


def parse_channel(payload: Any) -> KrausChannel:
    """Channel from a decoded JSON document.

    Maps within the file tolerance of CPTP are snapped onto an exactly
    CPTP channel; anything further out is rejected with its residual.
    """
    if not isinstance(payload, dict):
        raise ChannelFileError("channel document must be a JSON object")
    kind = payload.get("kind")
    if kind not in CHANNEL_KINDS:
        raise ChannelFileError(f"'kind' must be one of {', '.join(CHANNEL_KINDS)}")
    d_in = _positive_int(payload, "d_in")
    d_out = _positive_int(payload, "d_out")
    if kind == "kraus":
        return _kraus_from_payload(payload, d_in, d_out)
    return _choi_from_payload(payload, d_in, d_out)


def read_channel(path: Path) -> KrausChannel:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ChannelFileError(f"Unable to read channel file {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelFileError(f"Channel file {path} is not valid JSON: {exc}") from exc
    try:
        return parse_channel(payload)
    except ChannelFileError as exc:
        raise ChannelFileError(f"{path}: {exc}", exc.residual) from exc


def choi_payload(choi: ChoiMatrix) -> dict[str, Any]:
    return {"kind": "choi", "d_in": choi.d_in, "d_out": choi.d_out, "matrix": encode_matrix(choi.matrix)}


def certificate_payload(certificate: DegradabilityCertificate) -> dict[str, Any]:
    return {
        "verdict": certificate.verdict,
        "residual": report_float(certificate.residual),
        "iterations": certificate.iterations,
        "tolerance": report_float(certificate.tolerance),
        "converged": certificate.converged,
        "restarts": certificate.restarts,
        "connecting_map": choi_payload(certificate.connecting_map),
        "degradation_map": (
            choi_payload(certificate.degradation_map) if certificate.degradation_map is not None else None
        ),
    }


def write_certificate(path: Path, certificate: DegradabilityCertificate) -> None:
    path.write_text(json.dumps(certificate_payload(certificate), indent=2) + "\n", encoding="utf-8")


def discover_config(start: Path) -> Path | None:
    start = start.resolve()
    for candidate in [start, *start.parents]:
        path = candidate / CONFIG_FILENAME
        if path.is_file():
            return path
    return None


def default_config() -> dict[str, Any]:
    defaults = Settings()
    optimizer = defaults.optimizer
    return {
        "settings": {
            "optimizer": {
                "restarts": optimizer.restarts,
                "max_iters": optimizer.max_iters,
                "tol": optimizer.tol,
                "seed": optimizer.seed,
                "outer_size": optimizer.outer_size,
                "inner_size": optimizer.inner_size,
            },
            "degradability": {
                "tol": defaults.degradability_tol,
                "max_iters": defaults.degradability_max_iters,
                "restarts": defaults.degradability_restarts,
            },
            "checks": {
                "equality_tol": defaults.equality_tol,
                "inequality_tol": defaults.inequality_tol,
            },
            "output": {"format": defaults.output_format},
        }
    }


def read_config(path: Path, warn: Callable[[str], None] | None = None) -> dict[str, Any]:
    if not path.exists():
        return {}
    try:
        payload = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except Exception:
        if warn is not None:
            warn(f"Unable to parse config at {path}. Falling back to defaults.")
        return {}
    if not isinstance(payload, dict):
        if warn is not None:
            warn(f"Invalid config format at {path}. Falling back to defaults.")
        return {}
    return payload


def write_config(path: Path, payload: dict[str, Any]) -> None:
    path.write_text(yaml.safe_dump(payload, sort_keys=False, default_flow_style=False), encoding="utf-8")


def upsert_init_config(path: Path) -> Literal["created", "updated"]:
    """Write default settings, keeping values already present in the file."""
    exists = path.exists()
    existing = read_config(path) if exists else {}
    merged = dict(existing) if isinstance(existing, dict) else {}
    current = merged.get("settings")
    current = dict(current) if isinstance(current, dict) else {}
    for section, values in default_config()["settings"].items():
        present = current.get(section)
        present = dict(present) if isinstance(present, dict) else {}
        current[section] = {**values, **present}
    merged["settings"] = current
    write_config(path, merged)
    return "updated" if exists else "created"


def _validated(
    section: str,
    key: str,
    raw: Any,
    default: Any,
    path: Path,
    warn: Callable[[str], None] | None,
) -> Any:
    kind, minimum, nullable = SETTINGS_SCHEMA[section][key]
    if raw is None:
        return None if nullable else default
    valid = True
    value = raw
    if kind is int:
        valid = isinstance(raw, int) and not isinstance(raw, bool)
    elif kind is float:
        valid = isinstance(raw, (int, float)) and not isinstance(raw, bool)
        value = float(raw) if valid else raw
    elif kind is str:
        valid = isinstance(raw, str) and (section != "output" or raw in OUTPUT_FORMATS)
    if valid and minimum is not None:
        valid = value > minimum if kind is float else value >= minimum
    if not valid:
        if warn is not None:
            warn(f"Invalid settings.{section}.{key} in {path}. Using default '{default}'.")
        return default
    return value


def resolve_settings(path: Path | None, warn: Callable[[str], None] | None = None) -> Settings:
    """Settings from ``path`` with per-key fallback to defaults."""
    if path is None:
        return Settings()
    data = read_config(path, warn=warn)
    for key in data:
        if key != "settings" and warn is not None:
            warn(f"Unsupported config key '{key}' in {path}. Ignoring.")
    settings = data.get("settings", {})
    if not isinstance(settings, dict):
        if warn is not None:
            warn(f"Invalid settings section in {path}. Using defaults.")
        settings = {}

    defaults = default_config()["settings"]
    resolved: dict[str, dict[str, Any]] = {}
    for section, section_defaults in defaults.items():
        raw_section = settings.get(section, {})
        if raw_section is None:
            raw_section = {}
        if not isinstance(raw_section, dict):
            if warn is not None:
                warn(f"Invalid settings.{section} section in {path}. Using defaults.")
            raw_section = {}
        for key in raw_section:
            if key not in section_defaults and warn is not None:
                warn(f"Unsupported settings.{section} key '{key}' in {path}. Ignoring.")
        resolved[section] = {
            key: _validated(section, key, raw_section.get(key, default), default, path, warn)
            for key, default in section_defaults.items()
        }
    for key in settings:
        if key not in defaults and warn is not None:
            warn(f"Unsupported settings key '{key}' in {path}. Ignoring.")

    try:
        optimizer = OptimizerConfig(**resolved["optimizer"])
    except InvalidParamsError as exc:
        raise ConfigError(f"Invalid optimizer settings in {path}: {exc}") from exc
    return Settings(
        optimizer=optimizer,
        degradability_tol=resolved["degradability"]["tol"],
        degradability_max_iters=resolved["degradability"]["max_iters"],
        degradability_restarts=resolved["degradability"]["restarts"],
        equality_tol=resolved["checks"]["equality_tol"],
        inequality_tol=resolved["checks"]["inequality_tol"],
        output_format=resolved["output"]["format"],
    )
