"""Built-in channel zoo and ``name:params`` spec parsing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Mapping, Sequence

import numpy as np

from .channels import kraus_from_choi_array
from .entanglement import classify_complementary, filter_normal_form, tiles_state
from .models import (
    ConstructionFailedError,
    InvalidParamsError,
    KrausChannel,
    QcapInputError,
    UnknownChannelError,
)

ParamKind = Literal["int", "prob", "real"]


@dataclass(frozen=True, slots=True)
class ParamSpec:
    name: str
    kind: ParamKind
    default: float | None = None
    low: float | None = None
    high: float | None = None
    optional: bool = False


@dataclass(frozen=True, slots=True)
class BuiltinSpec:
    name: str
    params: tuple[ParamSpec, ...]
    factory: Callable[..., KrausChannel]
    summary: str


def identity_channel(d: int = 2) -> KrausChannel:
    return KrausChannel(np.eye(d, dtype=np.complex128)[np.newaxis])


def dephasing_channel(p: float) -> KrausChannel:
    pauli_z = np.diag([1.0, -1.0]).astype(np.complex128)
    return KrausChannel(np.stack([np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * pauli_z]))


def _weyl_operators(d: int) -> list[np.ndarray]:
    shift = np.roll(np.eye(d, dtype=np.complex128), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return [
        np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
        for a in range(d)
        for b in range(d)
    ]


def depolarizing_channel(d: int, p: float) -> KrausChannel:
    """rho -> (1 - p) rho + p I/d, via the d^2 Weyl operators."""
    weights = np.full(d * d, p / (d * d))
    weights[0] += 1 - p
    return KrausChannel(np.stack([np.sqrt(w) * op for w, op in zip(weights, _weyl_operators(d))]))


def amplitude_damping_channel(gamma: float) -> KrausChannel:
    return KrausChannel(
        np.array(
            [
                [[1.0, 0.0], [0.0, np.sqrt(1 - gamma)]],
                [[0.0, np.sqrt(gamma)], [0.0, 0.0]],
            ],
            dtype=np.complex128,
        )
    )


def erasure_channel(p: float, d: int = 2) -> KrausChannel:
    """Output dimension d + 1; basis state d flags the erasure."""
    keep = np.zeros((d + 1, d), dtype=np.complex128)
    keep[:d, :d] = np.eye(d)
    ops = [np.sqrt(1 - p) * keep]
    for i in range(d):
        flag = np.zeros((d + 1, d), dtype=np.complex128)
        flag[d, i] = np.sqrt(p)
        ops.append(flag)
    return KrausChannel(np.stack(ops))


def trace_replace_channel(d: int = 2, d_out: int | None = None) -> KrausChannel:
    """Discard the input and prepare |0><0| in dimension ``d_out``."""
    d_out = d if d_out is None else d_out
    ops = np.zeros((d, d_out, d), dtype=np.complex128)
    for i in range(d):
        ops[i, 0, i] = 1.0
    return KrausChannel(ops)


def tiles_complement_channel() -> KrausChannel:
    """Qutrit channel whose complementary Choi state is a filtered tiles bound entangled state.

    The tiles state is brought to filter normal form so that three times it is a
    CPTP Choi matrix M; the channel returned is the complement of M. The
    construction is checked by classifying its complement.
    """
    try:
        state = filter_normal_form(tiles_state(), (3, 3))
        environment_ops = kraus_from_choi_array(3 * state, 3, 3)
        channel = KrausChannel(environment_ops.transpose(1, 0, 2))
    except QcapInputError as exc:
        raise ConstructionFailedError(f"tiles_complement construction failed: {exc}") from exc
    classification = classify_complementary(channel)
    if classification.verdict != "ppt-entangled":
        raise ConstructionFailedError(
            "tiles_complement failed validation: complementary Choi classified "
            f"'{classification.verdict}' (min PT eigenvalue {classification.min_pt_eigenvalue:.3e}, "
            f"realignment {classification.realignment:.6f})"
        )
    return channel


BUILTINS: dict[str, BuiltinSpec] = {
    spec.name: spec
    for spec in (
        BuiltinSpec("identity", (ParamSpec("d", "int", 2, 1),), identity_channel, "identity on C^d"),
        BuiltinSpec("dephasing", (ParamSpec("p", "prob"),), dephasing_channel, "qubit dephasing with Z-flip probability p"),
        BuiltinSpec(
            "depolarizing",
            (ParamSpec("d", "int", None, 1), ParamSpec("p", "real", None, 0.0)),
            depolarizing_channel,
            "(1-p) rho + p I/d",
        ),
        BuiltinSpec(
            "amplitude_damping",
            (ParamSpec("gamma", "prob"),),
            amplitude_damping_channel,
            "qubit amplitude damping with decay probability gamma",
        ),
        BuiltinSpec(
            "erasure",
            (ParamSpec("p", "prob"), ParamSpec("d", "int", 2, 1)),
            erasure_channel,
            "erasure with probability p into dimension d+1",
        ),
        BuiltinSpec(
            "trace_replace",
            (ParamSpec("d", "int", 2, 1), ParamSpec("d_out", "int", None, 1, optional=True)),
            trace_replace_channel,
            "discard the input and prepare |0>",
        ),
        BuiltinSpec(
            "tiles_complement",
            (),
            tiles_complement_channel,
            "qutrit channel with a PPT entangled complementary Choi state",
        ),
    )
}


def _coerce(spec: BuiltinSpec, param: ParamSpec, raw: float) -> float | int:
    value = float(raw)
    if not np.isfinite(value):
        raise InvalidParamsError(f"{spec.name}: parameter '{param.name}' must be finite")
    if param.kind == "int":
        if value != round(value):
            raise InvalidParamsError(f"{spec.name}: parameter '{param.name}' must be an integer, got {raw}")
        value = int(round(value))
    if param.kind == "prob" and not 0.0 <= value <= 1.0:
        raise InvalidParamsError(f"{spec.name}: parameter '{param.name}' must lie in [0, 1], got {raw}")
    if param.low is not None and value < param.low:
        raise InvalidParamsError(f"{spec.name}: parameter '{param.name}' must be at least {param.low:g}, got {raw}")
    if param.high is not None and value > param.high:
        raise InvalidParamsError(f"{spec.name}: parameter '{param.name}' must be at most {param.high:g}, got {raw}")
    return value


def resolve_params(name: str, params: Sequence[float] | Mapping[str, float] = ()) -> dict[str, float | int]:
    spec = BUILTINS.get(name)
    if spec is None:
        raise UnknownChannelError(f"Unknown builtin channel '{name}'. Known: {', '.join(sorted(BUILTINS))}")
    if isinstance(params, Mapping):
        known = {param.name for param in spec.params}
        for key in params:
            if key not in known:
                raise InvalidParamsError(f"{name}: unknown parameter '{key}'")
        supplied = dict(params)
    else:
        values = list(params)
        if len(values) > len(spec.params):
            raise InvalidParamsError(f"{name} takes at most {len(spec.params)} parameters, got {len(values)}")
        supplied = {param.name: value for param, value in zip(spec.params, values)}
    resolved: dict[str, float | int] = {}
    for param in spec.params:
        if param.name in supplied:
            resolved[param.name] = _coerce(spec, param, supplied[param.name])
        elif param.default is not None:
            resolved[param.name] = param.default
        elif not param.optional:
            raise InvalidParamsError(f"{name}: missing parameter '{param.name}'")
    if name == "depolarizing":
        d = int(resolved["d"])
        limit = d * d / (d * d - 1) if d > 1 else np.inf
        if resolved["p"] > limit:
            raise InvalidParamsError(f"depolarizing: p must be at most {limit:g} for d={d}")
    return resolved


def builtin(name: str, params: Sequence[float] | Mapping[str, float] = ()) -> KrausChannel:
    resolved = resolve_params(name, params)
    return BUILTINS[name].factory(**resolved)


def parse_builtin_spec(text: str) -> tuple[str, list[float] | dict[str, float]]:
    """Split ``name:1,2`` or ``name:key=value,...`` into a name and parameters."""
    name, _, raw = text.strip().partition(":")
    name = name.strip()
    if not name:
        raise UnknownChannelError(f"Empty builtin channel name in '{text}'")
    raw = raw.strip()
    if not raw:
        return name, []
    items = [item.strip() for item in raw.split(",") if item.strip()]
    named = ["=" in item for item in items]
    if any(named) and not all(named):
        raise InvalidParamsError(f"Mix of positional and named parameters in '{text}'")
    try:
        if all(named):
            return name, {key.strip(): float(value) for key, value in (item.split("=", 1) for item in items)}
        return name, [float(item) for item in items]
    except ValueError as exc:
        raise InvalidParamsError(f"Invalid numeric parameter in '{text}'") from exc


def channel_from_spec(text: str) -> KrausChannel:
    name, params = parse_builtin_spec(text)
    return builtin(name, params)
