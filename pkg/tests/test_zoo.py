from __future__ import annotations

import numpy as np
import pytest

from qcap.channels import complementary_channel
from qcap.models import InvalidParamsError, KrausChannel, UnknownChannelError
from qcap.zoo import (
    BUILTINS,
    builtin,
    channel_from_spec,
    parse_builtin_spec,
    resolve_params,
)


def test_identity_has_single_operator() -> None:
    channel = builtin("identity", [2])
    assert channel.num_operators == 1
    assert np.allclose(channel.operators[0], np.eye(2))


def test_dephasing_operators() -> None:
    ops = builtin("dephasing", [0.1]).operators
    assert np.allclose(ops[0], np.sqrt(0.9) * np.eye(2))
    assert np.allclose(ops[1], np.sqrt(0.1) * np.diag([1.0, -1.0]))


def test_erasure_outputs_flag_dimension() -> None:
    channel = builtin("erasure", [0.5, 2])
    assert channel.num_operators == 3
    assert (channel.d_out, channel.d_in) == (3, 2)


def test_depolarizing_acts_as_expected() -> None:
    channel = builtin("depolarizing", {"d": 3, "p": 0.4})
    rho = np.diag([1.0, 0.0, 0.0]).astype(np.complex128)
    out = np.einsum("kai,ij,kbj->ab", channel.operators, rho, channel.operators.conj())
    assert np.allclose(out, 0.6 * rho + 0.4 * np.eye(3) / 3)


def test_depolarizing_rejects_p_above_limit() -> None:
    with pytest.raises(InvalidParamsError):
        builtin("depolarizing", [2, 1.4])


def test_probability_outside_unit_interval_is_rejected() -> None:
    with pytest.raises(InvalidParamsError):
        builtin("dephasing", [1.5])


def test_missing_and_extra_parameters() -> None:
    with pytest.raises(InvalidParamsError):
        builtin("dephasing")
    with pytest.raises(InvalidParamsError):
        builtin("amplitude_damping", [0.1, 0.2])
    with pytest.raises(InvalidParamsError):
        builtin("dephasing", {"q": 0.1})


def test_unknown_builtin() -> None:
    with pytest.raises(UnknownChannelError):
        builtin("teleporter", [0.1])


def test_integer_parameters_must_be_whole() -> None:
    # Purpose: dimensions given as 2.5 are rejected rather than truncated.
    with pytest.raises(InvalidParamsError):
        builtin("identity", [2.5])


def test_defaults_fill_optional_parameters() -> None:
    assert resolve_params("erasure", [0.3]) == {"p": 0.3, "d": 2}
    assert resolve_params("trace_replace", []) == {"d": 2}
    channel = builtin("trace_replace", {"d": 2, "d_out": 3})
    assert (channel.d_in, channel.d_out) == (2, 3)


def test_parse_builtin_spec_forms() -> None:
    assert parse_builtin_spec("erasure:0.5,2") == ("erasure", [0.5, 2.0])
    assert parse_builtin_spec("depolarizing:d=2,p=0.25") == ("depolarizing", {"d": 2.0, "p": 0.25})
    assert parse_builtin_spec("tiles_complement") == ("tiles_complement", [])
    with pytest.raises(InvalidParamsError):
        parse_builtin_spec("depolarizing:2,p=0.25")
    with pytest.raises(InvalidParamsError):
        parse_builtin_spec("dephasing:abc")
    with pytest.raises(UnknownChannelError):
        parse_builtin_spec(":0.1")


@pytest.mark.parametrize(
    "spec",
    [
        "identity:2",
        "identity:3",
        "dephasing:0.1",
        "depolarizing:2,0.5",
        "amplitude_damping:0.25",
        "erasure:0.5,2",
        "trace_replace:2",
    ],
)
def test_builtins_and_their_complements_are_valid(spec: str) -> None:
    channel = channel_from_spec(spec)
    assert isinstance(channel, KrausChannel)
    environment = complementary_channel(channel)
    assert environment.d_in == channel.d_in


def test_every_builtin_has_a_summary() -> None:
    for spec in BUILTINS.values():
        assert spec.summary
