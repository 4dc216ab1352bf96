from __future__ import annotations

import numpy as np
import pytest

from qcap.channels import (
    apply,
    apply_choi,
    channels_equal,
    choi_to_kraus,
    complementary_channel,
    compose,
    degraded_wiretap,
    env_dim,
    kraus_to_choi,
    kraus_to_stinespring,
    minimal_kraus,
    random_channel,
    random_hierarchical_ensemble,
    random_state,
    random_unitary,
    stinespring_to_kraus,
    tensor,
    tensor_power,
    wiretap,
)
from qcap.linalg import entropy, partial_trace
from qcap.models import (
    ChoiMatrix,
    DimensionMismatchError,
    KrausChannel,
    NotCPError,
    NotTPError,
    QuantumState,
)
from qcap.zoo import (
    amplitude_damping_channel,
    dephasing_channel,
    erasure_channel,
    identity_channel,
    trace_replace_channel,
)


def bloch_state(x: float, y: float, z: float) -> QuantumState:
    return QuantumState(np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]]) / 2)


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    return np.array([2 * rho[0, 1].real, -2 * rho[0, 1].imag, (rho[0, 0] - rho[1, 1]).real])


def test_kraus_channel_rejects_non_trace_preserving() -> None:
    with pytest.raises(NotTPError):
        KrausChannel(np.array([[[1.0, 0.0], [0.0, 0.5]]]))


def test_choi_matrix_rejects_negative_eigenvalue() -> None:
    with pytest.raises(NotCPError):
        ChoiMatrix(np.diag([1.5, 0.0, -1.0, 1.0]), 2, 2)


def test_choi_output_marginal_is_identity(rng: np.random.Generator) -> None:
    channel = random_channel(2, 3, rng)
    choi = kraus_to_choi(channel).matrix
    assert np.allclose(partial_trace(choi, (2, 3), keep="A"), np.eye(2))


def test_kraus_choi_round_trip_random_channels(rng: np.random.Generator) -> None:
    for _ in range(20):
        d_in, d_out = (int(v) for v in rng.integers(1, 4, size=2))
        channel = random_channel(d_in, d_out, rng)
        rebuilt = choi_to_kraus(kraus_to_choi(channel))
        assert channels_equal(rebuilt, channel, tol=1e-8)


def test_choi_to_kraus_orders_by_weight() -> None:
    channel = dephasing_channel(0.3)
    ops = choi_to_kraus(kraus_to_choi(channel)).operators
    weights = [np.linalg.norm(op) for op in ops]
    assert weights == sorted(weights, reverse=True)
    assert len(ops) == 2


def test_stinespring_round_trip() -> None:
    channel = amplitude_damping_channel(0.3)
    isometry = kraus_to_stinespring(channel)
    assert np.allclose(isometry.V.conj().T @ isometry.V, np.eye(2))
    assert channels_equal(stinespring_to_kraus(isometry), channel)


def test_dephasing_shrinks_transverse_bloch_components() -> None:
    out = apply(dephasing_channel(0.1), bloch_state(0.6, 0.0, 0.8))
    assert np.allclose(bloch_vector(out.matrix), [0.8 * 0.6, 0.0, 0.8])


def test_apply_dimension_mismatch() -> None:
    with pytest.raises(DimensionMismatchError):
        apply(identity_channel(2), np.eye(3) / 3)


def test_complement_of_amplitude_damping() -> None:
    gamma = 0.3
    assert channels_equal(
        complementary_channel(amplitude_damping_channel(gamma)),
        amplitude_damping_channel(1 - gamma),
        tol=1e-10,
    )


def test_complement_of_identity_is_trace() -> None:
    environment = complementary_channel(identity_channel(3))
    assert (environment.d_in, environment.d_out) == (3, 1)


def test_half_erasure_is_symmetric_with_its_complement(rng: np.random.Generator) -> None:
    # Purpose: both outputs agree up to relabelling the basis, so their spectra match.
    channel = erasure_channel(0.5, 2)
    environment = complementary_channel(channel)
    assert environment.d_out == 3
    for _ in range(5):
        state = random_state(2, rng)
        assert entropy(apply(channel, state).matrix) == pytest.approx(
            entropy(apply(environment, state).matrix), abs=1e-10
        )


def test_minimal_kraus_merges_redundant_operators() -> None:
    redundant = KrausChannel(np.stack([np.eye(2) / np.sqrt(2), np.eye(2) / np.sqrt(2)]))
    assert minimal_kraus(redundant).num_operators == 1
    assert env_dim(redundant) == 1
    assert channels_equal(minimal_kraus(redundant), identity_channel(2))


def test_compose_with_identity_and_mismatch() -> None:
    channel = amplitude_damping_channel(0.2)
    assert channels_equal(compose(identity_channel(2), channel), channel)
    with pytest.raises(DimensionMismatchError):
        compose(identity_channel(3), channel)


def test_compose_amplitude_damping_multiplies_survival() -> None:
    composed = compose(amplitude_damping_channel(0.5), amplitude_damping_channel(0.2))
    assert channels_equal(composed, amplitude_damping_channel(1 - 0.5 * 0.8), tol=1e-10)


def test_tensor_and_tensor_power_dimensions() -> None:
    pair = tensor(identity_channel(2), dephasing_channel(0.1))
    assert (pair.d_in, pair.d_out, pair.num_operators) == (4, 4, 2)
    cube = tensor_power(identity_channel(2), 3)
    assert (cube.d_in, cube.d_out) == (8, 8)


def test_channels_equal_requires_matching_dimensions() -> None:
    assert not channels_equal(identity_channel(2), identity_channel(3))
    assert not channels_equal(dephasing_channel(0.1), dephasing_channel(0.2))


def test_wiretap_pairs() -> None:
    channel = dephasing_channel(0.1)
    pair = wiretap(channel, label="d")
    assert channels_equal(pair.eve, complementary_channel(channel))
    degraded = degraded_wiretap(channel, trace_replace_channel(2), label="pd")
    assert degraded.eve.d_out == 2
    assert degraded.d_in == 2
    with pytest.raises(DimensionMismatchError):
        degraded_wiretap(channel, trace_replace_channel(3))


def test_random_hierarchical_ensemble_is_valid(rng: np.random.Generator) -> None:
    ensemble = random_hierarchical_ensemble(3, 2, 4, rng)
    assert ensemble.outer_size == 2
    assert np.trace(ensemble.average()).real == pytest.approx(1.0)
    assert ensemble.flatten().size == 8


def test_choi_action_matches_kraus_action(rng: np.random.Generator) -> None:
    channel = random_channel(2, 3, rng)
    rho = random_state(2, rng)
    assert np.allclose(apply_choi(kraus_to_choi(channel), rho), apply(channel, rho).matrix, atol=1e-12)


def test_random_unitary_is_unitary(rng: np.random.Generator) -> None:
    unitary = random_unitary(3, rng)
    assert np.allclose(unitary.conj().T @ unitary, np.eye(3), atol=1e-12)
