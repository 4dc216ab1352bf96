"""Channel representations, conversions and combinators."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .linalg import herm_eig, trace_norm
from .models import (
    CHANNEL_TOL,
    KRAUS_RANK_CUTOFF,
    ChoiMatrix,
    DimensionMismatchError,
    Ensemble,
    HierarchicalEnsemble,
    KrausChannel,
    NotCPError,
    NotTPError,
    QuantumState,
    StinespringIsometry,
    WiretapChannel,
)


def kraus_to_choi(channel: KrausChannel) -> ChoiMatrix:
    """Unnormalized Choi matrix, input factor first."""
    return ChoiMatrix(choi_array(channel.operators), channel.d_in, channel.d_out)


def choi_array(operators: np.ndarray) -> np.ndarray:
    vecs = operators.transpose(0, 2, 1).reshape(operators.shape[0], -1)
    return np.einsum("ki,kj->ij", vecs, vecs.conj())


def _canonical_phase(vector: np.ndarray) -> np.ndarray:
    nonzero = np.flatnonzero(np.abs(vector) > 1e-12)
    if nonzero.size == 0:
        return vector
    lead = vector[nonzero[0]]
    return vector * (abs(lead) / lead)


def kraus_from_choi_array(matrix: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    eig = herm_eig(matrix)
    if eig.eigenvalues[0] < -CHANNEL_TOL:
        raise NotCPError(f"Choi matrix has negative eigenvalue {eig.eigenvalues[0]:.3e}")
    order = np.argsort(eig.eigenvalues)[::-1]
    operators = []
    for index in order:
        value = eig.eigenvalues[index]
        if value <= KRAUS_RANK_CUTOFF:
            break
        vec = _canonical_phase(eig.eigenvectors[:, index]) * np.sqrt(value)
        operators.append(vec.reshape(d_in, d_out).T)
    if not operators:
        raise NotTPError("Choi matrix is zero")
    return np.stack(operators)


def choi_to_kraus(choi: ChoiMatrix) -> KrausChannel:
    """Kraus form from the Choi eigendecomposition, descending weights, canonical phases."""
    return KrausChannel(kraus_from_choi_array(choi.matrix, choi.d_in, choi.d_out))


def minimal_kraus(channel: KrausChannel) -> KrausChannel:
    """Return ``channel`` unchanged if its Kraus operators are linearly independent."""
    vecs = channel.operators.reshape(channel.num_operators, -1)
    singular = scipy.linalg.svdvals(vecs)
    rank = int(np.sum(singular > np.sqrt(KRAUS_RANK_CUTOFF)))
    if rank == channel.num_operators:
        return channel
    return choi_to_kraus(kraus_to_choi(channel))


def kraus_to_stinespring(channel: KrausChannel) -> StinespringIsometry:
    """V|psi> = sum_i K_i|psi> (x) |i>_E, output factor first."""
    ops = channel.operators
    V = ops.transpose(1, 0, 2).reshape(channel.d_out * channel.num_operators, channel.d_in)
    return StinespringIsometry(V=V, d_in=channel.d_in, d_out=channel.d_out, d_env=channel.num_operators)


def stinespring_to_kraus(isometry: StinespringIsometry) -> KrausChannel:
    ops = isometry.V.reshape(isometry.d_out, isometry.d_env, isometry.d_in).transpose(1, 0, 2)
    return KrausChannel(ops)


def complementary_channel(channel: KrausChannel) -> KrausChannel:
    """Channel to the environment of the minimal Stinespring dilation."""
    minimal = minimal_kraus(channel)
    return KrausChannel(minimal.operators.transpose(1, 0, 2))


def env_dim(channel: KrausChannel) -> int:
    return minimal_kraus(channel).num_operators


def apply_operators(operators: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.einsum("kai,ij,kbj->ab", operators, rho, operators.conj())


def apply_batch(operators: np.ndarray, states: np.ndarray) -> np.ndarray:
    return np.einsum("kai,nij,kbj->nab", operators, states, operators.conj())


def adjoint_operators(operators: np.ndarray, observable: np.ndarray) -> np.ndarray:
    """Heisenberg-picture map sum_k K^dag X K."""
    return np.einsum("kai,ab,kbj->ij", operators.conj(), observable, operators)


def adjoint_batch(operators: np.ndarray, observables: np.ndarray) -> np.ndarray:
    return np.einsum("kai,nab,kbj->nij", operators.conj(), observables, operators)


def apply(channel: KrausChannel, state: QuantumState | np.ndarray) -> QuantumState:
    rho = state.matrix if isinstance(state, QuantumState) else np.asarray(state, dtype=np.complex128)
    if rho.shape != (channel.d_in, channel.d_in):
        raise DimensionMismatchError(
            f"state of shape {rho.shape} does not fit a channel with input dimension {channel.d_in}"
        )
    out = apply_operators(channel.operators, rho)
    out = (out + out.conj().T) / 2
    return QuantumState(out / np.trace(out).real)


def apply_choi(choi: ChoiMatrix, state: QuantumState | np.ndarray) -> np.ndarray:
    rho = state.matrix if isinstance(state, QuantumState) else np.asarray(state, dtype=np.complex128)
    tensor = choi.matrix.reshape(choi.d_in, choi.d_out, choi.d_in, choi.d_out)
    return np.einsum("ij,iajb->ab", rho, tensor)


def compose(second: KrausChannel, first: KrausChannel) -> KrausChannel:
    """second after first, Kraus set {K2_j K1_i}."""
    if first.d_out != second.d_in:
        raise DimensionMismatchError(
            f"cannot compose: first outputs dimension {first.d_out}, second expects {second.d_in}"
        )
    ops = np.einsum("jab,ibc->jiac", second.operators, first.operators)
    return KrausChannel(ops.reshape(-1, second.d_out, first.d_in))


def tensor(first: KrausChannel, second: KrausChannel) -> KrausChannel:
    ops = np.einsum("iab,jcd->ijacbd", first.operators, second.operators)
    return KrausChannel(
        ops.reshape(
            first.num_operators * second.num_operators,
            first.d_out * second.d_out,
            first.d_in * second.d_in,
        )
    )


def tensor_power(channel: KrausChannel, n: int) -> KrausChannel:
    result = channel
    for _ in range(n - 1):
        result = tensor(result, channel)
    return result


def channels_equal(first: KrausChannel, second: KrausChannel, tol: float = 1e-8) -> bool:
    """Action equality: trace norm of the Choi difference within ``tol``."""
    if (first.d_in, first.d_out) != (second.d_in, second.d_out):
        return False
    return trace_norm(choi_array(first.operators) - choi_array(second.operators)) <= tol


def wiretap(channel: KrausChannel, label: str = "") -> WiretapChannel:
    return WiretapChannel(bob=channel, eve=complementary_channel(channel), label=label)


def degraded_wiretap(channel: KrausChannel, degradation: KrausChannel, label: str = "") -> WiretapChannel:
    """Bob keeps N_AB; Eve receives D applied after the complementary channel."""
    eve = complementary_channel(channel)
    if degradation.d_in != eve.d_out:
        raise DimensionMismatchError(
            f"degradation map expects environment dimension {degradation.d_in}, "
            f"channel has {eve.d_out}"
        )
    return WiretapChannel(bob=channel, eve=compose(degradation, eve), label=label)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    ginibre = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    unitary, _ = scipy.linalg.polar(ginibre)
    return unitary


def random_state(dim: int, rng: np.random.Generator, rank: int | None = None) -> QuantumState:
    rank = dim if rank is None else rank
    factor = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = factor @ factor.conj().T
    return QuantumState(rho / np.trace(rho).real)


def random_pure_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def random_pure_state(dim: int, rng: np.random.Generator) -> QuantumState:
    return QuantumState.pure(random_pure_vector(dim, rng))


def random_channel(
    d_in: int,
    d_out: int,
    rng: np.random.Generator,
    num_kraus: int | None = None,
) -> KrausChannel:
    """Random channel from a Haar-like isometry into output (x) environment."""
    rank = d_in * d_out if num_kraus is None else num_kraus
    rows = d_out * rank
    if rows < d_in:
        raise DimensionMismatchError(f"{rank} Kraus operators cannot dilate dimension {d_in} into {d_out}")
    ginibre = rng.standard_normal((rows, d_in)) + 1j * rng.standard_normal((rows, d_in))
    isometry, _ = scipy.linalg.polar(ginibre)
    return KrausChannel(isometry.reshape(d_out, rank, d_in).transpose(1, 0, 2))


def random_ensemble(dim: int, size: int, rng: np.random.Generator, pure: bool = True) -> Ensemble:
    probs = rng.dirichlet(np.ones(size))
    if pure:
        states = [random_pure_state(dim, rng) for _ in range(size)]
    else:
        states = [random_state(dim, rng) for _ in range(size)]
    return Ensemble(probs, states)


def random_hierarchical_ensemble(
    dim: int,
    outer_size: int,
    inner_size: int,
    rng: np.random.Generator,
) -> HierarchicalEnsemble:
    members = tuple(random_ensemble(dim, inner_size, rng, pure=True) for _ in range(outer_size))
    return HierarchicalEnsemble(rng.dirichlet(np.ones(outer_size)), members)
