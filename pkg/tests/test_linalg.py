from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcap.channels import random_state
from qcap.linalg import (
    entropy,
    herm_eig,
    kron,
    partial_trace,
    partial_transpose,
    trace_norm,
    von_neumann_entropy,
)
from qcap.models import (
    DimensionMismatchError,
    InvalidStateError,
    NonSquareError,
    NotHermitianError,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def binary_entropy(p: float) -> float:
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def bell_state() -> np.ndarray:
    psi = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
    return np.outer(psi, psi)


def test_herm_eig_returns_ascending_eigenvalues() -> None:
    eig = herm_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(eig.eigenvalues, [1.0, 3.0])
    rebuilt = eig.eigenvectors @ np.diag(eig.eigenvalues) @ eig.eigenvectors.conj().T
    assert np.allclose(rebuilt, [[2.0, 1.0], [1.0, 2.0]])


def test_herm_eig_rejects_non_hermitian() -> None:
    with pytest.raises(NotHermitianError):
        herm_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_herm_eig_rejects_non_square() -> None:
    with pytest.raises(NonSquareError):
        herm_eig(np.zeros((2, 3)))


def test_entropy_values_in_bits() -> None:
    assert entropy(np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)
    assert entropy(np.diag([0.9, 0.1])) == pytest.approx(binary_entropy(0.1), abs=1e-12)
    assert entropy(np.diag([1.0, 0.0])) == pytest.approx(0.0, abs=1e-12)


def test_von_neumann_entropy_validates_state() -> None:
    with pytest.raises(InvalidStateError):
        von_neumann_entropy(np.diag([0.7, 0.7]))
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(2.0, abs=1e-12)


def test_partial_trace_of_product() -> None:
    a = np.diag([0.3, 0.7])
    b = np.array([[0.5, 0.5j], [-0.5j, 0.5]])
    joint = kron(a, b)
    assert np.allclose(partial_trace(joint, (2, 2), keep="A"), a)
    assert np.allclose(partial_trace(joint, (2, 2), keep="B"), b)


def test_partial_trace_dimension_mismatch() -> None:
    with pytest.raises(DimensionMismatchError):
        partial_trace(np.eye(6) / 6, (2, 2))


def test_partial_trace_rejects_unknown_subsystem() -> None:
    with pytest.raises(DimensionMismatchError):
        partial_trace(np.eye(4) / 4, (2, 2), keep="C")


def test_partial_transpose_of_bell_state_has_negative_eigenvalue() -> None:
    transposed = partial_transpose(bell_state(), (2, 2))
    assert np.linalg.eigvalsh(transposed)[0] == pytest.approx(-0.5, abs=1e-12)
    on_a = partial_transpose(bell_state(), (2, 2), on="A")
    assert np.linalg.eigvalsh(on_a)[0] == pytest.approx(-0.5, abs=1e-12)


def test_partial_transpose_is_an_involution(rng: np.random.Generator) -> None:
    matrix = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    twice = partial_transpose(partial_transpose(matrix, (2, 3)), (2, 3))
    assert np.allclose(twice, matrix)


def test_trace_norm() -> None:
    assert trace_norm(np.diag([1.0, -2.0])) == pytest.approx(3.0)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_herm_eig_reconstructs_and_is_unitary(seed: int) -> None:
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(1, 10))
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    matrix = raw + raw.conj().T
    eig = herm_eig(matrix)
    rebuilt = eig.eigenvectors @ np.diag(eig.eigenvalues) @ eig.eigenvectors.conj().T
    scale = max(1.0, float(np.linalg.norm(matrix)))
    assert np.linalg.norm(rebuilt - matrix) <= 1e-10 * scale
    assert np.linalg.norm(eig.eigenvectors.conj().T @ eig.eigenvectors - np.eye(dim)) <= 1e-10


def test_herm_eig_of_pauli_x() -> None:
    eig = herm_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(eig.eigenvalues, [-1.0, 1.0])
    minus = np.array([1.0, -1.0]) / np.sqrt(2)
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    # Eigenvectors are fixed only up to a phase.
    assert abs(np.vdot(minus, eig.eigenvectors[:, 0])) == pytest.approx(1.0, abs=1e-12)
    assert abs(np.vdot(plus, eig.eigenvectors[:, 1])) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_entropy_is_additive_on_products(seed: int) -> None:
    rng = np.random.default_rng(seed)
    rho = random_state(int(rng.integers(2, 4)), rng).matrix
    sigma = random_state(int(rng.integers(2, 4)), rng).matrix
    joint = von_neumann_entropy(kron(rho, sigma))
    assert joint == pytest.approx(von_neumann_entropy(rho) + von_neumann_entropy(sigma), abs=1e-9)


def traced_by_index(matrix: np.ndarray, dims: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    dim_a, dim_b = dims
    keep_a = np.zeros((dim_a, dim_a), dtype=np.complex128)
    keep_b = np.zeros((dim_b, dim_b), dtype=np.complex128)
    for i in range(dim_a):
        for j in range(dim_a):
            for a in range(dim_b):
                for b in range(dim_b):
                    if a == b:
                        keep_a[i, j] += matrix[i * dim_b + a, j * dim_b + b]
                    if i == j:
                        keep_b[a, b] += matrix[i * dim_b + a, j * dim_b + b]
    return keep_a, keep_b


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_partial_trace_matches_index_contraction(seed: int) -> None:
    rng = np.random.default_rng(seed)
    dims = (int(rng.integers(1, 4)), int(rng.integers(1, 4)))
    size = dims[0] * dims[1]
    matrix = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    keep_a, keep_b = traced_by_index(matrix, dims)
    assert np.allclose(partial_trace(matrix, dims, keep="A"), keep_a, atol=1e-12)
    assert np.allclose(partial_trace(matrix, dims, keep="B"), keep_b, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_partial_transpose_of_product_keeps_product_spectrum(seed: int) -> None:
    # sigma^T has the spectrum of sigma, so the product spectrum survives.
    rng = np.random.default_rng(seed)
    rho = random_state(int(rng.integers(2, 4)), rng).matrix
    sigma = random_state(int(rng.integers(2, 4)), rng).matrix
    dims = (rho.shape[0], sigma.shape[0])
    transposed = partial_transpose(kron(rho, sigma), dims)
    expected = np.sort(np.outer(np.linalg.eigvalsh(rho), np.linalg.eigvalsh(sigma)).ravel())
    assert np.allclose(np.linalg.eigvalsh(transposed), expected, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_kron_mixed_product(seed: int) -> None:
    rng = np.random.default_rng(seed)
    dim_a, dim_b = int(rng.integers(1, 4)), int(rng.integers(1, 4))

    def draw(dim: int) -> np.ndarray:
        return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))

    a, c = draw(dim_a), draw(dim_a)
    b, d = draw(dim_b), draw(dim_b)
    assert np.allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-10)
