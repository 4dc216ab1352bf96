"""Dense complex linear algebra primitives."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .models import (
    ENTROPY_CLAMP,
    DimensionMismatchError,
    ConvergenceFailureError,
    HermitianEig,
    NonSquareError,
    NotHermitianError,
    QuantumState,
    Subsystem,
    VALID_SUBSYSTEMS,
)

HERMITIAN_TOL = 1e-8


def _square(matrix) -> np.ndarray:
    arr = np.asarray(matrix, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def herm_eig(matrix) -> HermitianEig:
    """Eigendecompose a Hermitian matrix, symmetrizing first.

    Eigenvalues come back ascending with eigenvectors as columns.
    """
    arr = _square(matrix)
    norm = np.linalg.norm(arr)
    asym = np.linalg.norm(arr - arr.conj().T)
    if asym > HERMITIAN_TOL * max(1.0, norm):
        raise NotHermitianError(f"matrix is not Hermitian (asymmetry {asym:.3e})")
    try:
        values, vectors = scipy.linalg.eigh((arr + arr.conj().T) / 2)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailureError(f"Hermitian eigensolver failed: {exc}") from exc
    return HermitianEig(eigenvalues=values, eigenvectors=vectors)


def entropy_of_spectrum(eigenvalues: np.ndarray) -> float:
    values = np.asarray(eigenvalues, dtype=np.float64)
    values = values[values > ENTROPY_CLAMP]
    return float(-np.sum(values * np.log2(values)))


def entropy(matrix: np.ndarray) -> float:
    """Base-2 entropy of an unchecked density matrix."""
    return entropy_of_spectrum(np.linalg.eigvalsh(matrix))


def von_neumann_entropy(state: QuantumState | np.ndarray) -> float:
    if not isinstance(state, QuantumState):
        state = QuantumState(state)
    return entropy(state.matrix)


def _bipartite(matrix, dims: tuple[int, int]) -> np.ndarray:
    arr = np.asarray(matrix, dtype=np.complex128)
    dim_a, dim_b = dims
    size = dim_a * dim_b
    if arr.shape != (size, size):
        raise DimensionMismatchError(
            f"matrix shape {arr.shape} does not match subsystem dims {dim_a}x{dim_b}"
        )
    return arr.reshape(dim_a, dim_b, dim_a, dim_b)


def _check_subsystem(which: str) -> None:
    if which not in VALID_SUBSYSTEMS:
        raise DimensionMismatchError(f"subsystem must be one of {VALID_SUBSYSTEMS}, got '{which}'")


def partial_trace(matrix, dims: tuple[int, int], keep: Subsystem = "A") -> np.ndarray:
    _check_subsystem(keep)
    tensor = _bipartite(matrix, dims)
    if keep == "A":
        return np.einsum("ijkj->ik", tensor)
    return np.einsum("ijil->jl", tensor)


def partial_transpose(matrix, dims: tuple[int, int], on: Subsystem = "B") -> np.ndarray:
    _check_subsystem(on)
    tensor = _bipartite(matrix, dims)
    size = dims[0] * dims[1]
    axes = (0, 3, 2, 1) if on == "B" else (2, 1, 0, 3)
    return tensor.transpose(axes).reshape(size, size)


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def trace_norm(matrix) -> float:
    return float(np.sum(scipy.linalg.svdvals(np.asarray(matrix, dtype=np.complex128))))
