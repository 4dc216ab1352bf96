"""Core value types, vocabularies and errors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

Subsystem = Literal["A", "B"]
Verdict = Literal["degradable", "anti-degradable", "pd-feasible", "infeasible-at-tolerance"]
ComplementVerdict = Literal["npt", "ppt-entangled", "ppt-undetected"]
CheckStatus = Literal["pass", "fail", "skipped"]
CheckRelation = Literal["eq", "ge", "le"]
Side = Literal["B", "E"]

VALID_SUBSYSTEMS = ("A", "B")
VALID_COMPLEMENT_VERDICTS = ("npt", "ppt-entangled", "ppt-undetected")
VALID_CHECK_NAMES = (
    "eq5-identity",
    "ineq-12",
    "ineq-24",
    "theorem1-eq26",
    "delta-nonneg-41",
    "theorem2-eq43",
    "additivity-n2",
)
VALID_CHECK_STATUSES = ("pass", "fail", "skipped")

STATE_TOL = 1e-10
PURITY_TOL = 1e-8
CHANNEL_TOL = 1e-8
FILE_TOL = 1e-6
ENTROPY_CLAMP = 1e-12
KRAUS_RANK_CUTOFF = 1e-10
MAX_FLAT_SUPPORT = 36


class QcapError(Exception):
    """Base error for qcap operations."""

    exit_code = 1


class QcapInputError(QcapError):
    """Raised when inputs violate a documented precondition."""

    exit_code = 2


class QcapNumericalError(QcapError):
    """Raised when a numerical kernel cannot produce a result."""

    exit_code = 1


class DimensionMismatchError(QcapInputError):
    """Raised when operand dimensions are incompatible."""


class NonSquareError(QcapInputError):
    """Raised when a square matrix is required."""


class NotHermitianError(QcapInputError):
    """Raised when a matrix is asymmetric beyond tolerance."""


class InvalidStateError(QcapInputError):
    """Raised when a matrix is not a density matrix."""


class InvalidChannelError(QcapInputError):
    """Raised when a map is not CPTP."""


class NotCPError(InvalidChannelError):
    """Raised when a Choi matrix has a negative eigenvalue."""


class NotTPError(InvalidChannelError):
    """Raised when a map does not preserve trace."""


class UnknownChannelError(QcapInputError):
    """Raised for builtin names outside the zoo."""


class InvalidParamsError(QcapInputError):
    """Raised for out-of-range builtin or optimizer parameters."""


class ConstructionFailedError(QcapInputError):
    """Raised when a builtin fails its own runtime validation."""


class DimensionTooLargeError(QcapInputError):
    """Raised when a tensor power would exceed the supported size."""


class ConfigError(QcapInputError):
    """Raised for unusable settings values."""


class ChannelFileError(QcapInputError):
    """Raised when a channel file is malformed or violates CPTP."""

    def __init__(self, message: str, residual: float | None = None) -> None:
        super().__init__(message)
        self.residual = residual


class ConvergenceFailureError(QcapNumericalError):
    """Raised when an eigensolver does not converge."""


def _as_complex(matrix) -> np.ndarray:
    arr = np.array(matrix, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise InvalidStateError("matrix has non-finite entries")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _check_density(matrix: np.ndarray, label: str) -> None:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidStateError(f"{label} must be a square matrix, got shape {matrix.shape}")
    asym = np.linalg.norm(matrix - matrix.conj().T)
    if asym > STATE_TOL:
        raise InvalidStateError(f"{label} is not Hermitian (asymmetry {asym:.3e})")
    trace = np.trace(matrix).real
    if abs(trace - 1.0) > STATE_TOL:
        raise InvalidStateError(f"{label} has trace {trace:.12g}, expected 1")
    min_eig = np.linalg.eigvalsh((matrix + matrix.conj().T) / 2)[0]
    if min_eig < -STATE_TOL:
        raise InvalidStateError(f"{label} has negative eigenvalue {min_eig:.3e}")


@dataclass(frozen=True, slots=True)
class HermitianEig:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True, slots=True, eq=False)
class QuantumState:
    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = _as_complex(self.matrix)
        _check_density(matrix, "state")
        object.__setattr__(self, "matrix", _freeze(matrix))

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @classmethod
    def pure(cls, vector) -> QuantumState:
        psi = np.asarray(vector, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise InvalidStateError("pure state vector must be nonzero")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> QuantumState:
        return cls(np.eye(dim, dtype=np.complex128) / dim)


def _stack_states(states) -> np.ndarray:
    if isinstance(states, np.ndarray):
        stack = _as_complex(states)
    else:
        items = [s.matrix if isinstance(s, QuantumState) else s for s in states]
        if not items:
            raise InvalidStateError("ensemble must contain at least one state")
        stack = _as_complex(np.stack([np.asarray(item) for item in items]))
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise InvalidStateError(f"ensemble states must share one square shape, got {stack.shape}")
    return stack


def _check_probs(probs: np.ndarray, label: str) -> np.ndarray:
    if probs.ndim != 1 or probs.size == 0:
        raise InvalidStateError(f"{label} must be a non-empty vector")
    if np.any(probs < -STATE_TOL):
        raise InvalidStateError(f"{label} has negative entries")
    if abs(probs.sum() - 1.0) > STATE_TOL:
        raise InvalidStateError(f"{label} sums to {probs.sum():.12g}, expected 1")
    return np.clip(probs, 0.0, None)


@dataclass(frozen=True, slots=True, eq=False)
class Ensemble:
    """Finite ensemble {p_i, rho_i}; states are stored as one (m, d, d) stack."""

    probs: np.ndarray
    states: np.ndarray

    def __post_init__(self) -> None:
        probs = _check_probs(np.asarray(self.probs, dtype=np.float64).reshape(-1), "ensemble probabilities")
        stack = _stack_states(self.states)
        if stack.shape[0] != probs.shape[0]:
            raise InvalidStateError(
                f"ensemble has {probs.shape[0]} probabilities but {stack.shape[0]} states"
            )
        for index, state in enumerate(stack):
            _check_density(state, f"ensemble state {index}")
        object.__setattr__(self, "probs", _freeze(probs))
        object.__setattr__(self, "states", _freeze(stack))

    @property
    def size(self) -> int:
        return int(self.probs.shape[0])

    @property
    def dim(self) -> int:
        return int(self.states.shape[1])

    def average(self) -> np.ndarray:
        return np.einsum("i,iab->ab", self.probs, self.states)


@dataclass(frozen=True, slots=True, eq=False)
class HierarchicalEnsemble:
    """Two-level input {p(x'), {p(x|x'), |psi_{x,x'}>}} with pure fine-grained states."""

    outer_probs: np.ndarray
    inner: tuple[Ensemble, ...]

    def __post_init__(self) -> None:
        outer = _check_probs(
            np.asarray(self.outer_probs, dtype=np.float64).reshape(-1), "outer probabilities"
        )
        inner = tuple(self.inner)
        if len(inner) != outer.shape[0]:
            raise InvalidStateError(
                f"{outer.shape[0]} outer probabilities but {len(inner)} inner ensembles"
            )
        dims = {member.dim for member in inner}
        if len(dims) != 1:
            raise InvalidStateError(f"inner ensembles have mixed dimensions {sorted(dims)}")
        for outer_index, member in enumerate(inner):
            top = np.linalg.eigvalsh(member.states)[:, -1]
            if np.any(top < 1.0 - PURITY_TOL):
                raise InvalidStateError(f"inner ensemble {outer_index} contains a mixed state")
        object.__setattr__(self, "outer_probs", _freeze(outer))
        object.__setattr__(self, "inner", inner)

    @property
    def dim(self) -> int:
        return self.inner[0].dim

    @property
    def outer_size(self) -> int:
        return int(self.outer_probs.shape[0])

    def coarse_states(self) -> np.ndarray:
        return np.stack([member.average() for member in self.inner])

    def coarse_ensemble(self) -> Ensemble:
        return Ensemble(self.outer_probs, self.coarse_states())

    def flatten(self) -> Ensemble:
        probs = np.concatenate([p * member.probs for p, member in zip(self.outer_probs, self.inner)])
        states = np.concatenate([member.states for member in self.inner])
        return Ensemble(probs / probs.sum(), states)

    def average(self) -> np.ndarray:
        return np.einsum("x,xab->ab", self.outer_probs, self.coarse_states())

    @classmethod
    def from_pure_vectors(
        cls,
        outer_probs: Sequence[float],
        inner_probs: Iterable[Sequence[float]],
        vectors: Iterable[Sequence[Sequence[complex]]],
    ) -> HierarchicalEnsemble:
        members = []
        for probs, kets in zip(inner_probs, vectors):
            kets = np.asarray(kets, dtype=np.complex128)
            kets = kets / np.linalg.norm(kets, axis=1, keepdims=True)
            members.append(Ensemble(np.asarray(probs), np.einsum("ma,mb->mab", kets, kets.conj())))
        return cls(np.asarray(outer_probs), tuple(members))


@dataclass(frozen=True, slots=True, eq=False)
class KrausChannel:
    """CPTP map given by Kraus operators stacked as an (r, d_out, d_in) array."""

    operators: np.ndarray

    def __post_init__(self) -> None:
        ops = self.operators
        if not isinstance(ops, np.ndarray):
            ops = np.stack([np.asarray(op, dtype=np.complex128) for op in ops])
        ops = np.array(ops, dtype=np.complex128)
        if ops.ndim == 2:
            ops = ops[np.newaxis]
        if ops.ndim != 3 or ops.shape[0] == 0:
            raise InvalidChannelError(f"Kraus operators must stack to (r, d_out, d_in), got {ops.shape}")
        if not np.all(np.isfinite(ops)):
            raise InvalidChannelError("Kraus operators have non-finite entries")
        residual = tp_residual(ops)
        if residual > CHANNEL_TOL:
            raise NotTPError(f"sum K^dag K deviates from identity by {residual:.3e}")
        object.__setattr__(self, "operators", _freeze(ops))

    @property
    def d_in(self) -> int:
        return int(self.operators.shape[2])

    @property
    def d_out(self) -> int:
        return int(self.operators.shape[1])

    @property
    def num_operators(self) -> int:
        return int(self.operators.shape[0])


def tp_residual(operators: np.ndarray) -> float:
    """Frobenius distance of sum K^dag K from the identity."""
    gram = np.einsum("kai,kaj->ij", operators.conj(), operators)
    return float(np.linalg.norm(gram - np.eye(operators.shape[2])))


@dataclass(frozen=True, slots=True, eq=False)
class ChoiMatrix:
    """Unnormalized Choi matrix J = sum_ij |i><j| (x) N(|i><j|), ordered input (x) output."""

    matrix: np.ndarray
    d_in: int
    d_out: int

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=np.complex128)
        size = self.d_in * self.d_out
        if matrix.shape != (size, size):
            raise DimensionMismatchError(
                f"Choi matrix must be {size}x{size} for d_in={self.d_in}, d_out={self.d_out}"
            )
        if not np.all(np.isfinite(matrix)):
            raise InvalidChannelError("Choi matrix has non-finite entries")
        asym = np.linalg.norm(matrix - matrix.conj().T)
        if asym > CHANNEL_TOL * max(1.0, np.linalg.norm(matrix)):
            raise InvalidChannelError(f"Choi matrix is not Hermitian (asymmetry {asym:.3e})")
        matrix = (matrix + matrix.conj().T) / 2
        min_eig = float(np.linalg.eigvalsh(matrix)[0])
        if min_eig < -CHANNEL_TOL:
            raise NotCPError(f"Choi matrix has negative eigenvalue {min_eig:.3e}")
        marginal = np.einsum("iaja->ij", matrix.reshape(self.d_in, self.d_out, self.d_in, self.d_out))
        residual = float(np.linalg.norm(marginal - np.eye(self.d_in)))
        if residual > CHANNEL_TOL:
            raise NotTPError(f"output partial trace deviates from identity by {residual:.3e}")
        object.__setattr__(self, "matrix", _freeze(matrix))


@dataclass(frozen=True, slots=True, eq=False)
class StinespringIsometry:
    V: np.ndarray
    d_in: int
    d_out: int
    d_env: int

    def __post_init__(self) -> None:
        V = np.array(self.V, dtype=np.complex128)
        if V.shape != (self.d_out * self.d_env, self.d_in):
            raise DimensionMismatchError(
                f"isometry must be {self.d_out * self.d_env}x{self.d_in}, got {V.shape}"
            )
        residual = float(np.linalg.norm(V.conj().T @ V - np.eye(self.d_in)))
        if residual > CHANNEL_TOL:
            raise InvalidChannelError(f"V^dag V deviates from identity by {residual:.3e}")
        object.__setattr__(self, "V", _freeze(V))


@dataclass(frozen=True, slots=True, eq=False)
class WiretapChannel:
    """Operational (Bob, Eve) pair; Eve is the complementary or a degraded complementary channel."""

    bob: KrausChannel
    eve: KrausChannel
    label: str = ""

    def __post_init__(self) -> None:
        if self.bob.d_in != self.eve.d_in:
            raise DimensionMismatchError(
                f"Bob and Eve channels disagree on input dimension ({self.bob.d_in} vs {self.eve.d_in})"
            )

    @property
    def d_in(self) -> int:
        return self.bob.d_in


@dataclass(frozen=True, slots=True, eq=False)
class DegradabilityCertificate:
    verdict: Verdict
    connecting_map: ChoiMatrix
    residual: float
    iterations: int
    tolerance: float
    degradation_map: ChoiMatrix | None = None
    converged: bool = True
    restarts: int = 1
    residual_history: tuple[float, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.verdict != "infeasible-at-tolerance"


@dataclass(frozen=True, slots=True)
class PPTTest:
    is_ppt: bool
    min_eigenvalue: float


@dataclass(frozen=True, slots=True)
class ComplementClassification:
    verdict: ComplementVerdict
    min_pt_eigenvalue: float
    realignment: float
    notes: str = ""


@dataclass(slots=True)
class OptimizerConfig:
    restarts: int = 8
    max_iters: int = 1000
    tol: float = 1e-10
    seed: int = 0
    outer_size: int | None = None
    inner_size: int | None = None

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise InvalidParamsError("restarts must be at least 1")
        if self.max_iters < 1:
            raise InvalidParamsError("max_iters must be at least 1")
        if self.tol <= 0:
            raise InvalidParamsError("tol must be positive")
        for name in ("outer_size", "inner_size"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise InvalidParamsError(f"{name} must be at least 1")

    def ensemble_sizes(self, dim: int) -> tuple[int, int]:
        """Return (m', m) for input dimension ``dim``.

        Defaults are d^2 each with the flattened support capped at 36 entries.
        Explicit sizes must satisfy m * m' <= 4 d^2.
        """
        outer = self.outer_size if self.outer_size is not None else min(dim * dim, MAX_FLAT_SUPPORT)
        if self.inner_size is not None:
            inner = self.inner_size
        else:
            inner = max(1, min(dim * dim, MAX_FLAT_SUPPORT // outer))
        if outer * inner > 4 * dim * dim:
            raise InvalidParamsError(
                f"ensemble sizes m'={outer}, m={inner} exceed the cap m*m' <= {4 * dim * dim}"
            )
        return outer, inner


@dataclass(frozen=True, slots=True)
class RestartRecord:
    index: int
    seed: int | None
    value: float
    iterations: int
    success: bool
    message: str = ""


@dataclass(frozen=True, slots=True, eq=False)
class MaximizationResult:
    """Best value found by a multi-restart maximization and its argument."""

    value: float
    argument: QuantumState | HierarchicalEnsemble
    records: tuple[RestartRecord, ...]
    converged: bool


@dataclass(frozen=True, slots=True)
class TheoremCheck:
    name: str
    status: CheckStatus
    lhs: float
    rhs: float
    tolerance: float
    relation: CheckRelation = "eq"
    notes: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True, slots=True, eq=False)
class DeltaReport:
    holevo_gap: float
    capacity_gap: float
    p_degradable: float
    p_partially_degradable: float
    best_input: HierarchicalEnsemble
    eve_holevo_degradable: float
    eve_holevo_degraded: float

    @property
    def delta(self) -> float:
        return self.holevo_gap

    @property
    def readings_gap(self) -> float:
        return abs(self.holevo_gap - self.capacity_gap)

    @property
    def omega_interval(self) -> tuple[float, float]:
        return (0.0, max(self.holevo_gap, 0.0))


@dataclass(slots=True, eq=False)
class CapacityReport:
    q1_raw: float | None = None
    p1_raw: float | None = None
    eta: float | None = None
    eta_max: float | None = None
    delta: float | None = None
    best_state: QuantumState | None = None
    best_input: HierarchicalEnsemble | None = None
    q_diagnostics: list[RestartRecord] = field(default_factory=list)
    p_diagnostics: list[RestartRecord] = field(default_factory=list)
    theorem_flags: list[TheoremCheck] = field(default_factory=list)
    converged: bool = True

    @property
    def q1(self) -> float | None:
        return None if self.q1_raw is None else max(self.q1_raw, 0.0)

    @property
    def p1(self) -> float | None:
        return None if self.p1_raw is None else max(self.p1_raw, 0.0)


@dataclass(slots=True)
class Settings:
    """Resolved ``qcap.yaml`` settings."""

    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    degradability_tol: float = 1e-6
    degradability_max_iters: int = 20000
    degradability_restarts: int = 8
    equality_tol: float = 5e-3
    inequality_tol: float = 1e-3
    output_format: Literal["text", "json"] = "text"
