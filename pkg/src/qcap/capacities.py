"""Information quantities and their multi-restart maximization.

Every reported optimum is the best value found, a lower bound on the true
maximum. Inputs are parameterized so that any real vector is feasible:
density matrices as G G^dag / Tr(G G^dag), probabilities through softmax,
pure states as normalized complex vectors. Gradients are analytic and the
local ascent is L-BFGS-B.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.special

from .channels import (
    adjoint_batch,
    adjoint_operators,
    apply_batch,
    apply_operators,
    complementary_channel,
    tensor_power,
)
from .linalg import entropy
from .models import (
    ENTROPY_CLAMP,
    DeltaReport,
    DimensionMismatchError,
    DimensionTooLargeError,
    Ensemble,
    HierarchicalEnsemble,
    InvalidParamsError,
    KrausChannel,
    MaximizationResult,
    OptimizerConfig,
    QuantumState,
    RestartRecord,
    Side,
    WiretapChannel,
)
from .restarts import run_restarts

MAX_MULTICOPY_DIM = 16
MAX_COPIES = 2
SEED_LOGIT_FLOOR = -30.0

Channelish = KrausChannel | WiretapChannel


def _sides(channel: Channelish) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(channel, WiretapChannel):
        return channel.bob.operators, channel.eve.operators
    return channel.operators, complementary_channel(channel).operators


def _input_dim(channel: Channelish) -> int:
    return channel.d_in


def _check_dim(channel: Channelish, dim: int) -> None:
    if dim != _input_dim(channel):
        raise DimensionMismatchError(
            f"input of dimension {dim} does not fit a channel with input dimension {_input_dim(channel)}"
        )


def _matrix(state: QuantumState | np.ndarray) -> np.ndarray:
    if isinstance(state, QuantumState):
        return state.matrix
    return QuantumState(state).matrix


def _spectra(batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Entropies and clamped log2 matrices of a stack of density matrices."""
    values, vectors = np.linalg.eigh(batch)
    support = values > ENTROPY_CLAMP
    entropies = -np.sum(np.where(support, values * np.log2(np.where(support, values, 1.0)), 0.0), axis=-1)
    logs = np.log2(np.clip(values, ENTROPY_CLAMP, None))
    log_mats = np.einsum("nij,nj,nkj->nik", vectors, logs, vectors.conj())
    return entropies, log_mats


def _holevo(operators: np.ndarray, probs: np.ndarray, states: np.ndarray) -> float:
    outputs = apply_batch(operators, states)
    average = np.einsum("i,iab->ab", probs, outputs)
    per_state = np.array([entropy(out) for out in outputs])
    return entropy(average) - float(probs @ per_state)


def coherent_information(channel: Channelish, state: QuantumState | np.ndarray) -> float:
    """S(B) - S(E) at input ``state``."""
    rho = _matrix(state)
    _check_dim(channel, rho.shape[0])
    bob, eve = _sides(channel)
    return entropy(apply_operators(bob, rho)) - entropy(apply_operators(eve, rho))


def _coherent_terms(bob: np.ndarray, eve: np.ndarray, rho: np.ndarray) -> tuple[float, np.ndarray]:
    s_b, log_b = _spectra(apply_operators(bob, rho)[np.newaxis])
    s_e, log_e = _spectra(apply_operators(eve, rho)[np.newaxis])
    gamma = -adjoint_operators(bob, log_b[0]) + adjoint_operators(eve, log_e[0])
    return float(s_b[0] - s_e[0]), (gamma + gamma.conj().T) / 2


def coherent_information_gradient(channel: Channelish, state: QuantumState | np.ndarray) -> np.ndarray:
    """Hermitian G with d I_coh = Tr(G d rho) along traceless directions."""
    rho = _matrix(state)
    _check_dim(channel, rho.shape[0])
    bob, eve = _sides(channel)
    return _coherent_terms(bob, eve, rho)[1]


def holevo_information(channel: KrausChannel, ensemble: Ensemble) -> float:
    _check_dim(channel, ensemble.dim)
    return _holevo(channel.operators, ensemble.probs, ensemble.states)


def private_information_value(channel: Channelish, ensemble: HierarchicalEnsemble) -> float:
    """I(A':B) - I(A':E) on the coarse ensemble {p(x'), rho^x'}."""
    _check_dim(channel, ensemble.dim)
    bob, eve = _sides(channel)
    coarse = ensemble.coarse_states()
    return _holevo(bob, ensemble.outer_probs, coarse) - _holevo(eve, ensemble.outer_probs, coarse)


def conditional_holevo(channel: Channelish, ensemble: HierarchicalEnsemble, side: Side = "B") -> float:
    if side not in ("B", "E"):
        raise InvalidParamsError(f"side must be 'B' or 'E', got '{side}'")
    _check_dim(channel, ensemble.dim)
    bob, eve = _sides(channel)
    operators = bob if side == "B" else eve
    return float(
        sum(
            weight * _holevo(operators, member.probs, member.states)
            for weight, member in zip(ensemble.outer_probs, ensemble.inner)
        )
    )


def eta_value(channel: Channelish, ensemble: HierarchicalEnsemble) -> float:
    return conditional_holevo(channel, ensemble, "B") - conditional_holevo(channel, ensemble, "E")


def spectral_ensemble(state: QuantumState | np.ndarray) -> HierarchicalEnsemble:
    """Eigen-decomposition of ``state`` as outer ensemble with one pure state per symbol."""
    values, vectors = scipy.linalg.eigh(_matrix(state))
    keep = values > ENTROPY_CLAMP
    probs = values[keep] / values[keep].sum()
    members = tuple(
        Ensemble(np.ones(1), np.outer(vec, vec.conj())[np.newaxis]) for vec in vectors[:, keep].T
    )
    return HierarchicalEnsemble(probs, members)


def _config(cfg: OptimizerConfig | None) -> OptimizerConfig:
    return OptimizerConfig() if cfg is None else cfg


def _lbfgs(fun: Callable[[np.ndarray], tuple[float, np.ndarray]], x0: np.ndarray, cfg: OptimizerConfig):
    return scipy.optimize.minimize(
        fun,
        x0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": cfg.max_iters, "gtol": cfg.tol, "ftol": cfg.tol},
    )


@dataclass(slots=True)
class _Outcome:
    record: RestartRecord
    argument: QuantumState | HierarchicalEnsemble | None


def _failed(index: int, seed: int | None, exc: Exception) -> _Outcome:
    return _Outcome(
        record=RestartRecord(index=index, seed=seed, value=float("-inf"), iterations=0, success=False, message=str(exc)),
        argument=None,
    )


def _select(
    outcomes: list[_Outcome],
    candidates: list[tuple[float, QuantumState | HierarchicalEnsemble]],
) -> MaximizationResult:
    records = tuple(outcome.record for outcome in outcomes)
    best_value = float("-inf")
    best_argument = None
    for value, argument in candidates:
        if value > best_value:
            best_value, best_argument = value, argument
    for outcome in outcomes:
        if outcome.argument is not None and outcome.record.value > best_value:
            best_value, best_argument = outcome.record.value, outcome.argument
    return MaximizationResult(
        value=best_value,
        argument=best_argument,
        records=records,
        converged=any(record.success for record in records),
    )


def maximize_coherent_information(
    channel: Channelish,
    cfg: OptimizerConfig | None = None,
    *,
    threads: int | None = None,
) -> MaximizationResult:
    """Best I_coh over density matrices, with the maximally mixed state and |0><0| as fixed candidates."""
    cfg = _config(cfg)
    dim = _input_dim(channel)
    bob, eve = _sides(channel)
    identity = np.eye(dim)

    def objective(params: np.ndarray) -> tuple[float, np.ndarray]:
        factor = (params[: dim * dim] + 1j * params[dim * dim :]).reshape(dim, dim)
        gram = factor @ factor.conj().T
        trace = np.trace(gram).real
        rho = gram / trace
        value, gamma = _coherent_terms(bob, eve, rho)
        shift = np.trace(gamma @ rho).real
        grad = (2.0 / trace) * (gamma - shift * identity) @ factor
        return -value, -np.concatenate([grad.real.ravel(), grad.imag.ravel()])

    def run(index: int) -> _Outcome:
        seed = cfg.seed + index
        rng = np.random.default_rng(seed)
        x0 = rng.standard_normal(2 * dim * dim)
        try:
            result = _lbfgs(objective, x0, cfg)
            factor = (result.x[: dim * dim] + 1j * result.x[dim * dim :]).reshape(dim, dim)
            gram = factor @ factor.conj().T
            state = QuantumState(gram / np.trace(gram).real)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            return _failed(index, seed, exc)
        return _Outcome(
            record=RestartRecord(
                index=index,
                seed=seed,
                value=coherent_information(channel, state),
                iterations=int(result.nit),
                success=bool(result.success),
                message=str(result.message),
            ),
            argument=state,
        )

    outcomes = run_restarts(run, cfg.restarts, threads=threads)
    candidates = []
    for matrix in (identity / dim, np.diag(np.eye(dim)[0]).astype(np.complex128)):
        state = QuantumState(matrix)
        candidates.append((coherent_information(channel, state), state))
    return _select(outcomes, candidates)


@dataclass(slots=True)
class _EnsembleObjective:
    """Weighted sum of Holevo terms on the coarse ensemble and entropy terms at its average."""

    dim: int
    outer: int
    inner: int
    chi_terms: tuple[tuple[float, np.ndarray], ...] = ()
    entropy_terms: tuple[tuple[float, np.ndarray], ...] = ()

    @property
    def size(self) -> int:
        return self.outer + self.outer * self.inner * (1 + 2 * self.dim)

    def unpack(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        o, m, d = self.outer, self.inner, self.dim
        logits_outer = params[:o]
        logits_inner = params[o : o + o * m].reshape(o, m)
        raw = params[o + o * m :].reshape(2, o, m, d)
        return logits_outer, logits_inner, raw[0] + 1j * raw[1]

    def pack(self, logits_outer: np.ndarray, logits_inner: np.ndarray, vectors: np.ndarray) -> np.ndarray:
        return np.concatenate(
            [logits_outer.ravel(), logits_inner.ravel(), vectors.real.ravel(), vectors.imag.ravel()]
        )

    def random_params(self, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(self.size)

    def seed_params(self, ensemble: HierarchicalEnsemble, rng: np.random.Generator) -> np.ndarray:
        """Parameters reproducing ``ensemble`` as closely as the sizes allow."""
        logits_outer = np.full(self.outer, SEED_LOGIT_FLOOR)
        logits_inner = np.full((self.outer, self.inner), SEED_LOGIT_FLOOR)
        shape = (self.outer, self.inner, self.dim)
        vectors = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        order = np.argsort(ensemble.outer_probs)[::-1][: self.outer]
        for slot, source in enumerate(order):
            member = ensemble.inner[source]
            logits_outer[slot] = np.log(max(ensemble.outer_probs[source], np.exp(SEED_LOGIT_FLOOR)))
            for inner_slot in range(min(self.inner, member.size)):
                logits_inner[slot, inner_slot] = np.log(max(member.probs[inner_slot], np.exp(SEED_LOGIT_FLOOR)))
                vectors[slot, inner_slot] = np.linalg.eigh(member.states[inner_slot])[1][:, -1]
        return self.pack(logits_outer, logits_inner, vectors)

    def ensemble(self, params: np.ndarray) -> HierarchicalEnsemble:
        logits_outer, logits_inner, vectors = self.unpack(params)
        probs = scipy.special.softmax(logits_outer)
        inner_probs = scipy.special.softmax(logits_inner, axis=1)
        vectors = vectors / np.linalg.norm(vectors, axis=-1, keepdims=True)
        members = tuple(
            Ensemble(inner_probs[x], np.einsum("ma,mb->mab", vectors[x], vectors[x].conj()))
            for x in range(self.outer)
        )
        return HierarchicalEnsemble(probs, members)

    def value_and_grad(self, params: np.ndarray) -> tuple[float, np.ndarray]:
        logits_outer, logits_inner, vectors = self.unpack(params)
        probs = scipy.special.softmax(logits_outer)
        inner_probs = scipy.special.softmax(logits_inner, axis=1)
        norms2 = np.sum(np.abs(vectors) ** 2, axis=-1)
        pure = np.einsum("xma,xmb->xmab", vectors, vectors.conj()) / norms2[..., None, None]
        coarse = np.einsum("xm,xmab->xab", inner_probs, pure)
        average = np.einsum("x,xab->ab", probs, coarse)

        value = 0.0
        gamma = np.zeros_like(coarse)
        grad_probs = np.zeros(self.outer)
        for weight, operators in self.chi_terms:
            outputs = apply_batch(operators, coarse)
            out_average = np.einsum("x,xab->ab", probs, outputs)
            s_x, log_x = _spectra(outputs)
            s_avg, log_avg = _spectra(out_average[np.newaxis])
            value += weight * (s_avg[0] - probs @ s_x)
            gamma += weight * probs[:, None, None] * adjoint_batch(operators, log_x - log_avg)
            grad_probs += weight * (-np.einsum("xab,ba->x", outputs, log_avg[0]).real - s_x)
        for weight, operators in self.entropy_terms:
            s_avg, log_avg = _spectra(apply_operators(operators, average)[np.newaxis])
            pulled = adjoint_operators(operators, log_avg[0])
            value += weight * s_avg[0]
            gamma -= weight * probs[:, None, None] * pulled[np.newaxis]
            grad_probs -= weight * np.einsum("xab,ba->x", coarse, pulled).real

        gamma = (gamma + gamma.conj().transpose(0, 2, 1)) / 2
        grad_outer = probs * (grad_probs - probs @ grad_probs)
        grad_weights = np.einsum("xab,xmba->xm", gamma, pure).real
        grad_inner = inner_probs * (grad_weights - np.sum(inner_probs * grad_weights, axis=1, keepdims=True))
        scaled = inner_probs[..., None, None] * gamma[:, None]
        shift = np.einsum("xmab,xmba->xm", scaled, pure).real
        grad_vectors = (2.0 / norms2)[..., None] * (
            np.einsum("xmab,xmb->xma", scaled, vectors) - shift[..., None] * vectors
        )
        return float(value), self.pack(grad_outer, grad_inner, grad_vectors)


def _maximize_ensemble(
    objective: _EnsembleObjective,
    evaluate: Callable[[HierarchicalEnsemble], float],
    cfg: OptimizerConfig,
    *,
    seeds: dict[int, HierarchicalEnsemble] | None = None,
    candidates: list[HierarchicalEnsemble] | None = None,
    threads: int | None = None,
) -> MaximizationResult:
    seeds = seeds or {}

    def negated(params: np.ndarray) -> tuple[float, np.ndarray]:
        value, grad = objective.value_and_grad(params)
        return -value, -grad

    def run(index: int) -> _Outcome:
        seed = cfg.seed + index
        rng = np.random.default_rng(seed)
        if index in seeds:
            x0 = objective.seed_params(seeds[index], rng)
        else:
            x0 = objective.random_params(rng)
        try:
            result = _lbfgs(negated, x0, cfg)
            ensemble = objective.ensemble(result.x)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            return _failed(index, seed, exc)
        return _Outcome(
            record=RestartRecord(
                index=index,
                seed=seed,
                value=evaluate(ensemble),
                iterations=int(result.nit),
                success=bool(result.success),
                message=str(result.message),
            ),
            argument=ensemble,
        )

    outcomes = run_restarts(run, cfg.restarts, threads=threads)
    scored = [(evaluate(candidate), candidate) for candidate in candidates or []]
    return _select(outcomes, scored)


def _objective(dim: int, cfg: OptimizerConfig, **terms) -> _EnsembleObjective:
    outer, inner = cfg.ensemble_sizes(dim)
    return _EnsembleObjective(dim=dim, outer=outer, inner=inner, **terms)


def maximize_private_information(
    channel: Channelish,
    cfg: OptimizerConfig | None = None,
    *,
    q_solution: QuantumState | None = None,
    threads: int | None = None,
) -> MaximizationResult:
    """Best I(A':B) - I(A':E) over hierarchical ensembles.

    The spectral decomposition of the best coherent-information input is
    always evaluated and also seeds restart 0.
    """
    cfg = _config(cfg)
    dim = _input_dim(channel)
    if q_solution is None:
        bob_channel = channel.bob if isinstance(channel, WiretapChannel) else channel
        q_solution = maximize_coherent_information(bob_channel, cfg, threads=threads).argument
    bob, eve = _sides(channel)
    objective = _objective(dim, cfg, chi_terms=((1.0, bob), (-1.0, eve)))
    spectral = spectral_ensemble(q_solution)
    return _maximize_ensemble(
        objective,
        lambda ensemble: private_information_value(channel, ensemble),
        cfg,
        seeds={0: spectral},
        candidates=[spectral],
        threads=threads,
    )


def maximize_eta(
    channel: KrausChannel,
    cfg: OptimizerConfig | None = None,
    *,
    threads: int | None = None,
) -> MaximizationResult:
    """Best eta over hierarchical ensembles with pure fine-grained states.

    Uses eta = I_coh(average) - (I(A':B) - I(A':E)), which holds for the
    true complementary channel at pure inner states.
    """
    if isinstance(channel, WiretapChannel):
        raise InvalidParamsError("eta maximization needs a channel with its own complementary channel")
    cfg = _config(cfg)
    bob, eve = _sides(channel)
    objective = _objective(
        channel.d_in,
        cfg,
        chi_terms=((-1.0, bob), (1.0, eve)),
        entropy_terms=((1.0, bob), (-1.0, eve)),
    )
    return _maximize_ensemble(
        objective,
        lambda ensemble: eta_value(channel, ensemble),
        cfg,
        threads=threads,
    )


def compute_delta(
    degradable: Channelish,
    partially_degradable: Channelish,
    cfg: OptimizerConfig | None = None,
    *,
    threads: int | None = None,
) -> DeltaReport:
    """Both readings of the rate gap between a degradable channel and its PD counterpart.

    The Holevo reading maximizes chi(Eve_D) - chi(Eve_PD) over shared input
    ensembles; the capacity reading is P(N_PD) - P(N_D) with each side
    maximized on its own.
    """
    cfg = _config(cfg)
    dim = _input_dim(degradable)
    if _input_dim(partially_degradable) != dim:
        raise DimensionMismatchError(
            f"channels disagree on input dimension ({dim} vs {_input_dim(partially_degradable)})"
        )
    _, eve_d = _sides(degradable)
    _, eve_pd = _sides(partially_degradable)

    p_d = maximize_private_information(degradable, cfg, threads=threads)
    p_pd = maximize_private_information(partially_degradable, cfg, threads=threads)

    def gap(ensemble: HierarchicalEnsemble) -> float:
        coarse = ensemble.coarse_states()
        return _holevo(eve_d, ensemble.outer_probs, coarse) - _holevo(eve_pd, ensemble.outer_probs, coarse)

    objective = _objective(dim, cfg, chi_terms=((1.0, eve_d), (-1.0, eve_pd)))
    seeded = [p_d.argument, p_pd.argument]
    holevo_gap = _maximize_ensemble(
        objective,
        gap,
        cfg,
        seeds={0: p_d.argument, 1: p_pd.argument},
        candidates=seeded,
        threads=threads,
    )
    best = holevo_gap.argument
    coarse = best.coarse_states()
    return DeltaReport(
        holevo_gap=holevo_gap.value,
        capacity_gap=p_pd.value - p_d.value,
        p_degradable=p_d.value,
        p_partially_degradable=p_pd.value,
        best_input=best,
        eve_holevo_degradable=_holevo(eve_d, best.outer_probs, coarse),
        eve_holevo_degraded=_holevo(eve_pd, best.outer_probs, coarse),
    )


def q1_multicopy(
    channel: KrausChannel,
    n: int,
    cfg: OptimizerConfig | None = None,
    *,
    threads: int | None = None,
) -> float:
    """Coherent information of the n-fold tensor power, per channel use."""
    if n < 1 or n > MAX_COPIES:
        raise InvalidParamsError(f"number of copies must be between 1 and {MAX_COPIES}, got {n}")
    if channel.d_in**n > MAX_MULTICOPY_DIM:
        raise DimensionTooLargeError(
            f"input dimension {channel.d_in}^{n} exceeds the supported {MAX_MULTICOPY_DIM}"
        )
    result = maximize_coherent_information(tensor_power(channel, n), cfg, threads=threads)
    return result.value / n
