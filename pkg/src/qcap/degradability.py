"""Least-squares feasibility over CPTP connecting maps.

Every question here has the same shape: find CPTP M with M o source = target.
The Choi matrix of M o source is linear in the Choi matrix X of M, so the
residual ||Choi(M o source) - Choi(target)||_F is minimized by projected
gradient descent with momentum over X, projecting onto CPTP Choi matrices with Dykstra's
alternating projections (PSD clip, then trace-preservation correction).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channels import (
    choi_array,
    complementary_channel,
    compose,
    kraus_from_choi_array,
    kraus_to_choi,
    random_channel,
)
from .models import (
    ChoiMatrix,
    DegradabilityCertificate,
    DimensionMismatchError,
    InvalidParamsError,
    KrausChannel,
    Verdict,
)
from .restarts import run_restarts

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 20000
DEFAULT_RESTARTS = 8
DEFAULT_ROUNDS = 25
STALL_WINDOW = 200
STALL_RATIO = 1e-6
DYKSTRA_TOL = 1e-13
DYKSTRA_MAX_ITERS = 500
POWER_ITERS = 60


@dataclass(slots=True)
class _Solve:
    choi: np.ndarray
    residual: float
    iterations: int
    converged: bool
    history: tuple[float, ...]


def _compose_choi(source: np.ndarray, d_in: int, d_mid: int, connecting: np.ndarray, d_out: int) -> np.ndarray:
    """Choi(M o S) from Choi(S) and Choi(M)."""
    j4 = source.reshape(d_in, d_mid, d_in, d_mid)
    x4 = connecting.reshape(d_mid, d_out, d_mid, d_out)
    return np.einsum("iajb,acbd->icjd", j4, x4).reshape(d_in * d_out, d_in * d_out)


def _compose_choi_adjoint(source: np.ndarray, d_in: int, d_mid: int, residual: np.ndarray, d_out: int) -> np.ndarray:
    j4 = source.reshape(d_in, d_mid, d_in, d_mid)
    y4 = residual.reshape(d_in, d_out, d_in, d_out)
    return np.einsum("icjd,iajb->acbd", y4, j4.conj()).reshape(d_mid * d_out, d_mid * d_out)


def project_psd(matrix: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh((matrix + matrix.conj().T) / 2)
    values = np.clip(values, 0.0, None)
    return (vectors * values) @ vectors.conj().T


def project_trace_preserving(matrix: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    marginal = np.einsum("iaja->ij", matrix.reshape(d_in, d_out, d_in, d_out))
    return matrix - np.kron(marginal - np.eye(d_in), np.eye(d_out)) / d_out


def project_cptp(matrix: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    """Dykstra's algorithm onto the intersection of the PSD cone and the TP subspace."""
    state = matrix
    cp_change = np.zeros_like(matrix)
    tp_change = np.zeros_like(matrix)
    for _ in range(DYKSTRA_MAX_ITERS):
        pre_cp = state - cp_change
        cp_projection = project_psd(pre_cp)
        new_cp_change = cp_projection - pre_cp
        pre_tp = cp_projection - tp_change
        new_state = project_trace_preserving(pre_tp, d_in, d_out)
        new_tp_change = new_state - pre_tp
        moved = np.linalg.norm(new_state - state) ** 2 + np.linalg.norm(new_cp_change - cp_change) ** 2
        state, cp_change, tp_change = new_state, new_cp_change, new_tp_change
        if moved < DYKSTRA_TOL ** 2:
            break
    return state


def polish_cptp(matrix: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    """Snap a nearly CPTP Choi matrix onto an exactly CPTP one.

    Clips negative eigenvalues, then restores the marginal by the congruence
    (S^-1/2 (x) I) X (S^-1/2 (x) I) with S the input marginal.
    """
    clipped = project_psd(matrix)
    marginal = np.einsum("iaja->ij", clipped.reshape(d_in, d_out, d_in, d_out))
    values, vectors = np.linalg.eigh((marginal + marginal.conj().T) / 2)
    values = np.clip(values, 1e-300, None)
    inv_sqrt = (vectors / np.sqrt(values)) @ vectors.conj().T
    congruence = np.kron(inv_sqrt, np.eye(d_out))
    polished = congruence @ clipped @ congruence.conj().T
    return (polished + polished.conj().T) / 2


def _lipschitz(source: np.ndarray, d_in: int, d_mid: int, d_out: int) -> float:
    size = d_mid * d_out
    rng = np.random.default_rng(0)
    vector = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    vector = vector + vector.conj().T
    vector /= np.linalg.norm(vector)
    estimate = 1.0
    for _ in range(POWER_ITERS):
        image = _compose_choi_adjoint(
            source, d_in, d_mid, _compose_choi(source, d_in, d_mid, vector, d_out), d_out
        )
        estimate = float(np.linalg.norm(image))
        if estimate == 0.0:
            return 1.0
        vector = image / estimate
    return 1.01 * estimate


def _least_squares(
    source: np.ndarray,
    target: np.ndarray,
    d_in: int,
    d_mid: int,
    d_out: int,
    tol: float,
    max_iters: int,
    initial: np.ndarray | None = None,
) -> _Solve:
    """Accelerated projected gradient with a monotone acceptance rule.

    The extrapolated point only moves the iterate when it lowers the residual;
    otherwise the momentum restarts from the current iterate, so the residual
    trace never increases.
    """
    step = 1.0 / _lipschitz(source, d_in, d_mid, d_out)
    if initial is None:
        x = np.eye(d_mid * d_out, dtype=np.complex128) / d_out
    else:
        x = project_cptp(np.asarray(initial, dtype=np.complex128), d_mid, d_out)
    stop_at = tol * 1e-4

    def residual_of(candidate: np.ndarray) -> tuple[np.ndarray, float]:
        diff = _compose_choi(source, d_in, d_mid, candidate, d_out) - target
        return diff, float(np.linalg.norm(diff))

    diff, residual = residual_of(x)
    history = [residual]
    lookahead, lookahead_diff = x, diff
    momentum = 1.0
    converged = residual <= stop_at
    iterations = 0
    while not converged and iterations < max_iters:
        grad = _compose_choi_adjoint(source, d_in, d_mid, lookahead_diff, d_out)
        candidate = project_cptp(lookahead - step * grad, d_mid, d_out)
        candidate_diff, candidate_residual = residual_of(candidate)
        iterations += 1
        if candidate_residual <= residual:
            next_momentum = (1.0 + np.sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0
            previous = x
            x, diff, residual = candidate, candidate_diff, candidate_residual
            lookahead = x + ((momentum - 1.0) / next_momentum) * (x - previous)
            lookahead_diff, _ = residual_of(lookahead)
            momentum = next_momentum
        else:
            lookahead, lookahead_diff = x, diff
            momentum = 1.0
        history.append(residual)
        if residual <= stop_at:
            converged = True
        elif iterations >= STALL_WINDOW:
            earlier = history[-STALL_WINDOW - 1]
            if earlier - residual <= STALL_RATIO * residual:
                converged = True

    polished = polish_cptp(x, d_mid, d_out)
    _, polished_residual = residual_of(polished)
    return _Solve(
        choi=polished,
        residual=polished_residual,
        iterations=iterations,
        converged=converged,
        history=tuple(history),
    )


def _certificate(
    solve: _Solve,
    d_mid: int,
    d_out: int,
    tol: float,
    verdict_if_feasible: Verdict,
    degradation_map: ChoiMatrix | None = None,
    restarts: int = 1,
) -> DegradabilityCertificate:
    verdict: Verdict = verdict_if_feasible if solve.residual <= tol else "infeasible-at-tolerance"
    return DegradabilityCertificate(
        verdict=verdict,
        connecting_map=ChoiMatrix(solve.choi, d_mid, d_out),
        degradation_map=degradation_map,
        residual=solve.residual,
        iterations=solve.iterations,
        tolerance=tol,
        converged=solve.converged,
        restarts=restarts,
        residual_history=solve.history,
    )


def _check_budget(tol: float, max_iters: int) -> None:
    if tol <= 0:
        raise InvalidParamsError("tol must be positive")
    if max_iters < 1:
        raise InvalidParamsError("max_iters must be at least 1")


def find_connecting_map(
    source: KrausChannel,
    target: KrausChannel,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    *,
    initial: np.ndarray | None = None,
    verdict_if_feasible: Verdict = "pd-feasible",
) -> DegradabilityCertificate:
    """Best CPTP M with M o source close to target, with its residual.

    When ``max_iters`` runs out the best iterate is still returned; it is
    flagged ``converged=False`` and judged against ``tol`` like any other.
    """
    _check_budget(tol, max_iters)
    if source.d_in != target.d_in:
        raise DimensionMismatchError(
            f"source and target disagree on input dimension ({source.d_in} vs {target.d_in})"
        )
    solve = _least_squares(
        choi_array(source.operators),
        choi_array(target.operators),
        source.d_in,
        source.d_out,
        target.d_out,
        tol,
        max_iters,
        initial=initial,
    )
    return _certificate(solve, source.d_out, target.d_out, tol, verdict_if_feasible)


def is_degradable(
    channel: KrausChannel,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> DegradabilityCertificate:
    return find_connecting_map(
        channel,
        complementary_channel(channel),
        tol,
        max_iters,
        verdict_if_feasible="degradable",
    )


def is_antidegradable(
    channel: KrausChannel,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> DegradabilityCertificate:
    return find_connecting_map(
        complementary_channel(channel),
        channel,
        tol,
        max_iters,
        verdict_if_feasible="anti-degradable",
    )


def is_partially_degradable(
    channel: KrausChannel,
    degradation: KrausChannel,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    *,
    initial: np.ndarray | None = None,
) -> DegradabilityCertificate:
    """Look for T with T o N_AB = D o N_AE; the certificate keeps both T and D.

    ``initial`` warm-starts the solve from a Choi matrix of T, e.g. one returned
    by ``search_degradation_map``.
    """
    environment = complementary_channel(channel)
    if degradation.d_in != environment.d_out:
        raise DimensionMismatchError(
            f"degradation map expects environment dimension {degradation.d_in}, "
            f"channel has {environment.d_out}"
        )
    certificate = find_connecting_map(
        channel,
        compose(degradation, environment),
        tol,
        max_iters,
        initial=initial,
        verdict_if_feasible="pd-feasible",
    )
    return DegradabilityCertificate(
        verdict=certificate.verdict,
        connecting_map=certificate.connecting_map,
        degradation_map=kraus_to_choi(degradation),
        residual=certificate.residual,
        iterations=certificate.iterations,
        tolerance=certificate.tolerance,
        converged=certificate.converged,
        residual_history=certificate.residual_history,
    )


def environment_leak(channel: KrausChannel, degradation: np.ndarray, d_env_prime: int) -> float:
    """Distance of D o N_AE from the replacement channel with the same average output.

    Zero means the degraded environment learns nothing about the input.
    """
    environment = complementary_channel(channel)
    joint = _compose_choi(
        choi_array(environment.operators), channel.d_in, environment.d_out, degradation, d_env_prime
    )
    output = np.einsum("iaib->ab", joint.reshape(channel.d_in, d_env_prime, channel.d_in, d_env_prime))
    replacement = np.kron(np.eye(channel.d_in), output / channel.d_in)
    return float(np.linalg.norm(joint - replacement))


@dataclass(slots=True)
class _Alternation:
    connecting: np.ndarray
    degradation: np.ndarray
    residual: float
    iterations: int
    converged: bool
    history: tuple[float, ...]


def _alternate(
    bob: np.ndarray,
    eve: np.ndarray,
    d_in: int,
    d_bob: int,
    d_env: int,
    d_env_prime: int,
    degradation: np.ndarray,
    tol: float,
    max_iters: int,
    rounds: int,
) -> _Alternation:
    connecting = None
    total_iterations = 0
    history: list[float] = []
    residual = np.inf
    converged = False
    for _ in range(rounds):
        target = _compose_choi(eve, d_in, d_env, degradation, d_env_prime)
        t_solve = _least_squares(bob, target, d_in, d_bob, d_env_prime, tol, max_iters, initial=connecting)
        connecting = t_solve.choi
        total_iterations += t_solve.iterations
        target = _compose_choi(bob, d_in, d_bob, connecting, d_env_prime)
        d_solve = _least_squares(eve, target, d_in, d_env, d_env_prime, tol, max_iters, initial=degradation)
        degradation = d_solve.choi
        total_iterations += d_solve.iterations
        previous = residual
        residual = d_solve.residual
        history.append(residual)
        converged = t_solve.converged and d_solve.converged
        if residual <= tol * 1e-4 or previous - residual <= STALL_RATIO * max(residual, tol):
            break
    return _Alternation(
        connecting=connecting,
        degradation=degradation,
        residual=float(residual),
        iterations=total_iterations,
        converged=converged,
        history=tuple(history),
    )


def search_degradation_map(
    channel: KrausChannel,
    d_env_prime: int,
    tol: float = DEFAULT_TOL,
    restarts: int = DEFAULT_RESTARTS,
    max_iters: int = DEFAULT_MAX_ITERS,
    *,
    seed: int = 0,
    rounds: int = DEFAULT_ROUNDS,
    threads: int | None = None,
    warn: Callable[[str], None] | None = None,
) -> DegradabilityCertificate:
    """Heuristic search for a pair (T, D) with T o N_AB = D o N_AE.

    Alternates two convex solves (T for fixed D, then D for fixed T) from
    several starting maps. Restart 0 starts from D = identity when E' = E;
    restart k otherwise starts from a random channel seeded with seed + k.
    Constant maps T and D always satisfy the equation, so among restarts that
    meet ``tol`` the one whose degraded environment leaks the most about the
    input is kept. An infeasible verdict means no pair was found.
    """
    _check_budget(tol, max_iters)
    if d_env_prime < 1:
        raise InvalidParamsError("degraded environment dimension must be at least 1")
    if restarts < 1 or rounds < 1:
        raise InvalidParamsError("restarts and rounds must be at least 1")
    environment = complementary_channel(channel)
    d_env = environment.d_out
    bob = choi_array(channel.operators)
    eve = choi_array(environment.operators)

    def initial_degradation(index: int) -> np.ndarray:
        if index == 0 and d_env_prime == d_env:
            return choi_array(np.eye(d_env, dtype=np.complex128)[np.newaxis])
        rng = np.random.default_rng(seed + index)
        return choi_array(random_channel(d_env, d_env_prime, rng).operators)

    def run(index: int) -> _Alternation:
        return _alternate(
            bob,
            eve,
            channel.d_in,
            channel.d_out,
            d_env,
            d_env_prime,
            initial_degradation(index),
            tol,
            max_iters,
            rounds,
        )

    results = run_restarts(run, restarts, threads=threads)
    feasible = [index for index, result in enumerate(results) if result.residual <= tol]
    if feasible:
        leaks = {
            index: environment_leak(channel, results[index].degradation, d_env_prime) for index in feasible
        }
        best_index = max(feasible, key=lambda index: (leaks[index], -index))
        if leaks[best_index] <= tol and d_env_prime > 1 and warn is not None:
            warn("Only constant degradation maps were found; the certificate is trivial.")
    else:
        best_index = min(range(restarts), key=lambda index: (results[index].residual, index))
    best = results[best_index]
    degradation = ChoiMatrix(best.degradation, d_env, d_env_prime)
    return DegradabilityCertificate(
        verdict="pd-feasible" if best.residual <= tol else "infeasible-at-tolerance",
        connecting_map=ChoiMatrix(best.connecting, channel.d_out, d_env_prime),
        degradation_map=degradation,
        residual=best.residual,
        iterations=sum(result.iterations for result in results),
        tolerance=tol,
        converged=best.converged,
        restarts=restarts,
        residual_history=best.history,
    )


def connecting_channel(certificate: DegradabilityCertificate) -> KrausChannel:
    choi = certificate.connecting_map
    return KrausChannel(kraus_from_choi_array(choi.matrix, choi.d_in, choi.d_out))


def degradation_channel(certificate: DegradabilityCertificate) -> KrausChannel | None:
    choi = certificate.degradation_map
    if choi is None:
        return None
    return KrausChannel(kraus_from_choi_array(choi.matrix, choi.d_in, choi.d_out))
