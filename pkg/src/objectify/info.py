"""Entropies, Holevo information and skew-information transfer from a
memory-holding agent (the "daimon") to an observer.

Entropies are in nats.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg as la
from .errors import PreconditionError, ValidationError
from .instruments import P_THRESHOLD
from .observables import validate_state
from .schemes import ObjectificationEnsemble
from .thermo import DEFAULT_ALPHA, skew_information

ENTROPY_CUTOFF = 1e-12


def von_neumann_entropy(rho, tol: float = la.ATOL) -> float:
    validate_state(rho, tol).raise_if_invalid()
    w = np.linalg.eigvalsh(la.hermitize(rho))
    w = w[w > ENTROPY_CUTOFF]
    return float(-np.sum(w * np.log(w)))


def shannon_entropy(p, tol: float = la.ATOL) -> float:
    p = np.asarray(p, dtype=float)
    if np.any(p < -tol) or abs(p.sum() - 1.0) > tol:
        raise ValidationError(
            f"probability normalisation violated (sum {p.sum():.6g}, min {p.min():.3e})",
            [("normalisation", abs(p.sum() - 1.0)), ("positivity", max(0.0, -float(p.min())))],
        )
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def holevo_information(probs, states, tol: float = la.ATOL) -> float:
    """``S(sum_x p_x rho_x) - sum_x p_x S(rho_x)``; outcomes with ``p = 0`` are ignored."""
    probs = np.asarray(probs, dtype=float)
    if len(probs) != len(states):
        raise ValidationError(f"{len(probs)} probabilities for {len(states)} states", [("ensemble size", 1.0)])
    shannon_entropy(probs, tol)
    keep = [i for i, p in enumerate(probs) if p > P_THRESHOLD]
    mix = sum(probs[i] * la.as_matrix(states[i]) for i in keep)
    return von_neumann_entropy(mix, tol) - float(sum(probs[i] * von_neumann_entropy(states[i], tol) for i in keep))


def trace_distance(a, b) -> float:
    return 0.5 * la.trace_norm(la.as_matrix(a) - la.as_matrix(b))


@dataclass(frozen=True)
class DaimonScenario:
    """Objectified states plus the outcome-dependent waiting times chosen by the daimon.

    ``h`` is the joint system-apparatus Hamiltonian. ``h_d`` is the memory
    Hamiltonian, diagonal in the memory basis; it defaults to
    ``diag(0, 1, 2, ...)``.
    """

    ensemble: ObjectificationEnsemble
    times: tuple[float, ...]
    h: np.ndarray
    h_d: np.ndarray | None = None

    def __post_init__(self):
        times = tuple(float(g) for g in self.times)
        n = len(self.ensemble.outcomes)
        if len(times) != n:
            raise PreconditionError(f"{len(times)} waiting times for {n} outcomes")
        if len(set(times)) != n:
            raise PreconditionError(f"waiting times must be pairwise distinct, got {times}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "h", la.as_matrix(self.h))
        h_d = np.diag(np.arange(n, dtype=complex)) if self.h_d is None else la.as_matrix(self.h_d)
        if h_d.shape != (n, n):
            raise PreconditionError(f"memory Hamiltonian shape {h_d.shape} does not match {n} outcomes")
        off = la.max_abs(h_d - np.diag(np.diag(h_d)))
        if off > la.ATOL:
            raise PreconditionError(f"memory Hamiltonian must be diagonal (off-diagonal magnitude {off:.3e})")
        object.__setattr__(self, "h_d", h_d)


@dataclass(frozen=True)
class InfoReport:
    entropy_received: float  # S of the observer's state
    mean_entropy: float
    shannon: float
    holevo: float
    entropy_gap: float  # holevo - shannon, <= 0
    skew_total: float
    skew_total_direct: float
    skew_marginal: float
    skew_gap: float  # skew_marginal - skew_total, <= 0
    kappa: float
    alpha: float


def daimon_report(sc: DaimonScenario, alpha: float = DEFAULT_ALPHA) -> InfoReport:
    ens = sc.ensemble
    idx = ens.support()
    p = np.array([ens.probs[i] for i in idx])
    evolved = []
    for i in idx:
        v = la.herm_unitary(sc.h, sc.times[i])
        evolved.append(la.hermitize(v @ ens.sigmas[i] @ la.dag(v)))
    received = sum(pi * s for pi, s in zip(p, evolved))

    s_received = von_neumann_entropy(received)
    mean_s = float(sum(pi * von_neumann_entropy(ens.sigmas[i]) for pi, i in zip(p, idx)))
    shannon = shannon_entropy(p / p.sum())
    holevo = s_received - mean_s

    # block structure: skew information of the memory-correlated state reduces
    # to the weighted skew information of its blocks
    skew_total = float(sum(pi * skew_information(sc.h, s, alpha) for pi, s in zip(p, evolved)))
    n = len(ens.outcomes)
    joint = sum(
        ens.probs[i] * np.kron(la.ket_projector(la.basis_vector(n, i)), s) for i, s in zip(idx, evolved)
    )
    h_tot = np.kron(sc.h_d, np.eye(sc.h.shape[0])) + np.kron(np.eye(n), sc.h)
    skew_direct = skew_information(h_tot, joint, alpha)
    skew_marginal = skew_information(sc.h, received, alpha)
    kappa = max((trace_distance(a, b) for a, b in combinations(evolved, 2)), default=0.0)
    return InfoReport(
        s_received,
        mean_s,
        shannon,
        holevo,
        holevo - shannon,
        skew_total,
        skew_direct,
        skew_marginal,
        skew_marginal - skew_total,
        kappa,
        alpha,
    )


class BlockSkewCheck(NamedTuple):
    lhs: float
    rhs: float
    residual: float


def block_skew_identity_check(
    probs: Sequence[float], sigmas: Sequence, h1, h2, alpha: float = DEFAULT_ALPHA
) -> BlockSkewCheck:
    """Compare the skew information of ``sum_i p_i |i><i| (x) sigma_i`` with ``sum_i p_i V_qu(h2, sigma_i)``.

    ``h1`` must be diagonal in the basis ``|i>``. The left side is computed
    directly on the joint space.
    """
    h1, h2 = la.as_matrix(h1), la.as_matrix(h2)
    n = len(probs)
    if h1.shape != (n, n):
        raise PreconditionError(f"h1 has shape {h1.shape}, expected {n}x{n}")
    off = la.max_abs(h1 - np.diag(np.diag(h1)))
    if off > la.ATOL:
        raise PreconditionError(f"h1 must be diagonal in the block basis (off-diagonal magnitude {off:.3e})")
    d2 = h2.shape[0]
    rho = sum(p * np.kron(la.ket_projector(la.basis_vector(n, i)), la.as_matrix(s)) for i, (p, s) in enumerate(zip(probs, sigmas)))
    h = np.kron(h1, np.eye(d2)) + np.kron(np.eye(n), h2)
    lhs = skew_information(h, rho, alpha)
    rhs = float(sum(p * skew_information(h2, s, alpha) for p, s in zip(probs, sigmas) if p > P_THRESHOLD))
    return BlockSkewCheck(lhs, rhs, abs(lhs - rhs))
