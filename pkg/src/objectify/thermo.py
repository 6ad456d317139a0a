"""Work, heat and energy changes of a measurement, and the split of heat
fluctuations into classical and quantum parts.

All energies are in units with hbar = 1. The joint Hamiltonian is always the
additive one, ``H = H_S (x) 1 + 1 (x) H_A``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg as la
from .errors import DimensionError, PreconditionError
from .instruments import P_THRESHOLD, Instrument, apply_dual, induced_observable, luders_instrument
from .observables import is_sharp
from .schemes import (
    MeasurementScheme,
    ObjectificationEnsemble,
    check_yanase,
    induced_instrument,
    objectify,
    pointer_channel_dual,
    premeasure,
)

DEFAULT_ALPHA = 0.5


def joint_hamiltonian(h_s, h_a) -> np.ndarray:
    h_s, h_a = la.as_matrix(h_s), la.as_matrix(h_a)
    return np.kron(h_s, np.eye(h_a.shape[0])) + np.kron(np.eye(h_s.shape[0]), h_a)


def _check_dims(m: MeasurementScheme, h_s, h_a):
    if la.as_matrix(h_s).shape != (m.dim_s, m.dim_s):
        raise DimensionError(f"system Hamiltonian shape {np.shape(h_s)} does not match dimension {m.dim_s}")
    if la.as_matrix(h_a).shape != (m.dim_a, m.dim_a):
        raise DimensionError(f"apparatus Hamiltonian shape {np.shape(h_a)} does not match dimension {m.dim_a}")


# -- work and heat ------------------------------------------------------------


def premeasurement_work(m: MeasurementScheme, h_s, h_a, rho) -> float:
    """``tr[(U^dagger H U - H)(rho (x) xi)]``."""
    _check_dims(m, h_s, h_a)
    h = joint_hamiltonian(h_s, h_a)
    initial = np.kron(la.as_matrix(rho), m.xi)
    return la.expect(la.dag(m.u) @ h @ m.u - h, initial)


def premeasurement_work_marginal(m: MeasurementScheme, h_s, h_a, rho) -> float:
    """The same work from the reduced states: system channel output and ``eta``."""
    _check_dims(m, h_s, h_a)
    rho = la.as_matrix(rho)
    joint, eta = premeasure(m, rho)
    sys_out = la.partial_trace(joint, m.dims, keep=0)
    return la.expect(h_s, sys_out - rho) + la.expect(h_a, eta - m.xi)


@dataclass(frozen=True)
class OutcomeEnergetics:
    outcome: str
    p: float
    delta_e: float
    delta_e_s: float
    delta_e_a: float
    heat: float


@dataclass(frozen=True)
class EnergeticsReport:
    outcomes: tuple[OutcomeEnergetics, ...]
    work: float
    work_marginal: float
    mean_delta_e: float
    mean_heat: float
    mean_heat_apparatus: float
    first_law_residual: float

    @property
    def heats(self) -> np.ndarray:
        return np.array([o.heat for o in self.outcomes])

    @property
    def probs(self) -> np.ndarray:
        return np.array([o.p for o in self.outcomes])

    @property
    def heat_variance(self) -> float:
        p, q = self.probs, self.heats
        return float(p @ q**2 - (p @ q) ** 2)


def measurement_energetics(
    m: MeasurementScheme, j: Instrument, h_s, h_a, rho, tol: float = la.ATOL
) -> EnergeticsReport:
    """Energy changes, work and objectification heat for every outcome."""
    _check_dims(m, h_s, h_a)
    rho = la.as_matrix(rho)
    h_s, h_a = la.as_matrix(h_s), la.as_matrix(h_a)
    h = joint_hamiltonian(h_s, h_a)
    ens = objectify(m, j, rho, tol)
    joint = ens.premeasured
    _, eta = premeasure(m, rho)
    e_initial = la.expect(h, np.kron(rho, m.xi))
    e_premeasured = la.expect(h, joint)
    work = e_premeasured - e_initial

    records = []
    for label, p, sigma in zip(ens.outcomes, ens.probs, ens.sigmas):
        if p <= P_THRESHOLD:
            records.append(OutcomeEnergetics(label, float(p), 0.0, 0.0, 0.0, 0.0))
            continue
        rho_x = la.partial_trace(sigma, m.dims, keep=0)
        xi_x = la.partial_trace(sigma, m.dims, keep=1)
        e_final = la.expect(h, sigma)
        records.append(
            OutcomeEnergetics(
                label,
                float(p),
                e_final - e_initial,
                la.expect(h_s, rho_x - rho),
                la.expect(h_a, xi_x - m.xi),
                e_final - e_premeasured,
            )
        )
    probs = np.array([r.p for r in records])
    mean_de = float(probs @ np.array([r.delta_e for r in records]))
    mean_q = float(probs @ np.array([r.heat for r in records]))
    mean_q_a = la.expect(pointer_channel_dual(j, h_a) - h_a, eta)
    return EnergeticsReport(
        tuple(records),
        work,
        premeasurement_work_marginal(m, h_s, h_a, rho),
        mean_de,
        mean_q,
        mean_q_a,
        mean_de - work - mean_q,
    )


# -- variance decomposition ---------------------------------------------------


def variance(a, rho) -> float:
    a, rho = la.as_matrix(a), la.as_matrix(rho)
    return la.expect(a @ a, rho) - la.expect(a, rho) ** 2


def skew_information(a, rho, alpha: float = DEFAULT_ALPHA) -> float:
    """Wigner-Yanase-Dyson skew information ``tr[A^2 rho] - tr[A rho^a A rho^(1-a)]``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    a, rho = la.as_matrix(a), la.as_matrix(rho)
    ra = la.frac_power(rho, alpha)
    rb = la.frac_power(rho, 1.0 - alpha)
    return la.expect(a @ a, rho) - float(np.real(np.trace(a @ ra @ a @ rb)))


class VarianceSplit(NamedTuple):
    total: float
    quantum: float
    classical: float


def variance_decomposition(a, rho, alpha: float = DEFAULT_ALPHA) -> VarianceSplit:
    """Split ``V(A, rho)`` into skew information and the classical remainder."""
    v = variance(a, rho)
    vq = skew_information(a, rho, alpha)
    return VarianceSplit(v, vq, v - vq)


@dataclass(frozen=True)
class StateVariance:
    outcome: str
    p: float
    total: float
    quantum: float
    classical: float


@dataclass(frozen=True)
class VarianceReport:
    alpha: float
    var_q: float
    var_q_formula: float
    residual: float
    delta_v_qu: float
    delta_v_cl: float
    average: VarianceSplit
    per_state: tuple[StateVariance, ...]


def heat_variance(ensemble: ObjectificationEnsemble, h, alpha: float = DEFAULT_ALPHA) -> VarianceReport:
    """Variance of the objectification heat, computed two ways, and its split.

    The direct route uses the heat values themselves; the second route uses
    ``V(H, sigma_bar) - sum_x p_x V(H, sigma_x)``.
    """
    h = la.as_matrix(h)
    idx = ensemble.support()
    p = np.array([ensemble.probs[i] for i in idx])
    energies = np.array([la.expect(h, ensemble.sigmas[i]) for i in idx])
    ref = la.expect(h, ensemble.premeasured) if ensemble.premeasured is not None else 0.0
    q = energies - ref
    var_direct = float(p @ q**2 - (p @ q) ** 2)

    per_state = []
    for i in idx:
        split = variance_decomposition(h, ensemble.sigmas[i], alpha)
        per_state.append(StateVariance(ensemble.outcomes[i], float(ensemble.probs[i]), *split))
    avg = variance_decomposition(h, ensemble.sigma_bar, alpha)
    mean_v = float(sum(s.p * s.total for s in per_state))
    mean_vq = float(sum(s.p * s.quantum for s in per_state))
    mean_vc = float(sum(s.p * s.classical for s in per_state))
    var_formula = avg.total - mean_v
    return VarianceReport(
        alpha,
        var_direct,
        var_formula,
        abs(var_direct - var_formula),
        mean_vq - avg.quantum,
        avg.classical - mean_vc,
        avg,
        tuple(per_state),
    )


# -- fixed points of the pointer channel ---------------------------------------


class FixedPointCheck(NamedTuple):
    ok: bool
    deviation: float
    image: np.ndarray


def fixed_point_check(j: Instrument, h_a, tol: float = la.ATOL) -> FixedPointCheck:
    """Is ``H_A`` left invariant by the dual of the total pointer channel?

    When it is, the mean objectification heat vanishes for every input.
    """
    h_a = la.as_matrix(h_a)
    image = pointer_channel_dual(j, h_a)
    dev = la.op_norm(image - h_a)
    return FixedPointCheck(dev <= tol, dev, image)


def mean_heat_from_apparatus(j: Instrument, h_a, eta) -> float:
    """``tr[(J_X^*(H_A) - H_A) eta]``."""
    return la.expect(pointer_channel_dual(j, h_a) - la.as_matrix(h_a), la.as_matrix(eta))


# -- outcome-conditioned energetics -------------------------------------------


def weak_value_energy(effect, h, rho) -> float:
    """Real part of the generalised weak value ``tr[E (H rho + rho H)] / (2 tr[E rho])``."""
    effect, h, rho = la.as_matrix(effect), la.as_matrix(h), la.as_matrix(rho)
    p = la.expect(effect, rho)
    if p <= P_THRESHOLD:
        return 0.0
    return 0.5 * la.expect(effect, h @ rho + rho @ h) / p


def conditional_system_energy_change(ins: Instrument, h_s, rho) -> np.ndarray:
    """Fully conditional energy change of the measured system, per outcome.

    Final energy of the conditional state minus the weak-value initial energy;
    zero for outcomes that cannot occur.
    """
    h_s, rho = la.as_matrix(h_s), la.as_matrix(rho)
    e = induced_observable(ins)
    out = []
    for op, eff in zip(ins.operations, e.effects):
        final = apply_dual(op, h_s)
        p = la.expect(eff, rho)
        if p <= P_THRESHOLD:
            out.append(0.0)
            continue
        out.append(la.expect(final, rho) / p - weak_value_energy(eff, h_s, rho))
    return np.array(out)


@dataclass(frozen=True)
class ConditionalEnergetics:
    outcome: str
    p: float
    delta_e_s: float
    delta_e: float
    work: float
    heat: float
    heat_apparatus: float


def conditional_energetics(
    m: MeasurementScheme, j: Instrument, h_s, h_a, rho, tol: float = la.ATOL
) -> tuple[ConditionalEnergetics, ...]:
    """Outcome-conditioned energy change, work and (counterfactual) heat.

    Requires a sharp pointer obeying the Yanase condition. The conditional
    work is taken from the Lüders-objectified branch, so the conditional heat
    compares the actual objectified state with the Lüders one.
    """
    _check_dims(m, h_s, h_a)
    if not is_sharp(m.z, tol):
        raise PreconditionError("conditional_energetics: pointer observable must be sharp")
    yan = check_yanase(m.z, h_a, tol)
    if not yan.ok:
        raise PreconditionError(
            f"conditional_energetics: Yanase condition violated (commutator norm {yan.max_commutator_norm:.3e})"
        )
    rho = la.as_matrix(rho)
    h = joint_hamiltonian(h_s, h_a)
    ens = objectify(m, j, rho, tol)
    ens_l = objectify(m, luders_instrument(m.z), rho, tol)
    initial = np.kron(rho, m.xi)
    system_part = conditional_system_energy_change(induced_instrument(m), h_s, rho)
    out = []
    for k, label in enumerate(m.z.outcomes):
        p = float(ens.probs[k])
        if p <= P_THRESHOLD:
            out.append(ConditionalEnergetics(label, p, 0.0, 0.0, 0.0, 0.0, 0.0))
            continue
        heis = la.dag(m.u) @ np.kron(np.eye(m.dim_s), m.z.effects[k]) @ m.u
        initial_energy = weak_value_energy(heis, h, initial)
        final = la.expect(h, ens.sigmas[k])
        final_l = la.expect(h, ens_l.sigmas[k])
        xi_x = la.partial_trace(ens.sigmas[k], m.dims, keep=1)
        xi_lx = la.partial_trace(ens_l.sigmas[k], m.dims, keep=1)
        out.append(
            ConditionalEnergetics(
                label,
                p,
                float(system_part[k]),
                final - initial_energy,
                final_l - initial_energy,
                final - final_l,
                la.expect(h_a, xi_x - xi_lx),
            )
        )
    return tuple(out)


def ensemble_consistency_residual(ins: Instrument, h_s, rho, weights, members) -> float:
    """Largest gap between ``dE_S(x)`` for ``rho`` and its Bayesian average over an ensemble of ``rho``.

    ``sum_k p(k|x) dE_S(x|k)`` with ``p(k|x) = q_k p_x(rho_k) / p_x(rho)``
    must reproduce ``dE_S(x)`` for every decomposition ``rho = sum_k q_k rho_k``.
    """
    rho = la.as_matrix(rho)
    e = induced_observable(ins)
    whole = conditional_system_energy_change(ins, h_s, rho)
    parts = [conditional_system_energy_change(ins, h_s, r) for r in members]
    worst = 0.0
    for x, eff in enumerate(e.effects):
        p = la.expect(eff, rho)
        if p <= P_THRESHOLD:
            continue
        avg = sum(q * la.expect(eff, r) / p * part[x] for q, r, part in zip(weights, members, parts))
        worst = max(worst, abs(avg - whole[x]))
    return float(worst)
