"""Measurement schemes: premeasurement, objectification and the Yanase condition.

The joint space is ``system (x) apparatus`` with the system as the first
(slow) tensor factor.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg as la
from .errors import DimensionError, PreconditionError
from .instruments import (
    P_THRESHOLD,
    Instrument,
    KrausOperation,
    apply,
    apply_dual,
    extend_left,
    is_repeatable,
    kraus_from_choi,
    observable_distance,
)
from .observables import (
    Povm,
    ValidationReport,
    Violation,
    sharp_basis_povm,
    validate_hamiltonian,
    validate_povm,
    validate_state,
)


def _frozen(a) -> np.ndarray:
    m = np.array(a, dtype=complex)
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class MeasurementScheme:
    """Apparatus state ``xi``, coupling unitary ``u`` and pointer observable ``z``.

    ``h_a`` is an optional apparatus Hamiltonian carried along for
    convenience; schemes synthesised by :func:`normal_scheme_for_luders` set it.
    """

    dim_s: int
    dim_a: int
    xi: np.ndarray
    u: np.ndarray
    z: Povm
    h_a: np.ndarray | None = None

    def __post_init__(self):
        n = self.dim_s * self.dim_a
        object.__setattr__(self, "xi", _frozen(self.xi))
        object.__setattr__(self, "u", _frozen(self.u))
        if self.xi.shape != (self.dim_a, self.dim_a):
            raise DimensionError(f"apparatus state has shape {self.xi.shape}, expected {self.dim_a}x{self.dim_a}")
        if self.u.shape != (n, n):
            raise DimensionError(f"coupling has shape {self.u.shape}, expected {n}x{n}")
        if self.z.dim != self.dim_a:
            raise DimensionError(f"pointer observable acts on dimension {self.z.dim}, apparatus is {self.dim_a}")
        if self.h_a is not None:
            object.__setattr__(self, "h_a", _frozen(self.h_a))
            if self.h_a.shape != (self.dim_a, self.dim_a):
                raise DimensionError(f"apparatus Hamiltonian has shape {self.h_a.shape}")

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_s, self.dim_a)

    @property
    def outcomes(self) -> tuple[str, ...]:
        return self.z.outcomes


def validate_scheme(m: MeasurementScheme, tol: float = la.ATOL) -> ValidationReport:
    found = []
    uerr = max(
        la.max_abs(la.dag(m.u) @ m.u - np.eye(m.u.shape[0])),
        la.max_abs(m.u @ la.dag(m.u) - np.eye(m.u.shape[0])),
    )
    if uerr > tol:
        found.append(Violation("unitarity", uerr, "coupling U"))
    for sub, label in ((validate_state(m.xi, tol), "apparatus state xi"), (validate_povm(m.z, tol), "pointer Z")):
        found.extend(Violation(v.name, v.magnitude, f"{label}{': ' + v.detail if v.detail else ''}") for v in sub.violations)
    if m.h_a is not None:
        found.extend(validate_hamiltonian(m.h_a, tol).violations)
    return ValidationReport("measurement scheme", tuple(found))


@dataclass(frozen=True)
class ObjectificationEnsemble:
    """Outcome probabilities with the objectified joint states.

    ``sigma_bar`` is the average objectified state; ``premeasured`` is the
    joint state right after the coupling, when known.
    """

    outcomes: tuple[str, ...]
    probs: np.ndarray
    sigmas: tuple[np.ndarray, ...]
    sigma_bar: np.ndarray
    premeasured: np.ndarray | None = None
    dims: tuple[int, int] | None = None

    @classmethod
    def from_states(cls, probs, sigmas, outcomes=None, premeasured=None, dims=None):
        probs = np.asarray(probs, dtype=float)
        sigmas = tuple(la.as_matrix(s) for s in sigmas)
        sigma_bar = sum(p * s for p, s in zip(probs, sigmas))
        labels = tuple(outcomes) if outcomes is not None else tuple(str(i) for i in range(len(probs)))
        return cls(labels, probs, sigmas, sigma_bar, premeasured, dims)

    def support(self):
        """Indices of outcomes with non-negligible probability."""
        return [i for i, p in enumerate(self.probs) if p > P_THRESHOLD]


def premeasure(m: MeasurementScheme, rho):
    """Joint state ``U (rho (x) xi) U^dagger`` and its apparatus marginal ``eta``."""
    rho = la.as_matrix(rho)
    if rho.shape != (m.dim_s, m.dim_s):
        raise DimensionError(f"system state has shape {rho.shape}, scheme expects {m.dim_s}")
    joint = la.hermitize(m.u @ np.kron(rho, m.xi) @ la.dag(m.u))
    return joint, la.partial_trace(joint, m.dims, keep=1)


def induced_instrument(m: MeasurementScheme) -> Instrument:
    """The system instrument ``I_x(T) = tr_A[(1 (x) Z_x) U (T (x) xi) U^dagger]``."""
    d_s = m.dim_s
    ops = []
    for zx in m.z.effects:
        lifted = np.kron(np.eye(d_s), zx)
        choi = np.zeros((d_s * d_s, d_s * d_s), dtype=complex)
        for i in range(d_s):
            for j in range(d_s):
                eij = np.zeros((d_s, d_s), dtype=complex)
                eij[i, j] = 1.0
                out = la.partial_trace(lifted @ m.u @ np.kron(eij, m.xi) @ la.dag(m.u), m.dims, keep=0)
                choi[i * d_s:(i + 1) * d_s, j * d_s:(j + 1) * d_s] = out
        ops.append(kraus_from_choi(choi, d_s, d_s))
    return Instrument(tuple(ops), m.z.outcomes)


def _check_pointer_instrument(m: MeasurementScheme, j: Instrument, tol: float, what: str):
    dist = observable_distance(j, m.z)
    if dist > tol:
        raise PreconditionError(
            f"{what}: pointer instrument is not compatible with the pointer observable "
            f"(observable deviation {dist:.3e})"
        )
    if j.outcomes != m.z.outcomes:
        raise PreconditionError(f"{what}: outcome labels {j.outcomes} differ from pointer labels {m.z.outcomes}")


def apply_pointer_operation(m: MeasurementScheme, op: KrausOperation, joint) -> np.ndarray:
    """``(id_S (x) op)(joint)``."""
    return apply(extend_left(op, m.dim_s), joint)


def objectify(m: MeasurementScheme, j: Instrument, rho, tol: float = la.ATOL) -> ObjectificationEnsemble:
    """Objectify the premeasured state with the repeatable pointer instrument ``j``."""
    _check_pointer_instrument(m, j, tol, "objectify")
    rep = is_repeatable(j, tol)
    if not rep.ok:
        raise PreconditionError(
            f"objectify: pointer instrument is not repeatable (repeatability violation {rep.max_violation:.3e}); "
            "objectified states cannot be prepared"
        )
    joint, _ = premeasure(m, rho)
    probs, sigmas = [], []
    unnormalised = []
    for op in j.operations:
        out = apply_pointer_operation(m, op, joint)
        p = float(np.real(np.trace(out)))
        unnormalised.append(out)
        if p <= P_THRESHOLD:
            probs.append(0.0)
            sigmas.append(np.zeros_like(out))
        else:
            probs.append(p)
            sigmas.append(la.hermitize(out / p))
    sigma_bar = la.hermitize(sum(unnormalised))
    return ObjectificationEnsemble(m.z.outcomes, np.array(probs), tuple(sigmas), sigma_bar, joint, m.dims)


class IndependenceCheck(NamedTuple):
    ok: bool
    max_deviation: float


def implementation_independence_check(
    m: MeasurementScheme, j1: Instrument, j2: Instrument, rho, tol: float = la.ATOL
) -> IndependenceCheck:
    """Do two pointer instruments leave the same unnormalised system states behind?"""
    _check_pointer_instrument(m, j1, tol, "implementation_independence_check")
    _check_pointer_instrument(m, j2, tol, "implementation_independence_check")
    joint, _ = premeasure(m, rho)
    worst = 0.0
    for a, b in zip(j1.operations, j2.operations):
        ra = la.partial_trace(apply_pointer_operation(m, a, joint), m.dims, keep=0)
        rb = la.partial_trace(apply_pointer_operation(m, b, joint), m.dims, keep=0)
        worst = max(worst, la.max_abs(ra - rb))
    return IndependenceCheck(worst <= tol, worst)


def normal_scheme_for_luders(e: Povm, pointer_energies: Sequence[float] | None = None) -> MeasurementScheme:
    """Normal measurement scheme whose induced instrument is the Lüders instrument of ``e``.

    The apparatus has one basis vector per outcome, starts in the first one,
    and is read by the sharp basis observable. The coupling sends
    ``psi (x) e_0`` to ``sum_x sqrt(E_x) psi (x) e_x``; the rest of the
    unitary is a deterministic completion.
    """
    rep = validate_povm(e)
    rep.raise_if_invalid()
    n = len(e)
    d = e.dim
    energies = list(range(n)) if pointer_energies is None else [float(x) for x in pointer_energies]
    if len(energies) != n:
        raise DimensionError(f"{len(energies)} pointer energies for {n} outcomes")
    roots = [la.sqrtm_psd(eff) for eff in e.effects]
    iso = np.zeros((d * n, d), dtype=complex)
    for x, r in enumerate(roots):
        iso[x::n, :] = r  # rows (i, x) of the joint basis
    w = la.complete_isometry(iso)
    u = np.zeros((d * n, d * n), dtype=complex)
    targets = [i * n for i in range(d)]
    rest = [c for c in range(d * n) if c not in set(targets)]
    u[:, targets] = w[:, :d]
    u[:, rest] = w[:, d:]
    xi = la.ket_projector(la.basis_vector(n, 0))
    z = sharp_basis_povm(n, e.outcomes)
    return MeasurementScheme(d, n, xi, u, z, np.diag(np.asarray(energies, dtype=complex)))


class YanaseCheck(NamedTuple):
    ok: bool
    max_commutator_norm: float


def check_yanase(z: Povm, h_a, tol: float = la.ATOL) -> YanaseCheck:
    """Does every pointer effect commute with the apparatus Hamiltonian?"""
    h_a = la.as_matrix(h_a)
    if h_a.shape != (z.dim, z.dim):
        raise DimensionError(f"Hamiltonian of shape {h_a.shape} does not match pointer dimension {z.dim}")
    worst = max(la.op_norm(zx @ h_a - h_a @ zx) for zx in z.effects)
    return YanaseCheck(worst <= tol, worst)


def stability_probability(m: MeasurementScheme, j: Instrument, rho, x, h_a, g: float, tol: float = la.ATOL) -> float:
    """Probability that reading the pointer a time ``g`` after objectification still gives ``x``."""
    ens = objectify(m, j, rho, tol)
    k = m.z.index(x)
    if ens.probs[k] <= P_THRESHOLD:
        raise PreconditionError(f"stability_probability: outcome {m.z.outcomes[k]!r} has probability {ens.probs[k]:.3e}")
    v = la.herm_unitary(h_a, g)
    zg = la.dag(v) @ m.z.effects[k] @ v
    return la.expect(np.kron(np.eye(m.dim_s), zg), ens.sigmas[k])


def pointer_channel_dual(j: Instrument, b) -> np.ndarray:
    """``J_X^*(b)``, the dual of the total pointer channel."""
    return sum(apply_dual(op, b) for op in j.operations)

