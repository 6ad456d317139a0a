"""Operations in Kraus form, discrete instruments and their standard constructions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import linalg as la
from .errors import DimensionError, PreconditionError, ValidationError
from .observables import Povm, ValidationReport, Violation, is_sharp

#: Choi eigenvalues below this are dropped when extracting Kraus operators
CHOI_CUTOFF = 1e-12
#: outcomes with probability at or below this get the zero operator as conditional state
P_THRESHOLD = 1e-12


@dataclass(frozen=True)
class KrausOperation:
    """A completely positive map ``T -> sum_k K T K^dagger``."""

    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        ks = []
        for k in self.kraus:
            m = np.array(k, dtype=complex)
            if m.ndim != 2:
                raise DimensionError(f"Kraus operator must be a matrix, got shape {m.shape}")
            m.setflags(write=False)
            ks.append(m)
        if not ks:
            raise DimensionError("an operation needs at least one Kraus operator")
        if any(k.shape != ks[0].shape for k in ks):
            raise DimensionError("Kraus operators of one operation must share a shape")
        object.__setattr__(self, "kraus", tuple(ks))

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    def effect(self) -> np.ndarray:
        """``sum_k K^dagger K``, i.e. the dual applied to the identity."""
        return sum(la.dag(k) @ k for k in self.kraus)


@dataclass(frozen=True)
class Instrument:
    operations: tuple[KrausOperation, ...]
    outcomes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        ops = tuple(self.operations)
        if not ops:
            raise DimensionError("an instrument needs at least one operation")
        shape = (ops[0].dim_out, ops[0].dim_in)
        if any((op.dim_out, op.dim_in) != shape for op in ops):
            raise DimensionError("all operations of an instrument must share input/output dimensions")
        outcomes = tuple(str(x) for x in self.outcomes) or tuple(str(i) for i in range(len(ops)))
        if len(outcomes) != len(ops):
            raise DimensionError(f"{len(outcomes)} outcome labels for {len(ops)} operations")
        object.__setattr__(self, "operations", ops)
        object.__setattr__(self, "outcomes", outcomes)

    @property
    def dim(self) -> int:
        return self.operations[0].dim_in

    def __len__(self):
        return len(self.operations)

    def index(self, x) -> int:
        if isinstance(x, (int, np.integer)):
            if not 0 <= x < len(self):
                raise IndexError(f"outcome index {x} out of range")
            return int(x)
        try:
            return self.outcomes.index(str(x))
        except ValueError:
            raise KeyError(f"unknown outcome {x!r}; known outcomes {self.outcomes}") from None

    def __getitem__(self, x) -> KrausOperation:
        return self.operations[self.index(x)]

    def total_channel(self) -> KrausOperation:
        return KrausOperation(tuple(k for op in self.operations for k in op.kraus))


def apply(op: KrausOperation, t) -> np.ndarray:
    t = la.as_matrix(t)
    if t.shape != (op.dim_in, op.dim_in):
        raise DimensionError(f"operator of shape {t.shape} does not match operation input {op.dim_in}")
    return sum(k @ t @ la.dag(k) for k in op.kraus)


def apply_dual(op: KrausOperation, b) -> np.ndarray:
    b = la.as_matrix(b)
    if b.shape != (op.dim_out, op.dim_out):
        raise DimensionError(f"operator of shape {b.shape} does not match operation output {op.dim_out}")
    return sum(la.dag(k) @ b @ k for k in op.kraus)


def extend_left(op: KrausOperation, d: int) -> KrausOperation:
    """``id_d (x) op`` acting on ``C^d (x) H``."""
    eye = np.eye(d)
    return KrausOperation(tuple(np.kron(eye, k) for k in op.kraus))


# -- Choi representation --------------------------------------------------------


def choi_matrix(op: KrausOperation) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) op(|i><j|)`` (input factor first)."""
    c = 0
    for k in op.kraus:
        # column vector w[i*d_out + o] = K[o, i]
        w = k.T.reshape(-1)
        c = c + np.outer(w, np.conj(w))
    return c


def choi_of_map(fn: Callable[[np.ndarray], np.ndarray], dim_in: int) -> np.ndarray:
    blocks = []
    for i in range(dim_in):
        row = []
        for j in range(dim_in):
            eij = np.zeros((dim_in, dim_in), dtype=complex)
            eij[i, j] = 1.0
            row.append(la.as_matrix(fn(eij)))
        blocks.append(row)
    return np.block(blocks)


def kraus_from_choi(choi, dim_in: int, dim_out: int, cutoff: float = CHOI_CUTOFF) -> KrausOperation:
    """Canonical Kraus operators from the eigendecomposition of a Choi matrix."""
    choi = la.as_matrix(choi)
    if choi.shape != (dim_in * dim_out, dim_in * dim_out):
        raise DimensionError(f"Choi matrix shape {choi.shape} does not match {dim_in}->{dim_out}")
    w, v = np.linalg.eigh(la.hermitize(choi))
    if w[0] < -1e-8 * max(1.0, float(w[-1])):
        raise ValidationError(
            f"map is not completely positive (Choi eigenvalue {w[0]:.3e})", [("complete positivity", -float(w[0]))]
        )
    kraus = [
        np.sqrt(lam) * v[:, i].reshape(dim_in, dim_out).T for i, lam in enumerate(w) if lam >= cutoff
    ]
    if not kraus:
        kraus = [np.zeros((dim_out, dim_in), dtype=complex)]
    return KrausOperation(tuple(kraus))


def operation_from_map(fn, dim_in: int, dim_out: int | None = None) -> KrausOperation:
    return kraus_from_choi(choi_of_map(fn, dim_in), dim_in, dim_out or dim_in)


def choi_distance(a: KrausOperation, b: KrausOperation) -> float:
    return la.max_abs(choi_matrix(a) - choi_matrix(b))


# -- instruments and observables ------------------------------------------------


def validate_instrument(ins: Instrument, tol: float = la.ATOL) -> ValidationReport:
    found = []
    for label, op in zip(ins.outcomes, ins.operations):
        excess = float(np.max(np.linalg.eigvalsh(la.hermitize(op.effect())))) - 1.0
        if excess > tol:
            found.append(Violation("trace non-increasing", excess, f"operation {label!r}"))
    total = sum(op.effect() for op in ins.operations)
    dev = la.op_norm(total - np.eye(ins.dim))
    if dev > tol:
        found.append(Violation("trace preservation", dev, "operations do not sum to a channel"))
    return ValidationReport("instrument", tuple(found))


def induced_observable(ins: Instrument) -> Povm:
    return Povm(tuple(la.hermitize(op.effect()) for op in ins.operations), ins.outcomes)


def observable_distance(ins: Instrument, z: Povm) -> float:
    """Largest max-norm deviation between the instrument's observable and ``z``."""
    if len(ins) != len(z) or ins.dim != z.dim:
        return float("inf")
    e = induced_observable(ins)
    return max(la.max_abs(a - b) for a, b in zip(e.effects, z.effects))


def luders_instrument(e: Povm) -> Instrument:
    return Instrument(tuple(KrausOperation((la.sqrtm_psd(eff),)) for eff in e.effects), e.outcomes)


def conditional_state(ins: Instrument, rho, x):
    """Probability of outcome ``x`` and the normalised post-measurement state.

    Below ``P_THRESHOLD`` the state is the zero operator, following the
    convention that conditional states of impossible outcomes vanish.
    """
    out = apply(ins[x], rho)
    p = float(np.real(np.trace(out)))
    if p <= P_THRESHOLD:
        return 0.0, np.zeros_like(out)
    return p, la.hermitize(out / p)


class RepeatabilityCheck(NamedTuple):
    ok: bool
    max_violation: float


def is_repeatable(ins: Instrument, tol: float = la.ATOL) -> RepeatabilityCheck:
    """Check ``I_x^*(E_y) = delta_xy E_x`` for every pair of outcomes."""
    e = induced_observable(ins)
    worst = 0.0
    for x, op in enumerate(ins.operations):
        for y, ey in enumerate(e.effects):
            target = e.effects[x] if x == y else 0.0
            worst = max(worst, la.max_abs(apply_dual(op, ey) - target))
    return RepeatabilityCheck(worst <= tol, worst)


def identity_channel(d: int) -> KrausOperation:
    return KrausOperation((np.eye(d, dtype=complex),))


def _require_sharp(z: Povm, tol: float, what: str):
    if not is_sharp(z, tol):
        dev = max(la.max_abs(e @ e - e) for e in z.effects)
        raise PreconditionError(f"{what}: pointer observable is not sharp (idempotence violation {dev:.3e})")


def sequential_sharp_instrument(z: Povm, phi: KrausOperation, tol: float = la.ATOL) -> Instrument:
    """``J_x(T) = phi(Z_x T Z_x)`` for a sharp ``z`` and a channel ``phi``."""
    _require_sharp(z, tol, "sequential_sharp_instrument")
    if phi.dim_in != z.dim or phi.dim_out != z.dim:
        raise DimensionError(f"channel acts on dimension {phi.dim_in}, pointer on {z.dim}")
    tp = la.max_abs(phi.effect() - np.eye(z.dim))
    if tp > tol:
        raise PreconditionError(f"sequential_sharp_instrument: phi is not trace preserving (deviation {tp:.3e})")
    ops = tuple(KrausOperation(tuple(k @ zx for k in phi.kraus)) for zx in z.effects)
    return Instrument(ops, z.outcomes)


def eigenspace_depolarising_channel(z: Povm) -> KrausOperation:
    """The channel whose dual is ``B -> sum_x tr[B Z_x]/2 Z_x``.

    It is self-dual, so the Schrodinger map has the same form; Kraus
    operators come from its Choi matrix.
    """
    zs = [np.array(e) for e in z.effects]
    return operation_from_map(lambda t: sum(np.trace(zx @ t) / 2 * zx for zx in zs), z.dim)


def depolarising_objectification(z: Povm, tol: float = la.ATOL) -> Instrument:
    """Repeatable instrument that depolarises inside each rank-2 pointer eigenspace."""
    _require_sharp(z, tol, "depolarising_objectification")
    ranks = [int(round(np.real(np.trace(e)))) for e in z.effects]
    if any(r != 2 for r in ranks):
        raise PreconditionError(f"depolarising_objectification needs rank-2 effects, got ranks {ranks}")
    return sequential_sharp_instrument(z, eigenspace_depolarising_channel(z), tol)


def measure_and_prepare_instrument(z: Povm, targets: Sequence) -> Instrument:
    """``J_x(T) = tr[Z_x T] omega_x`` with ``omega_x`` a fixed state per outcome.

    Repeatable for ``z`` whenever each ``omega_x`` lives in the eigenvalue-1
    eigenspace of ``Z_x``; works for unsharp pointers too.
    """
    if len(targets) != len(z):
        raise DimensionError(f"{len(targets)} target states for {len(z)} outcomes")
    ops = []
    for zx, omega in zip(z.effects, targets):
        wz, vz = np.linalg.eigh(la.hermitize(zx))
        wo, vo = np.linalg.eigh(la.hermitize(la.as_matrix(omega)))
        kraus = [
            np.sqrt(a * b) * np.outer(vo[:, j], np.conj(vz[:, i]))
            for i, a in enumerate(wz)
            if a > CHOI_CUTOFF
            for j, b in enumerate(wo)
            if b > CHOI_CUTOFF
        ]
        ops.append(KrausOperation(tuple(kraus) or (np.zeros_like(zx),)))
    return Instrument(tuple(ops), z.outcomes)
