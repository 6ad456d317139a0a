"""States, discrete observables and their validation.

Density operators and Hamiltonians are plain complex matrices; the only
container type here is :class:`Povm`, which pairs effects with outcome labels.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg as la
from .errors import DimensionError, ValidationError

#: width of the band around 1 inside which an eigenvalue counts as "one"
UNIT_EIGEN_TOL = 1e-8
#: probabilities in ``(-PROB_CLAMP, 0)`` are round-off and clamp to zero
PROB_CLAMP = 1e-12


def _frozen(a) -> np.ndarray:
    m = np.array(a, dtype=complex)
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class Violation:
    name: str
    magnitude: float
    detail: str = ""

    def __str__(self):
        text = f"{self.name} violated (magnitude {self.magnitude:.3e})"
        return f"{text}: {self.detail}" if self.detail else text


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a validator. Empty means valid."""

    subject: str
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def magnitude(self, name: str) -> float:
        return max((v.magnitude for v in self.violations if v.name == name), default=0.0)

    def raise_if_invalid(self):
        if self.violations:
            msg = "; ".join(str(v) for v in self.violations)
            raise ValidationError(
                f"{self.subject}: {msg}", [(v.name, v.magnitude) for v in self.violations]
            )

    def __str__(self):
        if self.ok:
            return f"{self.subject}: valid"
        return f"{self.subject}: " + "; ".join(str(v) for v in self.violations)


@dataclass(frozen=True)
class Povm:
    """A discrete observable: effects indexed by string outcome labels."""

    effects: tuple[np.ndarray, ...]
    outcomes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        effects = tuple(_frozen(e) for e in self.effects)
        if not effects:
            raise DimensionError("a POVM needs at least one effect")
        d = effects[0].shape
        for e in effects:
            if e.ndim != 2 or e.shape != d or d[0] != d[1]:
                raise DimensionError(f"POVM effects must be equal square matrices, got {e.shape}")
        outcomes = tuple(str(x) for x in self.outcomes) or tuple(str(i) for i in range(len(effects)))
        if len(outcomes) != len(effects):
            raise DimensionError(f"{len(outcomes)} outcome labels for {len(effects)} effects")
        if len(set(outcomes)) != len(outcomes):
            raise ValidationError(f"duplicate outcome labels {outcomes}", [("labels", 1.0)])
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "outcomes", outcomes)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self):
        return len(self.effects)

    def index(self, x) -> int:
        """Dense index of outcome ``x`` (a label, or already an index)."""
        if isinstance(x, (int, np.integer)):
            if not 0 <= x < len(self):
                raise IndexError(f"outcome index {x} out of range")
            return int(x)
        try:
            return self.outcomes.index(str(x))
        except ValueError:
            raise KeyError(f"unknown outcome {x!r}; known outcomes {self.outcomes}") from None

    def __getitem__(self, x) -> np.ndarray:
        return self.effects[self.index(x)]


def sharp_basis_povm(d: int, outcomes: Sequence[str] | None = None) -> Povm:
    """Rank-one projectors onto the canonical basis of ``C^d``."""
    return Povm(tuple(la.ket_projector(la.basis_vector(d, i)) for i in range(d)), tuple(outcomes or ()))


def validate_state(rho, tol: float = la.ATOL) -> ValidationReport:
    rho = np.asarray(rho, dtype=complex)
    if not la.is_square(rho):
        return ValidationReport("state", (Violation("shape", float("inf"), f"shape {rho.shape}"),))
    found = []
    herm = la.max_abs(rho - la.dag(rho))
    if herm > tol:
        found.append(Violation("hermiticity", herm))
    low = float(np.min(np.linalg.eigvalsh(la.hermitize(rho))))
    if low < -tol:
        found.append(Violation("positivity", -low, f"smallest eigenvalue {low:.6g}"))
    tr_err = abs(complex(np.trace(rho)) - 1.0)
    if tr_err > tol:
        found.append(Violation("trace", tr_err, f"trace {complex(np.trace(rho)).real:.6g}"))
    return ValidationReport("state", tuple(found))


def validate_hamiltonian(h, tol: float = la.ATOL) -> ValidationReport:
    h = np.asarray(h, dtype=complex)
    if not la.is_square(h):
        return ValidationReport("hamiltonian", (Violation("shape", float("inf"), f"shape {h.shape}"),))
    herm = la.max_abs(h - la.dag(h))
    found = (Violation("hermiticity", herm),) if herm > tol else ()
    return ValidationReport("hamiltonian", found)


def validate_povm(p: Povm, tol: float = la.ATOL) -> ValidationReport:
    """Check that every effect lies between 0 and 1 and that they sum to identity."""
    found = []
    for label, e in zip(p.outcomes, p.effects):
        herm = la.max_abs(e - la.dag(e))
        if herm > tol:
            found.append(Violation("hermiticity", herm, f"effect {label!r}"))
        w = np.linalg.eigvalsh(la.hermitize(e))
        if w[0] < -tol:
            found.append(Violation("effect range", -float(w[0]), f"effect {label!r} has eigenvalue {w[0]:.6g}"))
        if w[-1] > 1 + tol:
            found.append(
                Violation("effect range", float(w[-1]) - 1, f"effect {label!r} has eigenvalue {w[-1]:.6g}")
            )
    excess = sum(p.effects) - np.eye(p.dim)
    comp = la.op_norm(excess)
    if comp > tol:
        found.append(Violation("completeness", comp, "effects do not sum to identity"))
    return ValidationReport("povm", tuple(found))


def born_probabilities(e: Povm, rho) -> np.ndarray:
    rho = la.as_matrix(rho)
    if rho.shape != (e.dim, e.dim):
        raise DimensionError(f"state of shape {rho.shape} does not match POVM dimension {e.dim}")
    p = np.array([la.expect(eff, rho) for eff in e.effects])
    worst = float(np.min(p))
    if worst <= -PROB_CLAMP:
        raise ValidationError(
            f"negative Born probability {worst:.3e}; state or POVM is invalid", [("positivity", -worst)]
        )
    return np.clip(p, 0.0, None)


def eigenvalue_one_projector(effect, tol: float = UNIT_EIGEN_TOL) -> np.ndarray:
    """Orthogonal projector onto the eigenvalue-1 eigenspace of ``effect``."""
    w, v = np.linalg.eigh(la.hermitize(effect))
    keep = np.abs(w - 1.0) <= tol
    vk = v[:, keep]
    return vk @ la.dag(vk)


class ObjectificationCheck(NamedTuple):
    ok: bool
    unit_ranks: tuple[int, ...]


def admits_objectification(p: Povm, tol: float = UNIT_EIGEN_TOL) -> ObjectificationCheck:
    """True iff every effect has a nonzero eigenvalue-1 eigenspace."""
    ranks = tuple(
        int(round(np.real(np.trace(eigenvalue_one_projector(e, tol))))) for e in p.effects
    )
    return ObjectificationCheck(all(r > 0 for r in ranks), ranks)


def is_sharp(p: Povm, tol: float = la.ATOL) -> bool:
    return all(la.is_projection(e, tol) for e in p.effects)
