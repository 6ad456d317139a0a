"""Dense complex linear algebra used by every other module.

Operators are plain ``numpy`` arrays of dtype ``complex128``. Bipartite
operators use the Kronecker convention: basis index ``(i1, i2)`` maps to
``i1 * d2 + i2``, so the first tensor factor is the slow index.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionError, ValidationError

#: default absolute tolerance on the max-norm of a matrix difference
ATOL = 1e-9
#: eigenvalues below ``ZERO_CUTOFF * max(eigenvalue)`` count as exactly zero
ZERO_CUTOFF = 1e-12
#: residual norm below which a Gram-Schmidt candidate is rejected
GS_REJECT = 1e-8


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a 2-D complex array (a copy is not guaranteed)."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got an array of shape {m.shape}")
    return m


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def hermitize(a: np.ndarray) -> np.ndarray:
    """Symmetrize to ``(A + A^dagger)/2`` to wash out round-off asymmetry."""
    a = as_matrix(a)
    return 0.5 * (a + dag(a))


def max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def allclose(a, b, tol: float = ATOL) -> bool:
    return max_abs(np.asarray(a) - np.asarray(b)) <= tol


def op_norm(a: np.ndarray) -> float:
    """Operator (largest singular value) norm."""
    return float(np.linalg.norm(as_matrix(a), 2))


def trace_norm(a: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(as_matrix(a), compute_uv=False)))


def expect(a: np.ndarray, rho: np.ndarray) -> float:
    """Real part of ``tr[a rho]``, computed without forming the product."""
    return float(np.real(np.sum(a * rho.T)))


def ket_projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, np.conj(v))


def basis_vector(d: int, i: int) -> np.ndarray:
    e = np.zeros(d, dtype=complex)
    e[i] = 1.0
    return e


# -- predicates ---------------------------------------------------------------


def is_square(a) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1]


def is_hermitian(a, tol: float = ATOL) -> bool:
    return is_square(a) and max_abs(a - dag(a)) <= tol


def is_unitary(a, tol: float = ATOL) -> bool:
    if not is_square(a):
        return False
    eye = np.eye(a.shape[0])
    return max_abs(dag(a) @ a - eye) <= tol and max_abs(a @ dag(a) - eye) <= tol


def is_psd(a, tol: float = ATOL) -> bool:
    if not is_hermitian(a, tol):
        return False
    return float(np.min(np.linalg.eigvalsh(hermitize(a)))) >= -tol


def is_projection(a, tol: float = ATOL) -> bool:
    return is_hermitian(a, tol) and max_abs(a @ a - a) <= tol


# -- tensor structure ---------------------------------------------------------


def tensor(*factors) -> np.ndarray:
    """Kronecker product of one or more matrices, first factor slowest."""
    if not factors:
        raise DimensionError("tensor() needs at least one factor")
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, as_matrix(f))
    return out


def partial_trace(t, dims: Sequence[int], keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    :param t: operator on a ``dims[0] * dims[1]`` dimensional space
    :param dims: ``(d1, d2)``
    :param keep: index (0 or 1) of the factor that survives
    """
    t = as_matrix(t)
    d1, d2 = (int(d) for d in dims)
    if t.shape != (d1 * d2, d1 * d2):
        raise DimensionError(f"operator of shape {t.shape} is not {d1}x{d2} bipartite")
    if keep not in (0, 1):
        raise ValueError("keep must be 0 or 1")
    r = t.reshape(d1, d2, d1, d2)
    if keep == 0:
        return np.einsum("ajbj->ab", r)
    return np.einsum("iaib->ab", r)


# -- spectral functions ---------------------------------------------------------


def _hermitian_eigh(a, what: str, tol: float):
    a = as_matrix(a)
    if not is_square(a):
        raise DimensionError(f"{what}: matrix must be square, got {a.shape}")
    asym = max_abs(a - dag(a))
    if asym > tol:
        raise ValidationError(
            f"{what}: input is not Hermitian (hermiticity violation {asym:.3e})",
            [("hermiticity", asym)],
        )
    return np.linalg.eigh(hermitize(a))


def frac_power(rho, alpha: float, tol: float = ATOL) -> np.ndarray:
    """``rho ** alpha`` for positive semidefinite ``rho`` and ``0 < alpha <= 1``.

    Eigenvalues below ``ZERO_CUTOFF * max(eigenvalue)`` are mapped to zero,
    which implements the convention ``0 ** alpha = 0`` on the kernel.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"frac_power exponent must lie in (0, 1], got {alpha}")
    w, v = _hermitian_eigh(rho, "frac_power", tol)
    top = float(np.max(w)) if w.size else 0.0
    if w.size and float(np.min(w)) < -tol * max(1.0, abs(top)):
        neg = -float(np.min(w))
        raise ValidationError(
            f"frac_power: negative eigenvalue of magnitude {neg:.3e}", [("positivity", neg)]
        )
    cutoff = ZERO_CUTOFF * top
    powered = np.where(w > cutoff, np.clip(w, 0.0, None) ** alpha, 0.0)
    return (v * powered) @ dag(v)


def herm_unitary(h, g: float, tol: float = ATOL) -> np.ndarray:
    """``exp(-i g h)`` for Hermitian ``h``."""
    w, v = _hermitian_eigh(h, "herm_unitary", tol)
    return (v * np.exp(-1j * g * w)) @ dag(v)


def sqrtm_psd(a, tol: float = ATOL) -> np.ndarray:
    return frac_power(a, 0.5, tol)


def complete_isometry(v, tol: float = ATOL) -> np.ndarray:
    """Extend an isometry to a square unitary.

    The first ``v.shape[1]`` columns of the result are exactly the columns of
    ``v``. Missing columns come from Gram-Schmidt over the canonical basis
    vectors ``e_0, e_1, ...`` in index order; a candidate whose residual norm
    falls below ``GS_REJECT`` is skipped.
    """
    v = as_matrix(v)
    n, k = v.shape
    if k > n:
        raise DimensionError(f"isometry needs rows >= cols, got {v.shape}")
    gram_err = max_abs(dag(v) @ v - np.eye(k))
    if gram_err > tol:
        raise ValidationError(
            f"complete_isometry: columns are not orthonormal (deviation {gram_err:.3e})",
            [("orthonormality", gram_err)],
        )
    cols = [v[:, i] for i in range(k)]
    basis = np.array(cols, dtype=complex).T if cols else np.zeros((n, 0), dtype=complex)
    for i in range(n):
        if len(cols) == n:
            break
        cand = basis_vector(n, i)
        # two passes of classical Gram-Schmidt keep the result orthogonal to ~1e-16
        for _ in range(2):
            if basis.shape[1]:
                cand = cand - basis @ (dag(basis) @ cand)
        norm = np.linalg.norm(cand)
        if norm < GS_REJECT:
            continue
        cols.append(cand / norm)
        basis = np.array(cols, dtype=complex).T
    out = np.array(cols, dtype=complex).T
    out[:, :k] = v
    return out
