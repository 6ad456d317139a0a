"""Seeded random instances: states, observables, channels and whole schemes.

Every function takes a ``numpy.random.Generator`` so that suites are
reproducible from a single seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from . import linalg as la
from .instruments import (
    Instrument,
    KrausOperation,
    depolarising_objectification,
    luders_instrument,
    measure_and_prepare_instrument,
    sequential_sharp_instrument,
)
from .observables import Povm, eigenvalue_one_projector
from .schemes import MeasurementScheme

POINTER_INSTRUMENTS = ("luders", "block_unitary", "measure_prepare", "depolarising")


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    if d == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return unitary_group.rvs(d, random_state=rng)


def random_state(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Density matrix from a Ginibre matrix of the given rank (full rank by default)."""
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ la.dag(g)
    return la.hermitize(rho / np.trace(rho).real)


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    return random_state(d, rng, rank=1)


def random_hermitian(d: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * la.hermitize(g)


def random_channel(d: int, rng: np.random.Generator, n_kraus: int = 2) -> KrausOperation:
    """Channel from a Haar-random isometry ``C^d -> C^d (x) C^n``."""
    v = random_unitary(d * n_kraus, rng)[:, :d]
    return KrausOperation(tuple(v[k * d:(k + 1) * d, :] for k in range(n_kraus)))


def _partition(d: int, n: int, rng: np.random.Generator) -> list[list[int]]:
    """Split ``range(d)`` into ``n`` nonempty groups."""
    order = list(rng.permutation(d))
    groups = [[order[i]] for i in range(n)]
    for k in order[n:]:
        groups[int(rng.integers(n))].append(k)
    return groups


def random_sharp_povm(d: int, n: int, rng: np.random.Generator, basis=None, rank: int | None = None) -> Povm:
    """Sharp observable with ``n`` outcomes, diagonal in ``basis`` (Haar random if omitted)."""
    w = random_unitary(d, rng) if basis is None else basis
    if rank is not None:
        groups = [list(range(x * rank, (x + 1) * rank)) for x in range(n)]
    else:
        groups = _partition(d, n, rng)
    effects = []
    for g in groups:
        cols = w[:, sorted(g)]
        effects.append(cols @ la.dag(cols))
    return Povm(tuple(effects))


def random_objectifiable_povm(d: int, n: int, rng: np.random.Generator, basis=None) -> Povm:
    """Unsharp observable whose every effect still has eigenvalue 1.

    Each outcome owns one basis vector outright; the remaining basis vectors
    are shared out with random weights.
    """
    if d <= n:
        return random_sharp_povm(d, n, rng, basis)
    w = random_unitary(d, rng) if basis is None else basis
    order = rng.permutation(d)
    weights = np.zeros((n, d))
    for x in range(n):
        weights[x, order[x]] = 1.0
    for k in order[n:]:
        weights[:, k] = rng.dirichlet(np.ones(n))
    return Povm(tuple((w * weights[x]) @ la.dag(w) for x in range(n)))


def commuting_hamiltonian(z: Povm, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random Hamiltonian sharing an eigenbasis with every effect of ``z``.

    The common eigenbasis is taken from a generic linear combination of the
    effects, so it exists whenever the effects commute pairwise.
    """
    combo = sum(rng.normal() * e for e in z.effects)
    _, v = np.linalg.eigh(la.hermitize(combo))
    return la.hermitize((v * (scale * rng.normal(size=z.dim))) @ la.dag(v))


def random_repeatable_instrument(z: Povm, rng: np.random.Generator, kind: str | None = None) -> Instrument:
    """A repeatable instrument for ``z``; ``kind`` picks the construction."""
    from .observables import is_sharp

    sharp = is_sharp(z)
    ranks = [int(round(np.trace(e).real)) for e in z.effects]
    allowed = ["measure_prepare"]
    if sharp:
        allowed += ["luders", "block_unitary"]
        if all(r == 2 for r in ranks):
            allowed.append("depolarising")
    if kind is None:
        kind = allowed[int(rng.integers(len(allowed)))]
    if kind not in allowed:
        raise ValueError(f"instrument kind {kind!r} not available for this pointer (allowed: {allowed})")
    if kind == "luders":
        return luders_instrument(z)
    if kind == "depolarising":
        return depolarising_objectification(z)
    if kind == "block_unitary":
        # random unitary inside each pointer eigenspace, mixed over two branches
        branches = []
        for _ in range(2):
            u = np.zeros((z.dim, z.dim), dtype=complex)
            for e in z.effects:
                w, v = np.linalg.eigh(la.hermitize(e))
                cols = v[:, w > 0.5]
                r = cols.shape[1]
                u += cols @ random_unitary(r, rng) @ la.dag(cols)
            branches.append(u)
        t = rng.random()
        phi = KrausOperation((np.sqrt(t) * branches[0], np.sqrt(1 - t) * branches[1]))
        return sequential_sharp_instrument(z, phi)
    targets = []
    for e in z.effects:
        p = eigenvalue_one_projector(e)
        w, v = np.linalg.eigh(la.hermitize(p))
        cols = v[:, w > 0.5]
        targets.append(cols @ random_state(cols.shape[1], rng) @ la.dag(cols))
    return measure_and_prepare_instrument(z, targets)


def random_ensemble_decomposition(rho, n_members: int, rng: np.random.Generator):
    """Random ``{p_k, rho_k}`` with ``sum_k p_k rho_k = rho``.

    Builds a pure-state decomposition from a random unitary mixing of the
    spectral vectors, then groups the pure states into ``n_members`` sets.
    """
    rho = la.as_matrix(rho)
    d = rho.shape[0]
    w, v = np.linalg.eigh(la.hermitize(rho))
    amps = v * np.sqrt(np.clip(w, 0.0, None))  # columns sqrt(l_i) v_i
    m = max(2 * d, n_members)
    mix = random_unitary(m, rng)[:, :d]
    vecs = mix @ amps.T  # row k is an unnormalised pure state
    groups = _partition(m, n_members, rng)
    probs, states = [], []
    for g in groups:
        part = sum(np.outer(vecs[k], np.conj(vecs[k])) for k in g)
        p = float(np.trace(part).real)
        probs.append(p)
        states.append(la.hermitize(part / p) if p > 0 else random_state(d, rng))
    return np.array(probs), states


@dataclass(frozen=True)
class RandomInstance:
    scheme: MeasurementScheme
    j: Instrument
    h_s: np.ndarray
    h_a: np.ndarray
    rho: np.ndarray
    sharp_pointer: bool
    instrument_kind: str


def random_instance(
    d_s: int,
    d_a: int,
    rng: np.random.Generator,
    n_outcomes: int | None = None,
    sharp: bool | None = None,
    kind: str | None = None,
    yanase: bool = True,
) -> RandomInstance:
    """A random scheme with a repeatable pointer instrument.

    With ``yanase=True`` the apparatus Hamiltonian commutes with the pointer;
    with ``yanase=False`` it is a generic Hermitian matrix instead.
    """
    n = int(n_outcomes if n_outcomes is not None else rng.integers(2, d_a + 1))
    n = max(1, min(n, d_a))
    if sharp is None:
        sharp = bool(rng.integers(2)) or d_a == n
    basis = random_unitary(d_a, rng)
    z = random_sharp_povm(d_a, n, rng, basis) if sharp else random_objectifiable_povm(d_a, n, rng, basis)
    h_a = commuting_hamiltonian(z, rng) if yanase else random_hermitian(d_a, rng)
    xi = random_state(d_a, rng, rank=int(rng.integers(1, d_a + 1)))
    u = random_unitary(d_s * d_a, rng)
    scheme = MeasurementScheme(d_s, d_a, xi, u, z)
    j = random_repeatable_instrument(z, rng, kind)
    kind_name = kind or _kind_of(j, z)
    return RandomInstance(scheme, j, random_hermitian(d_s, rng), h_a, random_state(d_s, rng), sharp, kind_name)


def _kind_of(j: Instrument, z: Povm) -> str:
    lud = luders_instrument(z)
    same = all(
        len(a.kraus) == len(b.kraus) and all(la.allclose(x, y) for x, y in zip(a.kraus, b.kraus))
        for a, b in zip(j.operations, lud.operations)
    )
    return "luders" if same else "other"
