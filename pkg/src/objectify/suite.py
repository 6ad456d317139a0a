"""Randomised invariant suite.

Each invariant is evaluated on seeded random instances and reports a pass
count and the worst residual. Instances are generated serially from one
generator, so the summary is byte-identical for a fixed seed.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .info import DaimonScenario, block_skew_identity_check, daimon_report, holevo_information, shannon_entropy, von_neumann_entropy
from .instruments import (
    apply,
    apply_dual,
    conditional_state,
    choi_distance,
    choi_matrix,
    is_repeatable,
    kraus_from_choi,
    luders_instrument,
    sequential_sharp_instrument,
)
from .observables import Povm, born_probabilities, eigenvalue_one_projector
from .sampling import (
    random_channel,
    random_ensemble_decomposition,
    random_hermitian,
    random_instance,
    random_objectifiable_povm,
    random_repeatable_instrument,
    random_sharp_povm,
    random_state,
    random_unitary,
)
from .schemes import (
    MeasurementScheme,
    implementation_independence_check,
    induced_instrument,
    normal_scheme_for_luders,
    objectify,
    stability_probability,
)
from .thermo import (
    conditional_energetics,
    ensemble_consistency_residual,
    fixed_point_check,
    heat_variance,
    joint_hamiltonian,
    measurement_energetics,
    skew_information,
    variance,
    variance_decomposition,
)

SUITE_ALPHAS = (0.25, 0.5, 0.75)
G_GRID = tuple(0.25 * k for k in range(1, 25))
#: randomised schemes per (system, apparatus) dimension pair
SCHEMES_PER_PAIR = 25
BLOCK_STATES = 120
NEGATIVE_CONTROL_MIN = 1e-3


@dataclass
class Tally:
    name: str
    tol: float
    passed: int = 0
    total: int = 0
    worst: float = 0.0

    def add(self, residual: float, ok: bool | None = None):
        residual = float(residual)
        ok = residual <= self.tol if ok is None else ok
        self.total += 1
        self.passed += bool(ok)
        self.worst = max(self.worst, residual) if np.isfinite(residual) else float("inf")

    @property
    def ok(self) -> bool:
        return self.total > 0 and self.passed == self.total


@dataclass
class NegativeControl:
    """A fixture that must violate an invariant; it passes when it does."""

    name: str
    threshold: float
    total: int = 0
    largest: float = 0.0

    def add(self, value: float):
        self.total += 1
        self.largest = max(self.largest, float(value))

    @property
    def ok(self) -> bool:
        return self.largest > self.threshold


@dataclass
class SuiteResult:
    seed: int
    dims: tuple[int, ...]
    tallies: dict[str, Tally] = field(default_factory=dict)
    controls: dict[str, NegativeControl] = field(default_factory=dict)
    n_schemes: int = 0

    @property
    def ok(self) -> bool:
        return all(t.ok for t in self.tallies.values()) and all(c.ok for c in self.controls.values())

    @property
    def failures(self) -> list[str]:
        return [n for n, t in self.tallies.items() if not t.ok] + [n for n, c in self.controls.items() if not c.ok]

    def summary(self) -> str:
        lines = [f"objectify invariant suite  seed={self.seed}  dims={','.join(map(str, self.dims))}  schemes={self.n_schemes}"]
        width = max((len(n) for n in list(self.tallies) + list(self.controls)), default=10)
        for name in sorted(self.tallies):
            t = self.tallies[name]
            status = "PASS" if t.ok else "FAIL"
            lines.append(f"{status}  {name:<{width}}  {t.passed:>5}/{t.total:<5}  worst={t.worst:.3e}  tol={t.tol:.0e}")
        for name in sorted(self.controls):
            c = self.controls[name]
            status = "PASS" if c.ok else "FAIL"
            lines.append(
                f"{status}  {name:<{width}}  expected-fail fixture  largest={c.largest:.3e}  must exceed {c.threshold:.0e}"
            )
        lines.append(f"result: {'OK' if self.ok else 'FAILED'} ({len(self.failures)} failing)")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "dims": list(self.dims),
                "schemes": self.n_schemes,
                "ok": self.ok,
                "invariants": {n: {"passed": t.passed, "total": t.total, "worst": t.worst, "tol": t.tol} for n, t in sorted(self.tallies.items())},
                "expected_fail": {n: {"largest": c.largest, "threshold": c.threshold, "ok": c.ok} for n, c in sorted(self.controls.items())},
            },
            indent=2,
            sort_keys=True,
        )


class _Suite:
    def __init__(self, seed: int, dims, tol_scale: float = 1.0):
        self.rng = np.random.default_rng(seed)
        self.res = SuiteResult(seed, tuple(dims))
        self.scale = tol_scale

    def tally(self, name: str, tol: float) -> Tally:
        if name not in self.res.tallies:
            self.res.tallies[name] = Tally(name, tol * self.scale)
        return self.res.tallies[name]

    def check(self, name: str, tol: float, residual: float, ok: bool | None = None):
        self.tally(name, tol).add(residual, ok)

    # -- matrix core and observables ------------------------------------------

    def core(self, d: int):
        rng = self.rng
        a, b = random_state(d, rng), random_state(d + 1, rng)
        ab = np.kron(a, b)
        self.check("matrix-core/partial-trace-of-product", 1e-12,
                   max(la.max_abs(la.partial_trace(ab, (d, d + 1), 0) - a), la.max_abs(la.partial_trace(ab, (d, d + 1), 1) - b)))
        al = float(rng.uniform(0.05, 0.95))
        self.check("matrix-core/frac-power-product", 1e-10,
                   la.max_abs(la.frac_power(a, al) @ la.frac_power(a, 1 - al) - a))
        v = random_unitary(2 * d, rng)[:, :d]
        w = la.complete_isometry(v)
        self.check("matrix-core/isometry-completion", 1e-10,
                   max(la.max_abs(la.dag(w) @ w - np.eye(2 * d)), la.max_abs(w[:, :d] - v)))
        e = random_objectifiable_povm(d, 2, rng)
        p = born_probabilities(e, a)
        self.check("observables/born-normalisation", 1e-12, abs(p.sum() - 1.0), bool(np.all(p >= 0)) and abs(p.sum() - 1) <= 1e-12)
        self.check("info/entropy-additivity", 1e-10,
                   abs(von_neumann_entropy(ab) - von_neumann_entropy(a) - von_neumann_entropy(b)))
        # orthogonal mixing
        u = random_unitary(2 * d, rng)
        q = rng.dirichlet(np.ones(2))
        parts = [u[:, :d] @ random_state(d, rng) @ la.dag(u[:, :d]), u[:, d:] @ random_state(d, rng) @ la.dag(u[:, d:])]
        mix = q[0] * parts[0] + q[1] * parts[1]
        self.check("info/orthogonal-mixing", 1e-9,
                   abs(von_neumann_entropy(mix) - shannon_entropy(q) - sum(qi * von_neumann_entropy(s) for qi, s in zip(q, parts))))
        h = random_hermitian(d, rng)
        vq = skew_information(h, a, al)
        self.check("thermo/skew-between-zero-and-variance", 1e-10,
                   max(-vq, vq - variance(h, a), 0.0))
        split = variance_decomposition(h, a, al)
        self.check("thermo/variance-split-sums", 1e-12, abs(split.quantum + split.classical - split.total))
        a2 = random_state(d, rng)
        self.check("thermo/skew-convexity", 1e-10,
                   max(skew_information(h, q[0] * a + q[1] * a2, al)
                       - q[0] * skew_information(h, a, al) - q[1] * skew_information(h, a2, al), 0.0))
        c = random_hermitian(2, rng)
        self.check("matrix-core/tensor-associativity", 1e-14,
                   la.max_abs(la.tensor(la.tensor(a, b), c) - la.tensor(a, la.tensor(b, c))))
        t = random_hermitian(d * (d + 1), rng) + 1j * random_hermitian(d * (d + 1), rng)
        self.check("matrix-core/partial-trace-preserves-trace", 1e-12,
                   max(abs(np.trace(la.partial_trace(t, (d, d + 1), k)) - np.trace(t)) for k in (0, 1)))
        gt = float(rng.normal())
        self.check("matrix-core/herm-unitary-inverse", 1e-10,
                   la.max_abs(la.herm_unitary(h, gt) @ la.herm_unitary(h, -gt) - np.eye(d)))
        worst = 0.0
        projs = [eigenvalue_one_projector(ex) for ex in e.effects]
        for x, px in enumerate(projs):
            worst = max(worst, la.max_abs(px @ px - px), la.max_abs(px - la.dag(px)), la.max_abs(e.effects[x] @ px - px))
            for y, ey in enumerate(e.effects):
                worst = max(worst, la.max_abs(px @ ey - (px if x == y else 0.0)))
        self.check("observables/unit-eigenspace-projectors", 1e-9, worst)

    # -- instruments ---------------------------------------------------------

    def instruments(self, d: int):
        rng = self.rng
        phi = random_channel(d, rng, n_kraus=3)
        back = kraus_from_choi(choi_matrix(phi), d, d)
        self.check("instruments/choi-roundtrip", 1e-10, choi_distance(phi, back))
        rho = random_state(d, rng)
        self.check("instruments/channel-trace-preservation", 1e-10, abs(np.trace(apply(phi, rho)).real - 1.0))
        z = random_objectifiable_povm(d, 2, rng)
        ins = luders_instrument(z)
        self.check("instruments/luders-compatible", 1e-10,
                   max(la.max_abs(op.effect() - e) for op, e in zip(ins.operations, z.effects)))
        b, t = random_hermitian(d, rng), random_state(d, rng)
        self.check("instruments/duality", 1e-10,
                   abs(np.trace(apply_dual(phi, b) @ t) - np.trace(b @ apply(phi, t))))
        j = random_repeatable_instrument(z, rng)
        outs = [conditional_state(j, rho, x)[1] for x in range(len(j))]
        projs = [eigenvalue_one_projector(e) for e in z.effects]
        self.check("instruments/repeatable-outputs-orthogonal", 1e-9,
                   max(abs(np.trace(outs[x] @ outs[y])) for x in range(len(outs)) for y in range(len(outs)) if x != y))
        self.check("instruments/repeatable-outputs-in-unit-eigenspace", 1e-9,
                   max(la.max_abs(px @ o @ px - o) for px, o in zip(projs, outs)))
        # a state supported in the unit eigenspace of E_0 is left alone by Lüders
        w, v = np.linalg.eigh(la.hermitize(projs[0]))
        cols = v[:, w > 0.5]
        inside = cols @ random_state(cols.shape[1], rng) @ la.dag(cols)
        self.check("instruments/luders-ideality", 1e-9, la.max_abs(apply(ins[0], inside) - inside))
        zs = random_sharp_povm(d, 2, rng)
        seq = sequential_sharp_instrument(zs, random_channel(d, rng, 2))
        self.check("instruments/sequential-induces-pointer", 1e-12,
                   max(la.max_abs(op.effect() - e) for op, e in zip(seq.operations, zs.effects)))

    # -- schemes, energetics, variance, information -----------------------------

    def scheme(self, d_s: int, d_a: int):
        rng = self.rng
        inst = random_instance(d_s, d_a, rng)
        m, j, h_s, h_a, rho = inst.scheme, inst.j, inst.h_s, inst.h_a, inst.rho
        h = joint_hamiltonian(h_s, h_a)
        self.res.n_schemes += 1

        self.check("instruments/pointer-repeatable", 1e-10, is_repeatable(j).max_violation)
        ens = objectify(m, j, rho)
        en = measurement_energetics(m, j, h_s, h_a, rho)
        self.check("thermo/first-law", 1e-10, abs(en.first_law_residual))
        self.check("thermo/work-marginal-form", 1e-10, abs(en.work - en.work_marginal))
        self.check("thermo/mean-heat-apparatus-form", 1e-10, abs(en.mean_heat - en.mean_heat_apparatus))
        self.check("thermo/probabilities", 1e-10, abs(float(np.sum(ens.probs)) - 1.0))
        for a in SUITE_ALPHAS:
            v = heat_variance(ens, h, a)
            self.check("thermo/heat-variance-identity", 1e-10, v.residual)
            self.check("thermo/classicality-dVqu", 1e-8, abs(v.delta_v_qu))
            self.check("thermo/dVcl-nonnegative", 1e-10, max(-v.delta_v_cl, 0.0))

        worst_def, worst_orth = 0.0, 0.0
        supp = ens.support()
        for k in supp:
            worst_def = max(worst_def, abs(la.expect(np.kron(np.eye(m.dim_s), m.z.effects[k]), ens.sigmas[k]) - 1.0))
            for k2 in supp:
                if k2 != k:
                    worst_orth = max(worst_orth, abs(np.trace(ens.sigmas[k] @ ens.sigmas[k2])))
        self.check("schemes/pointer-definite-after-objectification", 1e-9, worst_def)
        self.check("schemes/objectified-states-orthogonal", 1e-9, worst_orth)
        top = int(np.argmax(ens.probs))
        self.check("schemes/stability-under-yanase", 1e-9,
                   max(abs(stability_probability(m, j, rho, top, h_a, g) - 1.0) for g in (0.1, 1.0, 10.0)))

        # the induced instrument does not depend on the pointer instrument chosen
        ind = implementation_independence_check(m, j, luders_instrument(m.z), rho)
        self.check("schemes/implementation-independence", 1e-10, ind.max_deviation)
        sys_ins = induced_instrument(m)
        worst = 0.0
        for k, op in enumerate(sys_ins.operations):
            out = apply(op, rho)
            worst = max(worst, la.max_abs(la.partial_trace(ens.sigmas[k], m.dims, 0) * ens.probs[k] - out))
        self.check("schemes/marginal-equals-induced-instrument", 1e-10, worst)

        # an energy diagonal in the pointer basis is always a fixed point
        eps = rng.normal(size=len(m.z))
        h_z = sum(e * zx for e, zx in zip(eps, m.z.effects))
        self.check("thermo/fixed-point-pointer-energy", 1e-10, fixed_point_check(j, h_z).deviation)
        if inst.sharp_pointer:
            self.check("thermo/fixed-point-luders-yanase", 1e-10, fixed_point_check(luders_instrument(m.z), h_a).deviation)

        # repeatable + Yanase: the observer receives everything
        g = tuple(float(G_GRID[i]) for i in rng.choice(len(G_GRID), size=len(m.z), replace=False))
        rep = daimon_report(DaimonScenario(ens, g, h), float(rng.choice(SUITE_ALPHAS)))
        self.check("info/entropy-gap-vanishes", 1e-9, abs(rep.entropy_gap))
        self.check("info/skew-gap-vanishes", 1e-9, abs(rep.skew_gap))
        self.check("info/holevo-below-shannon", 1e-10, max(rep.entropy_gap, 0.0))
        self.check("info/skew-block-path-vs-direct", 1e-9, abs(rep.skew_total - rep.skew_total_direct))
        self.check("info/skew-total-time-invariant", 1e-9,
                   abs(rep.skew_total - sum(ens.probs[k] * skew_information(h, ens.sigmas[k], rep.alpha) for k in ens.support())))

        if inst.sharp_pointer:
            self.conditional(m, j, h_s, h_a, rho, en.work)

    def conditional(self, m: MeasurementScheme, j, h_s, h_a, rho, work):
        rng = self.rng
        rows = conditional_energetics(m, luders_instrument(m.z), h_s, h_a, rho)
        self.check("thermo/conditional-heat-luders", 1e-10, max(abs(r.heat) for r in rows))
        rows_j = conditional_energetics(m, j, h_s, h_a, rho)
        self.check("thermo/conditional-work-average", 1e-10,
                   abs(sum(r.p * r.work for r in rows_j) - work))
        self.check("thermo/conditional-heat-apparatus-form", 1e-10,
                   max(abs(r.heat - r.heat_apparatus) for r in rows_j))
        q, members = random_ensemble_decomposition(rho, 2, rng)
        self.check("thermo/conditional-ensemble-consistency", 1e-10,
                   ensemble_consistency_residual(induced_instrument(m), h_s, rho, q, members))

    def commuting_coupling(self, d_s: int, d_a: int):
        """W~ vanishes when the coupling conserves the total energy."""
        rng = self.rng
        inst = random_instance(d_s, d_a, rng, sharp=True)
        h = joint_hamiltonian(inst.h_s, inst.h_a)
        w, v = np.linalg.eigh(h)
        u = (v * np.exp(1j * rng.uniform(0, 2 * np.pi, size=len(w)))) @ la.dag(v)
        m = MeasurementScheme(d_s, d_a, inst.scheme.xi, u, inst.scheme.z)
        rows = conditional_energetics(m, inst.j, inst.h_s, inst.h_a, inst.rho)
        self.check("thermo/conditional-work-energy-conserving", 1e-10, max(abs(r.work) for r in rows))

    def normal_scheme(self, d: int):
        rng = self.rng
        e = random_objectifiable_povm(d, int(rng.integers(2, d + 1)), rng)
        # generic unsharp POVM: mix in a second one
        e2 = random_objectifiable_povm(d, len(e), rng)
        t = rng.random()
        e = Povm(tuple(t * a + (1 - t) * b for a, b in zip(e.effects, e2.effects)))
        m = normal_scheme_for_luders(e)
        self.check("schemes/normal-scheme-unitary", 1e-10, la.max_abs(la.dag(m.u) @ m.u - np.eye(m.u.shape[0])))
        ind = induced_instrument(m)
        lud = luders_instrument(e)
        self.check("schemes/normal-scheme-is-luders", 1e-10,
                   max(choi_distance(a, b) for a, b in zip(ind.operations, lud.operations)))

    def block_skew(self):
        rng = self.rng
        n = int(rng.integers(2, 4))
        d2 = int(rng.integers(2, 4))
        p = rng.dirichlet(np.ones(n))
        sigmas = [random_state(d2, rng) for _ in range(n)]
        h1 = np.diag(rng.normal(size=n))
        h2 = random_hermitian(d2, rng)
        a = float(rng.uniform(0.05, 0.95))
        self.check("info/block-skew-identity", 1e-10, block_skew_identity_check(p, sigmas, h1, h2, a).residual)
        self.check("info/holevo-bound-generic", 1e-10, max(holevo_information(p, sigmas) - shannon_entropy(p), 0.0))

    def negative_control(self, d_s: int, d_a: int):
        """Yanase-violating apparatus Hamiltonian; classicality should break."""
        rng = self.rng
        ctl = self.res.controls.setdefault(
            "thermo/classicality-dVqu[yanase-violated]", NegativeControl("yanase-violated", NEGATIVE_CONTROL_MIN)
        )
        inst = random_instance(d_s, d_a, rng, yanase=False)
        ens = objectify(inst.scheme, inst.j, inst.rho)
        v = heat_variance(ens, joint_hamiltonian(inst.h_s, inst.h_a), 0.5)
        ctl.add(abs(v.delta_v_qu))
        self.check("thermo/heat-variance-identity", 1e-10, v.residual)
        g = tuple(float(G_GRID[i]) for i in rng.choice(len(G_GRID), size=len(inst.scheme.z), replace=False))
        rep = daimon_report(DaimonScenario(ens, g, joint_hamiltonian(inst.h_s, inst.h_a)), 0.5)
        self.check("info/holevo-below-shannon", 1e-10, max(rep.entropy_gap, 0.0))
        self.check("info/skew-gap-nonpositive", 1e-10, max(rep.skew_gap, 0.0))


def run_suite(seed: int = 0, dims=(2, 3, 4), schemes_per_pair: int = SCHEMES_PER_PAIR, tol_scale: float = 1.0) -> SuiteResult:
    s = _Suite(seed, dims, tol_scale)
    for d in dims:
        for _ in range(5):
            s.core(d)
            s.instruments(d)
            s.normal_scheme(d)
    for d_s, d_a in itertools.product(dims, dims):
        for _ in range(schemes_per_pair):
            s.scheme(d_s, d_a)
        s.commuting_coupling(d_s, d_a)
        s.negative_control(d_s, d_a)
    for _ in range(BLOCK_STATES):
        s.block_skew()
    return s.res
