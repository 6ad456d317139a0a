import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from objectify import linalg as la
from objectify.errors import PreconditionError
from objectify.instruments import depolarising_objectification, luders_instrument
from objectify.observables import Povm, sharp_basis_povm
from objectify.sampling import (
    random_ensemble_decomposition,
    random_hermitian,
    random_instance,
    random_state,
    random_unitary,
)
from objectify.schemes import (
    MeasurementScheme,
    ObjectificationEnsemble,
    induced_instrument,
    normal_scheme_for_luders,
    objectify,
    premeasure,
)
from objectify.thermo import (
    conditional_energetics,
    ensemble_consistency_residual,
    fixed_point_check,
    heat_variance,
    joint_hamiltonian,
    mean_heat_from_apparatus,
    measurement_energetics,
    premeasurement_work,
    skew_information,
    variance,
    variance_decomposition,
    weak_value_energy,
)

from conftest import I2, P0, PLUS, SX, SZ

seeds = st.integers(0, 2**32 - 1)
HQ = np.diag([0.0, 1.0])


def qubit_case():
    m = normal_scheme_for_luders(sharp_basis_povm(2), (0.0, 1.0))
    return m, luders_instrument(m.z)


def test_work_examples(rng):
    m = MeasurementScheme(2, 2, random_state(2, rng), np.eye(4), sharp_basis_povm(2))
    assert premeasurement_work(m, random_hermitian(2, rng), random_hermitian(2, rng), random_state(2, rng)) == 0.0
    h_s, h_a = random_hermitian(2, rng), random_hermitian(2, rng)
    w, v = np.linalg.eigh(joint_hamiltonian(h_s, h_a))
    u = (v * np.exp(1j * rng.uniform(0, 6, 4))) @ la.dag(v)
    m = MeasurementScheme(2, 2, random_state(2, rng), u, sharp_basis_povm(2))
    assert abs(premeasurement_work(m, h_s, h_a, random_state(2, rng))) <= 1e-12
    m, _ = qubit_case()
    # oracle: energy 0.5 before, 1.0 after
    assert premeasurement_work(m, HQ, HQ, PLUS) == pytest.approx(0.5, abs=1e-12)


def test_case_study_energetics():
    m, j = qubit_case()
    en = measurement_energetics(m, j, HQ, HQ, PLUS)
    assert en.work == pytest.approx(0.5, abs=1e-12)
    assert en.heats == pytest.approx([-1.0, 1.0], abs=1e-12)
    assert abs(en.mean_heat) <= 1e-12
    assert en.mean_delta_e == pytest.approx(0.5, abs=1e-12)
    assert abs(en.first_law_residual) <= 1e-12


def test_deterministic_outcome_has_no_heat():
    m, j = qubit_case()
    en = measurement_energetics(m, j, HQ, HQ, P0)
    assert en.outcomes[0].p == pytest.approx(1.0)
    assert abs(en.outcomes[0].heat) <= 1e-12
    assert en.outcomes[1].p == 0.0


@given(st.integers(2, 4), st.integers(2, 4), seeds)
@settings(max_examples=30)
def test_first_law_and_apparatus_form(d_s, d_a, seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(d_s, d_a, rng, yanase=bool(rng.integers(2)))
    en = measurement_energetics(inst.scheme, inst.j, inst.h_s, inst.h_a, inst.rho)
    assert abs(en.first_law_residual) <= 1e-10
    assert abs(en.work - en.work_marginal) <= 1e-10
    _, eta = premeasure(inst.scheme, inst.rho)
    assert abs(en.mean_heat - mean_heat_from_apparatus(inst.j, inst.h_a, eta)) <= 1e-10
    # oracle: brute-force mean of the outcome records
    assert en.mean_heat == pytest.approx(sum(r.p * r.heat for r in en.outcomes), abs=1e-12)


def test_variance_decomposition_examples():
    v = variance_decomposition(SZ, I2 / 2)
    assert v == pytest.approx((1.0, 0.0, 1.0), abs=1e-12)
    v = variance_decomposition(SX, P0)
    assert v == pytest.approx((1.0, 1.0, 0.0), abs=1e-12)
    # oracle: tr[X r^1/2 X r^1/2] = 2 sqrt(0.75 * 0.25)
    v = variance_decomposition(SX, np.diag([0.75, 0.25]), 0.5)
    assert v.total == pytest.approx(1.0, abs=1e-12)
    assert v.quantum == pytest.approx(1 - np.sqrt(3) / 2, abs=1e-12)
    assert v.classical == pytest.approx(np.sqrt(3) / 2, abs=1e-12)


def test_skew_alpha_bounds():
    with pytest.raises(ValueError):
        skew_information(SX, P0, 1.0)


@given(st.integers(1, 5), st.floats(0.01, 0.99), seeds)
def test_skew_bounds(d, alpha, seed):
    rng = np.random.default_rng(seed)
    a, rho = random_hermitian(d, rng), random_state(d, rng, int(rng.integers(1, d + 1)))
    s = variance_decomposition(a, rho, alpha)
    assert -1e-10 <= s.quantum <= s.total + 1e-10
    assert abs(s.quantum + s.classical - s.total) <= 1e-12


@given(st.integers(2, 4), st.floats(0.05, 0.95), seeds)
def test_skew_convexity(d, alpha, seed):
    rng = np.random.default_rng(seed)
    a = random_hermitian(d, rng)
    p = rng.dirichlet(np.ones(3))
    rhos = [random_state(d, rng) for _ in p]
    mix = sum(pi * r for pi, r in zip(p, rhos))
    assert sum(pi * skew_information(a, r, alpha) for pi, r in zip(p, rhos)) >= skew_information(a, mix, alpha) - 1e-10


def test_heat_variance_case_study():
    m, j = qubit_case()
    ens = objectify(m, j, PLUS)
    v = heat_variance(ens, joint_hamiltonian(HQ, HQ), 0.5)
    assert v.var_q == pytest.approx(1.0, abs=1e-12)
    assert abs(v.delta_v_qu) <= 1e-12
    assert v.delta_v_cl == pytest.approx(1.0, abs=1e-12)


def test_single_outcome_has_no_heat_variance(rng):
    sig = random_state(4, rng)
    ens = ObjectificationEnsemble.from_states([1.0], [sig], premeasured=sig)
    v = heat_variance(ens, random_hermitian(4, rng))
    assert abs(v.var_q) <= 1e-12 and v.residual <= 1e-12


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
@given(d_s=st.integers(2, 4), d_a=st.integers(2, 4), seed=seeds)
@settings(max_examples=20)
def test_classicality_theorem(alpha, d_s, d_a, seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(d_s, d_a, rng)
    ens = objectify(inst.scheme, inst.j, inst.rho)
    v = heat_variance(ens, joint_hamiltonian(inst.h_s, inst.h_a), alpha)
    assert abs(v.delta_v_qu) <= 1e-8
    assert v.residual <= 1e-10
    # oracle: sample variance of the heat values
    en = measurement_energetics(inst.scheme, inst.j, inst.h_s, inst.h_a, inst.rho)
    q, p = np.array(en.heats), np.array(en.probs)
    assert abs(v.var_q - (p @ q**2 - (p @ q) ** 2)) <= 1e-10


def test_classicality_fails_without_yanase():
    # unsharp Lüders scheme read out in the computational basis, H_A = X
    e = Povm((0.5 * I2 + 0.3 * SX, 0.5 * I2 - 0.3 * SX))
    m = normal_scheme_for_luders(e)
    rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    v = heat_variance(objectify(m, luders_instrument(m.z), rho), joint_hamiltonian(np.diag([0, 1.0]), SX))
    assert v.delta_v_qu > 1e-3


@given(st.integers(2, 4), st.integers(2, 3), seeds)
def test_lieb_positivity_commuting_states(d, n, seed):
    rng = np.random.default_rng(seed)
    u = random_unitary(d, rng)
    sigmas = [u @ np.diag(rng.dirichlet(np.ones(d))) @ la.dag(u) for _ in range(n)]
    ens = ObjectificationEnsemble.from_states(rng.dirichlet(np.ones(n)), sigmas)
    v = heat_variance(ens, random_hermitian(d, rng), float(rng.uniform(0.05, 0.95)))
    assert v.delta_v_qu >= -1e-10 and v.delta_v_cl >= -1e-10
    assert v.delta_v_cl >= v.delta_v_qu - 1e-10


def test_fixed_point_examples(rng):
    z = sharp_basis_povm(3)
    assert fixed_point_check(luders_instrument(z), np.diag([0.1, 2.0, -1.0])).ok
    z4 = Povm((np.diag([1, 1, 0, 0]), np.diag([0, 0, 1, 1])))
    assert fixed_point_check(depolarising_objectification(z4), 0.3 * z4.effects[0] - 2 * z4.effects[1]).ok
    chk = fixed_point_check(depolarising_objectification(Povm((I2,))), HQ)
    assert not chk.ok
    assert la.allclose(chk.image, 0.5 * I2, 1e-12)
    assert mean_heat_from_apparatus(depolarising_objectification(Povm((I2,))), HQ, P0) == pytest.approx(0.5, abs=1e-12)


def test_weak_value_reduces_to_expectation_for_commuting_effect(rng):
    h = np.diag([0.0, 1.0, 3.0])
    rho = random_state(3, rng)
    e = np.diag([0.0, 1.0, 1.0])
    # oracle: for [E, H] = 0 with E a projector, Re tr[E(H rho + rho H)]/2 = tr[E H rho]
    assert weak_value_energy(e, h, rho) == pytest.approx(la.expect(e @ h, rho) / la.expect(e, rho), abs=1e-12)


def test_conditional_case_study():
    m, j = qubit_case()
    rows = conditional_energetics(m, j, HQ, HQ, PLUS)
    assert [r.heat for r in rows] == pytest.approx([0.0, 0.0], abs=1e-12)
    en = measurement_energetics(m, j, HQ, HQ, PLUS)
    assert sum(r.p * r.work for r in rows) == pytest.approx(en.work, abs=1e-12)


@given(st.integers(2, 4), st.integers(2, 4), seeds)
@settings(max_examples=25)
def test_conditional_properties(d_s, d_a, seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(d_s, d_a, rng, sharp=True)
    m = inst.scheme
    rows_l = conditional_energetics(m, luders_instrument(m.z), inst.h_s, inst.h_a, inst.rho)
    assert max(abs(r.heat) for r in rows_l) <= 1e-10
    rows = conditional_energetics(m, inst.j, inst.h_s, inst.h_a, inst.rho)
    w = measurement_energetics(m, inst.j, inst.h_s, inst.h_a, inst.rho).work
    assert abs(sum(r.p * r.work for r in rows) - w) <= 1e-10
    assert max(abs(r.heat - r.heat_apparatus) for r in rows) <= 1e-10
    q, members = random_ensemble_decomposition(inst.rho, 2, rng)
    assert la.max_abs(sum(qk * r for qk, r in zip(q, members)) - inst.rho) <= 1e-12
    assert ensemble_consistency_residual(induced_instrument(m), inst.h_s, inst.rho, q, members) <= 1e-10


@given(st.integers(2, 3), st.integers(2, 3), seeds)
@settings(max_examples=15)
def test_conditional_work_vanishes_for_energy_conserving_coupling(d_s, d_a, seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(d_s, d_a, rng, sharp=True)
    _, v = np.linalg.eigh(joint_hamiltonian(inst.h_s, inst.h_a))
    u = (v * np.exp(1j * rng.uniform(0, 6, d_s * d_a))) @ la.dag(v)
    m = MeasurementScheme(d_s, d_a, inst.scheme.xi, u, inst.scheme.z)
    rows = conditional_energetics(m, inst.j, inst.h_s, inst.h_a, inst.rho)
    assert max(abs(r.work) for r in rows) <= 1e-10


def test_conditional_preconditions():
    e = Povm((0.5 * I2 + 0.3 * SX, 0.5 * I2 - 0.3 * SX))
    m = normal_scheme_for_luders(e)
    with pytest.raises(PreconditionError, match="Yanase"):
        conditional_energetics(m, luders_instrument(m.z), HQ, SX, PLUS)
    unsharp_ptr = MeasurementScheme(2, 3, np.diag([1.0, 0, 0]), np.eye(6), Povm((np.diag([1, 0.4, 0]), np.diag([0, 0.6, 1]))))
    with pytest.raises(PreconditionError, match="sharp"):
        conditional_energetics(unsharp_ptr, None, HQ, np.eye(3), PLUS)


def test_variance_helper():
    assert variance(SX, P0) == pytest.approx(1.0)
