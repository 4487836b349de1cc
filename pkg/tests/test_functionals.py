"""Functional classification: neutrality, reflection invariance,
factorization, strict positivity, Boltzmann perturbation."""
import numpy as np
import pytest

from rpcheck import (
    Element,
    build_clifford_double,
    build_gauge_double,
    build_grassmann_double,
    build_parafermion_double,
    build_spin_double,
    cyclic_group,
    mirror_chain,
    multiply,
    refined_gauge_lattice,
)
from rpcheck.couplings import basis_pair_element, build_adapted_basis
from rpcheck.errors import FactorizationError, GradingError
from rpcheck.functionals import (
    background,
    boltzmann,
    check_factorizing,
    check_neutral,
    check_reflection_invariant,
    check_strictly_positive,
    covector_functional,
    evaluate,
    plus_functional,
)
from rpcheck.verify import gram_matrix

LAT = mirror_chain(2)


def test_evaluate_examples():
    pf = build_parafermion_double(3, LAT)
    assert evaluate(background(pf), pf.unit()) == 1
    gr = build_grassmann_double(LAT, 1)
    vol = gr.basis_element(tuple((s, 1) for s in range(gr.n_slots)))
    assert evaluate(background(gr), vol) == 1
    gd = build_gauge_double(cyclic_group(3), refined_gauge_lattice(2, 2))
    assert abs(evaluate(background(gd), gd.generator(0, 1))) < 1e-12


def test_reflection_invariance_positive_cases():
    for alg in (build_parafermion_double(3, LAT), build_grassmann_double(LAT, 1)):
        ok, dev = check_reflection_invariant(background(alg))
        assert ok and dev < 1e-12


def test_reflection_invariance_negative_control():
    alg = build_clifford_double(LAT, 1)
    # concentrate on a single non-symmetric degree-zero monomial
    mono = ((0, 1), (2, 1))
    v = np.zeros(alg.dim, dtype=complex)
    v[alg.monomial_index(mono)] = 1.0
    f = covector_functional(alg, v, name="lopsided")
    ok, dev = check_reflection_invariant(f)
    assert not ok and dev > 0.5


def test_factorizing_positive_cases():
    for alg in (build_clifford_double(LAT, 1), build_parafermion_double(3, LAT)):
        rep = check_factorizing(background(alg), plus_functional(alg), tol=1e-12)
        assert rep.factorizing


def test_factorizing_fitted_without_tau_plus():
    alg = build_clifford_double(LAT, 1)
    rep = check_factorizing(background(alg))
    assert rep.factorizing and rep.max_dev < 1e-10


def test_boltzmann_with_cross_coupling_not_factorizing():
    alg = build_clifford_double(LAT, 1)
    basis = build_adapted_basis(alg)
    # genuine cross-plane pair coupling
    i = next(i for i in range(len(basis)) if i != basis.i0 and basis.degrees[i] == 1)
    h = -basis_pair_element(basis, i, i)
    f = boltzmann(background(alg), h, 1.0)
    rep = check_factorizing(f)
    assert not rep.factorizing and rep.max_dev > 1e-3


def test_strict_positivity_and_zero_functional():
    alg = build_grassmann_double(LAT, 1)
    ok, min_eig, m = check_strictly_positive(alg)
    assert ok and abs(min_eig - 1.0) < 1e-12
    zf = covector_functional(alg, np.zeros(alg.dim), name="zero")
    ok2, min_eig2, _ = check_strictly_positive(alg, f_plus=zf)
    assert not ok2 and abs(min_eig2) < 1e-15


def test_boltzmann_beta_zero_is_background():
    alg = build_clifford_double(LAT, 1)
    tau = background(alg)
    f = boltzmann(tau, alg.unit() * 0.3, 0.0)
    v0 = tau.covector()
    v1 = f.covector()
    assert np.max(np.abs(v0 - v1)) == 0


def test_boltzmann_constant_shift_scales():
    alg = build_clifford_double(LAT, 1)
    tau = background(alg)
    delta = 0.8
    f = boltzmann(tau, delta * alg.unit(), 1.5)
    assert np.max(np.abs(f.covector() - np.exp(-1.5 * delta) * tau.covector())) < 1e-12


def test_boltzmann_preserves_neutrality():
    alg = build_clifford_double(LAT, 1)
    basis = build_adapted_basis(alg)
    i = next(i for i in range(len(basis)) if i != basis.i0 and basis.degrees[i] == 1)
    h = basis_pair_element(basis, i, i)
    f = boltzmann(background(alg), h, 0.7)
    ok, dev = check_neutral(f)
    assert ok, dev
    assert abs(evaluate(f, alg.generator(2, 1))) < 1e-12


def test_boltzmann_requires_degree_zero():
    alg = build_clifford_double(LAT, 1)
    with pytest.raises(GradingError):
        boltzmann(background(alg), alg.generator(2, 1), 1.0)


def test_boltzmann_warns_on_non_invariant_h():
    alg = build_clifford_double(LAT, 1)
    h = multiply(alg.generator(2, 1), alg.generator(3, 1))  # plus-side, not invariant
    with pytest.warns(UserWarning):
        boltzmann(background(alg), h, 1.0)


def test_hermitian_form_iff_reflection_invariant():
    # both directions of the hermiticity criterion
    alg = build_clifford_double(LAT, 1)
    basis = build_adapted_basis(alg)
    good = gram_matrix(background(alg), basis)
    assert max(good.herm_devs.values()) < 1e-12

    mono = ((0, 1), (2, 1))
    v = np.zeros(alg.dim, dtype=complex)
    v[alg.monomial_index(mono)] = 1.0
    bad = gram_matrix(covector_functional(alg, v), basis)
    assert max(bad.herm_devs.values()) > 0.5


def test_rp_verdicts_match_between_sides():
    # reflection positivity on the plus side with zeta equals the minus side
    # with the conjugate root: the Gram spectra coincide
    alg = build_parafermion_double(3, LAT)
    basis = build_adapted_basis(alg)
    rng = np.random.default_rng(17)
    from rpcheck.props import random_coupling_matrix
    from rpcheck.couplings import reconstruct
    for trial in range(3):
        j = random_coupling_matrix(basis, rng, psd=(trial == 0))
        h = reconstruct(j, basis)
        f = boltzmann(background(alg), h, 0.6)
        gp = gram_matrix(f, basis, side="plus")
        gm = gram_matrix(f, basis, side="minus")
        sp = np.sort(np.concatenate([np.linalg.eigvalsh(0.5 * (b + b.conj().T))
                                     for b in gp.blocks.values()]))
        sm = np.sort(np.concatenate([np.linalg.eigvalsh(0.5 * (b + b.conj().T))
                                     for b in gm.blocks.values()]))
        assert np.max(np.abs(sp - sm)) < 1e-9


def test_factorizing_background_gram_rank_one_blocks():
    # factorizing functionals are reflection positive with blockwise rank <= 1
    for alg in (build_clifford_double(LAT, 1), build_parafermion_double(3, LAT),
                build_grassmann_double(LAT, 1), build_spin_double(mirror_chain(1), 2),
                build_gauge_double(cyclic_group(2), refined_gauge_lattice(2, 2))):
        basis = build_adapted_basis(alg)
        g = gram_matrix(background(alg), basis)
        for k, block in g.blocks.items():
            vals = np.linalg.eigvalsh(0.5 * (block + block.conj().T))
            assert vals[0] > -1e-12
            assert np.sum(vals > 1e-10) <= 1


def test_boltzmann_requires_background_base():
    alg = build_clifford_double(LAT, 1)
    f = covector_functional(alg, np.zeros(alg.dim))
    with pytest.raises(FactorizationError):
        boltzmann(f, Element(alg), 1.0)
