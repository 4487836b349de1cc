"""Adapted basis, duality, extraction, PSD checks, splitting, cone tests."""
import numpy as np
import pytest

from rpcheck import (
    Element,
    build_classical_double,
    build_clifford_double,
    build_gauge_double,
    build_grassmann_double,
    build_parafermion_double,
    build_spin_double,
    cyclic_group,
    mirror_chain,
    multiply,
    reflect,
    refined_gauge_lattice,
    twisted_product,
)
from rpcheck.couplings import (
    basis_pair_element,
    build_adapted_basis,
    cone_membership,
    decompose,
    dual_pair,
    extract_couplings,
    psd_check,
    reconstruct,
)
from rpcheck.errors import (
    DecompositionUnavailableError,
    FactorizationError,
    GradingError,
)
from rpcheck.functionals import background, evaluate
from rpcheck.models import heisenberg_model
from rpcheck.props import random_coupling_matrix, random_homogeneous

LAT = mirror_chain(2)


def test_adapted_basis_axioms():
    for alg in (build_clifford_double(LAT, 1), build_parafermion_double(3, LAT),
                build_grassmann_double(LAT, 1), build_spin_double(mirror_chain(1), 2)):
        basis = build_adapted_basis(alg)
        # unit first, monomials already orthonormal, full span
        assert basis.monomials[basis.i0] == ()
        assert basis.i0 == 0
        assert basis.combo is None
        assert len(basis) == len(alg.side_monomials("plus"))
        # degree-major ordering
        assert all(basis.degrees[i] <= basis.degrees[i + 1] for i in range(len(basis) - 1))


def test_empty_positive_side_is_unit_only():
    lat = mirror_chain(1)
    alg = build_spin_double(lat, 2)
    # restrict to a lattice with one site per side: the basis still holds the unit
    basis = build_adapted_basis(alg)
    assert basis.monomials[0] == ()


def test_dual_pair_identity_indices():
    alg = build_clifford_double(LAT, 1)
    basis = build_adapted_basis(alg)
    b, bhat = dual_pair(basis, basis.i0, basis.i0)
    assert (b - alg.unit()).inf_norm() == 0
    assert (bhat - alg.unit()).inf_norm() == 0


def test_dual_pair_degree_mismatch_warns():
    alg = build_parafermion_double(3, LAT)
    basis = build_adapted_basis(alg)
    i1 = next(i for i in range(len(basis)) if basis.degrees[i] == 1)
    i2 = next(i for i in range(len(basis)) if basis.degrees[i] == 2)
    with pytest.warns(UserWarning):
        b, bhat = dual_pair(basis, i1, i2)
    assert b.is_zero() and bhat.is_zero()


def test_duality_identity_exhaustive():
    for alg in (build_clifford_double(LAT, 1), build_parafermion_double(3, LAT),
                build_grassmann_double(LAT, 1)):
        basis = build_adapted_basis(alg)
        tau = background(alg)
        n = len(basis)
        for i in range(n):
            for j in range(n):
                if basis.degrees[i] != basis.degrees[j]:
                    continue
                _, bhat = dual_pair(basis, i, j)
                for ii in range(n):
                    for jj in range(n):
                        if basis.degrees[ii] != basis.degrees[jj]:
                            continue
                        val = evaluate(tau, multiply(bhat, basis_pair_element(basis, ii, jj)))
                        want = 1.0 if (i, j) == (ii, jj) else 0.0
                        assert abs(val - want) < 1e-12


def test_pair_element_parafermion_form():
    # B_II for a single-site exponent is zeta * c^{-1}_{mirror} c
    alg = build_parafermion_double(3, LAT)
    basis = build_adapted_basis(alg)
    i = basis.monomials.index(((2, 1),))
    b = basis_pair_element(basis, i, i)
    expect = alg.zeta * multiply(alg.basis_element(((1, 2),)), alg.basis_element(((2, 1),)))
    assert (b - expect).inf_norm() < 1e-12


def test_reflection_transposes_pair_basis():
    for alg in (build_clifford_double(LAT, 1), build_parafermion_double(3, LAT)):
        basis = build_adapted_basis(alg)
        n = len(basis)
        for i in range(n):
            for j in range(n):
                if basis.degrees[i] != basis.degrees[j]:
                    continue
                lhs = reflect(basis_pair_element(basis, i, j))
                rhs = basis_pair_element(basis, j, i)
                assert (lhs - rhs).inf_norm() < 1e-12


def test_extract_zero_hamiltonian():
    alg = build_clifford_double(LAT, 1)
    basis = build_adapted_basis(alg)
    j = extract_couplings(Element(alg), basis)
    assert np.max(np.abs(j.matrix)) == 0


def test_extract_rejects_nonzero_degree():
    alg = build_clifford_double(LAT, 1)
    basis = build_adapted_basis(alg)
    with pytest.raises(GradingError):
        extract_couplings(alg.generator(2, 1), basis)


def test_extraction_roundtrip_random():
    rng = np.random.default_rng(23)
    for alg in (build_clifford_double(LAT, 1), build_parafermion_double(3, LAT),
                build_grassmann_double(LAT, 1), build_spin_double(mirror_chain(1), 2),
                build_gauge_double(cyclic_group(2), refined_gauge_lattice(2, 2))):
        basis = build_adapted_basis(alg)
        for _ in range(5):
            terms = {m: complex(rng.normal(), rng.normal())
                     for m in alg.full_basis() if alg.monomial_degree(m) == 0}
            h = Element(alg, terms)
            j = extract_couplings(h, basis)
            assert (reconstruct(j, basis) - h).inf_norm() < 1e-10


def test_matrix_roundtrip_random():
    rng = np.random.default_rng(29)
    alg = build_parafermion_double(3, LAT)
    basis = build_adapted_basis(alg)
    j = random_coupling_matrix(basis, rng)
    h = reconstruct(j, basis)
    j2 = extract_couplings(h, basis)
    assert np.max(np.abs(j2.matrix - j)) < 1e-10


def test_extract_hermitian_iff_invariant():
    rng = np.random.default_rng(31)
    alg = build_clifford_double(LAT, 1)
    basis = build_adapted_basis(alg)
    j = random_coupling_matrix(basis, rng)
    h = reconstruct(j, basis)
    assert (reflect(h) - h).inf_norm() < 1e-12
    assert extract_couplings(h, basis).hermitian_dev() < 1e-12
    # a non-invariant element has a non-Hermitian coupling matrix
    i1 = next(i for i in range(len(basis)) if basis.degrees[i] == 1)
    i2 = next(i for i in range(len(basis)) if basis.degrees[i] == 1 and i != i1)
    h2 = basis_pair_element(basis, i1, i2)
    assert (reflect(h2) - h2).inf_norm() > 1e-9
    assert extract_couplings(h2, basis).hermitian_dev() > 1e-9


def test_extraction_needs_factorizing_background():
    lat = mirror_chain(1, include_origin=True)
    alg = build_classical_double(lat, (1, -1), (0.5, 0.5))
    basis = build_adapted_basis(alg)
    assert not basis.extraction_ok
    with pytest.raises(FactorizationError):
        extract_couplings(Element(alg), basis)
    strict = build_adapted_basis(alg, strict_plus=True)
    assert strict.extraction_ok
    j = extract_couplings(Element(alg), strict)
    assert np.max(np.abs(j.matrix)) == 0


def test_heisenberg_coupling_entries_match_formula():
    # spin-1/2: the cross-plane block on single-site index pairs is
    # -2 J s(s+1)/3 |theta(l) - l'|^{-v} delta_ab in the normalized basis
    s, J, v = 0.5, -1.0, 1.0
    double, h = heisenberg_model(2, s, J, v)
    basis = build_adapted_basis(double)
    j = extract_couplings(h, basis)
    labels = basis.labels()
    scale = -2 * J * (s * (s + 1) / 3.0)
    sites = {0.5: "0.5", 1.5: "1.5"}
    for lam in (0.5, 1.5):
        for mu in (0.5, 1.5):
            for a in range(1, 4):
                for b in range(1, 4):
                    i = labels.index(f"B{a}[{sites[lam]}]")
                    jj = labels.index(f"B{b}[{sites[mu]}]")
                    want = scale * (lam + mu) ** (-v) if a == b else 0.0
                    assert abs(j.matrix[i, jj] - want) < 1e-12


def test_psd_check_basics():
    v = psd_check(np.eye(3))
    assert v.psd and abs(v.min_eig - 1.0) < 1e-15
    v2 = psd_check(np.diag([1.0, -1.0]))
    assert not v2.psd and abs(v2.min_eig + 1.0) < 1e-15
    v3 = psd_check(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert v3.hermitian_dev == 1.0


def test_heisenberg_cross_plane_block_psd():
    double, h = heisenberg_model(1, 0.5, -1.0, 1.0)
    basis = build_adapted_basis(double)
    j = extract_couplings(h, basis)
    # single site per side: the single-spin block is 3x3 ~ diag
    verdict = psd_check(j.j0())
    assert verdict.psd
    # explicit 6x6 block for two sites per side
    double2, h2 = heisenberg_model(2, 0.5, -1.0, 1.0)
    basis2 = build_adapted_basis(double2)
    j2 = extract_couplings(h2, basis2)
    labels = basis2.labels()
    idx = [labels.index(f"B{a}[{s}]") for s in ("0.5", "1.5") for a in (1, 2, 3)]
    block = j2.matrix[np.ix_(idx, idx)]
    vals = np.linalg.eigvalsh(0.5 * (block + block.conj().T))
    assert vals[0] > -1e-12


def test_decompose_theta_completed_plus_element():
    alg = build_clifford_double(LAT, 1)
    basis = build_adapted_basis(alg)
    rng = np.random.default_rng(37)
    terms = {m: complex(rng.normal(), rng.normal())
             for m in alg.side_monomials("plus") if alg.monomial_degree(m) == 0}
    b = Element(alg, terms)
    h = reflect(b) + b
    h_minus, h_zero, h_plus = decompose(h, basis)
    assert h_zero.inf_norm() < 1e-12
    assert (h_minus + h_zero + h_plus - h).inf_norm() < 1e-10
    assert (reflect(h_plus) - h_minus).inf_norm() < 1e-12
    assert h_plus.supported_on("+0")


def test_decompose_random_psd_reassembly():
    rng = np.random.default_rng(41)
    for alg in (build_clifford_double(LAT, 1), build_parafermion_double(3, LAT)):
        basis = build_adapted_basis(alg)
        for _ in range(5):
            j = random_coupling_matrix(basis, rng, psd=True)
            h = reconstruct(j, basis)
            h_minus, h_zero, h_plus = decompose(h, basis)
            assert (h_minus + h_zero + h_plus - h).inf_norm() < 1e-10
            # -H_zero stays in the cone
            assert cone_membership(-h_zero, basis)


def test_decompose_unavailable_for_indefinite_couplings():
    alg = build_clifford_double(LAT, 1)
    basis = build_adapted_basis(alg)
    n = len(basis)
    j = np.zeros((n, n), dtype=complex)
    i1 = next(i for i in range(n) if i != basis.i0 and basis.degrees[i] == 1)
    j[i1, i1] = -1.0
    h = reconstruct(j, basis)
    with pytest.raises(DecompositionUnavailableError):
        decompose(h, basis)


def test_cone_membership_examples():
    alg = build_clifford_double(LAT, 1)
    basis = build_adapted_basis(alg)
    rng = np.random.default_rng(43)
    a = random_homogeneous(alg, rng)
    k = twisted_product(reflect(a), a)
    assert cone_membership(k, basis)
    assert not cone_membership(-1.0 * k, basis) or k.is_zero()
    assert cone_membership(alg.unit(), basis)


def test_reconstruct_rejects_degree_mismatch():
    alg = build_parafermion_double(3, LAT)
    basis = build_adapted_basis(alg)
    n = len(basis)
    j = np.zeros((n, n), dtype=complex)
    i1 = next(i for i in range(n) if basis.degrees[i] == 1)
    i2 = next(i for i in range(n) if basis.degrees[i] == 2)
    j[i1, i2] = 1.0
    with pytest.raises(GradingError):
        reconstruct(j, basis)
