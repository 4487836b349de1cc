"""Core algebra engine: roots, products, reflection, sharp, exponentials."""
import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rpcheck import (
    Element,
    GradingOrder,
    ReflectionLattice,
    TwistRoots,
    UnsupportedGradingError,
    build_clifford_double,
    build_grassmann_double,
    build_parafermion_double,
    build_spin_double,
    canonical_zeta,
    exp_neg,
    mirror_chain,
    multiply,
    reflect,
    regular_representation,
    sharp,
    site_operator,
    twisted_product,
)
from rpcheck.errors import (
    AlgebraMismatchError,
    ConstraintViolationError,
    GradingError,
    SideViolationError,
)
from rpcheck.functionals import evaluate, plus_functional

from oracles import clock_shift_rep, element_matrix, jordan_wigner_clifford

LAT = mirror_chain(2)


def test_canonical_zeta_bosonic():
    assert canonical_zeta(1) == 1


def test_canonical_zeta_fermionic():
    assert abs(canonical_zeta(2) - 1j) < 1e-15


def test_canonical_zeta_parafermionic():
    # verified numerically: zeta^2 = q = e^{2 pi i / 3} and zeta^9 = 1
    z = canonical_zeta(3)
    assert abs(z - cmath.exp(4j * cmath.pi / 3)) < 1e-12
    assert abs(z**2 - cmath.exp(2j * cmath.pi / 3)) < 1e-12
    assert abs(z**9 - 1) < 1e-12


def test_zeta_rejects_degenerate_grading():
    with pytest.raises(UnsupportedGradingError):
        canonical_zeta(0)
    with pytest.raises(UnsupportedGradingError):
        GradingOrder(0)


def test_twist_roots_validation():
    TwistRoots(2, -1.0, 1j)
    with pytest.raises(ConstraintViolationError):
        TwistRoots(2, -1.0, 1.0)  # zeta^2 != q
    with pytest.raises(ConstraintViolationError):
        TwistRoots(3, 2.0, 1.0)  # |q| != 1


def test_unit_law():
    alg = build_clifford_double(LAT, 1)
    a = alg.generator(2, 1) + 0.3 * alg.generator(3, 1)
    assert (multiply(alg.unit(), a) - a).inf_norm() == 0
    assert (multiply(a, alg.unit()) - a).inf_norm() == 0


def test_clifford_square_is_one():
    alg = build_clifford_double(LAT, 1)
    c = alg.generator(0, 1)
    assert (multiply(c, c) - alg.unit()).inf_norm() == 0


def test_parafermion_product_matches_clock_shift_rep():
    p = 3
    alg = build_parafermion_double(p, LAT)
    gens = clock_shift_rep(p, len(LAT.sites))
    rng = np.random.default_rng(11)
    monos = alg.full_basis()
    for _ in range(20):
        m1 = monos[rng.integers(len(monos))]
        m2 = monos[rng.integers(len(monos))]
        e1, e2 = alg.basis_element(m1), alg.basis_element(m2)
        lhs = element_matrix(alg, multiply(e1, e2), gens)
        rhs = element_matrix(alg, e1, gens) @ element_matrix(alg, e2, gens)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_parafermion_out_of_order_phase():
    # c_{l'} c_l with l < l' picks up the conjugate exchange root
    p = 3
    alg = build_parafermion_double(p, LAT)
    q = alg.q
    lo, hi = 0, 1
    lhs = multiply(alg.generator(hi, 1), alg.generator(lo, 1))
    rhs = np.conj(q) * multiply(alg.generator(lo, 1), alg.generator(hi, 1))
    assert (lhs - rhs).inf_norm() < 1e-12


def test_clifford_product_matches_jordan_wigner():
    alg = build_clifford_double(LAT, 1)
    gens = jordan_wigner_clifford(4)
    rng = np.random.default_rng(5)
    monos = alg.full_basis()
    for _ in range(20):
        m1 = monos[rng.integers(len(monos))]
        m2 = monos[rng.integers(len(monos))]
        e1, e2 = alg.basis_element(m1), alg.basis_element(m2)
        lhs = element_matrix(alg, multiply(e1, e2), gens)
        rhs = element_matrix(alg, e1, gens) @ element_matrix(alg, e2, gens)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_mismatched_algebras_rejected():
    a = build_clifford_double(LAT, 1)
    b = build_clifford_double(LAT, 1)
    with pytest.raises(AlgebraMismatchError):
        multiply(a.unit(), b.unit())


@st.composite
def small_elements(draw, alg, count=3):
    monos = alg.full_basis()
    out = []
    for _ in range(count):
        terms = {}
        for _ in range(draw(st.integers(1, 3))):
            m = monos[draw(st.integers(0, len(monos) - 1))]
            re = draw(st.integers(-3, 3))
            im = draw(st.integers(-3, 3))
            terms[m] = terms.get(m, 0) + complex(re, im)
        out.append(Element(alg, terms))
    return out


@settings(max_examples=30, deadline=None)
@given(small_elements(build_parafermion_double(3, mirror_chain(1))))
def test_product_associative(elements):
    a, b, c = elements
    lhs = multiply(multiply(a, b), c)
    rhs = multiply(a, multiply(b, c))
    assert (lhs - rhs).inf_norm() < 1e-10


@settings(max_examples=30, deadline=None)
@given(small_elements(build_parafermion_double(3, mirror_chain(1)), count=2),
       st.integers(-3, 3), st.integers(-3, 3))
def test_reflection_antilinear_multiplicative(elements, re, im):
    a, b = elements
    alpha = complex(re, im)
    lhs = reflect(alpha * a + b)
    rhs = np.conj(alpha) * reflect(a) + reflect(b)
    assert (lhs - rhs).inf_norm() < 1e-10
    lhs2 = reflect(multiply(a, b))
    rhs2 = multiply(reflect(a), reflect(b))
    assert (lhs2 - rhs2).inf_norm() < 1e-10
    assert (reflect(reflect(a)) - a).inf_norm() < 1e-10


def test_reflect_unit_and_generators():
    alg = build_parafermion_double(3, LAT)
    assert (reflect(alg.unit()) - alg.unit()).inf_norm() == 0
    # reflection sends a generator to the inverse power at the mirrored site
    g = alg.generator(2, 1)  # first plus site
    img = reflect(g)
    assert list(img.terms) == [((1, 2),)]  # c^{p-1} at the mirror slot
    assert abs(img.terms[((1, 2),)] - 1) < 1e-15


def test_reflect_inverts_degree():
    alg = build_parafermion_double(3, LAT)
    for s in range(4):
        for a in (1, 2):
            img = reflect(alg.generator(s, a))
            want = (-alg.slots[s].degrees[a]) % 3
            assert all(alg.monomial_degree(m) == want for m in img.terms)


def test_twisted_product_degree_zero_case():
    alg = build_clifford_double(LAT, 1)
    a = reflect(alg.generator(2, 1))  # degree-1 minus element
    b = alg.generator(2, 1)
    # fermionic twist phase: i^{|A|^2} = i
    plain = multiply(a, b)
    tw = twisted_product(a, b)
    assert (tw - 1j * plain).inf_norm() < 1e-15


def test_twisted_product_degree_mismatch_vanishes():
    alg = build_parafermion_double(3, LAT)
    a = reflect(alg.generator(2, 1))  # degree -1
    good = alg.generator(2, 1)  # degree 1: degrees cancel
    assert not twisted_product(a, good).is_zero()
    bad = multiply(alg.generator(2, 1), alg.generator(3, 1))  # degree 2
    assert twisted_product(a, bad).is_zero()


def test_twisted_product_side_checks():
    alg = build_clifford_double(LAT, 1)
    plus = alg.generator(2, 1)
    minus = alg.generator(0, 1)
    with pytest.raises(SideViolationError):
        twisted_product(plus, plus)
    with pytest.raises(SideViolationError):
        twisted_product(minus, minus)


def test_twisted_product_parafermion_oracle():
    # Theta(c) o c = zeta * c^{-1}_{mirror} * c, evaluated in the clock-shift rep
    p = 3
    alg = build_parafermion_double(p, LAT)
    gens = clock_shift_rep(p, 4)
    c = alg.generator(2, 1)
    lhs = element_matrix(alg, twisted_product(reflect(c), c), gens)
    rhs = alg.zeta * np.linalg.matrix_power(gens[1], p - 1) @ gens[2]
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_sharp_clifford_antihomomorphism():
    alg = build_clifford_double(LAT, 1)
    c1, c2 = alg.generator(2, 1), alg.generator(3, 1)
    prod = multiply(c1, c2)
    # (c1 c2)^sharp = c2 c1 = -c1 c2
    assert (sharp(prod) + prod).inf_norm() < 1e-15


def test_sharp_grassmann_unit_gives_volume():
    alg = build_grassmann_double(LAT, 1)
    img = sharp(alg.unit())
    vol_plus = alg.basis_element(tuple((s, 1) for s in alg.strict_plus_slots))
    assert (img - vol_plus).inf_norm() == 0


def test_sharp_parafermion_power():
    alg = build_parafermion_double(3, LAT)
    c = alg.generator(2, 1)
    img = sharp(c)
    assert list(img.terms) == [((2, 2),)]
    # positivity of tau_+(A^sharp A) on random plus elements
    rng = np.random.default_rng(2)
    f_plus = plus_functional(alg)
    for _ in range(10):
        terms = {m: complex(rng.normal(), rng.normal())
                 for m in alg.side_monomials("plus")}
        a = Element(alg, terms)
        val = evaluate(f_plus, multiply(sharp(a), a))
        assert val.real > 0 and abs(val.imag) < 1e-10


def test_sharp_side_violation():
    alg = build_clifford_double(LAT, 1)
    with pytest.raises(SideViolationError):
        sharp(alg.generator(0, 1))


def test_sharp_involutive_for_star_families():
    alg = build_parafermion_double(3, LAT)
    rng = np.random.default_rng(4)
    terms = {m: complex(rng.normal(), rng.normal()) for m in alg.side_monomials("plus")}
    a = Element(alg, terms)
    assert (sharp(sharp(a)) - a).inf_norm() < 1e-12


def test_regular_representation_identity():
    alg = build_clifford_double(LAT, 1)
    L = regular_representation(alg.unit())
    assert np.max(np.abs(L - np.eye(alg.dim))) == 0


def test_regular_representation_single_generator():
    single = ReflectionLattice((-0.5, 0.5), ((-0.5, 0.5), (0.5, -0.5)), frozenset({0.5}))
    alg = build_clifford_double(single, 1)
    c = alg.generator(1, 1)
    L = regular_representation(c)
    # c swaps {1, c} within the plus factor
    assert L.shape == (4, 4)
    unit_idx = alg.monomial_index(())
    c_idx = alg.monomial_index(((1, 1),))
    assert L[c_idx, unit_idx] == 1 and L[unit_idx, c_idx] == 1


def test_regular_representation_homomorphism():
    alg = build_parafermion_double(3, mirror_chain(1))
    rng = np.random.default_rng(9)
    for _ in range(5):
        terms_a = {m: complex(rng.normal(), rng.normal()) for m in alg.full_basis()}
        terms_b = {m: complex(rng.normal(), rng.normal()) for m in alg.full_basis()}
        a, b = Element(alg, terms_a), Element(alg, terms_b)
        La, Lb = regular_representation(a), regular_representation(b)
        Lab = regular_representation(multiply(a, b))
        assert np.max(np.abs(Lab - La @ Lb)) < 1e-12 * max(1, np.max(np.abs(La @ Lb)))


def test_regular_representation_faithful_on_unit():
    for alg in (build_clifford_double(LAT, 1), build_parafermion_double(3, mirror_chain(1))):
        rng = np.random.default_rng(0)
        terms = {m: complex(rng.normal(), rng.normal()) for m in alg.full_basis()}
        a = Element(alg, terms)
        L = regular_representation(a)
        unit_vec = np.zeros(alg.dim)
        unit_vec[alg.monomial_index(())] = 1.0
        assert np.max(np.abs(L @ unit_vec - alg.element_vector(a))) < 1e-12


def test_exp_neg_zero_and_scalar():
    alg = build_clifford_double(LAT, 1)
    assert (exp_neg(Element(alg), 1.0) - alg.unit()).inf_norm() == 0
    h = 0.7 * alg.unit()
    e = exp_neg(h, 2.0)
    assert (e - np.exp(-1.4) * alg.unit()).inf_norm() < 1e-12


def test_exp_neg_spin_resummation():
    lat = mirror_chain(1)
    alg = build_spin_double(lat, 2)
    sz = np.diag([1.0, -1.0])
    h = multiply(site_operator(alg, -0.5, sz), site_operator(alg, 0.5, sz))
    e = exp_neg(h, 1.0)
    expect = np.cosh(1.0) * alg.unit() - np.sinh(1.0) * h
    assert (e - expect).inf_norm() < 1e-12
    # cross-check against the dense matrix exponential
    import scipy.linalg
    dense = scipy.linalg.expm(-alg.to_dense_rep(h))
    assert np.max(np.abs(dense - alg.to_dense_rep(e))) < 1e-12


def test_exp_neg_regular_vs_series_consistency():
    # same Hamiltonian through two independent strategies
    alg = build_clifford_double(LAT, 1)
    rng = np.random.default_rng(13)
    terms = {m: complex(rng.normal(), rng.normal())
             for m in alg.full_basis() if alg.monomial_degree(m) == 0}
    h = Element(alg, terms)
    e_reg = exp_neg(h, 0.8)
    # brute series
    acc = alg.unit()
    term = alg.unit()
    for k in range(1, 30):
        term = multiply(term, h) * (-0.8 / k)
        acc = acc + term
    assert (e_reg - acc).inf_norm() < 1e-9


def test_exp_neg_requires_degree_zero():
    alg = build_clifford_double(LAT, 1)
    with pytest.raises(GradingError):
        exp_neg(alg.generator(2, 1), 1.0)


def test_spin_basis_is_pauli_for_two_levels():
    from rpcheck.doubles import hermitian_matrix_basis
    basis = hermitian_matrix_basis(2)
    pauli_z = np.diag([1.0, -1.0])
    pauli_x = np.array([[0, 1], [1, 0]], dtype=complex)
    assert np.allclose(basis[0], np.eye(2))
    assert np.allclose(basis[1], pauli_z)
    assert np.allclose(basis[2], pauli_x)
    for i in range(4):
        for j in range(4):
            ip = np.trace(basis[i].conj().T @ basis[j]) / 2
            assert abs(ip - (1.0 if i == j else 0.0)) < 1e-12
