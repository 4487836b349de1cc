"""Seeded property battery: structural identities of the doubles, duality,
extraction round-trips, criterion equivalence, and dominance trials.

Shared by the command-line `props` runner and the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraDescriptor, Element, Slot, multiply, reflect, twisted_product
from .couplings import build_adapted_basis, extract_couplings, psd_check, reconstruct
from .doubles import (
    build_clifford_double,
    build_gauge_double,
    build_grassmann_double,
    build_parafermion_double,
    build_spin_double,
    cyclic_group,
    mirror_chain,
    refined_gauge_lattice,
    verify_qdouble,
)
from .functionals import background, check_factorizing, check_reflection_invariant, \
    check_strictly_positive, plus_functional
from .verify import dominance_check, rp_counterexample_witness, verify_rp

EQUIV_BETAS = (0.0,) + tuple(2.0**k for k in range(-4, 3))  # 0, 1/16, ..., 4


@dataclass
class CheckResult:
    family: str
    name: str
    passed: bool
    max_dev: float = 0.0
    count: int = 0
    note: str = ""

    def row(self):
        flag = "pass" if self.passed else "FAIL"
        return f"[{flag}] {self.family:12s} {self.name:28s} dev={self.max_dev:9.2e} n={self.count} {self.note}"


def default_instances():
    """Small doubles of all five families (fast paths for randomized trials)."""
    return {
        "clifford": build_clifford_double(mirror_chain(2), 1),
        "grassmann": build_grassmann_double(mirror_chain(2), 1),
        "parafermion": build_parafermion_double(3, mirror_chain(2)),
        "spin": build_spin_double(mirror_chain(1), 2),
        "gauge": build_gauge_double(cyclic_group(2), refined_gauge_lattice(2, 2)),
    }


def battery_instances():
    """Desk-scale doubles (algebra dimension <= 512) for the structural battery."""
    return {
        "clifford": build_clifford_double(mirror_chain(2), 2),
        "grassmann": build_grassmann_double(mirror_chain(2), 2),
        "parafermion": build_parafermion_double(3, mirror_chain(2)),
        "spin": build_spin_double(mirror_chain(2), 2),
        "gauge": build_gauge_double(cyclic_group(2), refined_gauge_lattice(2, 2)),
    }


def random_homogeneous(alg, rng, degree=None):
    """Random homogeneous plus-side element."""
    monos = alg.side_monomials("plus")
    degs = {}
    for m in monos:
        degs.setdefault(alg.monomial_degree(m), []).append(m)
    if degree is None:
        degree = int(rng.choice(sorted(degs)))
    terms = {m: complex(rng.normal(), rng.normal()) for m in degs[degree]}
    return Element(alg, terms)


def random_degree_zero(alg, rng):
    terms = {m: complex(rng.normal(), rng.normal())
             for m in alg.full_basis() if alg.monomial_degree(m) == 0}
    return Element(alg, terms)


def random_coupling_matrix(basis, rng, psd=False):
    """Random Hermitian degree-compatible coupling matrix with unit spectral
    scale (keeps the exponentials well away from overflow at beta <= 4);
    psd=True makes the cross-plane block positive semidefinite blockwise."""
    n = len(basis)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    j = 0.5 * (a + a.conj().T)
    mism = basis.degrees[:, None] != basis.degrees[None, :]
    j[mism] = 0.0
    if psd:
        i0 = basis.i0
        for k in sorted(set(int(d) for d in basis.degrees)):
            idx = [i for i in range(n) if basis.degrees[i] == k and i != i0]
            if not idx:
                continue
            b = rng.normal(size=(len(idx), len(idx))) + 1j * rng.normal(size=(len(idx), len(idx)))
            j[np.ix_(idx, idx)] = b @ b.conj().T / len(idx)
    norm = np.linalg.norm(j, 2)
    return j / max(1.0, norm)


# ---------------------------------------------------------------------------
# individual check groups
# ---------------------------------------------------------------------------

def structural_checks(family, alg, rng, trials=3, tol=1e-12):
    """Double axioms plus the reflection/twisted-product identities."""
    out = []
    rep = verify_qdouble(alg, tol=tol)
    out.append(CheckResult(family, "qdouble-span", rep.span_ok,
                           0.0, rep.span_expected))
    out.append(CheckResult(family, "qdouble-exchange", rep.exchange_ok,
                           rep.exchange_dev, rep.span_expected))
    out.append(CheckResult(family, "qdouble-reflection", rep.reflection_ok,
                           rep.reflection_dev))

    # reflection is antilinear and multiplicative
    dev = 0.0
    for _ in range(trials):
        a = random_degree_zero(alg, rng)
        b = random_degree_zero(alg, rng)
        alpha = complex(rng.normal(), rng.normal())
        lhs = reflect(alpha * a + b)
        rhs = np.conj(alpha) * reflect(a) + reflect(b)
        dev = max(dev, (lhs - rhs).inf_norm())
        dev = max(dev, (reflect(multiply(a, b)) - multiply(reflect(a), reflect(b))).inf_norm())
        dev = max(dev, (reflect(reflect(a)) - a).inf_norm())
    scaleddev = dev
    out.append(CheckResult(family, "reflection-antilinear", scaleddev <= 1e-9, scaleddev, trials))

    # twisted-product reflection identity on all plus-basis pairs
    basis = build_adapted_basis(alg)
    dev = 0.0
    n = len(basis)
    for i in range(n):
        for j in range(n):
            lhs = reflect(twisted_product(basis.reflected(i), basis.elements[j]))
            rhs = twisted_product(basis.reflected(j), basis.elements[i])
            dev = max(dev, (lhs - rhs).inf_norm())
    out.append(CheckResult(family, "twisted-reflection", dev <= tol, dev, n * n))

    # multiplicativity of the twisted product on matched-degree pairs
    dev = 0.0
    cnt = 0
    degs = sorted(set(int(d) for d in basis.degrees))
    for _ in range(trials):
        for k1 in degs:
            for k2 in degs:
                a1 = random_homogeneous(alg, rng, k1)
                b1 = random_homogeneous(alg, rng, k1)
                a2 = random_homogeneous(alg, rng, k2)
                b2 = random_homogeneous(alg, rng, k2)
                lhs = multiply(twisted_product(reflect(a1), b1),
                               twisted_product(reflect(a2), b2))
                rhs = twisted_product(reflect(multiply(a1, a2)), multiply(b1, b2))
                scale = max(1.0, lhs.inf_norm(), rhs.inf_norm())
                dev = max(dev, (lhs - rhs).inf_norm() / scale)
                cnt += 1
    out.append(CheckResult(family, "twisted-multiplicative", dev <= 1e-9, dev, cnt))

    # background functional structure
    tau = background(alg)
    ok, d1 = check_reflection_invariant(tau)
    out.append(CheckResult(family, "background-RI", ok, d1))
    if not alg.zero_slots:
        rep2 = check_factorizing(tau, plus_functional(alg), tol=1e-12)
        out.append(CheckResult(family, "background-factorizing", rep2.factorizing, rep2.max_dev))
        ok3, mineig, m = check_strictly_positive(alg)
        ident = float(np.max(np.abs(m - np.eye(m.shape[0]))))
        out.append(CheckResult(family, "sharp-gram-identity", ok3 and ident <= 1e-10,
                               ident, m.shape[0]))
    return out


def duality_checks(family, alg, tol=1e-12):
    """Exhaustive pairing of the dual basis against the primal basis."""
    from .couplings import basis_pair_element, dual_pair

    basis = build_adapted_basis(alg)
    tau = background(alg)
    n = len(basis)
    dev = 0.0
    cnt = 0
    for i in range(n):
        for j in range(n):
            if basis.degrees[i] != basis.degrees[j]:
                continue
            _, bhat = dual_pair(basis, i, j)
            for ii in range(n):
                for jj in range(n):
                    if basis.degrees[ii] != basis.degrees[jj]:
                        continue
                    val = tau(multiply(bhat, basis_pair_element(basis, ii, jj)))
                    want = 1.0 if (i == ii and j == jj) else 0.0
                    dev = max(dev, abs(val - want))
                    cnt += 1
    return [CheckResult(family, "duality", dev <= tol, dev, cnt)]


def roundtrip_checks(family, alg, rng, trials=10, tol=1e-10):
    basis = build_adapted_basis(alg)
    dev = 0.0
    for _ in range(trials):
        h = random_degree_zero(alg, rng)
        j = extract_couplings(h, basis)
        dev = max(dev, (reconstruct(j, basis) - h).inf_norm())
    return [CheckResult(family, "extract-roundtrip", dev <= tol, dev, trials)]


def equivalence_checks(family, alg, rng, trials=20, betas=EQUIV_BETAS,
                       tol=1e-9, neg_floor=1e-6):
    """PSD cross-plane couplings <-> PSD Gram blocks for all tested betas;
    indefinite couplings must yield a witness with a negative form value."""
    basis = build_adapted_basis(alg)
    failures = 0
    psd_count = indef_count = skipped = 0
    worst = 0.0
    for t in range(trials):
        j = random_coupling_matrix(basis, rng, psd=(t % 2 == 0))
        h = reconstruct(j, basis)
        verdict = psd_check(j[np.ix_([i for i in range(len(basis)) if i != basis.i0],
                                     [i for i in range(len(basis)) if i != basis.i0])],
                            tol=tol)
        if verdict.psd:
            psd_count += 1
            res = verify_rp(alg, h, betas=betas, tol=tol, basis=basis, scan_witness=False)
            ok = res.rp_all_beta
            for e in res.entries:
                for (_, mineig, _, _) in e.blocks:
                    worst = min(worst, mineig)
            if not ok:
                failures += 1
        elif verdict.min_eig < -neg_floor:
            indef_count += 1
            w = rp_counterexample_witness(alg, h, basis, tol=tol)
            if w is None or not w.found or w.form_value >= -1e-9:
                failures += 1
        else:
            skipped += 1
    note = f"psd={psd_count} indef={indef_count} borderline={skipped}"
    return [CheckResult(family, "criterion-equivalence", failures == 0,
                        abs(min(worst, 0.0)), trials, note)]


def dominance_checks(family, alg, rng, trials=10, tol=1e-9):
    basis = build_adapted_basis(alg)
    failures = 0
    worst = 0.0
    for _ in range(trials):
        acc = Element(alg)
        for _ in range(2):
            a = random_homogeneous(alg, rng)
            acc = acc + float(rng.uniform(0.2, 1.0)) * twisted_product(reflect(a), a)
        if acc.inf_norm() > 1.0:
            acc = (1.0 / acc.inf_norm()) * acc
        h = -acc
        rep = dominance_check(alg, h, tol=tol, basis=basis)
        if not rep.applicable or not rep.dominated:
            failures += 1
        if rep.min_eig is not None:
            worst = min(worst, rep.min_eig)
    return [CheckResult(family, "dominance", failures == 0, abs(min(worst, 0.0)), trials)]


def negative_control_check():
    """A deliberately mis-sided parafermion pair must fail the exchange check."""
    p = 3
    import cmath
    zeta = cmath.exp(4j * np.pi / 3)
    q = zeta**2
    mult = np.zeros((p, p, p), dtype=complex)
    for a in range(p):
        for b in range(p):
            mult[a, b, (a + b) % p] = 1.0
    inv_map = np.zeros((p, p), dtype=complex)
    for a in range(p):
        inv_map[(-a) % p, a] = 1.0
    labels = tuple("1" if k == 0 else f"c^{k}" for k in range(p))
    # plus slot listed before the minus slot: the exchange phase comes out
    # inverted, which is exactly the corruption the diagnostic must catch
    slots = [Slot("c[a]", "+", p, tuple(range(p)), labels),
             Slot("c[b]", "-", p, tuple(range(p)), labels)]
    alg = AlgebraDescriptor(
        family="parafermion", p=p, q=q, zeta=zeta, slots=slots,
        local_mult=[mult, mult], theta_slot_map=[1, 0],
        theta_matrix=[inv_map, inv_map], sharp_kind="star",
        star_local=[inv_map, inv_map],
        tau_local=[np.eye(p, dtype=complex)[0]] * 2, exp_strategy="regular",
    )
    rep = verify_qdouble(alg)
    detected = not rep.exchange_ok
    return [CheckResult("control", "corrupted-exchange-detected", detected,
                        rep.exchange_dev, 1, "expected failure caught" if detected else "")]


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------

def run_props(seed: int = 0, trials: int = 20):
    """Full property battery; returns (results list, summary dict)."""
    rng = np.random.default_rng(seed)
    results = []
    small = default_instances()
    for family, alg in battery_instances().items():
        results += structural_checks(family, alg, rng, trials=min(3, trials))
    for family in ("clifford", "parafermion", "grassmann"):
        results += duality_checks(family, small[family])
    for family, alg in small.items():
        results += roundtrip_checks(family, alg, rng, trials=min(10, trials))
        results += equivalence_checks(family, alg, rng, trials=trials)
        results += dominance_checks(family, alg, rng, trials=min(10, trials))
    results += negative_control_check()

    families = {}
    for r in results:
        fam = families.setdefault(r.family, {"checks": 0, "failed": 0, "trials": 0})
        fam["checks"] += 1
        fam["trials"] += r.count
        if not r.passed:
            fam["failed"] += 1
    summary = {
        "seed": seed,
        "trials": trials,
        "families": families,
        "failures": [r.family + "/" + r.name for r in results if not r.passed],
        "all_pass": all(r.passed for r in results),
    }
    return results, summary
