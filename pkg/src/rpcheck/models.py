"""Named Hamiltonian builders for the worked lattice families."""
from __future__ import annotations

import numpy as np

from . import linalg
from .algebra import Element, multiply, reflect
from .doubles import (
    FiniteGroupTable,
    GaugeLattice,
    ReflectionLattice,
    build_classical_double,
    build_clifford_double,
    build_gauge_double,
    build_grassmann_double,
    build_parafermion_double,
    build_spin_double,
    mirror_chain,
    refined_gauge_lattice,
    site_function,
    site_operator,
)
from .errors import ConstraintViolationError, GradingError, InvalidModelError, ResourceGuardError


def _require_reflection_invariant(h: Element, what: str, tol: float = 1e-10):
    dev = (reflect(h) - h).inf_norm()
    if dev > tol * max(1.0, h.inf_norm()):
        raise ConstraintViolationError(f"{what} is not reflection invariant (deviation {dev:.2e})")


# ---------------------------------------------------------------------------
# quantum spins
# ---------------------------------------------------------------------------

def spin_matrices(s: float):
    """Hermitian spin matrices (Sx, Sy, Sz) in the real highest-weight basis,
    ordered by descending weight."""
    twos = int(round(2 * s))
    if abs(2 * s - twos) > 1e-12 or twos < 1:
        raise InvalidModelError(f"field 'spin': {s} is not a positive half-integer")
    n = twos + 1
    m = s - np.arange(n)
    raise_amp = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    sp = np.zeros((n, n), dtype=complex)
    sp[np.arange(n - 1), np.arange(1, n)] = raise_amp
    sm = sp.T.conj()
    sx = 0.5 * (sp + sm)
    sy = -0.5j * (sp - sm)
    sz = np.diag(m).astype(complex)
    return sx, sy, sz


def heisenberg_model(sites_per_side: int, spin: float, J: float, v: float):
    """Long-range Heisenberg chain: -H = J sum_{l != l'} |l - l'|^{-v} S_l . S_l'.

    The site reflection conjugates by a 180-degree rotation about the y axis,
    which sends every spin component S^a to -S^a at the mirrored site.
    """
    if sites_per_side > 3:
        raise ResourceGuardError("heisenberg chains beyond 3 sites per side exceed desk scale")
    if v < 0:
        raise InvalidModelError(f"field 'v': decay exponent must be nonnegative, got {v}")
    sx, sy, sz = spin_matrices(spin)
    n = sx.shape[0]
    if n > 4:
        raise ResourceGuardError("spin larger than 3/2 exceeds desk scale")
    R = linalg.mat_exp(1j * np.pi * sy)
    lattice = mirror_chain(sites_per_side)
    double = build_spin_double(lattice, n, R)
    ops = {lam: [site_operator(double, lam, sa) for sa in (sx, sy, sz)]
           for lam in lattice.sites}
    h = Element(double)
    for lam in lattice.sites:
        for mu in lattice.sites:
            if lam == mu:
                continue
            w = J * abs(lam - mu) ** (-v)
            for a in range(3):
                h = h - w * multiply(ops[lam][a], ops[mu][a])
    _require_reflection_invariant(h, "heisenberg hamiltonian")
    return double, h


# ---------------------------------------------------------------------------
# classical bosons
# ---------------------------------------------------------------------------

def _two_site_element(alg, lam, mu, table):
    """Expand a two-site sample-space function h(w_lam, w_mu) as an element."""
    s1 = alg.rep_data["site_slot"][lam]
    s2 = alg.rep_data["site_slot"][mu]
    v1 = alg.rep_data["value_matrices"][s1]
    w1 = alg.rep_data["weights"][s1]
    v2 = alg.rep_data["value_matrices"][s2]
    w2 = alg.rep_data["weights"][s2]
    table = np.asarray(table, dtype=complex)
    coeffs = np.einsum("p,ap,q,bq,pq->ab", w1, v1.conj(), w2, v2.conj(), table)
    terms = {}
    for a in range(coeffs.shape[0]):
        for b in range(coeffs.shape[1]):
            c = coeffs[a, b]
            if abs(c) < 1e-14:
                continue
            mono = tuple(x for x in ((s1, a), (s2, b)) if x[1] != 0)
            terms[tuple(sorted(mono))] = terms.get(tuple(sorted(mono)), 0.0) + c
    return Element(alg, terms)


def long_range_pair_model(lattice: ReflectionLattice, points, weights, fields,
                          couplings, signs=None, potentials=None, rho_perm=None):
    """Classical pair-interaction model -H = sum J^{ab}_{lm} phi^a_l phi^b_m + sum V_l.

    `fields` are centered, orthonormal site functions (rows of point values);
    `couplings` maps ordered site pairs to k x k coefficient matrices;
    `signs` are the field parities under the site reflection (validated).
    """
    fields = np.asarray(fields, dtype=complex)
    k = fields.shape[0]
    double = build_classical_double(lattice, points, weights, rho_perm=rho_perm,
                                    fields=fields)
    if signs is not None and rho_perm is not None:
        perm = np.asarray(rho_perm, dtype=int)
        for a in range(k):
            dev = np.max(np.abs(fields[a][perm] - signs[a] * fields[a]))
            if dev > 1e-10:
                raise InvalidModelError(
                    f"field 'signs': phi^{a} does not transform with parity {signs[a]}"
                )
    h = Element(double)
    for (lam, mu), mat in couplings.items():
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (k, k):
            raise InvalidModelError(f"field 'couplings': matrix for {(lam, mu)} must be {k} x {k}")
        s1 = double.rep_data["site_slot"][lam]
        s2 = double.rep_data["site_slot"][mu]
        for a in range(k):
            for b in range(k):
                if mat[a, b] == 0:
                    continue
                term = multiply(double.generator(s1, a + 1), double.generator(s2, b + 1))
                h = h - mat[a, b] * term
    if potentials:
        for lam, vals in potentials.items():
            h = h - site_function(double, lam, vals)
    _require_reflection_invariant(h, "pair-interaction hamiltonian")
    return double, h


def nearest_neighbor_classical(lattice: ReflectionLattice, points, weights,
                               bonds, site_potentials=None):
    """Nearest-neighbor classical model with the explicit half-sided splitting.

    `bonds` maps ordered nearest-neighbor pairs to |Omega| x |Omega| value
    tables; the collection must be reflection invariant.  When the lattice
    meets the reflection plane, the returned split (H = reflect(H_plus) +
    H_plus) uses weight 1/2 for bonds and sites lying inside the plane.
    """
    site_potentials = site_potentials or {}
    double = build_classical_double(lattice, points, weights)
    coord = dict(lattice.coords) if lattice.coords else None

    def is_nn(lam, mu):
        if coord is None:
            return True
        da = np.atleast_1d(np.asarray(coord[lam], dtype=float) - np.asarray(coord[mu], dtype=float))
        return abs(np.linalg.norm(da) - 1.0) < 1e-9

    tmap = dict(lattice.theta_map)
    for (lam, mu), table in bonds.items():
        if not is_nn(lam, mu):
            raise InvalidModelError(f"field 'bonds': {(lam, mu)} is not a nearest-neighbor pair")
        mirrored = (tmap[lam], tmap[mu])
        other = bonds.get(mirrored)
        if other is None or np.max(np.abs(np.conj(np.asarray(table)) - np.asarray(other))) > 1e-10:
            raise InvalidModelError(
                f"field 'bonds': mirror bond of {(lam, mu)} missing or not conjugate-symmetric"
            )
    for lam, vals in site_potentials.items():
        other = site_potentials.get(tmap[lam])
        if other is None or np.max(np.abs(np.conj(np.asarray(vals)) - np.asarray(other))) > 1e-10:
            raise InvalidModelError(f"field 'site_potentials': site {lam} breaks reflection invariance")

    h = Element(double)
    for (lam, mu), table in bonds.items():
        h = h - _two_site_element(double, lam, mu, table)
    for lam, vals in site_potentials.items():
        h = h - site_function(double, lam, vals)
    _require_reflection_invariant(h, "nearest-neighbor hamiltonian")

    split = None
    if lattice.zero:
        zero = lattice.zero
        plus = lattice.plus
        h_plus = Element(double)
        for (lam, mu), table in bonds.items():
            if lam in plus and mu in plus:
                eps = 0.5 if (lam in zero and mu in zero) else 1.0
                h_plus = h_plus - eps * _two_site_element(double, lam, mu, table)
        for lam, vals in site_potentials.items():
            if lam in plus:
                eps = 0.5 if lam in zero else 1.0
                h_plus = h_plus - eps * site_function(double, lam, vals)
        h_minus = reflect(h_plus)
        if (h_minus + h_plus - h).inf_norm() > 1e-10 * max(1.0, h.inf_norm()):
            raise ConstraintViolationError("half-sided splitting failed to reproduce H")
        split = (h_minus, h_plus)
    return double, h, split


# ---------------------------------------------------------------------------
# parafermion chains
# ---------------------------------------------------------------------------

def parafermion_chain(p: int, sites_per_side: int, coupling, zeta=None):
    """Parafermion chain assembled from a coupling matrix over the adapted basis."""
    from .couplings import build_adapted_basis, reconstruct

    if sites_per_side > 3 or p > 5:
        raise ResourceGuardError("parafermion chain exceeds desk scale")
    lattice = mirror_chain(sites_per_side)
    double = build_parafermion_double(p, lattice, zeta=zeta)
    basis = build_adapted_basis(double)
    coupling = np.asarray(coupling, dtype=complex)
    if coupling.shape != (len(basis), len(basis)):
        raise InvalidModelError(
            f"field 'coupling': expected a {len(basis)} x {len(basis)} matrix over the plus basis"
        )
    dev = np.max(np.abs(coupling - coupling.conj().T)) if coupling.size else 0.0
    if dev > 1e-10 * max(1.0, float(np.max(np.abs(coupling)))):
        raise InvalidModelError(f"field 'coupling': matrix must be Hermitian (deviation {dev:.2e})")
    h = reconstruct(coupling, basis)
    _require_reflection_invariant(h, "parafermion hamiltonian")
    return double, h, basis


# ---------------------------------------------------------------------------
# lattice gauge bosons
# ---------------------------------------------------------------------------

def _bond_digits(alg, slot):
    return alg.digit_arrays()[slot]


def _holonomy_values(alg, group, path):
    """Group element of the composed path per configuration (vectorized)."""
    mult = np.asarray(group.mult, dtype=int)
    inv = np.asarray(group.inverse, dtype=int)
    bond_slot = alg.rep_data["bond_slot"]
    orientations = alg.rep_data["orientations"]
    g = np.zeros(alg.dim, dtype=int)  # identity everywhere
    for a, b in path:
        s = bond_slot[frozenset((a, b))]
        digits = _bond_digits(alg, s)
        if orientations[s] != (a, b):
            digits = inv[digits]
        g = mult[g, digits]
    return g


def _plaquette_path(lattice: GaugeLattice, corners):
    """Refined 8-step path around a coarse plaquette."""
    adjacency = {}
    for a, b in lattice.bonds:
        adjacency.setdefault(a, set()).add(b)
        adjacency.setdefault(b, set()).add(a)

    def mid_between(a, b):
        cands = adjacency[a] & adjacency[b]
        mids = [m for m in cands if m not in lattice.coarse]
        if len(mids) != 1:
            raise ConstraintViolationError(f"no unique midpoint between {a} and {b}")
        return mids[0]

    path = []
    for t in range(4):
        a, b = corners[t], corners[(t + 1) % 4]
        m = mid_between(a, b)
        path.append((a, m))
        path.append((m, b))
    return path


def wilson_action(group: FiniteGroupTable, extents=(2, 3), irrep_index: int = 1,
                  g0: float = 1.0, periodic_rows: bool = False):
    """Wilson plaquette action on a midpoint-refined lattice.

    Returns the gauge double and the Boltzmann generator H = -S / (2 g0^2),
    where S sums the plaquette holonomy traces over both orientations (so S
    has real coefficients).  The weight e^{-H} then favors aligned
    plaquettes, which is the reflection-positive orientation of the Wilson
    measure; the expectation at beta = 1 is the Wilson expectation.
    """
    if group.order > 4:
        raise ResourceGuardError("gauge groups beyond order 4 exceed desk scale")
    if g0 <= 0:
        raise InvalidModelError(f"field 'g0': must be positive, got {g0}")
    if not 1 <= irrep_index < len(group.irreps):
        raise InvalidModelError(f"field 'irrep_index': no nontrivial irrep {irrep_index}")
    lattice = refined_gauge_lattice(*extents, periodic_rows=periodic_rows)
    if len(lattice.plaquettes) > 4:
        raise ResourceGuardError("more than 4 plaquettes exceeds desk scale")
    double = build_gauge_double(group, lattice)

    ir = group.irreps[irrep_index]
    mats = np.asarray(ir.matrices, dtype=complex).reshape(group.order, ir.dim, ir.dim)
    char = np.trace(mats, axis1=1, axis2=2)

    values = np.zeros(double.dim, dtype=complex)
    for corners in lattice.plaquettes:
        path = _plaquette_path(lattice, corners)
        hol = _holonomy_values(double, group, path)
        values += char[hol]
        rev = [(b, a) for (a, b) in reversed(path)]
        hol_rev = _holonomy_values(double, group, rev)
        values += char[hol_rev]
    action = double.from_dense_rep(values)
    imag = max((abs(c.imag) for c in action.terms.values()), default=0.0)
    if imag > 1e-10:
        raise ConstraintViolationError("wilson action has non-real coefficients")
    _require_reflection_invariant(action, "wilson action")
    h = (-0.5 / g0**2) * action
    return double, h


# ---------------------------------------------------------------------------
# fermion hamiltonians
# ---------------------------------------------------------------------------

def fermion_hamiltonian(lattice: ReflectionLattice, quadratic=None, quartic=None,
                        family: str = "clifford", dim_w: int = 1, rho=None, zeta=None):
    """Quadratic-plus-quartic fermionic H from generator coefficient tables.

    Keys are tuples of generator labels (site, index) or (site, copy, index);
    every term must contain an even number of generators.
    """
    if family == "clifford":
        double = build_clifford_double(lattice, dim_w, rho=rho, zeta=zeta)
    elif family == "grassmann":
        double = build_grassmann_double(lattice, dim_w, rho=rho, zeta=zeta)
    else:
        raise InvalidModelError(f"field 'family': unknown fermionic family {family!r}")
    gen_slots = double.rep_data["generator_slots"]

    def gen(key):
        if len(key) == 2:
            key = (key[0], 0, key[1])
        if key not in gen_slots:
            raise InvalidModelError(f"unknown generator {key}")
        return double.generator(gen_slots[key], 1)

    h = Element(double)
    for table, arity in ((quadratic or {}, 2), (quartic or {}, 4)):
        for key, coeff in table.items():
            if len(key) != arity:
                raise GradingError(
                    f"term {key} has {len(key)} generators; expected {arity}"
                )
            term = double.unit()
            for gk in key:
                term = multiply(term, gen(gk))
            h = h + complex(coeff) * term
    if any(double.monomial_degree(m) for m in h.terms):
        raise GradingError("fermion hamiltonian terms must have even total degree")
    _require_reflection_invariant(h, "fermion hamiltonian")
    return double, h
