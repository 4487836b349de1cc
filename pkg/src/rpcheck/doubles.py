"""Constructors for the built-in reflection-positive double families.

Each builder returns an AlgebraDescriptor whose plus/minus split, reflection,
sharp map and background functional satisfy the double axioms; verify_qdouble
re-checks those axioms numerically on any descriptor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .algebra import (
    IDENTITY_TOL,
    AlgebraDescriptor,
    Element,
    Slot,
    canonical_zeta,
    multiply,
    reflect,
)
from .errors import ConstraintViolationError, ResourceGuardError

_SIDE_RANK = {"-": 0, "0": 1, "+": 2}


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReflectionLattice:
    """Ordered finite site set with an involution and a plus/minus split.

    The zero set (sites fixed by the involution) is plus & minus at once.
    """

    sites: tuple
    theta_map: tuple  # ((site, image), ...) pairs
    plus: frozenset
    coords: tuple | None = None  # ((site, coordinate), ...) optional embedding

    def __post_init__(self):
        tmap = dict(self.theta_map)
        if set(tmap) != set(self.sites):
            raise ConstraintViolationError("involution must be defined on every site")
        for lam in self.sites:
            if tmap[tmap[lam]] != lam:
                raise ConstraintViolationError("site involution does not square to the identity")
        fixed = {lam for lam in self.sites if tmap[lam] == lam}
        minus = {tmap[lam] for lam in self.plus}
        if self.plus | minus != set(self.sites):
            raise ConstraintViolationError("plus set and its image do not cover the lattice")
        if (frozenset(self.plus) & frozenset(minus)) != fixed:
            raise ConstraintViolationError("plus/minus overlap must equal the fixed-point set")

    def theta(self, site):
        return dict(self.theta_map)[site]

    @property
    def minus(self):
        tmap = dict(self.theta_map)
        return frozenset(tmap[lam] for lam in self.plus)

    @property
    def zero(self):
        return frozenset(self.plus) & self.minus

    def coordinate(self, site):
        return dict(self.coords)[site] if self.coords else None

    def is_fixed_point_free(self):
        return not self.zero

    def is_order_reversing(self):
        order = {lam: i for i, lam in enumerate(self.sites)}
        tmap = dict(self.theta_map)
        pairs = [(order[a], order[b]) for a in self.sites for b in self.sites if order[a] < order[b]]
        return all(order[tmap[self.sites[i]]] > order[tmap[self.sites[j]]] for i, j in pairs)


def mirror_chain(sites_per_side: int, include_origin: bool = False) -> ReflectionLattice:
    """1-d chain reflected through the origin.

    Without the origin the sites sit at half-integers +-1/2, ..., so that no
    site lies on the reflection plane; with it, integer coordinates are used
    and the origin is the fixed point.
    """
    if include_origin:
        coords = list(range(-sites_per_side, sites_per_side + 1))
    else:
        coords = [k + 0.5 for k in range(-sites_per_side, sites_per_side)]
    sites = tuple(coords)
    theta = tuple((c, -c) for c in coords)
    plus = frozenset(c for c in coords if c >= 0)
    return ReflectionLattice(sites, theta, plus, tuple((c, c) for c in coords))


# ---------------------------------------------------------------------------
# finite groups (for the gauge family)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Irrep:
    name: str
    dim: int
    matrices: tuple  # (|G|, dim, dim) nested data, one matrix per group element


@dataclass(frozen=True)
class FiniteGroupTable:
    """Multiplication/inverse tables plus unitary irrep matrix tables.

    Element 0 must be the identity.  The irreps must be complete
    (sum of squared dimensions = |G|) and Peter-Weyl orthonormal so that the
    scaled matrix elements form an orthonormal function basis.
    """

    labels: tuple
    mult: tuple  # |G| x |G| nested
    inverse: tuple
    irreps: tuple

    def __post_init__(self):
        n = len(self.labels)
        mult = np.asarray(self.mult, dtype=int)
        inv = np.asarray(self.inverse, dtype=int)
        if mult.shape != (n, n):
            raise ConstraintViolationError("multiplication table has the wrong shape")
        if not (np.all(mult[0, :] == np.arange(n)) and np.all(mult[:, 0] == np.arange(n))):
            raise ConstraintViolationError("element 0 must be the group identity")
        for a in range(n):
            if mult[a, inv[a]] != 0 or mult[inv[a], a] != 0:
                raise ConstraintViolationError("inverse table is inconsistent")
            for b in range(n):
                for c in range(n):
                    if mult[mult[a, b], c] != mult[a, mult[b, c]]:
                        raise ConstraintViolationError("multiplication table is not associative")
        if sum(ir.dim**2 for ir in self.irreps) != n:
            raise ConstraintViolationError(
                "irrep tables are incomplete: sum of squared dimensions must equal |G|"
            )
        basis = self.function_basis()
        gram = basis.conj() @ basis.T / n
        if not np.allclose(gram, np.eye(basis.shape[0]), atol=1e-9):
            raise ConstraintViolationError("irrep matrix elements fail Peter-Weyl orthonormality")
        if self.irreps[0].dim != 1 or not np.allclose(
            np.asarray(self.irreps[0].matrices, dtype=complex).reshape(n), 1.0
        ):
            raise ConstraintViolationError("irrep 0 must be the trivial representation")

    @property
    def order(self):
        return len(self.labels)

    def function_basis(self):
        """Rows: sqrt(dim) * rho(g)_{ab} over g, for all irreps and index pairs."""
        n = self.order
        rows, names = [], []
        for ir in self.irreps:
            mats = np.asarray(ir.matrices, dtype=complex).reshape(n, ir.dim, ir.dim)
            for a in range(ir.dim):
                for b in range(ir.dim):
                    rows.append(np.sqrt(ir.dim) * mats[:, a, b])
                    names.append(f"{ir.name}[{a}{b}]" if ir.dim > 1 else ir.name)
        self_rows = np.array(rows)
        object.__setattr__(self, "_basis_names", tuple(names))
        return self_rows

    def basis_names(self):
        self.function_basis()
        return self._basis_names


def cyclic_group(n: int) -> FiniteGroupTable:
    """Z_n with its character table."""
    mult = tuple(tuple((a + b) % n for b in range(n)) for a in range(n))
    inv = tuple((-a) % n for a in range(n))
    omega = np.exp(2j * np.pi / n)
    irreps = tuple(
        Irrep(
            name=("triv" if k == 0 else f"chi{k}"),
            dim=1,
            matrices=tuple(((omega ** (k * g),),) for g in range(n)),
        )
        for k in range(n)
    )
    return FiniteGroupTable(tuple(str(g) for g in range(n)), mult, inv, irreps)


# ---------------------------------------------------------------------------
# shared construction helpers
# ---------------------------------------------------------------------------

def _theta_matrix_consistent(descriptor):
    """Numeric evidence that the reflection squares to the identity."""
    alg = descriptor
    for s in range(alg.n_slots):
        for a in range(1, alg.slots[s].dim):
            img = reflect(reflect(alg.generator(s, a)))
            want = alg.generator(s, a)
            if (img - want).inf_norm() > 1e-10:
                raise ConstraintViolationError(
                    f"reflection does not square to the identity on {alg.slots[s].labels[a]}"
                )


def _check_rho_matrix(m, name):
    m = np.asarray(m, dtype=complex)
    if np.max(np.abs(m.T @ m - np.eye(m.shape[0]))) > 1e-10:
        raise ConstraintViolationError(f"{name} must be complex orthogonal (M^T M = 1)")
    if np.max(np.abs(m.conj() @ m - np.eye(m.shape[0]))) > 1e-10:
        raise ConstraintViolationError(f"{name} must satisfy conj(M) M = 1 (antilinear square)")
    return m


# ---------------------------------------------------------------------------
# parafermion double
# ---------------------------------------------------------------------------

def build_parafermion_double(p: int, lattice: ReflectionLattice, zeta=None) -> AlgebraDescriptor:
    """CPR algebra on an ordered lattice with order-reversing free involution."""
    if p < 2:
        raise ConstraintViolationError("parafermion order p must be at least 2")
    if not lattice.is_fixed_point_free():
        raise ConstraintViolationError("parafermion lattices must have no fixed sites")
    if not lattice.is_order_reversing():
        raise ConstraintViolationError("parafermion involution must reverse the site order")
    import cmath
    q = cmath.exp(2j * cmath.pi / p)  # the primitive root fixes the family
    zeta = canonical_zeta(p) if zeta is None else complex(zeta)
    if abs(zeta**2 - q) > IDENTITY_TOL:
        raise ConstraintViolationError(
            f"zeta={zeta} is not a square root of the primitive exchange root for p={p}"
        )

    sites = list(lattice.sites)
    site_slot = {lam: i for i, lam in enumerate(sites)}
    slots = []
    for lam in sites:
        side = "+" if lam in lattice.plus else "-"
        labels = tuple("1" if k == 0 else f"c[{lam}]^{k}" for k in range(p))
        slots.append(Slot(f"c[{lam}]", side, p, tuple(range(p)), labels))

    mult = np.zeros((p, p, p), dtype=complex)
    for a in range(p):
        for b in range(p):
            mult[a, b, (a + b) % p] = 1.0
    inv_map = np.zeros((p, p), dtype=complex)
    for a in range(p):
        inv_map[(-a) % p, a] = 1.0

    theta_slot_map = [site_slot[lattice.theta(lam)] for lam in sites]
    theta_matrix = [inv_map for _ in sites]
    star_local = [inv_map for _ in sites]
    tau_local = [np.eye(p, dtype=complex)[0] for _ in sites]

    alg = AlgebraDescriptor(
        family="parafermion", p=p, q=q, zeta=zeta, slots=slots,
        local_mult=[mult] * len(sites), theta_slot_map=theta_slot_map,
        theta_matrix=theta_matrix, sharp_kind="star", star_local=star_local,
        tau_local=tau_local, exp_strategy="regular",
        rep_data={"lattice": lattice, "generator_slots": dict(site_slot)},
        functional_name="tracial",
    )
    _theta_matrix_consistent(alg)
    return alg


# ---------------------------------------------------------------------------
# clifford & grassmann doubles
# ---------------------------------------------------------------------------

def _fermionic_keys(lattice, dim_w, doubled, family):
    """Generator keys (site, copy, index) and their sides.

    Copy 0 holds the W generators, copy 1 the conjugate copy when the site
    space is doubled.  The plus generators are listed in (site position,
    copy, index) order; the minus list mirrors the plus list entry by entry,
    which keeps the reflection volume preserving for the default site map.
    """
    sides = {}
    pos = {lam: i for i, lam in enumerate(lattice.sites)}
    copies = (0, 1) if doubled else (0,)
    for lam in lattice.sites:
        on_plane = lam in lattice.zero
        if on_plane and not doubled:
            raise ConstraintViolationError(
                f"{family}: sites on the reflection plane require the doubled site space"
            )
        for copy in copies:
            for i in range(dim_w):
                if on_plane:
                    sides[(lam, copy, i)] = "+" if copy == 0 else "-"
                else:
                    sides[(lam, copy, i)] = "+" if lam in lattice.plus else "-"

    def mirror(key):
        lam, copy, i = key
        return (lattice.theta(lam), (1 - copy) if doubled else copy, i)

    plus_keys = sorted((k for k, s in sides.items() if s == "+"),
                       key=lambda k: (pos[k[0]], k[1], k[2]))
    minus_keys = [mirror(k) for k in plus_keys]
    if sorted(minus_keys) != sorted(k for k, s in sides.items() if s == "-"):
        raise ConstraintViolationError(f"{family}: plus/minus generator sets are not mirror images")
    return sides, minus_keys + plus_keys


def _build_fermionic(family, lattice, dim_w, rho, doubled, zeta):
    q = -1.0 + 0.0j
    zeta = canonical_zeta(2) if zeta is None else complex(zeta)
    if abs(zeta**2 - q) > IDENTITY_TOL:
        raise ConstraintViolationError(f"zeta={zeta} is not a square root of -1")
    sides, ordered_keys = _fermionic_keys(lattice, dim_w, doubled, family)

    gen_width = 2 * dim_w if doubled else dim_w
    if rho is None:
        rho = np.eye(gen_width, dtype=complex)
        if doubled:
            rho = np.zeros((gen_width, gen_width), dtype=complex)
            rho[:dim_w, dim_w:] = np.eye(dim_w)
            rho[dim_w:, :dim_w] = np.eye(dim_w)
    rho = _check_rho_matrix(rho, f"{family} site reflection")
    if doubled and (np.max(np.abs(rho[:dim_w, :dim_w])) > IDENTITY_TOL
                    or np.max(np.abs(rho[dim_w:, dim_w:])) > IDENTITY_TOL):
        raise ConstraintViolationError(
            f"{family}: the site reflection must interchange the two copies of the site space"
        )
    if family == "grassmann" and doubled:
        det = np.linalg.det(rho[:dim_w, dim_w:].conj())
        if abs(det - 1.0) > 1e-9:
            raise ConstraintViolationError(
                "grassmann: the conjugated site reflection restricted to W must have determinant 1"
            )

    def gen_component(copy, i):
        return copy * dim_w + i if doubled else i

    slots = []
    key_to_slot = {}
    for key in ordered_keys:
        lam, copy, i = key
        tag = "" if (not doubled or copy == 0) else "~"
        name = f"{'psi' if family == 'grassmann' else 'c'}{tag}[{lam},{i}]"
        labels = ("1", name)
        slots.append(Slot(name, sides[key], 2, (0, 1), labels))
        key_to_slot[key] = len(slots) - 1

    d2 = np.zeros((2, 2, 2), dtype=complex)
    d2[0, 0, 0] = d2[0, 1, 1] = d2[1, 0, 1] = 1.0
    if family == "clifford":
        d2[1, 1, 0] = 1.0  # c^2 = 1; grassmann leaves psi^2 = 0
    local_mult = [d2] * len(slots)

    slot_key = {v: k for k, v in key_to_slot.items()}
    theta_elements = []
    theta_slot_map = []
    for s, slot in enumerate(slots):
        (lam, copy, i) = slot_key[s]
        mu = lattice.theta(lam)
        img = {}
        col = rho[:, gen_component(copy, i)]
        for comp in np.nonzero(np.abs(col) > IDENTITY_TOL)[0]:
            tcopy, ti = (comp // dim_w, comp % dim_w) if doubled else (0, comp)
            t = key_to_slot[(mu, int(tcopy), int(ti))]
            img[((t, 1),)] = complex(col[comp])
        theta_elements.append([None, img])
        theta_slot_map.append(next(iter(img))[0][0] if img else s)

    eye2 = np.eye(2, dtype=complex)
    if family == "clifford":
        star_local = [eye2] * len(slots)
        sharp_kind, tau0, exp_strategy, functional = "star", np.array([1.0, 0.0]), "regular", "tracial"
    else:
        star_local = None
        sharp_kind, tau0, exp_strategy, functional = "hodge", np.array([0.0, 1.0]), "series", "berezin"

    alg = AlgebraDescriptor(
        family=family, p=2, q=q, zeta=zeta, slots=slots, local_mult=local_mult,
        theta_slot_map=theta_slot_map, theta_elements=theta_elements,
        sharp_kind=sharp_kind, star_local=star_local,
        tau_local=[tau0.astype(complex)] * len(slots), exp_strategy=exp_strategy,
        rep_data={"lattice": lattice, "generator_slots": dict(key_to_slot), "dim_w": dim_w,
                  "doubled": doubled},
        functional_name=functional,
    )
    _theta_matrix_consistent(alg)
    if family == "grassmann":
        if len(alg.slots) % 2 or len(alg.strict_plus_slots) % 2:
            raise ConstraintViolationError(
                "grassmann: total and plus-side generator counts must be even"
            )
        mu_plus = alg.basis_element(tuple((s, 1) for s in alg.strict_plus_slots))
        mu_minus = alg.basis_element(tuple((s, 1) for s in sorted(set(range(alg.n_slots))
                                                                  - set(alg.strict_plus_slots))))
        if (reflect(mu_plus) - mu_minus).inf_norm() > 1e-10:
            raise ConstraintViolationError(
                "grassmann: the site reflection is not volume preserving"
            )
        volume = alg.basis_element(tuple((s, 1) for s in range(alg.n_slots)))
        if (reflect(volume) - volume).inf_norm() > 1e-10:
            raise ConstraintViolationError(
                "grassmann: the reflection does not preserve the oriented volume"
            )
    return alg


def build_clifford_double(lattice: ReflectionLattice, dim_w: int, rho=None,
                          doubled=None, zeta=None) -> AlgebraDescriptor:
    """Clifford algebra over one real generator family per site.

    Sites on the reflection plane require the doubled site space (two
    orthogonal copies swapped by the reflection).
    """
    if doubled is None:
        doubled = not lattice.is_fixed_point_free()
    return _build_fermionic("clifford", lattice, dim_w, rho, doubled, zeta)


def build_grassmann_double(lattice: ReflectionLattice, dim_w: int, rho=None,
                           doubled=None, zeta=None) -> AlgebraDescriptor:
    """Grassmann algebra with the Berezin integral as background functional."""
    if doubled is None:
        doubled = not lattice.is_fixed_point_free()
    return _build_fermionic("grassmann", lattice, dim_w, rho, doubled, zeta)


# ---------------------------------------------------------------------------
# quantum spin (matrix tensor product) double
# ---------------------------------------------------------------------------

def hermitian_matrix_basis(n: int) -> np.ndarray:
    """Orthonormal basis of M_n under (X, Y) = Tr(X^* Y)/n, element 0 = identity.

    For n = 2 these are the identity and the Pauli matrices.
    """
    mats = [np.eye(n, dtype=complex)]
    for k in range(1, n):
        d = np.zeros((n, n), dtype=complex)
        d[:k, :k] = np.eye(k)
        d[k, k] = -k
        mats.append(np.sqrt(n / (k * (k + 1))) * d)
    for i in range(n):
        for j in range(i + 1, n):
            sym = np.zeros((n, n), dtype=complex)
            sym[i, j] = sym[j, i] = 1.0
            mats.append(np.sqrt(n / 2) * sym)
            asym = np.zeros((n, n), dtype=complex)
            asym[i, j] = 1j
            asym[j, i] = -1j
            mats.append(np.sqrt(n / 2) * asym)
    return np.array(mats)


def build_spin_double(lattice: ReflectionLattice, n: int, R=None) -> AlgebraDescriptor:
    """Tensor product of one M_n factor per site, reflected through conj(R . R^-1).

    The background functional is the normalized tracial state.
    """
    if not lattice.is_fixed_point_free():
        raise ConstraintViolationError(
            "the quantum spin double requires a fixed-point-free site reflection"
        )
    if R is None:
        R = np.eye(n, dtype=complex)
    R = np.asarray(R, dtype=complex)
    if R.shape != (n, n):
        raise ConstraintViolationError(f"R must be {n} x {n}")
    try:
        R_inv = np.linalg.inv(R)
    except np.linalg.LinAlgError as exc:
        raise ConstraintViolationError("R must be invertible") from exc
    rr = R.conj() @ R
    if np.max(np.abs(rr - rr[0, 0] * np.eye(n))) > 1e-10:
        raise ConstraintViolationError(
            "conj(R) R must be scalar for the reflection to square to the identity"
        )

    basis = hermitian_matrix_basis(n)
    d_local = n * n
    mult = np.einsum("cij,aik,bkj->abc", basis.conj(), basis, basis) / n
    refl_images = np.einsum("ij,ajk,kl->ail", R, basis, R_inv).conj()
    theta_block = np.einsum("bij,aij->ba", basis.conj(), refl_images) / n

    order = sorted(range(len(lattice.sites)),
                   key=lambda i: (_SIDE_RANK["+" if lattice.sites[i] in lattice.plus else "-"], i))
    sites = [lattice.sites[i] for i in order]
    site_slot = {lam: i for i, lam in enumerate(sites)}
    slots = []
    for lam in sites:
        side = "+" if lam in lattice.plus else "-"
        labels = tuple("1" if a == 0 else f"B{a}[{lam}]" for a in range(d_local))
        slots.append(Slot(f"M[{lam}]", side, d_local, (0,) * d_local, labels))

    theta_slot_map = [site_slot[lattice.theta(lam)] for lam in sites]
    tau0 = np.zeros(d_local, dtype=complex)
    tau0[0] = 1.0
    alg = AlgebraDescriptor(
        family="spin", p=1, q=1.0 + 0j, zeta=1.0 + 0j, slots=slots,
        local_mult=[mult] * len(sites), theta_slot_map=theta_slot_map,
        theta_matrix=[theta_block] * len(sites), sharp_kind="star",
        star_local=[np.eye(d_local, dtype=complex)] * len(sites),
        tau_local=[tau0] * len(sites), exp_strategy="dense_rep",
        rep_data={"lattice": lattice, "site_slot": site_slot, "site_dim": n,
                  "basis_matrices": [basis] * len(sites), "R": R},
        functional_name="tracial",
    )
    _theta_matrix_consistent(alg)
    return alg


def site_operator(alg: AlgebraDescriptor, site, matrix) -> Element:
    """Expand an n x n matrix at one site of a spin double."""
    if alg.family != "spin":
        raise ConstraintViolationError("site_operator applies to spin doubles")
    s = alg.rep_data["site_slot"][site]
    basis = alg.rep_data["basis_matrices"][s]
    n = alg.rep_data["site_dim"]
    coeffs = np.einsum("aij,ij->a", basis.conj(), np.asarray(matrix, dtype=complex)) / n
    terms = {}
    for a in np.nonzero(np.abs(coeffs) > 1e-14)[0]:
        terms[() if a == 0 else ((s, int(a)),)] = complex(coeffs[a])
    return Element(alg, terms)


# ---------------------------------------------------------------------------
# commutative function doubles: classical bosons and gauge bosons
# ---------------------------------------------------------------------------

def _orthonormal_function_basis(npts, weights, provided=None):
    """Rows: an orthonormal basis of functions, starting with 1, then the
    provided functions (validated orthonormal), completed by Gram-Schmidt."""
    w = np.asarray(weights, dtype=float)
    if abs(w.sum() - 1.0) > 1e-10 or np.any(w <= 0):
        raise ConstraintViolationError("site weights must be a strictly positive probability vector")
    rows = [np.ones(npts, dtype=complex)]
    if provided is not None:
        for k, f in enumerate(np.asarray(provided, dtype=complex)):
            mean = np.sum(w * f)
            if abs(mean) > 1e-9:
                raise ConstraintViolationError(f"field {k} is not centered (mean {mean:.2e})")
            for j, r in enumerate(rows[1:]):
                ip = np.sum(w * r.conj() * f)
                if abs(ip) > 1e-9:
                    raise ConstraintViolationError(f"fields {j} and {k} are not orthogonal")
            nrm = np.sum(w * f.conj() * f)
            if abs(nrm - 1.0) > 1e-9:
                raise ConstraintViolationError(f"field {k} does not have unit covariance")
            rows.append(f)
    for e in range(npts):
        cand = np.zeros(npts, dtype=complex)
        cand[e] = 1.0
        for r in rows:
            cand = cand - np.sum(w * r.conj() * cand) * r
        nrm = np.sqrt(np.real(np.sum(w * cand.conj() * cand)))
        if nrm > 1e-9:
            rows.append(cand / nrm)
        if len(rows) == npts:
            break
    if len(rows) != npts:
        raise ConstraintViolationError("could not complete the site function basis")
    return np.array(rows)


def _function_local_tables(values, weights):
    """(mult, star, tau) for a pointwise function algebra in the given basis."""
    w = np.asarray(weights, dtype=float)
    dual = values.conj() * w[None, :]
    mult = np.einsum("cp,ap,bp->abc", dual, values, values)
    star = np.einsum("bp,ap->ba", dual, values.conj())
    tau = np.einsum("p,ap->a", w, values)
    mult[np.abs(mult) < 1e-13] = 0.0
    star[np.abs(star) < 1e-13] = 0.0
    tau[np.abs(tau) < 1e-13] = 0.0
    return mult, star, tau


def build_classical_double(lattice: ReflectionLattice, points, weights,
                           rho_perm=None, fields=None) -> AlgebraDescriptor:
    """Commutative function algebra over a finite product sample space.

    `points` labels the single-site sample space, `weights` its probability
    measure, `rho_perm` the measure-preserving single-site reflection
    (a permutation of point indices; identity when omitted), and `fields`
    optional centered orthonormal site functions placed right after the
    constant in the local basis.
    """
    npts = len(points)
    w = np.asarray(weights, dtype=float)
    if rho_perm is None:
        rho_perm = np.arange(npts)
    rho_perm = np.asarray(rho_perm, dtype=int)
    if np.any(rho_perm[rho_perm] != np.arange(npts)):
        raise ConstraintViolationError("the site reflection must be an involution of the sample space")
    if np.max(np.abs(w[rho_perm] - w)) > 1e-12:
        raise ConstraintViolationError("the site reflection must preserve the site measure")
    if lattice.zero and np.any(rho_perm != np.arange(npts)):
        raise ConstraintViolationError(
            "sites on the reflection plane require the identity site reflection"
        )

    values = _orthonormal_function_basis(npts, w, fields)
    d_local = npts
    mult, star, tau = _function_local_tables(values, w)
    refl_values = values[:, rho_perm].conj()
    dual = values.conj() * w[None, :]
    theta_block = np.einsum("bp,ap->ba", dual, refl_values)
    theta_block[np.abs(theta_block) < 1e-13] = 0.0

    def side_of(lam):
        if lam in lattice.zero:
            return "0"
        return "+" if lam in lattice.plus else "-"

    order = sorted(range(len(lattice.sites)),
                   key=lambda i: (_SIDE_RANK[side_of(lattice.sites[i])], i))
    sites = [lattice.sites[i] for i in order]
    site_slot = {lam: i for i, lam in enumerate(sites)}
    slots = []
    for lam in sites:
        labels = tuple("1" if a == 0 else f"f{a}[{lam}]" for a in range(d_local))
        slots.append(Slot(f"O[{lam}]", side_of(lam), d_local, (0,) * d_local, labels))
    theta_slot_map = [site_slot[lattice.theta(lam)] for lam in sites]

    alg = AlgebraDescriptor(
        family="classical", p=1, q=1.0 + 0j, zeta=1.0 + 0j, slots=slots,
        local_mult=[mult] * len(sites), theta_slot_map=theta_slot_map,
        theta_matrix=[theta_block] * len(sites), sharp_kind="star",
        star_local=[star] * len(sites), tau_local=[tau] * len(sites),
        exp_strategy="pointwise",
        rep_data={"lattice": lattice, "site_slot": site_slot, "points": tuple(points),
                  "value_matrices": [values] * len(sites), "weights": [w] * len(sites),
                  "n_fields": 0 if fields is None else len(fields)},
        functional_name="product-measure",
    )
    _theta_matrix_consistent(alg)
    return alg


def site_function(alg: AlgebraDescriptor, site, point_values) -> Element:
    """Expand a single-site sample-space function in the local basis."""
    if alg.family not in ("classical", "gauge"):
        raise ConstraintViolationError("site_function applies to function doubles")
    s = alg.rep_data["site_slot"][site] if alg.family == "classical" else alg.rep_data["bond_slot"][site]
    values = alg.rep_data["value_matrices"][s]
    w = alg.rep_data["weights"][s]
    coeffs = np.einsum("p,ap,p->a", w, values.conj(), np.asarray(point_values, dtype=complex))
    terms = {}
    for a in np.nonzero(np.abs(coeffs) > 1e-13)[0]:
        terms[() if a == 0 else ((s, int(a)),)] = complex(coeffs[a])
    return Element(alg, terms)


@dataclass(frozen=True)
class GaugeLattice:
    """Midpoint-refined bond lattice for gauge doubles.

    Coarse sites sit at odd x coordinates so the reflection plane x = 0 passes
    through bond midpoints only.
    """

    sites: tuple          # (x, y) integer coordinates, coarse and midpoints
    coarse: frozenset
    bonds: tuple          # preferred orientations, ((x,y),(x,y)) pairs of length-1 bonds
    plaquettes: tuple     # 4-tuples of coarse corners, counterclockwise

    def theta(self, site):
        return (-site[0], site[1])

    def side_of_site(self, site):
        if site[0] > 0:
            return "+"
        return "-" if site[0] < 0 else "0"

    def side_of_bond(self, bond):
        a, b = bond
        xs = {a[0], b[0]}
        if min(xs) >= 0:
            return "+"
        if max(xs) <= 0:
            return "-"
        raise ConstraintViolationError(
            f"bond {bond} crosses the reflection plane; refine the lattice first"
        )


def refined_gauge_lattice(columns: int = 2, rows: int = 3, periodic_rows: bool = False) -> GaugeLattice:
    """Rectangular coarse lattice (even column count, mirror symmetric) with
    midpoints inserted on every bond; optionally periodic in the row direction."""
    if columns % 2:
        raise ConstraintViolationError("the coarse lattice needs an even number of columns")
    if periodic_rows and rows < 3:
        raise ConstraintViolationError("periodic rows need at least 3 coarse rows")
    xs = [2 * k + 1 for k in range(-(columns // 2), columns // 2)]
    ys = [2 * k for k in range(rows)]
    coarse = [(x, y) for x in xs for y in ys]
    coarse_set = set(coarse)
    span_y = 2 * rows

    def wrap(site):
        x, y = site
        return (x, y % span_y) if periodic_rows else (x, y)

    bonds_coarse = []
    for (x, y) in coarse:
        for dx, dy in ((2, 0), (0, 2)):
            other = wrap((x + dx, y + dy))
            if other in coarse_set and other != (x, y):
                bonds_coarse.append(((x, y), other))
    mids = {}
    fine_bonds = []
    for a, b in bonds_coarse:
        mx = (a[0] + b[0]) // 2 if abs(a[0] - b[0]) <= 2 else 0
        my = (a[1] + b[1]) // 2 if abs(a[1] - b[1]) <= 2 else (max(a[1], b[1]) + 1) % span_y
        mid = (mx, my)
        mids[(a, b)] = mid
        fine_bonds.append((a, mid))
        fine_bonds.append((mid, b))

    plaqs = []
    for (x, y) in coarse:
        corners = [(x, y), wrap((x + 2, y)), wrap((x + 2, y + 2)), wrap((x, y + 2))]
        if all(c in coarse_set for c in corners) and len(set(corners)) == 4:
            plaqs.append(tuple(corners))

    sites = tuple(sorted(set(coarse) | set(mids.values())))
    fine = tuple(sorted({tuple(sorted(b)) for b in fine_bonds}))
    return GaugeLattice(sites, frozenset(coarse), fine, tuple(plaqs))


def build_gauge_double(group: FiniteGroupTable, lattice: GaugeLattice) -> AlgebraDescriptor:
    """Function algebra on G^{|E|} with the Haar average as background.

    One slot per undirected bond; local basis = Peter-Weyl matrix elements of
    the bond variable in its preferred orientation.
    """
    n = group.order
    values = group.function_basis()
    names = group.basis_names()
    w = np.full(n, 1.0 / n)
    mult, star, tau = _function_local_tables(values, w)

    bond_list = list(lattice.bonds)
    order = sorted(range(len(bond_list)),
                   key=lambda i: (_SIDE_RANK[lattice.side_of_bond(bond_list[i])], bond_list[i]))
    bonds = [bond_list[i] for i in order]
    bond_slot = {}
    for i, b in enumerate(bonds):
        bond_slot[frozenset(b)] = i

    mult_t = np.asarray(group.mult, dtype=int)
    inv_t = np.asarray(group.inverse, dtype=int)

    slots, theta_slot_map, theta_mats = [], [], []
    for b in bonds:
        side = lattice.side_of_bond(b)
        labels = tuple("1" if a == 0 else f"U{names[a]}[{b[0]}-{b[1]}]" for a in range(n))
        slots.append(Slot(f"h[{b[0]}-{b[1]}]", side, n, (0,) * n, labels))
    for b in bonds:
        ta, tb = lattice.theta(b[0]), lattice.theta(b[1])
        target = bond_slot[frozenset((ta, tb))]
        theta_slot_map.append(target)
        pref = bonds[target]
        flip = (pref != (ta, tb))
        arg = inv_t if flip else np.arange(n)
        refl_values = values[:, arg].conj()
        dual = values.conj() * w[None, :]
        tm = np.einsum("bp,ap->ba", dual, refl_values)
        tm[np.abs(tm) < 1e-13] = 0.0
        theta_mats.append(tm)

    alg = AlgebraDescriptor(
        family="gauge", p=1, q=1.0 + 0j, zeta=1.0 + 0j, slots=slots,
        local_mult=[mult] * len(bonds), theta_slot_map=theta_slot_map,
        theta_matrix=theta_mats, sharp_kind="star", star_local=[star] * len(bonds),
        tau_local=[tau] * len(bonds), exp_strategy="pointwise",
        rep_data={"lattice": lattice, "group": group, "bond_slot": bond_slot,
                  "orientations": tuple(bonds),
                  "value_matrices": [values] * len(bonds),
                  "weights": [w] * len(bonds)},
        functional_name="haar",
    )
    _theta_matrix_consistent(alg)
    return alg


# ---------------------------------------------------------------------------
# double diagnostics
# ---------------------------------------------------------------------------

@dataclass
class QDoubleReport:
    family: str
    q: complex
    span_rank: int
    span_expected: int
    span_ok: bool
    exchange_dev: float
    exchange_ok: bool
    reflection_dev: float
    reflection_ok: bool
    notes: tuple = ()

    @property
    def passed(self):
        return self.span_ok and self.exchange_ok and self.reflection_ok


def verify_qdouble(alg: AlgebraDescriptor, tol: float = 1e-12) -> QDoubleReport:
    """Check the double axioms: density of the minus*plus span, the
    para-commutation relation on generator pairs, and the reflection laws."""
    notes = []
    if abs(alg.q - 1.0) <= tol:
        notes.append("bosonic exchange (q = 1)")

    minus_monos = alg.side_monomials("minus")
    plus_monos = alg.side_monomials("plus")
    if not alg.zero_slots:
        span_rank = alg.dim if len(minus_monos) * len(plus_monos) >= alg.dim else 0
        # products of disjointly supported monomials are distinct basis elements
    else:
        if alg.dim > 2048:
            raise ResourceGuardError("span check beyond desk scale")
        cols = []
        for m1 in minus_monos:
            e1 = alg.basis_element(m1)
            for m2 in plus_monos:
                cols.append(alg.element_vector(multiply(e1, alg.basis_element(m2))))
        span_rank = linalg.rank(np.array(cols).T, tol=1e-9)
    span_ok = span_rank == alg.dim

    exchange_dev = 0.0
    for s in alg.minus_slots:
        for a in range(1, alg.dims[s]):
            x = alg.generator(s, a)
            dx = alg.slots[s].degrees[a]
            for t in alg.plus_slots:
                if t == s:
                    continue
                for b in range(1, alg.dims[t]):
                    y = alg.generator(t, b)
                    dy = alg.slots[t].degrees[b]
                    lhs = multiply(x, y)
                    rhs = (alg.q ** ((dx * dy) % max(alg.p, 1))) * multiply(y, x)
                    exchange_dev = max(exchange_dev, (lhs - rhs).inf_norm())
    exchange_ok = exchange_dev <= tol

    reflection_dev = 0.0
    unit = alg.unit()
    reflection_dev = max(reflection_dev, (reflect(unit) - unit).inf_norm())
    for s in range(alg.n_slots):
        for a in range(1, alg.dims[s]):
            g = alg.generator(s, a)
            img = reflect(g)
            reflection_dev = max(reflection_dev, (reflect(img) - g).inf_norm())
            want = (-alg.slots[s].degrees[a]) % alg.p
            for mono in img.terms:
                if alg.monomial_degree(mono) != want:
                    reflection_dev = max(reflection_dev, 1.0)
    reflection_ok = reflection_dev <= max(tol, 1e-10)

    return QDoubleReport(
        family=alg.family, q=alg.q, span_rank=span_rank, span_expected=alg.dim,
        span_ok=span_ok, exchange_dev=exchange_dev, exchange_ok=exchange_ok,
        reflection_dev=reflection_dev, reflection_ok=reflection_ok, notes=tuple(notes),
    )
