"""Adapted bases, coupling-constant extraction, PSD tests, and the
cone-compatible splitting of reflection-invariant Hamiltonians."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraDescriptor, Element, multiply, reflect, sharp, twisted_product
from .errors import (
    DecompositionUnavailableError,
    FactorizationError,
    GradingError,
    StrictPositivityError,
)
from .functionals import background, evaluate, plus_functional

PSD_TOL = 1e-9


@dataclass
class PSDVerdict:
    hermitian_dev: float
    min_eig: float
    scale: float
    psd: bool
    eigenvalues: np.ndarray

    def __bool__(self):
        return self.psd


def psd_check(m, tol: float = PSD_TOL) -> PSDVerdict:
    """Hermiticity deviation and eigenvalue floor of a Hermitian candidate.

    PSD means the minimum eigenvalue of the symmetrization stays above
    -tol * max(1, spectral norm).
    """
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return PSDVerdict(0.0, 0.0, 1.0, True, np.zeros(0))
    herm_dev = float(np.max(np.abs(m - m.conj().T)))
    vals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    scale = max(1.0, float(np.max(np.abs(vals))))
    min_eig = float(vals[0])
    return PSDVerdict(herm_dev, min_eig, scale, min_eig >= -tol * scale, vals)


class AdaptedBasis:
    """Homogeneous basis of the plus subalgebra, orthonormal for
    tau_+(A^sharp B), with the unit at a distinguished index."""

    def __init__(self, algebra: AlgebraDescriptor, strict_plus: bool = False,
                 tol: float = 1e-10):
        self.algebra = algebra
        self.strict_plus = strict_plus
        monos = algebra.side_monomials("plus", strict=strict_plus)
        degs = np.array([algebra.monomial_degree(m) for m in monos])
        order = sorted(range(len(monos)), key=lambda i: (int(degs[i]), i))
        self.monomials = [monos[i] for i in order]
        self.degrees = degs[order]
        self.i0 = self.monomials.index(())
        self._monomial_order_is_plain = order == list(range(len(monos)))

        f_plus = plus_functional(algebra)
        raw = [algebra.basis_element(m) for m in self.monomials]
        gram = np.zeros((len(raw), len(raw)), dtype=complex)
        sharps = [sharp(e) for e in raw]
        for i, si in enumerate(sharps):
            for j, ej in enumerate(raw):
                gram[i, j] = evaluate(f_plus, multiply(si, ej))
        if np.max(np.abs(gram - np.eye(len(raw)))) <= tol:
            self.elements = raw
            self.combo = None
        else:
            verdict = psd_check(gram, tol=tol)
            if verdict.min_eig <= tol:
                raise StrictPositivityError(
                    "the plus functional is not strictly positive on this basis "
                    f"(min eigenvalue {verdict.min_eig:.3e})"
                )
            cross = np.abs(gram) * (self.degrees[:, None] != self.degrees[None, :])
            if np.max(cross) > tol:
                raise StrictPositivityError("sharp-Gram matrix mixes degrees")
            L = np.linalg.cholesky(0.5 * (gram + gram.conj().T))
            S = np.linalg.inv(L.conj().T)
            if abs(S[0, 0] - 1.0) > tol:
                raise StrictPositivityError("orthonormalization cannot keep the unit fixed")
            self.combo = S
            self.elements = []
            for i in range(len(raw)):
                acc = Element(algebra)
                for j in range(len(raw)):
                    if S[j, i] != 0:
                        acc = acc + S[j, i] * raw[j]
                self.elements.append(acc)
        # duality-based extraction needs a factorizing background, which fails
        # when plane sites are shared by both half-algebras
        self.extraction_ok = strict_plus or not algebra.zero_slots
        self._cache = {}

    def __len__(self):
        return len(self.monomials)

    @property
    def size(self):
        return len(self.monomials)

    def labels(self):
        return [self.algebra.monomial_label(m) for m in self.monomials]

    def degree_indices(self):
        out = {}
        for i, k in enumerate(self.degrees):
            out.setdefault(int(k), []).append(i)
        return out

    def reflected(self, i):
        key = ("reflected", i)
        if key not in self._cache:
            self._cache[key] = reflect(self.elements[i])
        return self._cache[key]

    def sharp(self, i):
        key = ("sharp", i)
        if key not in self._cache:
            self._cache[key] = sharp(self.elements[i])
        return self._cache[key]

    def reflected_sharp(self, i):
        key = ("reflected_sharp", i)
        if key not in self._cache:
            self._cache[key] = reflect(self.sharp(i))
        return self._cache[key]

    def vectorized_ok(self):
        """The p = 1, plane-free, monomial-basis fast path is available."""
        alg = self.algebra
        return (alg.p == 1 and not alg.zero_slots and self.combo is None
                and not self.strict_plus and alg.theta_matrix is not None
                and self._monomial_order_is_plain)


def build_adapted_basis(double: AlgebraDescriptor, strict_plus: bool = False,
                        tol: float = 1e-10) -> AdaptedBasis:
    """Degree-major orthonormal basis of the plus side (Gram-Schmidt when the
    monomials are not already orthonormal)."""
    return AdaptedBasis(double, strict_plus=strict_plus, tol=tol)


def dual_pair(basis: AdaptedBasis, i: int, j: int):
    """(B_ij, dual B_ij); the dual pairs to the primal basis under the
    background functional.  Zero pair (with a warning) on degree mismatch."""
    alg = basis.algebra
    if basis.degrees[i] != basis.degrees[j]:
        warnings.warn("dual_pair on a degree-mismatched index pair is zero", stacklevel=2)
        return Element(alg), Element(alg)
    b = twisted_product(basis.reflected(i), basis.elements[j])
    bhat = twisted_product(basis.reflected_sharp(i), basis.sharp(j))
    return b, bhat


def basis_pair_element(basis: AdaptedBasis, i: int, j: int) -> Element:
    """B_ij = reflection(C_i) o C_j (zero when degrees mismatch)."""
    alg = basis.algebra
    if basis.degrees[i] != basis.degrees[j]:
        return Element(alg)
    return twisted_product(basis.reflected(i), basis.elements[j])


@dataclass
class CouplingMatrix:
    """Couplings of -H in the reflected-pair basis; entry (i0, i0) is the
    additive constant, row/column i0 the one-sided couplings, and the rest
    the couplings across the reflection plane."""

    matrix: np.ndarray
    basis: AdaptedBasis
    residual: float = 0.0

    @property
    def i0(self):
        return self.basis.i0

    def j0(self) -> np.ndarray:
        keep = [i for i in range(len(self.basis)) if i != self.i0]
        return self.matrix[np.ix_(keep, keep)]

    def j0_labels(self):
        labels = self.basis.labels()
        return [labels[i] for i in range(len(self.basis)) if i != self.i0]

    def j0_degrees(self):
        return np.array([self.basis.degrees[i] for i in range(len(self.basis))
                         if i != self.i0])

    def hermitian_dev(self):
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T))) if self.matrix.size else 0.0


def _coupler_mats(basis: AdaptedBasis, use_sharp: bool):
    """Per plus slot, the (minus-side, plus-side) contraction matrices whose
    columns are the slot components of reflect(sharp(C)) and sharp(C)."""
    alg = basis.algebra
    minus_mats, plus_mats = [], []
    for s in alg.plus_slots:
        t = alg.theta_slot_map[s]
        th = alg.theta_matrix[s]
        if use_sharp:
            st = alg.star_local[s]
            minus_mats.append(th @ st.conj())
            plus_mats.append(st)
        else:
            minus_mats.append(th)
            plus_mats.append(np.eye(alg.dims[s], dtype=complex))
        assert alg.theta_slot_map[t] == s
    return minus_mats, plus_mats


def paired_matrix_from_covector(basis: AdaptedBasis, y: np.ndarray, use_sharp: bool) -> np.ndarray:
    """M[i, j] = sum_m coeffs(reflect(op C_i) * op C_j)[m] y[m] for the
    vectorized p = 1 path, with op = sharp or identity."""
    alg = basis.algebra
    minus_mats, plus_mats = _coupler_mats(basis, use_sharp)
    plus = list(alg.plus_slots)
    by_plus = {s: k for k, s in enumerate(plus)}
    t = y.reshape(tuple(alg.dims))
    # consume axes in slot order; minus axis t pairs with plus slot theta(t)
    result_axis_owner = []
    for axis in range(alg.n_slots):
        if alg.slots[axis].side == "-":
            k = by_plus[alg.theta_slot_map[axis]]
            t = np.tensordot(t, minus_mats[k], axes=([0], [0]))
            result_axis_owner.append(("i", k))
        else:
            k = by_plus[axis]
            t = np.tensordot(t, plus_mats[k], axes=([0], [0]))
            result_axis_owner.append(("j", k))
    perm = []
    for tag in ("i", "j"):
        for k in range(len(plus)):
            perm.append(result_axis_owner.index((tag, k)))
    t = np.transpose(t, perm)
    d_plus = len(basis)
    return np.ascontiguousarray(t).reshape(d_plus, d_plus)


def extract_couplings(h: Element, basis: AdaptedBasis, check_roundtrip: bool = False,
                      tol: float = 1e-10) -> CouplingMatrix:
    """Expansion coefficients J with -H = sum J_ij B_ij, via the dual basis."""
    alg = basis.algebra
    if not basis.extraction_ok:
        raise FactorizationError(
            "coupling extraction needs a factorizing background functional; "
            "rebuild the basis with strict_plus=True for plane-intersecting "
            "classical lattices (sufficient-direction couplings only)"
        )
    if any(alg.monomial_degree(m) for m in h.terms):
        raise GradingError("coupling extraction requires a degree-zero element")
    y = alg.right_pair_covector(h)
    n = len(basis)
    if basis.vectorized_ok():
        J = -paired_matrix_from_covector(basis, y, use_sharp=True)
    else:
        tau = background(alg)
        J = np.zeros((n, n), dtype=complex)
        for i in range(n):
            left = basis.reflected_sharp(i)
            ki = basis.degrees[i]
            phase = alg._zeta_sq_powers[(-int(ki)) % alg.p]
            for j in range(n):
                if basis.degrees[j] != ki:
                    continue
                bhat = phase * multiply(left, basis.sharp(j))
                acc = 0.0 + 0.0j
                for m, c in bhat.terms.items():
                    acc += c * y[alg.monomial_index(m)]
                J[i, j] = -acc
    residual = 0.0
    if check_roundtrip:
        residual = (reconstruct(J, basis) - h).inf_norm()
        if residual > tol * max(1.0, h.inf_norm()):
            warnings.warn(
                f"coupling expansion does not reproduce the element (residual {residual:.2e}); "
                "the element lies outside the span of this basis", stacklevel=2)
    return CouplingMatrix(np.asarray(J), basis, residual)


def reconstruct(j, basis: AdaptedBasis, tol: float = 1e-12) -> Element:
    """The element H with -H = sum J_ij B_ij."""
    alg = basis.algebra
    if isinstance(j, CouplingMatrix):
        j = j.matrix
    j = np.asarray(j, dtype=complex)
    n = len(basis)
    if j.shape != (n, n):
        raise ValueError(f"coupling matrix must be {n} x {n}")
    mism = np.abs(j) * (basis.degrees[:, None] != basis.degrees[None, :])
    if mism.size and np.max(mism) > tol:
        raise GradingError("coupling entries between different degrees violate neutrality")
    acc = Element(alg)
    for i in range(n):
        row = j[i]
        nz = np.nonzero(np.abs(row) > 0)[0]
        if nz.size == 0:
            continue
        left = basis.reflected(i)
        ki = int(basis.degrees[i])
        phase = alg._zeta_sq_powers[(-ki) % alg.p]
        for jj in nz:
            if basis.degrees[jj] != ki:
                continue
            acc = acc + (row[jj] * phase) * multiply(left, basis.elements[jj])
    return -acc


def decompose(h: Element, basis: AdaptedBasis, couplings: CouplingMatrix | None = None,
              tol: float = PSD_TOL):
    """Split H = reflect(H_plus) + H_zero + H_plus with -H_zero in the
    reflection-positive cone; available exactly when the cross-plane coupling
    block is PSD."""
    alg = basis.algebra
    if couplings is None:
        couplings = extract_couplings(h, basis)
    J = couplings.matrix
    herm = couplings.hermitian_dev()
    scale = max(1.0, float(np.max(np.abs(J))) if J.size else 1.0)
    if herm > 1e-8 * scale:
        raise DecompositionUnavailableError(
            f"coupling matrix is not Hermitian (deviation {herm:.2e}); H is not reflection invariant"
        )
    verdict = psd_check(couplings.j0(), tol=tol)
    if not verdict.psd:
        raise DecompositionUnavailableError(
            f"cross-plane couplings have a negative eigenvalue ({verdict.min_eig:.3e}); "
            "no cone-compatible splitting exists"
        )
    i0 = basis.i0
    n = len(basis)
    h_plus = Element(alg) - 0.5 * J[i0, i0] * alg.unit()
    for jj in range(n):
        if jj != i0 and J[i0, jj] != 0:
            h_plus = h_plus - J[i0, jj] * basis.elements[jj]
    inner = J.copy()
    inner[i0, :] = 0.0
    inner[:, i0] = 0.0
    h_zero = reconstruct(inner, basis)
    h_minus = reflect(h_plus)
    return h_minus, h_zero, h_plus


def cone_membership(k: Element, basis: AdaptedBasis, tol: float = PSD_TOL) -> bool:
    """Membership of a degree-zero element in the closed convex hull of the
    reflection-positive cone: PSD of its full pair-basis coefficient matrix."""
    alg = basis.algebra
    if any(alg.monomial_degree(m) for m in k.terms):
        raise GradingError("cone membership applies to degree-zero elements")
    coeffs = extract_couplings(-k, basis)
    residual = (reconstruct(coeffs, basis) - (-k)).inf_norm()
    if residual > 1e-8 * max(1.0, k.inf_norm()):
        return False
    return bool(psd_check(coeffs.matrix, tol=tol).psd)
