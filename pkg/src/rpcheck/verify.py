"""Direct reflection-positivity testing: Gram blocks of the twisted form,
per-beta verdicts, counterexample witnesses, dominance, and the quantum
Hilbert space of a reflection-positive functional."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraDescriptor, Element, multiply, reflect
from .couplings import (
    PSD_TOL,
    AdaptedBasis,
    CouplingMatrix,
    build_adapted_basis,
    cone_membership,
    extract_couplings,
    paired_matrix_from_covector,
    psd_check,
)
from .errors import GradingError, NumericOverflowError, RPCheckError
from .functionals import Functional, background, boltzmann

WITNESS_BETA_GRID = tuple(2.0**k for k in range(-10, 3))


@dataclass
class GramBlocks:
    """Per-degree Hermitian-candidate Gram matrices of the twisted form."""

    beta: float | None
    zeta: complex
    degrees: list
    index_lists: dict
    blocks: dict
    cross_degree_dev: float
    herm_devs: dict
    basis: AdaptedBasis

    def min_eigs(self):
        out = {}
        for k, block in self.blocks.items():
            vals = np.linalg.eigvalsh(0.5 * (block + block.conj().T))
            out[k] = float(vals[0]) if vals.size else 0.0
        return out

    def psd_verdicts(self, tol=PSD_TOL):
        return {k: psd_check(block, tol=tol) for k, block in self.blocks.items()}


def gram_matrix(f: Functional, basis: AdaptedBasis, side: str = "plus") -> GramBlocks:
    """Assemble the sesquilinear-form Gram blocks of `f` over the basis.

    side='minus' evaluates the companion form on the reflected monomials,
    which uses the conjugate twist root.
    """
    alg = basis.algebra
    v = f.covector()
    if side == "plus":
        elements = basis.elements
        degrees = basis.degrees
        zeta = alg.zeta
        if basis.vectorized_ok() and f.kind in ("background", "boltzmann", "covector"):
            raw = paired_matrix_from_covector(basis, v, use_sharp=False)
        else:
            raw = _gram_loop(alg, [basis.reflected(i) for i in range(len(basis))],
                             elements, v)
    elif side == "minus":
        monos = alg.side_monomials("minus")
        elements = [alg.basis_element(m) for m in monos]
        degrees = np.array([alg.monomial_degree(m) for m in monos])
        zeta = np.conj(alg.zeta)
        raw = _gram_loop(alg, [reflect(e) for e in elements], elements, v)
    else:
        raise ValueError("side must be 'plus' or 'minus'")

    cross = np.abs(raw) * (degrees[:, None] != degrees[None, :])
    cross_dev = float(np.max(cross)) if cross.size else 0.0
    index_lists, blocks, herm_devs = {}, {}, {}
    p = alg.p
    for k in sorted({int(d) for d in degrees}):
        idx = [i for i, d in enumerate(degrees) if d == k]
        phase = zeta ** ((k * k) % (p * p))
        block = phase * raw[np.ix_(idx, idx)]
        index_lists[k] = idx
        blocks[k] = block
        herm_devs[k] = float(np.max(np.abs(block - block.conj().T))) if block.size else 0.0
    beta = f.beta if f.kind == "boltzmann" else (0.0 if f.kind == "background" else None)
    return GramBlocks(beta, alg.zeta if side == "plus" else zeta, sorted(blocks),
                      index_lists, blocks, cross_dev, herm_devs, basis)


def _gram_loop(alg, reflected, elements, v):
    n = len(elements)
    raw = np.zeros((n, n), dtype=complex)
    for i in range(n):
        ri = reflected[i]
        for j in range(n):
            x = multiply(ri, elements[j])
            acc = 0.0 + 0.0j
            for m, c in x.terms.items():
                acc += c * v[alg.monomial_index(m)]
            raw[i, j] = acc
    return raw


@dataclass
class Witness:
    """Homogeneous plus-side element whose form value goes negative."""

    element: Element
    coefficients: np.ndarray
    indices: list
    degree: int
    beta_star: float | None
    form_value: float | None
    j0_min_eig: float
    grid: tuple

    @property
    def found(self):
        return self.beta_star is not None


def form_value(double: AlgebraDescriptor, f: Functional, a: Element) -> complex:
    """<A, A> under the twisted sesquilinear form of the functional."""
    k = a.degree()
    phase = double.zeta ** ((k * k) % (double.p * double.p))
    x = multiply(reflect(a), a)
    v = f.covector()
    acc = 0.0 + 0.0j
    for m, c in x.terms.items():
        acc += c * v[double.monomial_index(m)]
    return phase * acc


def rp_counterexample_witness(double: AlgebraDescriptor, h: Element,
                              basis: AdaptedBasis | None = None,
                              couplings: CouplingMatrix | None = None,
                              tol: float = PSD_TOL,
                              grid=WITNESS_BETA_GRID) -> Witness | None:
    """Build a witness from a most-negative eigenvector of the cross-plane
    coupling block and scan a geometric beta grid for a negative form value.

    Returns None when the cross-plane block is PSD.
    """
    if basis is None:
        basis = build_adapted_basis(double)
    if couplings is None:
        couplings = extract_couplings(h, basis)
    j0 = couplings.j0()
    verdict = psd_check(j0, tol=tol)
    if verdict.psd:
        return None

    keep = [i for i in range(len(basis)) if i != basis.i0]
    degs = np.array([basis.degrees[i] for i in keep])
    best = None
    for k in sorted(set(int(d) for d in degs)):
        idx = [t for t, d in enumerate(degs) if d == k]
        block = j0[np.ix_(idx, idx)]
        vals, vecs = np.linalg.eigh(0.5 * (block + block.conj().T))
        if best is None or vals[0] < best[0]:
            best = (float(vals[0]), k, [keep[t] for t in idx], vecs[:, 0])
    min_eig, degree, indices, chi = best

    a = Element(double)
    for t, i in enumerate(indices):
        if chi[t] != 0:
            a = a + chi[t] * basis.sharp(i)
    tau = background(double)
    beta_star = None
    value = None
    for beta in grid:
        try:
            val = form_value(double, boltzmann(tau, h, beta), a)
        except NumericOverflowError:
            break
        if val.real < -tol:
            beta_star, value = float(beta), float(val.real)
            break
    return Witness(a, chi, indices, degree, beta_star, value, min_eig, tuple(grid))


@dataclass
class BetaEntry:
    beta: float
    blocks: list          # (degree, min_eig, psd, herm_dev)
    psd_all: bool
    cross_degree_dev: float
    error: str | None = None


@dataclass
class RPVerdict:
    """Joint verdict of the Gram route and the coupling-matrix route."""

    model: str
    zeta: complex
    tol: float
    betas: list
    entries: list
    rp_all_beta: bool
    coupling_available: bool
    coupling_psd: bool | None
    coupling_min_eig: float | None
    coupling_herm_dev: float | None
    agreement: bool | None
    witness: Witness | None
    status: str  # 'rp', 'not-rp', 'inconclusive-scan', 'error'

    @property
    def exit_code(self):
        return {"rp": 0, "not-rp": 2, "inconclusive-scan": 3}.get(self.status, 1)


def verify_rp(double: AlgebraDescriptor, h: Element, betas=(0.0, 0.5, 1.0),
              tol: float = PSD_TOL, basis: AdaptedBasis | None = None,
              model: str = "model", scan_witness: bool = True) -> RPVerdict:
    """Reflection positivity of the Boltzmann functionals at the given betas,
    cross-checked against the coupling-matrix criterion when available."""
    if any(b < 0 for b in betas):
        raise ValueError("beta values must be nonnegative")
    if basis is None:
        basis = build_adapted_basis(double)
    if any(double.monomial_degree(m) for m in h.terms):
        raise GradingError("the Hamiltonian must be of degree zero")
    dev = (reflect(h) - h).inf_norm()
    if dev > 1e-10 * max(1.0, h.inf_norm()):
        warnings.warn(f"Hamiltonian is not reflection invariant (deviation {dev:.2e})",
                      stacklevel=2)

    tau = background(double)
    entries = []
    rp_all = True
    for beta in betas:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                f = boltzmann(tau, h, beta)
            gb = gram_matrix(f, basis)
        except NumericOverflowError as exc:
            entries.append(BetaEntry(float(beta), [], False, 0.0, error=str(exc)))
            rp_all = False
            continue
        verdicts = gb.psd_verdicts(tol=tol)
        blocks = [(k, verdicts[k].min_eig, verdicts[k].psd, gb.herm_devs[k])
                  for k in sorted(verdicts)]
        ok = all(v.psd for v in verdicts.values())
        entries.append(BetaEntry(float(beta), blocks, ok, gb.cross_degree_dev))
        rp_all = rp_all and ok

    coupling_available = basis.extraction_ok
    coupling_psd = coupling_min_eig = coupling_herm = None
    witness = None
    agreement = None
    if coupling_available:
        couplings = extract_couplings(h, basis)
        verdict = psd_check(couplings.j0(), tol=tol)
        coupling_psd = bool(verdict.psd)
        coupling_min_eig = verdict.min_eig
        coupling_herm = couplings.hermitian_dev()
        agreement = coupling_psd == rp_all
        if not coupling_psd and scan_witness:
            witness = rp_counterexample_witness(double, h, basis, couplings, tol=tol)

    if coupling_available:
        if coupling_psd and rp_all:
            status = "rp"
        elif not coupling_psd and (not rp_all or (witness is not None and witness.found)):
            status = "not-rp"
        elif not coupling_psd:
            status = "inconclusive-scan"
        else:
            # PSD couplings but a Gram block dipped below tolerance
            status = "not-rp"
    else:
        status = "rp" if rp_all else "not-rp"

    return RPVerdict(model, double.zeta, tol, [float(b) for b in betas], entries,
                     rp_all, coupling_available, coupling_psd, coupling_min_eig,
                     coupling_herm, agreement, witness, status)


@dataclass
class DominanceReport:
    applicable: bool
    dominated: bool | None
    min_eig: float | None


def dominance_check(double: AlgebraDescriptor, h: Element, tol: float = PSD_TOL,
                    basis: AdaptedBasis | None = None) -> DominanceReport:
    """For cone Hamiltonians (-H in the closed cone hull), the perturbed form
    dominates the background form blockwise."""
    if basis is None:
        basis = build_adapted_basis(double)
    if not cone_membership(-h, basis, tol=tol):
        return DominanceReport(False, None, None)
    tau = background(double)
    g0 = gram_matrix(tau, basis)
    g1 = gram_matrix(boltzmann(tau, h, 1.0), basis)
    min_eig = None
    ok = True
    for k in g0.blocks:
        diff = g1.blocks[k] - g0.blocks[k]
        verdict = psd_check(diff, tol=tol)
        min_eig = verdict.min_eig if min_eig is None else min(min_eig, verdict.min_eig)
        ok = ok and verdict.psd
    return DominanceReport(True, ok, min_eig)


@dataclass
class OSHilbertSpace:
    """Graded quantum Hilbert space data of a reflection-positive functional."""

    dims: dict                 # degree -> dimension
    null_dim: int
    representatives: dict      # degree -> (basis coefficients) x (orthonormal vectors)
    total_dim: int
    plus_dim: int

    def sum_rule_holds(self):
        return self.total_dim + self.null_dim == self.plus_dim


def os_hilbert_space(gram: GramBlocks, tol: float = PSD_TOL) -> OSHilbertSpace:
    """Quotient the plus side by the form's null space, degree by degree."""
    dims, reps = {}, {}
    null_dim = 0
    for k, block in gram.blocks.items():
        if block.size == 0:
            dims[k] = 0
            continue
        sym = 0.5 * (block + block.conj().T)
        vals, vecs = np.linalg.eigh(sym)
        scale = max(1.0, float(np.max(np.abs(vals))))
        if vals[0] < -tol * scale:
            raise RPCheckError(
                f"Gram block of degree {k} is not positive semidefinite "
                f"(min eigenvalue {vals[0]:.3e}); cannot quantize"
            )
        keep = vals > tol * scale
        dims[k] = int(np.sum(keep))
        null_dim += int(np.sum(~keep))
        reps[k] = vecs[:, keep] / np.sqrt(vals[keep])[None, :]
    total = sum(dims.values())
    return OSHilbertSpace(dims, null_dim, reps, total, len(gram.basis))
