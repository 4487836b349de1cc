"""Linear functionals on a double: evaluation, neutrality, reflection
invariance, factorization, strict positivity, and Boltzmann perturbation."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraDescriptor, Element, exp_neg, multiply, reflect, sharp, twisted_product
from .errors import (
    AlgebraMismatchError,
    FactorizationError,
    GradingError,
    SideViolationError,
)


class Functional:
    """Linear functional with one of a few evaluation rules.

    kind 'background'      the double's slotwise background functional
    kind 'plus'            the slotwise plus-side functional on the plus subalgebra
    kind 'boltzmann'       A -> tau(A e^{-beta H})
    kind 'covector'        dense values over the full monomial basis
    """

    def __init__(self, algebra: AlgebraDescriptor, kind: str, name: str,
                 h: Element | None = None, beta: float = 0.0, values=None):
        self.algebra = algebra
        self.kind = kind
        self.name = name
        self.h = h
        self.beta = float(beta)
        self._values = None if values is None else np.asarray(values, dtype=complex)
        self._exp_element = None

    def __repr__(self):
        return f"<Functional {self.name} ({self.kind})>"

    def exp_element(self):
        if self.kind != "boltzmann":
            raise FactorizationError("only Boltzmann functionals carry an exponential factor")
        if self._exp_element is None:
            self._exp_element = exp_neg(self.h, self.beta)
        return self._exp_element

    def covector(self):
        """Dense values f(m) over the full monomial basis."""
        if self._values is None:
            alg = self.algebra
            if self.kind == "background":
                self._values = alg.tau_covector()
            elif self.kind == "boltzmann":
                self._values = alg.right_pair_covector(self.exp_element())
            elif self.kind == "plus":
                raise SideViolationError("the plus functional has no full-algebra covector")
            else:
                raise ValueError(f"unknown functional kind {self.kind}")
        return self._values

    def __call__(self, element):
        return evaluate(self, element)


def background(alg: AlgebraDescriptor) -> Functional:
    """The double's background functional (tracial state / Berezin / Haar)."""
    return Functional(alg, "background", alg.functional_name)


def plus_functional(alg: AlgebraDescriptor) -> Functional:
    """The factorized plus-side functional tau_+ on the plus subalgebra."""
    return Functional(alg, "plus", alg.functional_name + "+")


def covector_functional(alg: AlgebraDescriptor, values, name="custom") -> Functional:
    return Functional(alg, "covector", name, values=values)


def boltzmann(tau: Functional, h: Element, beta: float) -> Functional:
    """The perturbed functional A -> tau(A e^{-beta H})."""
    if tau.kind != "background":
        raise FactorizationError("boltzmann perturbation starts from the background functional")
    alg = tau.algebra
    if h.algebra is not alg:
        raise AlgebraMismatchError("Hamiltonian belongs to a different algebra")
    if any(alg.monomial_degree(m) for m in h.terms):
        raise GradingError("the Boltzmann weight requires a degree-zero element")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    dev = (reflect(h) - h).inf_norm()
    if dev > 1e-10 * max(1.0, h.inf_norm()):
        warnings.warn(
            f"Hamiltonian is not reflection invariant (deviation {dev:.2e}); "
            "the sesquilinear form will not be Hermitian",
            stacklevel=2,
        )
    return Functional(alg, "boltzmann", f"{tau.name}[beta={beta:g}]", h=h, beta=beta)


def evaluate(f: Functional, a: Element) -> complex:
    """Linear evaluation of a functional on an element."""
    alg = f.algebra
    if a.algebra is not alg:
        raise AlgebraMismatchError("element belongs to a different algebra")
    if f.kind == "plus":
        if not a.supported_on("+0"):
            raise SideViolationError("the plus functional is defined on the plus subalgebra")
        out = 0.0 + 0.0j
        for mono, coeff in a.terms.items():
            out += coeff * alg.tau_plus_value(mono)
        return out
    if f.kind == "background":
        out = 0.0 + 0.0j
        for mono, coeff in a.terms.items():
            out += coeff * alg.tau_value(mono)
        return out
    v = f.covector()
    out = 0.0 + 0.0j
    for mono, coeff in a.terms.items():
        out += coeff * v[alg.monomial_index(mono)]
    return out


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------

def _degree_array(alg):
    key = "degree_array"
    if key not in alg._caches:
        digs = alg.digit_arrays()
        total = np.zeros(alg.dim, dtype=int)
        for s in range(alg.n_slots):
            total = total + np.asarray(alg.slots[s].degrees)[digs[s]]
        alg._caches[key] = total % alg.p
    return alg._caches[key]


def check_neutral(f: Functional, tol: float = 1e-12):
    """(is neutral, max |f| over nonzero-degree monomials)."""
    alg = f.algebra
    v = f.covector()
    degs = _degree_array(alg)
    mask = degs != 0
    dev = float(np.max(np.abs(v[mask]))) if np.any(mask) else 0.0
    return dev <= tol, dev


def _reflected_covector(f: Functional):
    """Array u with u[m] = f(reflection of m)."""
    alg = f.algebra
    v = f.covector()
    if alg.p == 1 and alg.theta_matrix is not None:
        t = v.reshape(tuple(alg.dims))
        for axis in range(alg.n_slots):
            m = alg.theta_matrix[alg.theta_slot_map[axis]]
            t = np.tensordot(t, m, axes=([0], [0]))
        t = np.transpose(t, alg.theta_slot_map)
        return np.ascontiguousarray(t).reshape(-1)
    u = np.zeros(alg.dim, dtype=complex)
    for idx, mono in enumerate(alg.full_basis()):
        img = reflect(alg.basis_element(mono))
        u[idx] = sum(c * v[alg.monomial_index(m)] for m, c in img.terms.items())
    return u


def check_reflection_invariant(f: Functional, tol: float = 1e-10):
    """Tests f(reflect(m)) = conj(f(m)) on every basis monomial."""
    v = f.covector()
    u = _reflected_covector(f)
    dev = float(np.max(np.abs(u - v.conj()))) if v.size else 0.0
    return dev <= tol, dev


@dataclass
class FactorizationReport:
    factorizing: bool
    max_dev: float
    tau_plus_values: np.ndarray  # induced plus functional on the plus monomials
    plus_monomials: list


def _pair_values(f: Functional):
    """P[m-, m+] = f(m- o m+) over the side monomial bases."""
    alg = f.algebra
    minus = alg.side_monomials("minus")
    plus = alg.side_monomials("plus")
    if not alg.zero_slots:
        v = f.covector()
        minus_idx = np.array([alg.monomial_index(m) for m in minus])
        plus_idx = np.array([alg.monomial_index(m) for m in plus])
        P = v[minus_idx[:, None] + plus_idx[None, :]].astype(complex)
        if alg.p > 1:
            mdeg = np.array([alg.monomial_degree(m) for m in minus])
            pdeg = np.array([alg.monomial_degree(m) for m in plus])
            mask = (mdeg[:, None] + pdeg[None, :]) % alg.p == 0
            phase = alg._zeta_sq_powers[pdeg % alg.p]
            P = np.where(mask, P * phase[None, :], 0.0)
        return minus, plus, P
    P = np.zeros((len(minus), len(plus)), dtype=complex)
    for i, m1 in enumerate(minus):
        e1 = alg.basis_element(m1)
        for j, m2 in enumerate(plus):
            P[i, j] = evaluate(f, twisted_product(e1, alg.basis_element(m2)))
    return minus, plus, P


def check_factorizing(f: Functional, tau_plus: Functional | None = None,
                      tol: float = 1e-10) -> FactorizationReport:
    """Verifies f(A o B) = f_-(A) f_+(B) on all side monomial pairs.

    With tau_plus given, the identity is checked against it directly;
    otherwise the best rank-one factorization consistent with the reflection
    is fitted and its residual reported.
    """
    alg = f.algebra
    minus, plus, P = _pair_values(f)

    def minus_values(tvals):
        # f_-(m) = conj(f_+(reflection of m))
        u = np.zeros(len(minus), dtype=complex)
        lookup = {m: i for i, m in enumerate(plus)}
        for i, m in enumerate(minus):
            img = reflect(alg.basis_element(m))
            acc = 0.0 + 0.0j
            for mono, c in img.terms.items():
                acc += c * tvals[lookup[mono]]
            u[i] = acc.conjugate()
        return u

    if tau_plus is not None:
        tvals = np.array([evaluate(tau_plus, alg.basis_element(m)) for m in plus])
    else:
        uu, ss, vv = np.linalg.svd(P)
        if ss.size and ss[0] > 0:
            tvals = vv[0].conj()
            u0 = minus_values(tvals)
            num = np.vdot(np.outer(u0, tvals), P).real
            den = np.vdot(np.outer(u0, tvals), np.outer(u0, tvals)).real
            scale = max(num, 0.0) / den if den > 0 else 0.0
            tvals = np.sqrt(scale) * tvals
        else:
            tvals = np.zeros(len(plus), dtype=complex)
    u = minus_values(tvals)
    dev = float(np.max(np.abs(P - np.outer(u, tvals)))) if P.size else 0.0
    return FactorizationReport(dev <= tol, dev, tvals, plus)


def check_strictly_positive(alg: AlgebraDescriptor, f_plus: Functional | None = None,
                            tol: float = 1e-10):
    """Assembles M[I, J] = tau_+(C_I^sharp C_J) over the plus monomials and
    tests Hermitian positive definiteness.  Returns (ok, min_eig, M)."""
    if f_plus is None:
        f_plus = plus_functional(alg)
    plus = alg.side_monomials("plus")
    sharps = [sharp(alg.basis_element(m)) for m in plus]
    M = np.zeros((len(plus), len(plus)), dtype=complex)
    for i, si in enumerate(sharps):
        for j, m in enumerate(plus):
            M[i, j] = evaluate(f_plus, multiply(si, alg.basis_element(m)))
    herm_dev = float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0
    vals = np.linalg.eigvalsh(0.5 * (M + M.conj().T)) if M.size else np.array([0.0])
    min_eig = float(vals[0])
    ok = herm_dev <= max(tol, 1e-9) and min_eig > tol
    return ok, min_eig, M
