"""rpcheck: reflection positivity for finite Z_p-graded lattice algebras.

Represents graded algebras with a reflection (bosonic, fermionic,
parafermionic, and lattice-gauge families), and decides reflection
positivity of Boltzmann functionals both through the cross-plane
coupling-matrix criterion and through direct Gram-matrix computation.
"""

from .algebra import (
    AlgebraDescriptor,
    Element,
    GradingOrder,
    Monomial,
    Slot,
    TwistRoots,
    canonical_zeta,
    exp_neg,
    multiply,
    reflect,
    regular_representation,
    sharp,
    twisted_product,
)
from .couplings import (
    AdaptedBasis,
    CouplingMatrix,
    PSDVerdict,
    build_adapted_basis,
    cone_membership,
    decompose,
    dual_pair,
    extract_couplings,
    psd_check,
    reconstruct,
)
from .doubles import (
    FiniteGroupTable,
    GaugeLattice,
    Irrep,
    QDoubleReport,
    ReflectionLattice,
    build_classical_double,
    build_clifford_double,
    build_gauge_double,
    build_grassmann_double,
    build_parafermion_double,
    build_spin_double,
    cyclic_group,
    mirror_chain,
    refined_gauge_lattice,
    site_function,
    site_operator,
    verify_qdouble,
)
from .errors import (
    AlgebraMismatchError,
    ConstraintViolationError,
    DecompositionUnavailableError,
    FactorizationError,
    GradingError,
    InvalidModelError,
    NumericOverflowError,
    ResourceGuardError,
    RPCheckError,
    SideViolationError,
    StrictPositivityError,
    UnsupportedGradingError,
)
from .functionals import (
    FactorizationReport,
    Functional,
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
from .models import (
    fermion_hamiltonian,
    heisenberg_model,
    long_range_pair_model,
    nearest_neighbor_classical,
    parafermion_chain,
    spin_matrices,
    wilson_action,
)
from .verify import (
    DominanceReport,
    GramBlocks,
    OSHilbertSpace,
    RPVerdict,
    Witness,
    dominance_check,
    form_value,
    gram_matrix,
    os_hilbert_space,
    rp_counterexample_witness,
    verify_rp,
)

__version__ = "0.1.0"
