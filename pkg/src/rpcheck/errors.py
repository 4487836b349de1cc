"""Exception types shared across the package."""


class RPCheckError(Exception):
    """Base class for all rpcheck errors."""


class UnsupportedGradingError(RPCheckError, ValueError):
    """Grading order outside the supported range (p >= 1)."""


class AlgebraMismatchError(RPCheckError, ValueError):
    """Operands belong to different algebras."""


class SideViolationError(RPCheckError, ValueError):
    """Element is not supported on the required (plus/minus) subalgebra."""


class GradingError(RPCheckError, ValueError):
    """Element fails a homogeneity / degree-zero requirement."""


class ConstraintViolationError(RPCheckError, ValueError):
    """Invalid construction data (lattice, reflection map, group table, ...)."""


class StrictPositivityError(RPCheckError, ValueError):
    """The sharp-Gram matrix of the plus basis is not positive definite."""


class FactorizationError(RPCheckError, ValueError):
    """Operation requires a factorizing background functional."""


class DecompositionUnavailableError(RPCheckError, ValueError):
    """No cone-compatible splitting exists (cross-plane couplings not PSD)."""


class NumericOverflowError(RPCheckError, ArithmeticError):
    """Non-finite coefficients encountered (exponential overflow)."""


class ResourceGuardError(RPCheckError, ValueError):
    """Requested instance exceeds the desk-scale limits of this tool."""


class InvalidModelError(RPCheckError, ValueError):
    """Malformed model configuration; message names the offending field."""
