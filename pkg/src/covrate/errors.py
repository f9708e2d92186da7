"""Exception hierarchy shared by all covrate modules.

``InfeasibilityError`` marks errors that mean "the requested operating point
does not exist" (too small a distortion, rate budget below the feasible
minimum, ...).  The CLI maps these to exit code 2; everything else exits 1.
"""


class CovrateError(Exception):
    """Base class for all errors raised by this package."""


class InfeasibilityError(CovrateError):
    """The request is well-formed but infeasible."""


# ---- matrix primitives ------------------------------------------------------

class NonSymmetric(CovrateError):
    """Input matrix is not symmetric within tolerance."""


class NotSpd(CovrateError):
    """Input matrix is not (strictly) positive definite within tolerance."""


class DimensionMismatch(CovrateError):
    """Operands have incompatible dimensions."""


class InvalidParam(CovrateError):
    """A scalar/structural parameter is outside its documented domain."""


# ---- Gaussian models --------------------------------------------------------

class SingularConditioningBlock(CovrateError):
    """The conditioning block of a joint covariance is singular."""


class SingularObservationCovariance(CovrateError):
    """The stacked observation covariance is singular."""


class RankDeficient(CovrateError):
    """The observation carries no information on part of the source space."""


# ---- rate-distortion --------------------------------------------------------

class InvalidDistortion(InfeasibilityError):
    """Distortion matrix does not strictly dominate the irreducible error."""


class NotNested(CovrateError):
    """Inner covariance is not dominated by the outer covariance."""


class InfeasibleDistortion(InfeasibilityError):
    """Scalar distortion target below the irreducible error floor."""


class OutOfRange(InfeasibilityError):
    """Requested rate-information point lies outside the valid range."""


class InfiniteRate(InfeasibilityError):
    """Requested operating point needs unbounded rate."""


# ---- sensor fusion ----------------------------------------------------------

class SingularGram(CovrateError):
    """The fusion Gram matrix W Sigma_v^-1 W^T is singular."""


class InvalidAllocation(CovrateError):
    """A per-node distortion matrix violates the allocation invariants."""


class InfeasibleBudget(InfeasibilityError):
    """Rate budget is below the minimum required by the allocator."""


class AssumptionViolated(CovrateError):
    """Input does not satisfy the simplifying assumptions of this routine."""


class GenerationStalled(CovrateError):
    """Random allocation generation exceeded the rejection budget."""
