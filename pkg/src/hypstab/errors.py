"""Exception types raised by the analysis routines.

Every error carries a human-readable message; callers that need to
distinguish failure modes catch the specific class.
"""


class HypstabError(Exception):
    """Base class for all package errors."""


class GapTooSmall(HypstabError):
    """Spectral gap between eigenvalue clusters is below the safe threshold."""


class OnBoundary(HypstabError):
    """An eigenvalue sits on the dividing line of a half-plane split."""


class ClusterCollision(HypstabError):
    """Eigenvalue clusters merge while a family is sampled away from its base point."""


class NotCharacteristic(HypstabError):
    """The supplied (tau, xi) is not a root of the characteristic polynomial."""


class NotSemiSimple(HypstabError):
    """Geometric multiplicity is below algebraic multiplicity."""


class InternalInconsistency(HypstabError):
    """Two independent computation routes disagree; indicates a bug or a
    violated assumption, never silently ignored."""


class BadManifold(HypstabError):
    """A user-supplied root manifold fails its defining property."""


class Singular(HypstabError):
    """A matrix that must be invertible is numerically singular."""


class NotApplicable(HypstabError):
    """The requested construction's hypotheses do not hold at this point."""


class DimensionMismatch(HypstabError):
    """Subspace dimensions are inconsistent with the ambient problem."""


class AssumptionFailure(HypstabError):
    """A structural assumption of a reduction failed; message names the clause."""


class NotMixedSign(HypstabError):
    """The normal matrix of a 2x2 system does not have eigenvalues of opposite signs."""


class NotStrictlyHyperbolic(HypstabError):
    """A 2x2 system is not strictly hyperbolic in time."""


class LopatinskiFailureAtPoint(HypstabError):
    """The boundary matrix is not invertible on the stable subspace at this frequency."""


class MissingSymmetrizer(HypstabError):
    """The operation needs a Friedrichs symmetrizer and the system has none."""


class MultiplicityMismatch(HypstabError):
    """Declared root multiplicity disagrees with the polynomial's behaviour."""


class NotLaxType(HypstabError):
    """A constructed shock fails the Lax count or the entropy inequalities."""


class FrontDegeneracy(HypstabError):
    """The front-coupling vector degenerates; the boundary matrix loses rank."""


class ConfigError(HypstabError):
    """A job configuration violates its schema; the message names the field path."""
