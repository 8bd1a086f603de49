"""Exception hierarchy shared by every fixforge module."""

from __future__ import annotations


class FixforgeError(Exception):
    """Base class for all errors raised by this package."""


# -- matrix substrate ---------------------------------------------------------

class NotSquare(FixforgeError):
    """A square matrix was required."""


class NotHermitian(FixforgeError):
    """Hermiticity check failed beyond tolerance."""


class DimensionMismatch(FixforgeError):
    """Operand dimensions are incompatible."""


class NotNormalized(FixforgeError):
    """A unit vector was required."""


# -- states and channels ------------------------------------------------------

class InvalidState(FixforgeError):
    """Density-matrix invariants (PSD, unit trace) violated beyond tolerance."""


class InvalidChannel(FixforgeError):
    """Channel invariants (CPTP in the active representation) violated."""


class InvalidWeights(FixforgeError):
    """Convex weights must be a probability vector."""


class InvalidDistribution(FixforgeError):
    """Probability vector / stochastic matrix invariants violated."""


class NotUnital(FixforgeError):
    """A unital channel was required."""


class NoConvergence(FixforgeError):
    """Fixed-point iteration hit its iteration cap."""


# -- projections and rotations ------------------------------------------------

class NotAProjection(FixforgeError):
    """An orthogonal projection was required."""


class NotOrthonormal(FixforgeError):
    """An orthonormal system of vectors was required."""


class NotOrthogonalFamily(FixforgeError):
    """Mutually orthogonal projections were required."""


class NotIsometry(FixforgeError):
    """An isometry (V^dagger V = 1) was required."""


class TooFar(FixforgeError):
    """Inputs are too far apart for the rotation construction to apply."""


class GapViolated(FixforgeError):
    """Spectral separation precondition of the projection bound failed."""


# -- fixers -------------------------------------------------------------------

class PromiseViolated(FixforgeError):
    """Measured deviation exceeds the promised epsilon beyond slack."""


class OperatorInequalityViolated(FixforgeError):
    """The depolarizing-trick operator inequality failed."""


class SupportsNotOrthogonal(FixforgeError):
    """Source states must have mutually orthogonal supports."""


class DegenerateTruncation(FixforgeError):
    """Every Schmidt coefficient fell below the truncation threshold."""


class CertificationError(FixforgeError):
    """A claimed bound failed its numerical certification."""


# -- counterexamples and harness ----------------------------------------------

class DimensionTooSmall(FixforgeError):
    """The construction needs a larger dimension."""


class TooFarFromT(FixforgeError):
    """Stochastic matrix is outside the robustness radius around T."""


class TooFarFromNT(FixforgeError):
    """Channel is outside the certified diamond radius around N_T."""


class GenerationFailed(FixforgeError):
    """Instance generator exhausted its retry budget."""


class UnknownSuite(FixforgeError):
    """Suite name is not one of the known verification suites."""
