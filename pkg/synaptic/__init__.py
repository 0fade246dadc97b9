"""
Synaptic algebras of real symmetric matrices: element calculus, the
projection lattice, the CBS decomposition of an effect with respect to a
projection, commutators and infima.
"""
from synaptic.errors import \
    SynapticError, NumericalFailure, DomainError, PreconditionError, \
    DimensionMismatch, ValidationError, ResourceError, InvariantViolation
from synaptic.linalg import ToleranceConfig, DEFAULT_TOLERANCE, SymmetricElement
from synaptic.elements import Effect, Projection

__version__ = "0.1"
