"""
Effects and their projection structure: orthosupplements, the largest
subprojections of an effect and of its orthosupplement, and corner algebras
qAq of a projection q.
"""
import logging
from typing import NamedTuple

import numpy as np

from synaptic.calculus import carrier
from synaptic.elements import Effect, Projection
from synaptic.errors import InvariantViolation, PreconditionError
from synaptic.linalg import \
    SymmetricElement, DEFAULT_TOLERANCE, as_element, check_same_dim, \
    commutes, sym_eigen

log = logging.getLogger(__name__)


def orthosupplement(e, tol=DEFAULT_TOLERANCE):
    """e⊥ = 1 − e"""
    if isinstance(e, Projection):
        return e.perp
    e = Effect.coerce(e, tol)
    return Effect._wrap(np.eye(e.dim) - e.entries)


class SubprojectionPair(NamedTuple):
    """z is the largest projection below e, t the largest below e⊥."""
    z: Projection
    t: Projection


def _eigenspace(eig, target, norm, tol):
    mask = np.abs(eig.eigenvalues - target) <= tol.rank_threshold(norm)
    return Projection.from_basis(eig.columns(mask))


def largest_subprojections(e, tol=DEFAULT_TOLERANCE, cross_check=True):
    """
    Return z = ((e⊥)°)⊥ and t = (e°)⊥.

    The carrier route is authoritative. With `cross_check`, z and t are also
    read off as the eigenvalue-1 and eigenvalue-0 eigenspaces of e and the two
    routes must agree.
    """
    if isinstance(e, Projection):
        return SubprojectionPair(e, e.perp)
    e = Effect.coerce(e, tol)
    e_perp = orthosupplement(e, tol)
    z = carrier(e_perp, tol).perp
    t = carrier(e, tol).perp
    if cross_check:
        eig = sym_eigen(e, tol)
        for name, route, other in (
                ("z", z, _eigenspace(eig, 1.0, e_perp.norm, tol)),
                ("t", t, _eigenspace(eig, 0.0, e.norm, tol))):
            residual = route.distance(other)
            if route.rank != other.rank or residual > tol.agree_eps:
                raise InvariantViolation(
                    "subprojections.routes", residual,
                    f"{name} differs between carrier and eigenspace routes")
    return SubprojectionPair(z, t)


def is_projection_free(e, tol=DEFAULT_TOLERANCE):
    """Whether the only projection below e is 0."""
    return largest_subprojections(e, tol, cross_check=False).z.is_zero


def restrict_to_corner(a, q, tol=DEFAULT_TOLERANCE):
    """
    The component a_q = qaq of an element commuting with q. An effect is
    restricted to an effect of the corner; its corner orthosupplement is
    q − a_q (see `corner_orthosupplement`).
    """
    q = Projection.coerce(q, tol)
    check_same_dim(a, q)
    if not commutes(a, q, tol):
        raise PreconditionError("element does not commute with the projection")
    component = as_element(a).compress(q)
    if isinstance(a, Effect):
        return Effect._wrap(component.entries)
    return component


def corner_orthosupplement(f, q, tol=DEFAULT_TOLERANCE):
    """The orthosupplement q − f of an effect f in the corner qAq."""
    q = Projection.coerce(q, tol)
    return Effect._wrap(q.entries - np.asarray(f))


class Corner:
    """
    The corner algebra qAq in coordinates of an orthonormal basis B of range(q).

    Elements commuting with q are compressed to Bᵀ·a·B, an algebra of
    dimension rank(q) (0 for q = 0), and lifted back as B·x·Bᵀ.
    """

    def __init__(self, q, tol=DEFAULT_TOLERANCE):
        self.q = Projection.coerce(q, tol)
        self.tol = tol

    @property
    def basis(self):
        return self.q.basis

    @property
    def dim(self):
        return self.q.rank

    def _coordinates(self, a, check):
        check_same_dim(a, self.q)
        if check and not commutes(a, self.q, self.tol):
            raise PreconditionError(
                "element does not commute with the corner projection")
        basis = self.basis
        return basis.T @ np.asarray(a) @ basis

    def compress(self, a, check=True):
        return SymmetricElement(self._coordinates(a, check))

    def compress_effect(self, e, check=True):
        return Effect(self._coordinates(e, check), self.tol)

    def compress_projection(self, p, check=True):
        return Projection(self._coordinates(p, check), self.tol)

    def lift(self, x):
        basis = self.basis
        return SymmetricElement._wrap(basis @ np.asarray(x) @ basis.T)

    def lift_projection(self, x):
        """Lift a corner projection to the projection onto B·range(x)."""
        return Projection.from_basis(self.basis @ x.basis)
