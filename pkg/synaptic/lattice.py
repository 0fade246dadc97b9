"""
The orthomodular lattice of projections.

Joins are carriers of sums, (p + q)° = p ∨ q, and meets follow by De Morgan,
so every lattice operation exercises the carrier of a positive sum.
"""
import logging
from functools import lru_cache, reduce

import numpy as np

from synaptic.calculus import carrier
from synaptic.elements import Projection
from synaptic.errors import PreconditionError, ResourceError
from synaptic.linalg import DEFAULT_TOLERANCE, check_same_dim, opnorm

log = logging.getLogger(__name__)


def ortho(p, tol=DEFAULT_TOLERANCE):
    """p⊥ = 1 − p"""
    return Projection.coerce(p, tol).perp


def join(p, q, tol=DEFAULT_TOLERANCE):
    p, q = Projection.coerce(p, tol), Projection.coerce(q, tol)
    check_same_dim(p, q)
    if p.is_unit or q.is_zero:
        return p
    if q.is_unit or p.is_zero:
        return q
    return carrier(p + q, tol)


def meet(p, q, tol=DEFAULT_TOLERANCE):
    p, q = Projection.coerce(p, tol), Projection.coerce(q, tol)
    check_same_dim(p, q)
    if p.is_zero or q.is_unit:
        return p
    if q.is_zero or p.is_unit:
        return q
    return carrier(p.perp + q.perp, tol).perp


def _dimension(projections, dim):
    if projections:
        check_same_dim(*projections)
        return projections[0].dim
    if dim is None:
        raise PreconditionError("dimension of an empty family is unknown")
    return dim


def join_all(projections, tol=DEFAULT_TOLERANCE, dim=None):
    """The join of a finite family, computed as the carrier of its sum."""
    projections = [Projection.coerce(p, tol) for p in projections]
    n = _dimension(projections, dim)
    projections = [p for p in projections if not p.is_zero]
    if not projections:
        return Projection.zero(n)
    if len(projections) == 1:
        return projections[0]
    return carrier(reduce(lambda a, b: a + b, projections), tol)


def meet_all(projections, tol=DEFAULT_TOLERANCE, dim=None):
    projections = [Projection.coerce(p, tol) for p in projections]
    n = _dimension(projections, dim)
    return join_all([p.perp for p in projections], tol, n).perp


def leq(p, q, tol=DEFAULT_TOLERANCE):
    """The lattice order: p ≤ q iff qp = p."""
    check_same_dim(p, q)
    p, q = np.asarray(p), np.asarray(q)
    return opnorm(p - q @ p) <= tol.agree_eps


def same_projection(p, q, tol=DEFAULT_TOLERANCE):
    p, q = Projection.coerce(p, tol), Projection.coerce(q, tol)
    check_same_dim(p, q)
    return p.rank == q.rank and p.distance(q) <= tol.agree_eps


def are_orthogonal(p, q, tol=DEFAULT_TOLERANCE):
    """p ⊥ q iff pq = 0"""
    check_same_dim(p, q)
    return opnorm(np.asarray(p) @ np.asarray(q)) <= tol.agree_eps


def is_atom(p, tol=DEFAULT_TOLERANCE):
    return Projection.coerce(p, tol).rank == 1


def exchanged_by(p, q, u, tol=DEFAULT_TOLERANCE):
    """Whether the symmetry `u` exchanges p and q, i.e. upu = q."""
    u = np.asarray(getattr(u, "element", u))
    check_same_dim(p, q, u)
    return opnorm(u @ np.asarray(p) @ u - np.asarray(q)) <= tol.agree_eps


def marsden_commutator(p, q, tol=DEFAULT_TOLERANCE):
    """
    [p, q] = (p∨q) ∧ (p∨q⊥) ∧ (p⊥∨q) ∧ (p⊥∨q⊥); zero iff p and q commute.
    """
    p, q = Projection.coerce(p, tol), Projection.coerce(q, tol)
    check_same_dim(p, q)
    return meet_all(
        [join(x, y, tol) for x in (p, p.perp) for y in (q, q.perp)], tol)


@lru_cache(maxsize=None)
def _gray_flips(n):
    """Bits flipped by consecutive steps of the reflected binary Gray code."""
    return tuple((m & -m).bit_length() - 1 for m in range(1, 2 ** n))


def reduce_family(family, tol=DEFAULT_TOLERANCE):
    """
    Drop 0, 1 and members that equal an earlier member or its complement;
    none of these change the finite-set commutator.
    """
    members = []
    for w in family:
        w = Projection.coerce(w, tol)
        if w.is_zero or w.is_unit:
            continue
        if any(same_projection(w, v, tol) or same_projection(w, v.perp, tol)
               for v in members):
            continue
        members.append(w)
    return members


def finite_set_commutator(family, tol=DEFAULT_TOLERANCE, dim=None):
    """
    The commutator [F] of a finite family of projections: the meet, over all
    sign vectors d, of w₁^d₁ ∨ … ∨ wₙ^dₙ where w⁺ = w and w⁻ = w⊥.

    Sign vectors are enumerated in Gray-code order with the lowest bit on the
    last member, so consecutive terms share all joins up to the flipped
    member. The empty family gives 0. Raises `ResourceError` if the reduced
    family has more than `tol.max_commutator_set` members.
    """
    family = [Projection.coerce(w, tol) for w in family]
    n_dim = _dimension(family, dim)
    members = reduce_family(family, tol)
    n = len(members)
    log.debug("finite-set commutator: %d of %d members kept", n, len(family))
    if not n:
        return Projection.zero(n_dim)
    if n > tol.max_commutator_set:
        raise ResourceError(
            f"commutator of {n} projections exceeds the limit of "
            f"{tol.max_commutator_set}")

    choices = [(w, w.perp) for w in members]
    signs = [0] * n
    prefix = [Projection.zero(n_dim)] + [None] * n

    def refresh(start):
        for i in range(start, n):
            prefix[i + 1] = join(prefix[i], choices[i][signs[i]], tol)

    refresh(0)
    result = prefix[n]
    for bit in _gray_flips(n):
        if result.is_zero:
            break
        position = n - 1 - bit
        signs[position] ^= 1
        refresh(position)
        result = meet(result, prefix[n], tol)
    return result
