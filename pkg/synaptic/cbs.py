"""
The CBS decomposition of an effect with respect to a projection
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~

For a projection p and an effect e:

- cosine c = (pep + p⊥e⊥p⊥)^½ and sine s = (pe⊥p + p⊥ep⊥)^½,
- j = (p(e − e²)p + p⊥(e − e²)p⊥)^½,
- commutator effect b = |pep⊥ + p⊥ep| and the symmetry k, the canonical
  extension of the signum of the off-diagonal part,

so that e = c²p + bk + s²p⊥.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from synaptic.calculus import \
    Symmetry, abs_value, canonical_extension, carrier, signum, sqrt_psd
from synaptic.effects import Corner, largest_subprojections
from synaptic.elements import Effect, Projection
from synaptic.errors import InvariantViolation, PreconditionError
from synaptic.lattice import join, meet, same_projection, are_orthogonal
from synaptic.linalg import \
    SymmetricElement, DEFAULT_TOLERANCE, check_same_dim, commutator_norm, \
    commutes, opnorm

log = logging.getLogger(__name__)

# Relative accuracy (scaled by 1+‖e‖) required of the algebraic identities
IDENTITY_EPS = 1e-10


def _pair(p, e, tol):
    p, e = Projection.coerce(p, tol), Effect.coerce(e, tol)
    check_same_dim(p, e)
    return p, e


def _sym(m):
    return SymmetricElement._wrap(m)


class CosineSine(NamedTuple):
    c: Effect
    s: Effect
    c2: SymmetricElement
    s2: SymmetricElement


def cosine_sine(p, e, tol=DEFAULT_TOLERANCE):
    """The cosine and sine effects of e with respect to p, with their squares."""
    p, e = _pair(p, e, tol)
    q, qperp, m = p.entries, p.perp.entries, e.entries
    mperp = np.eye(e.dim) - m
    c2 = _sym(q @ m @ q + qperp @ mperp @ qperp)
    s2 = _sym(q @ mperp @ q + qperp @ m @ qperp)
    return CosineSine(
        Effect(sqrt_psd(c2, tol), tol), Effect(sqrt_psd(s2, tol), tol), c2, s2)


def j_effect(p, e, tol=DEFAULT_TOLERANCE):
    """j = (p(e−e²)p + p⊥(e−e²)p⊥)^½; zero exactly when e is a projection."""
    p, e = _pair(p, e, tol)
    q, qperp, m = p.entries, p.perp.entries, e.entries
    d = m - m @ m
    return Effect(sqrt_psd(_sym(q @ d @ q + qperp @ d @ qperp), tol), tol)


def offdiagonal_part(p, e, tol=DEFAULT_TOLERANCE):
    """pep⊥ + p⊥ep"""
    p, e = _pair(p, e, tol)
    half = p.entries @ e.entries @ p.perp.entries
    return _sym(half + half.T)


class CommutatorEffect(NamedTuple):
    b: Effect
    k: Symmetry
    offdiag: SymmetricElement
    square_residual: float


def commutator_effect(p, e, tol=DEFAULT_TOLERANCE, cs=None, j=None):
    """
    The commutator effect b = |pep⊥ + p⊥ep| and the symmetry k with
    pep⊥ + p⊥ep = bk = kb.

    `square_residual` is ‖b² − (c²s² − j²)‖, the distance from the second
    definition of b; the squares are compared since the root amplifies noise.
    """
    p, e = _pair(p, e, tol)
    offdiag = offdiagonal_part(p, e, tol)
    b = Effect(abs_value(offdiag, tol), tol)
    k = canonical_extension(signum(offdiag, tol), tol)
    cs = cs or cosine_sine(p, e, tol)
    j = j if j is not None else j_effect(p, e, tol)
    jm = j.entries
    other = cs.c2.entries @ cs.s2.entries - jm @ jm
    residual = opnorm(b.entries @ b.entries - (other + other.T) / 2)
    return CommutatorEffect(b, k, offdiag, residual)


@dataclass(frozen=True)
class CBSDecomposition:
    """All CBS quantities of a pair (p, e) together with their carriers."""
    p: Projection
    e: Effect
    c: Effect
    s: Effect
    j: Effect
    b: Effect
    k: Symmetry
    z: Projection
    t: Projection
    c_carrier: Projection
    s_carrier: Projection
    j_carrier: Projection
    b_carrier: Projection
    offdiag: SymmetricElement
    c2: SymmetricElement
    s2: SymmetricElement
    square_residual: float

    @property
    def dim(self):
        return self.e.dim

    def reconstruction(self):
        """c²p + bk + s²p⊥"""
        m = self.c2.entries @ self.p.entries \
            + self.b.entries @ self.k.element.entries \
            + self.s2.entries @ self.p.perp.entries
        return _sym(m)

    def residuals(self):
        """Residuals of the identities every decomposition satisfies."""
        p, pm, km = self.p.entries, self.p.perp.entries, self.k.element.entries
        c, s, b = self.c.entries, self.s.entries, self.b.entries
        n = self.dim
        bk = b @ km
        return {
            "cos_sin_sum": opnorm(c @ c + s @ s - np.eye(n)),
            "square_identity": self.square_residual,
            "reconstruction": self.e.distance(self.reconstruction()),
            "offdiag_bk": max(opnorm(self.offdiag.entries - bk),
                              opnorm(bk - km @ b)),
            "exchange": opnorm(b @ (p @ km - km @ pm)),
            "p_commutation": max(commutator_norm(x, p) for x in (c, s, b)),
            "cs_commutation": commutator_norm(c, s),
        }

    def assert_invariants(self):
        bound = IDENTITY_EPS * (1 + self.e.norm)
        for name, residual in self.residuals().items():
            if residual > bound * (1e2 if name.endswith("commutation") else 1):
                raise InvariantViolation(f"cbs.{name}", residual)


def cbs_decompose(p, e, tol=DEFAULT_TOLERANCE, check=True):
    """
    Compute the CBS decomposition e = c²p + bk + s²p⊥ of the pair (p, e).

    With `check`, all identities of `CBSDecomposition.residuals` are asserted
    and an `InvariantViolation` names the first one that fails.
    """
    p, e = _pair(p, e, tol)
    cs = cosine_sine(p, e, tol)
    j = j_effect(p, e, tol)
    bk = commutator_effect(p, e, tol, cs, j)
    z, t = largest_subprojections(e, tol)
    d = CBSDecomposition(
        p=p, e=e, c=cs.c, s=cs.s, j=j, b=bk.b, k=bk.k, z=z, t=t,
        c_carrier=carrier(cs.c, tol), s_carrier=carrier(cs.s, tol),
        j_carrier=carrier(j, tol), b_carrier=carrier(bk.b, tol),
        offdiag=bk.offdiag, c2=cs.c2, s2=cs.s2,
        square_residual=bk.square_residual)
    log.debug("CBS decomposition of a dim-%d pair, rank b° = %d",
              d.dim, d.b_carrier.rank)
    if check:
        d.assert_invariants()
    return d


class CBSCarriers(NamedTuple):
    c: Projection
    s: Projection
    j: Projection
    cs: Projection


def cbs_carriers(d, tol=DEFAULT_TOLERANCE):
    """
    The carriers c°, s°, j° and (cs)° by the lattice formulas

    - c° = (p ∨ z⊥) ∧ (p⊥ ∨ t⊥)
    - s° = (p ∨ t⊥) ∧ (p⊥ ∨ z⊥)
    - j° = (p ∨ (t⊥ ∧ z⊥)) ∧ (p⊥ ∨ (t⊥ ∧ z⊥))
    - (cs)° = c° ∧ s°

    each checked against the carrier computed directly from the element.
    """
    p, pp, zp, tp = d.p, d.p.perp, d.z.perp, d.t.perp
    tz = meet(tp, zp, tol)
    formulas = CBSCarriers(
        c=meet(join(p, zp, tol), join(pp, tp, tol), tol),
        s=meet(join(p, tp, tol), join(pp, zp, tol), tol),
        j=meet(join(p, tz, tol), join(pp, tz, tol), tol),
        cs=meet(d.c_carrier, d.s_carrier, tol))
    direct = CBSCarriers(
        d.c_carrier, d.s_carrier, d.j_carrier,
        carrier(_sym(d.c.entries @ d.s.entries), tol))
    for name, formula, value in zip(CBSCarriers._fields, formulas, direct):
        if not same_projection(formula, value, tol):
            raise InvariantViolation(
                "cbs.carrier_formulas", formula.distance(value),
                f"{name}° differs from its lattice formula")
    return formulas


class AtomStructure(NamedTuple):
    v: Projection
    beta: float
    b_carrier: Projection


def atom_structure(p, e, tol=DEFAULT_TOLERANCE, d=None):
    """
    For an atom p not commuting with e: v = kpk is an atom orthogonal to p,
    b° = p + v, and b = β·b° for the single nonzero eigenvalue β of b.
    """
    p, e = _pair(p, e, tol)
    if p.rank != 1:
        raise PreconditionError("p is not an atom")
    if commutes(p, e, tol):
        raise PreconditionError("p commutes with e")
    d = d or cbs_decompose(p, e, tol)
    v = Projection(d.k.conjugate(p), tol)
    b_carrier = d.b_carrier
    if not are_orthogonal(p, v, tol) or v.rank != 1:
        raise InvariantViolation("cbs.atom_orthogonal",
                                 opnorm(p.entries @ v.entries))
    if b_carrier.rank != 2 or not same_projection(b_carrier, p + v, tol):
        raise InvariantViolation(
            "cbs.atom_carrier", b_carrier.distance(p + v),
            f"b° has rank {b_carrier.rank}")
    beta = float(d.b.eigen(tol).eigenvalues[-1])
    residual = d.b.distance(beta * b_carrier)
    if residual > IDENTITY_EPS * 1e2 * (1 + e.norm):
        raise InvariantViolation("cbs.atom_scalar", residual)
    return AtomStructure(v, beta, b_carrier)


def _zero_corner_decomposition():
    """The decomposition in the corner of q = 0, where every element is 0."""
    zero = Projection.zero(0)
    empty = Effect._wrap(np.zeros((0, 0)))
    return CBSDecomposition(
        p=zero, e=empty, c=empty, s=empty, j=empty, b=empty,
        k=Symmetry(SymmetricElement.zeros(0)), z=zero, t=zero,
        c_carrier=zero, s_carrier=zero, j_carrier=zero, b_carrier=zero,
        offdiag=empty, c2=empty, s2=empty, square_residual=0.0)


def restrict_cbs(d, q, tol=DEFAULT_TOLERANCE):
    """
    Recompute the decomposition of (pq, eq) from scratch in the corner qAq
    of a projection q commuting with p and e, check that its cosine, sine and
    commutator effect are the restrictions cq, sq, bq, and return it (in
    corner coordinates, see `effects.Corner`).
    """
    q = Projection.coerce(q, tol)
    check_same_dim(d.p, q)
    if not (commutes(q, d.p, tol) and commutes(q, d.e, tol)):
        raise PreconditionError("q must commute with p and with e")
    corner = Corner(q, tol)
    if q.is_zero:
        restricted = _zero_corner_decomposition()
    else:
        restricted = cbs_decompose(
            corner.compress_projection(d.p, check=False),
            corner.compress_effect(d.e, check=False), tol)
    bound = tol.agree_eps * (1 + d.e.norm)
    for name in ("c", "s", "b", "j"):
        whole = getattr(d, name).compress(q)
        residual = whole.distance(corner.lift(getattr(restricted, name)))
        if residual > bound:
            raise InvariantViolation(
                "cbs.corner_restriction", residual,
                f"{name} of the corner pair is not the restriction of {name}")
    return restricted


def is_generic_position(d):
    """p and e are in generic position when b° = 1."""
    return d.b_carrier.is_unit


def generic_position_residuals(d, tol=DEFAULT_TOLERANCE):
    """
    Consequences of generic position: c° = s° = 1, the meets of p and p⊥
    with z and t vanish, and k exchanges p and p⊥. Returns a mapping from
    each consequence to whether it holds.
    """
    p, pp = d.p, d.p.perp
    return {
        "carriers_unit": d.c_carrier.is_unit and d.s_carrier.is_unit,
        "meets_zero": all(meet(x, y, tol).is_zero
                          for x in (p, pp) for y in (d.z, d.t)),
        "k_exchanges": opnorm(d.k.conjugate(p).entries - pp.entries)
        <= tol.agree_eps,
    }
