"""
The commutator [p, e] of a projection and an effect.

[p, e] is the finite-set commutator of p together with the spectral cuts of e.
It is the smallest projection r commuting with p and e for which the corner
pair in r⊥Ar⊥ commutes, and the pair restricted to rAr is totally
noncompatible.
"""
import logging
from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg as sla

from synaptic.calculus import spectral_resolution
from synaptic.cbs import CBSDecomposition, cbs_decompose, cbs_carriers
from synaptic.effects import Corner
from synaptic.elements import Effect, Projection
from synaptic.errors import \
    InvariantViolation, NumericalFailure, PreconditionError
from synaptic.lattice import \
    finite_set_commutator, join, leq, meet, same_projection
from synaptic.linalg import \
    DEFAULT_TOLERANCE, check_same_dim, commutes, opnorm, psd_leq

log = logging.getLogger(__name__)


def _pair(p, e, tol):
    p, e = Projection.coerce(p, tol), Effect.coerce(e, tol)
    check_same_dim(p, e)
    return p, e


def pair_commutator(p, e, tol=DEFAULT_TOLERANCE, resolution=None):
    """
    [p, e] = [{p} ∪ {cuts of e}], with the trivial cuts 0 and 1 omitted.

    Raises `ResourceError` when e has too many distinct eigenvalues for the
    finite-set commutator.
    """
    p, e = _pair(p, e, tol)
    resolution = resolution or spectral_resolution(e, tol)
    family = [p] + resolution.cut_set(drop_trivial=True)
    return finite_set_commutator(family, tol, dim=p.dim)


def reducing_closure(vectors, generators, tol=DEFAULT_TOLERANCE):
    """
    Projection onto the smallest subspace containing `vectors` (columns) that
    is invariant under every (symmetric) generator. Such a subspace is
    reducing, so its projection commutes with all generators.

    New directions are found block-wise as in block Arnoldi: the images of the
    current basis are orthogonalized against it twice and kept where their
    singular values exceed comm_eps·(1 + max ‖g‖).
    """
    generators = [np.asarray(g, dtype=float) for g in generators]
    vectors = np.asarray(vectors, dtype=float)
    n = vectors.shape[0]
    thresh = tol.comm_eps * (1 + max((opnorm(g) for g in generators),
                                     default=0.0))
    basis = np.zeros((n, 0))
    block = vectors
    for iteration in range(n + 1):
        for _ in range(2):
            block = block - basis @ (basis.T @ block)
        if not block.size:
            break
        u, sigma, _ = sla.svd(block, full_matrices=False)
        block = u[:, sigma > thresh]
        if not block.shape[1]:
            break
        basis = np.hstack((basis, block))
        block = np.hstack([g @ block for g in generators])
    else:
        raise NumericalFailure(
            f"closure did not stabilize within {n + 1} iterations",
            residual=float(basis.shape[1]))
    log.debug("closure: rank %d after %d iterations",
              basis.shape[1], iteration)
    return Projection.from_basis(basis)


def pair_commutator_via_closure(p, e, tol=DEFAULT_TOLERANCE, d=None):
    """
    [p, e] as the smallest projection that commutes with p and e and lies
    above b°: the closure of range(b°) under p and e.
    """
    p, e = _pair(p, e, tol)
    d = d or cbs_decompose(p, e, tol)
    return reducing_closure(d.b_carrier.basis, [p, e], tol)


def corner_commutator(p, e, q, tol=DEFAULT_TOLERANCE):
    """
    The commutator of the components p_q, e_q computed inside qAq and lifted
    back; q must commute with p and e. Equals q ∧ [p, e].
    """
    p, e = _pair(p, e, tol)
    q = Projection.coerce(q, tol)
    check_same_dim(p, q)
    if not (commutes(q, p, tol) and commutes(q, e, tol)):
        raise PreconditionError("q must commute with p and with e")
    corner = Corner(q, tol)
    inner = pair_commutator(
        corner.compress_projection(p, check=False),
        corner.compress_effect(e, check=False), tol)
    return corner.lift_projection(inner)


def splits_pair(p, e, v, tol=DEFAULT_TOLERANCE):
    """
    Whether v commutes with p and e and (p ∧ v⊥) commutes with (e ∧ v⊥);
    for e commuting with v⊥, e ∧ v⊥ is the product ev⊥.
    """
    v = Projection.coerce(v, tol)
    if not (commutes(v, p, tol) and commutes(v, e, tol)):
        return False
    vp = v.perp
    return commutes(meet(p, vp, tol), e.compress(vp), tol)


def commutant_projections(p, e, rng, count=4, tol=DEFAULT_TOLERANCE, r=None):
    """
    Sample projections commuting with p and e.

    Each sample joins a random subset of joint eigenlines of the commuting
    corner r⊥ with, at random, the closure of a random vector of range(r).
    """
    p, e = _pair(p, e, tol)
    r = r if r is not None else pair_commutator(p, e, tol)
    lines = []
    for block in (meet(r.perp, p, tol), meet(r.perp, p.perp, tol)):
        corner = Corner(block, tol)
        if not corner.dim:
            continue
        vectors = corner.compress(e, check=False).eigen(tol).eigenvectors
        lines.extend((corner.basis @ vectors).T)
    samples = []
    for _ in range(count):
        chosen = [line for line in lines if rng.random() < 0.5]
        w = Projection.onto(np.array(chosen).T, tol) if chosen \
            else Projection.zero(p.dim)
        if r.rank and rng.random() < 0.5:
            x = r.basis @ rng.standard_normal(r.rank)
            w = join(w, reducing_closure(x[:, None], [p, e], tol), tol)
        samples.append(w)
    return samples


def characterization_check(p, e, r, tol=DEFAULT_TOLERANCE, rng=None,
                           samples=4, d=None):
    """
    Check that r is the smallest projection splitting the pair: r must
    satisfy `splits_pair`, and every candidate that does must lie above r.

    Candidates are c°, s°, c° ∧ s°, b°, the closure of b°, and r ∧ w, r ∨ w
    and w for projections w sampled from the commutant of {p, e}.
    """
    p, e = _pair(p, e, tol)
    r = Projection.coerce(r, tol)
    if not splits_pair(p, e, r, tol):
        return False
    d = d or cbs_decompose(p, e, tol)
    candidates = [d.c_carrier, d.s_carrier,
                  meet(d.c_carrier, d.s_carrier, tol), d.b_carrier,
                  pair_commutator_via_closure(p, e, tol, d)]
    if rng is not None:
        for w in commutant_projections(p, e, rng, samples, tol):
            candidates += [meet(r, w, tol), join(r, w, tol), w]
    return all(leq(r, v, tol)
               for v in candidates if splits_pair(p, e, v, tol))


class Splitting(NamedTuple):
    """Corner components of a pair in rAr and in r⊥Ar⊥, in corner coordinates."""
    r: Projection
    p_r: Projection
    e_r: Effect
    p_rperp: Projection
    e_rperp: Effect


def split_by_commutator(p, e, tol=DEFAULT_TOLERANCE, r=None):
    """
    Split the pair along r = [p, e]: the pair is totally noncompatible in rAr
    (its commutator there is the unit) and commutes in r⊥Ar⊥.
    """
    p, e = _pair(p, e, tol)
    r = r if r is not None else pair_commutator(p, e, tol)
    inner, outer = Corner(r, tol), Corner(r.perp, tol)
    split = Splitting(
        r,
        inner.compress_projection(p, check=False),
        inner.compress_effect(e, check=False),
        outer.compress_projection(p, check=False),
        outer.compress_effect(e, check=False))
    if not pair_commutator(split.p_r, split.e_r, tol).is_unit:
        raise InvariantViolation(
            "commutator.splitting", float(r.rank),
            "pair is not totally noncompatible in rAr")
    if not commutes(split.p_rperp, split.e_rperp, tol):
        raise InvariantViolation(
            "commutator.splitting",
            opnorm(split.p_rperp @ split.e_rperp
                   - split.e_rperp @ split.p_rperp),
            "pair does not commute in r⊥Ar⊥")
    return split


class PairCommutatorReport(NamedTuple):
    r: Projection
    b_carrier: Projection
    chain_ok: bool
    totally_noncompatible: bool
    generic_position: bool
    splitting: Splitting
    decomposition: Optional[CBSDecomposition] = None


def inequality_chain(p, e, tol=DEFAULT_TOLERANCE, d=None):
    """
    Check b ≤ b° ≤ [p, e] ≤ c° ∧ s° and that b° = [p, e] exactly when e
    commutes with b°, and collect the commutator flags of the pair.
    """
    p, e = _pair(p, e, tol)
    d = d or cbs_decompose(p, e, tol)
    r = pair_commutator(p, e, tol)
    carriers = cbs_carriers(d, tol)
    top = meet(carriers.c, carriers.s, tol)
    b_carrier = d.b_carrier
    for name, holds, residual in (
            ("b ≤ b°", psd_leq(d.b, b_carrier, tol),
             opnorm(d.b.entries - d.b.entries @ b_carrier.entries)),
            ("b° ≤ [p,e]", leq(b_carrier, r, tol),
             opnorm(b_carrier.entries - r.entries @ b_carrier.entries)),
            ("[p,e] ≤ c°∧s°", leq(r, top, tol),
             opnorm(r.entries - top.entries @ r.entries))):
        if not holds:
            raise InvariantViolation("commutator.chain", residual, name)
    if same_projection(b_carrier, r, tol) != commutes(e, b_carrier, tol):
        raise InvariantViolation(
            "commutator.equality_criterion", b_carrier.distance(r),
            "b° = [p,e] does not match e commuting with b°")
    return PairCommutatorReport(
        r=r, b_carrier=b_carrier, chain_ok=True,
        totally_noncompatible=r.is_unit,
        generic_position=b_carrier.is_unit,
        splitting=split_by_commutator(p, e, tol, r),
        decomposition=d)
