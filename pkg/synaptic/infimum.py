"""
Infima of an effect with the orthocomplement of a projection.

For an atom p = vvᵀ and an effect e, let α = vᵀev (so pep = αp). Then
e ∧ p⊥ = e − α⁻¹·epe when α > 0 and e ∧ p⊥ = e when α = 0. The infimum with
any q follows by folding over the atoms of an orthonormal basis of q⊥.
"""
import logging
from typing import NamedTuple, Optional

import numpy as np
from scipy import optimize

from synaptic.elements import Effect, Projection
from synaptic.errors import InvariantViolation, PreconditionError
from synaptic.linalg import \
    SymmetricElement, DEFAULT_TOLERANCE, check_same_dim, opnorm, psd_leq

log = logging.getLogger(__name__)

# Relative accuracy (scaled by 1+‖e‖) of the closed-form identities
IDENTITY_EPS = 1e-10
# Bisection accuracy of the lower-bound oracle
ORACLE_XTOL = 1e-12


def _atom(p, tol):
    p = Projection.coerce(p, tol)
    if p.rank != 1:
        raise PreconditionError(f"expected an atom, got rank {p.rank}")
    return p


def atom_mean(p, e, tol=DEFAULT_TOLERANCE):
    """The scalar α with pep = αp, for an atom p; 0 ≤ α ≤ 1."""
    p = _atom(p, tol)
    check_same_dim(p, e)
    v = p.basis[:, 0]
    return float(np.clip(v @ np.asarray(e) @ v, 0.0, 1.0))


class AtomInfimumRecord(NamedTuple):
    alpha: float
    a_element: Optional[SymmetricElement]
    infimum: Effect
    branch: str

    @property
    def is_general(self):
        return self.branch == "general"


def _closed_form_parts(p, e):
    m, q = np.asarray(e), np.asarray(p)
    qperp = np.eye(len(q)) - q
    half = q @ m @ qperp
    offdiag = half + half.T
    s2_perp = qperp @ m @ qperp
    return offdiag, s2_perp, qperp


def inf_with_atom_complement(p, e, tol=DEFAULT_TOLERANCE, check=True):
    """
    Compute e ∧ p⊥ for an atom p.

    With `check`, the result is compared with (s² − α⁻¹b²)p⊥ and with yey*
    for y = p⊥(1 − a), a = α⁻¹(pep⊥ + p⊥ep).
    """
    p = _atom(p, tol)
    e = Effect.coerce(e, tol)
    check_same_dim(p, e)
    alpha = atom_mean(p, e, tol)
    ev = e.entries @ p.basis[:, 0]
    # a small α alone does not make e ⊥ p: ‖ev‖² can be as large as α‖e‖
    if alpha == 0 or (alpha < tol.rank_eps
                      and np.linalg.norm(ev) <= tol.rank_threshold(e.norm)):
        if check and not psd_leq(e, p.perp, tol):
            raise InvariantViolation(
                "infimum.alpha_zero", alpha, "e is not below p⊥")
        return AtomInfimumRecord(alpha, None, e, "alpha_zero")

    infimum = Effect(e.entries - np.outer(ev, ev) / alpha, tol)
    offdiag, s2_perp, qperp = _closed_form_parts(p, e)
    a_element = SymmetricElement._wrap(offdiag / alpha)
    if check:
        bound = IDENTITY_EPS * (1 + e.norm) * (1 + 1 / alpha)
        closed = s2_perp - qperp @ (offdiag @ offdiag) @ qperp / alpha
        y = qperp @ (np.eye(e.dim) - a_element.entries)
        for name, other in (("infimum.closed_form", closed),
                            ("infimum.y_conjugation", y @ e.entries @ y.T)):
            residual = infimum.distance((other + other.T) / 2)
            if residual > bound:
                raise InvariantViolation(name, residual)
    return AtomInfimumRecord(alpha, a_element, infimum, "general")


def atom_identity_residuals(p, e, tol=DEFAULT_TOLERANCE):
    """
    Residuals of the identities relating e, its off-diagonal part and α for
    an atom p with α > 0:

    - e = αp + αa + s²p⊥
    - α²a² = b²
    - epe = α²p + α²a + b²p⊥
    - (ap)² = (pa)² = 0
    """
    p = _atom(p, tol)
    alpha = atom_mean(p, e, tol)
    if alpha < tol.rank_eps:
        raise PreconditionError("α vanishes")
    m, q = np.asarray(e), p.entries
    offdiag, s2_perp, qperp = _closed_form_parts(p, e)
    a = offdiag / alpha
    b2 = offdiag @ offdiag
    ap, pa = a @ q, q @ a
    return {
        "e_expansion": opnorm(m - (alpha * q + alpha * a + s2_perp)),
        "a_square": opnorm(alpha ** 2 * a @ a - b2),
        "epe": opnorm(m @ q @ m - (alpha ** 2 * q + alpha ** 2 * a
                                   + b2 @ qperp)),
        "ap_nilpotent": max(opnorm(ap @ ap), opnorm(pa @ pa)),
    }


def inf_with_projection(e, q, tol=DEFAULT_TOLERANCE, order=None, basis=None,
                        check=True):
    """
    e ∧ q, folding `inf_with_atom_complement` over the atoms of q⊥.

    The atoms are the columns of `basis` (an orthonormal basis of range(q⊥),
    by default the one kept by q⊥), visited in `order`.
    """
    e = Effect.coerce(e, tol)
    q = Projection.coerce(q, tol)
    check_same_dim(e, q)
    if q.is_unit:
        return e
    basis = q.perp.basis if basis is None else np.asarray(basis, dtype=float)
    if order is None:
        order = range(basis.shape[1])
    result = e
    for index in order:
        atom = Projection.from_basis(basis[:, [index]])
        result = inf_with_atom_complement(atom, result, tol, check).infimum
    if check:
        for upper in (e, q):
            if not psd_leq(result, upper, tol):
                raise InvariantViolation(
                    "infimum.lower_bound",
                    -float(np.linalg.eigvalsh(
                        np.asarray(upper) - result.entries)[0]))
    log.debug("infimum over %d atoms, trace %.6g",
              basis.shape[1], result.trace)
    return result


def largest_scaling(upper, lower, tol=DEFAULT_TOLERANCE):
    """
    The largest β ∈ [0, 1] with β·lower ≤ upper, by bisection on the smallest
    eigenvalue of upper − β·lower (computed by LAPACK, independently of the
    package's eigensolver).

    β·lower ≤ upper forces lower to vanish on the kernel of upper, so a lower
    element reaching into that kernel gives 0 exactly. Otherwise the bisection
    runs on the range of upper, where upper is invertible and no slack is
    needed.
    """
    upper, lower = np.asarray(upper, dtype=float), np.asarray(lower, dtype=float)
    check_same_dim(upper, lower)
    values, vectors = np.linalg.eigh((upper + upper.T) / 2)
    norm = float(np.max(np.abs(values)))
    if values[0] < -tol.psd_threshold(norm):
        log.warning("lower-bound oracle: upper element is not positive")
        return 0.0
    threshold = tol.rank_threshold(norm)
    if opnorm(lower) <= threshold:
        return 1.0
    kernel = vectors[:, values <= threshold]
    if kernel.shape[1] and \
            np.sqrt(opnorm(kernel.T @ lower @ kernel)) > threshold:
        return 0.0
    image = vectors[:, values > threshold]
    if not image.shape[1]:
        return 1.0
    upper, lower = image.T @ upper @ image, image.T @ lower @ image

    def margin(beta):
        return np.linalg.eigvalsh(upper - beta * lower)[0]

    if margin(1.0) >= -64 * np.finfo(float).eps * (1 + norm):
        return 1.0
    return float(optimize.bisect(margin, 0.0, 1.0, xtol=ORACLE_XTOL))


def atom_lower_bound_oracle(e, w, tol=DEFAULT_TOLERANCE):
    """max{β ∈ [0, 1] : β·w ≤ e} for an atom w; e ∧ w is β·w."""
    w = _atom(w, tol)
    return largest_scaling(e, w, tol)


class Tightness(NamedTuple):
    gap_rank: int
    bump_breaks: bool


def tightness(p, e, record, tol=DEFAULT_TOLERANCE, bump=1e-3):
    """
    e − (e ∧ p⊥) has rank at most one, and raising the infimum by `bump`
    along the unit direction of p⊥ep no longer stays below e.
    """
    p = _atom(p, tol)
    gap = np.asarray(e) - record.infimum.entries
    values = np.linalg.eigvalsh(gap)
    gap_rank = int(np.sum(np.abs(values) > tol.rank_threshold(opnorm(gap))))
    direction = p.perp.entries @ np.asarray(e) @ p.basis[:, 0]
    norm = np.linalg.norm(direction)
    if not record.is_general or norm <= tol.rank_eps:
        return Tightness(gap_rank, True)
    direction = direction / norm
    raised = record.infimum.entries + bump * np.outer(direction, direction)
    return Tightness(gap_rank, not psd_leq(raised, e, tol))
