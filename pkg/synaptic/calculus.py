"""
Calculus on single elements: carriers, square roots, absolute values,
positive parts, signum, polar and spectral decompositions and the Peirce
decomposition with respect to a projection.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np

from synaptic.elements import Projection
from synaptic.errors import DomainError, InvariantViolation, ValidationError
from synaptic.linalg import \
    SymmetricElement, DEFAULT_TOLERANCE, as_element, apply_scalar_function, \
    check_same_dim, from_spectrum, opnorm, sym_eigen

log = logging.getLogger(__name__)


class PartialSymmetry(NamedTuple):
    """An element t whose square is a projection, kept with that projection."""
    element: SymmetricElement
    support: Projection

    @classmethod
    def from_element(cls, t, tol=DEFAULT_TOLERANCE):
        t = as_element(t)
        try:
            support = Projection(t.square(), tol)
        except ValidationError as ex:
            raise ValidationError(
                "partial_symmetry", "square is not a projection") from ex
        return cls(t, support)


class Symmetry(NamedTuple):
    """An element u with u² = 1."""
    element: SymmetricElement

    @classmethod
    def from_element(cls, u, tol=DEFAULT_TOLERANCE):
        u = as_element(u)
        if not is_symmetry(u, tol):
            raise ValidationError("symmetry", "square is not the identity")
        return cls(u)

    def conjugate(self, a):
        """Return u·a·u."""
        return as_element(a).compress(self.element)


class PolarDecomposition(NamedTuple):
    abs: SymmetricElement
    symmetry: Symmetry


class PeirceParts(NamedTuple):
    """a = pap + (pap⊥ + p⊥ap) + p⊥ap⊥"""
    pap: SymmetricElement
    offdiagonal: SymmetricElement
    perp_a_perp: SymmetricElement

    @property
    def diagonal(self):
        return self.pap + self.perp_a_perp


def is_symmetry(u, tol=DEFAULT_TOLERANCE):
    u = as_element(u)
    return u.square().distance(np.eye(u.dim)) <= tol.rank_threshold(u.norm)


def carrier(a, tol=DEFAULT_TOLERANCE):
    """
    The carrier (support projection) a° of `a`: the projection onto the span of
    eigenvectors whose eigenvalues exceed rank_eps·(1+‖a‖) in absolute value.
    """
    if isinstance(a, Projection):
        return a
    eig = sym_eigen(a, tol)
    mask = np.abs(eig.eigenvalues) > tol.rank_threshold(eig.norm)
    return Projection.from_basis(eig.columns(mask))


def sqrt_psd(a, tol=DEFAULT_TOLERANCE):
    """
    The positive square root of a ≥ 0.

    Eigenvalues in [−psd_eps, 0) are clamped to 0 and eigenvalues below the
    rank threshold are treated as exact zeros, so the carrier of the root
    matches the carrier of `a`.
    """
    eig = sym_eigen(a, tol)
    values = eig.eigenvalues
    if len(values) and values[0] < -tol.psd_threshold(eig.norm):
        raise DomainError(
            f"square root of an element with eigenvalue {values[0]:.6g}")
    values = np.where(values <= tol.rank_threshold(eig.norm), 0.0, values)
    return from_spectrum(eig, np.sqrt(values), tol)


def abs_value(a, tol=DEFAULT_TOLERANCE):
    """|a| = (a²)^½, evaluated on the spectrum of a."""
    return apply_scalar_function(a, np.abs, tol)


def positive_part(a, tol=DEFAULT_TOLERANCE):
    """a⁺ = ½(|a| + a)."""
    return apply_scalar_function(a, lambda x: np.maximum(x, 0.0), tol)


def signum(a, tol=DEFAULT_TOLERANCE):
    """
    The signum t of `a`: +1 and −1 on the eigenspaces of positive and negative
    eigenvalues, 0 on the (numerical) kernel. t² = a° and a = |a|·t.
    """
    eig = sym_eigen(a, tol)
    values = eig.eigenvalues
    thresh = tol.rank_threshold(eig.norm)
    signs = np.where(np.abs(values) > thresh, np.sign(values), 0.0)
    t = SymmetricElement._wrap(eig.rebuild(signs))
    support = Projection.from_basis(eig.columns(signs != 0))
    return PartialSymmetry(t, support)


def canonical_extension(t, tol=DEFAULT_TOLERANCE):
    """u = t + (t²)⊥, a symmetry agreeing with t on the support of t."""
    if not isinstance(t, PartialSymmetry):
        t = PartialSymmetry.from_element(t, tol)
    return Symmetry(t.element + t.support.perp)


def polar_decompose(a, tol=DEFAULT_TOLERANCE):
    """a = |a|·u = u·|a| with u the canonical extension of the signum of a."""
    return PolarDecomposition(
        abs_value(a, tol), canonical_extension(signum(a, tol), tol))


@dataclass(frozen=True)
class SpectralResolution:
    """
    The distinct cuts p_{a,λ} = 1 − ((a − λ)⁺)° of an element, one for each
    distinct (merged) eigenvalue λ, in increasing order. The cut for any real
    μ equals the cut of the largest threshold not exceeding μ.
    """
    thresholds: Tuple[float, ...]
    cuts: Tuple[Projection, ...]
    source_dim: int

    def __len__(self):
        return len(self.cuts)

    def cut_at(self, mu):
        index = int(np.searchsorted(self.thresholds, mu, side="right")) - 1
        if index < 0:
            return Projection.zero(self.source_dim)
        return self.cuts[index]

    def cut_set(self, drop_trivial=False):
        """Cuts as a list; with `drop_trivial`, without 0 and 1."""
        if not drop_trivial:
            return list(self.cuts)
        return [cut for cut in self.cuts if not (cut.is_zero or cut.is_unit)]

    @property
    def ranks(self):
        return [cut.rank for cut in self.cuts]


def _merge_eigenvalues(values, gap):
    """Split sorted eigenvalues into groups of neighbours closer than `gap`."""
    groups = []
    for index, value in enumerate(values):
        if groups and value - values[groups[-1][-1]] <= gap:
            groups[-1].append(index)
        else:
            groups.append([index])
    return groups


def spectral_resolution(a, tol=DEFAULT_TOLERANCE, cross_check=True):
    """
    Compute the spectral resolution of `a`.

    Eigenvalues closer than 2·rank_eps·(1+‖a‖) are merged and the group
    maximum is used as the threshold. Cuts are read from the eigenbasis; with
    `cross_check`, each is also computed as 1 − ((a − λ)⁺)° and the two must
    agree within agree_eps.
    """
    a = as_element(a)
    eig = sym_eigen(a, tol)
    values = eig.eigenvalues
    groups = _merge_eigenvalues(values, 2 * tol.rank_threshold(eig.norm))
    for group in groups:
        if len(group) > 1 and values[group[-1]] > values[group[0]]:
            log.debug("merged eigenvalues %s",
                      values[group[0]:group[-1] + 1].tolist())
    thresholds, cuts = [], []
    for group in groups:
        last = group[-1]
        threshold = float(values[last])
        mask = np.arange(len(values)) <= last
        cut = Projection.from_basis(eig.columns(mask))
        if cross_check:
            shifted = a - threshold * np.eye(a.dim)
            other = carrier(positive_part(shifted, tol), tol).perp
            if other.rank != cut.rank \
                    or cut.distance(other) > tol.agree_eps:
                raise InvariantViolation(
                    "spectral.cut_routes", cut.distance(other),
                    f"cut at {threshold:.6g} differs between routes")
        thresholds.append(threshold)
        cuts.append(cut)
    return SpectralResolution(tuple(thresholds), tuple(cuts), a.dim)


def peirce_decompose(a, p, tol=DEFAULT_TOLERANCE):
    """Peirce decomposition of `a` with respect to the projection `p`."""
    a = as_element(a)
    p = Projection.coerce(p, tol)
    check_same_dim(a, p)
    m, q, qperp = a.entries, p.entries, p.perp.entries
    off = q @ m @ qperp
    return PeirceParts(
        SymmetricElement._wrap(q @ m @ q),
        SymmetricElement._wrap(off + off.T),
        SymmetricElement._wrap(qperp @ m @ qperp))


def offdiagonal_norm(a, p, tol=DEFAULT_TOLERANCE):
    """‖pap⊥‖, zero exactly when a commutes with p."""
    p = Projection.coerce(p, tol)
    return opnorm(p.entries @ np.asarray(a) @ p.perp.entries)
