"""Effects and projections as validated symmetric elements."""
import logging

import numpy as np
from scipy import linalg as sla

from synaptic.errors import ValidationError
from synaptic.linalg import \
    SymmetricElement, EigenDecomposition, DEFAULT_TOLERANCE

log = logging.getLogger(__name__)


class Effect(SymmetricElement):
    """
    An element e with 0 ≤ e ≤ 1.

    The spectrum must lie in [−psd_eps, 1+psd_eps] (scaled by 1+‖e‖); it is
    then clamped to [0, 1].
    """

    def __init__(self, entries, tol=DEFAULT_TOLERANCE):
        super().__init__(entries)
        eig = self.eigen(tol)
        values = eig.eigenvalues
        if not len(values):
            return
        thresh = tol.psd_threshold(eig.norm)
        if values[0] < -thresh or values[-1] > 1 + thresh:
            raise ValidationError(
                "effect",
                f"spectrum [{values[0]:.6g}, {values[-1]:.6g}] is not within [0, 1]")
        clamped = np.clip(values, 0.0, 1.0)
        if (clamped != values).any():
            log.debug("effect spectrum clamped by %.3g",
                      np.max(np.abs(clamped - values)))
            self._set(eig.rebuild(clamped))
            self._cache_eigen(tol, clamped, eig.eigenvectors)

    def _cache_eigen(self, tol, values, vectors):
        values = np.array(values, dtype=float)
        values.setflags(write=False)
        self._eigen[(tol.eig_off_eps, tol.max_sweeps)] = \
            EigenDecomposition(values, vectors)

    @classmethod
    def coerce(cls, a, tol=DEFAULT_TOLERANCE):
        """Return `a` if it is already an instance of `cls`, else validate it."""
        if isinstance(a, cls):
            return a
        return cls(np.asarray(a), tol)


class Projection(Effect):
    """
    An idempotent element p = p².

    Eigenvalues within rank_eps of 0 or 1 are snapped, and the matrix is
    rebuilt from an orthonormal basis of its range, which is kept as `basis`.
    """

    def __init__(self, entries, tol=DEFAULT_TOLERANCE):
        SymmetricElement.__init__(self, entries)
        eig = self.eigen(tol)
        values = eig.eigenvalues
        thresh = tol.rank_threshold(eig.norm)
        ones = np.abs(values - 1) <= thresh
        zeros = np.abs(values) <= thresh
        if not (ones | zeros).all():
            bad = values[~(ones | zeros)]
            raise ValidationError(
                "projection",
                f"eigenvalues {bad.tolist()} are neither 0 nor 1")
        self._init_basis(eig.columns(ones))
        self._cache_eigen(tol, ones.astype(float), eig.eigenvectors)

    def _init_basis(self, basis):
        basis = np.array(basis, dtype=float)
        basis.setflags(write=False)
        m = basis @ basis.T
        self._set((m + m.T) / 2)
        self.basis = basis
        self._perp = None
        assert abs(self.trace - self.rank) < 0.01

    @classmethod
    def from_basis(cls, basis):
        """Projection onto the span of orthonormal columns (not checked)."""
        obj = cls.__new__(cls)
        obj._init_basis(basis)
        return obj

    @classmethod
    def onto(cls, vectors, tol=DEFAULT_TOLERANCE):
        """Projection onto the span of arbitrary columns."""
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        if vectors.shape[1] == 0 or not np.any(vectors):
            return cls.zero(vectors.shape[0])
        return cls.from_basis(sla.orth(vectors, rcond=tol.rank_eps))

    @classmethod
    def zero(cls, n):
        return cls.from_basis(np.zeros((n, 0)))

    @classmethod
    def unit(cls, n):
        return cls.from_basis(np.eye(n))

    @property
    def rank(self):
        return self.basis.shape[1]

    @property
    def is_zero(self):
        return self.rank == 0

    @property
    def is_unit(self):
        return self.rank == self.dim

    @property
    def perp(self):
        """The orthocomplement 1 − p."""
        if self._perp is None:
            n = self.dim
            if self.rank == 0:
                basis = np.eye(n)
            elif self.rank == n:
                basis = np.zeros((n, 0))
            else:
                basis = sla.null_space(self.basis.T)
            perp = Projection.from_basis(basis)
            perp._perp = self
            self._perp = perp
        return self._perp
