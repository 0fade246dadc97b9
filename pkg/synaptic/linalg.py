"""
Dense symmetric matrices
~~~~~~~~~~~~~~~~~~~~~~~~

Symmetric-matrix arithmetic, a cyclic Jacobi eigensolver, functional calculus
and the tolerance policy used by every other module.

All values are immutable after construction and every function is pure, so
the module is safe to use from several threads at once.
"""
import logging
from dataclasses import dataclass, fields, asdict
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from synaptic.errors import \
    NumericalFailure, DomainError, DimensionMismatch, ValidationError

log = logging.getLogger(__name__)

# Components smaller than this are skipped when fixing eigenvector signs
_SIGN_EPS = 1e-12


@dataclass(frozen=True)
class ToleranceConfig:
    """
    Thresholds for every tolerance-relative decision in the package.

    - rank_eps: an eigenvalue is treated as zero below rank_eps·(1+‖a‖)
    - comm_eps: a and b commute when ‖ab−ba‖ ≤ comm_eps·(1+‖a‖‖b‖)
    - psd_eps: allowed negative eigenvalue, scaled by 1+‖a‖, in order checks
    - eig_off_eps: relative off-diagonal Frobenius target of the eigensolver
    - agree_eps: two projections computed by different routes must agree
      to this operator-norm distance
    - max_sweeps: eigensolver sweep limit
    - max_commutator_set: largest set accepted by the finite-set commutator
    """
    rank_eps: float = 1e-9
    comm_eps: float = 1e-8
    psd_eps: float = 1e-9
    eig_off_eps: float = 1e-13
    agree_eps: float = 1e-7
    max_sweeps: int = 100
    max_commutator_set: int = 12

    def __post_init__(self):
        for field in fields(self):
            value = getattr(self, field.name)
            if not value > 0:
                raise ValidationError(
                    "tolerance", f"{field.name} must be positive, got {value}")
        if self.rank_eps >= 0.5:
            raise ValidationError(
                "tolerance", f"rank_eps must be below 0.5, got {self.rank_eps}")

    @classmethod
    def from_dict(cls, overrides):
        known = {field.name: field.type for field in fields(cls)}
        unknown = set(overrides) - set(known)
        if unknown:
            raise ValidationError(
                "tolerance", f"unknown settings: {', '.join(sorted(unknown))}")
        try:
            values = {name: (int if known[name] in (int, "int") else float)(value)
                      for name, value in overrides.items()}
        except (TypeError, ValueError) as ex:
            raise ValidationError("tolerance", str(ex)) from ex
        return cls(**values)

    def to_dict(self):
        return asdict(self)

    def rank_threshold(self, norm):
        return self.rank_eps * (1 + norm)

    def psd_threshold(self, norm):
        return self.psd_eps * (1 + norm)

    def comm_threshold(self, norm_a, norm_b):
        return self.comm_eps * (1 + norm_a * norm_b)


DEFAULT_TOLERANCE = ToleranceConfig()


def opnorm(m):
    """Operator (spectral) norm of a matrix; 0 for the empty matrix."""
    m = np.asarray(m, dtype=float)
    if not m.size:
        return 0.0
    return float(np.linalg.norm(m, 2))


class SymmetricElement:
    """
    An n×n real symmetric matrix, i.e. an element of the synaptic algebra of
    symmetric matrices. The input is symmetrized on construction, so entries
    are exactly symmetric; the unit of the algebra is the identity matrix.

    Dimension 0 is allowed and stands for the zero algebra (the corner of the
    zero projection).
    """
    __array_priority__ = 1000

    def __init__(self, entries):
        if isinstance(entries, SymmetricElement):
            # already symmetric; keep the cached eigendecompositions
            self._set(entries._m)
            self._eigen.update(entries._eigen)
            return
        m = np.array(entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(
                "square", f"expected a square matrix, got shape {m.shape}")
        if not np.isfinite(m).all():
            raise ValidationError("finite", "matrix has non-finite entries")
        self._set((m + m.T) / 2)

    def _set(self, m):
        m.setflags(write=False)
        self._m = m
        self._eigen = {}
        self._norm = None

    @classmethod
    def _wrap(cls, m, **attrs):
        """Construct without validation from an (almost) symmetric array."""
        obj = cls.__new__(cls)
        m = np.array(m, dtype=float)
        obj._set((m + m.T) / 2)
        for name, value in attrs.items():
            setattr(obj, name, value)
        return obj

    @classmethod
    def identity(cls, n):
        return SymmetricElement._wrap(np.eye(n))

    @classmethod
    def zeros(cls, n):
        return SymmetricElement._wrap(np.zeros((n, n)))

    @property
    def dim(self):
        return self._m.shape[0]

    @property
    def entries(self):
        return self._m

    @property
    def norm(self):
        if self._norm is None:
            self._norm = opnorm(self._m)
        return self._norm

    @property
    def trace(self):
        return float(np.trace(self._m))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._m
        return self._m.astype(dtype)

    def __repr__(self):
        return f"{type(self).__name__}({self._m.tolist()!r})"

    def _operand(self, other):
        other = np.asarray(other, dtype=float)
        if other.shape != self._m.shape:
            raise DimensionMismatch(
                f"shapes {self._m.shape} and {other.shape} differ")
        return other

    def __add__(self, other):
        return SymmetricElement(self._m + self._operand(other))

    __radd__ = __add__

    def __sub__(self, other):
        return SymmetricElement(self._m - self._operand(other))

    def __rsub__(self, other):
        return SymmetricElement(self._operand(other) - self._m)

    def __neg__(self):
        return SymmetricElement._wrap(-self._m)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return SymmetricElement._wrap(float(scalar) * self._m)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return SymmetricElement._wrap(self._m / float(scalar))

    def __matmul__(self, other):
        # products of symmetric elements are generally not symmetric
        return self._m @ self._operand(other)

    def __rmatmul__(self, other):
        return self._operand(other) @ self._m

    def compress(self, x):
        """Return x·a·x for a symmetric x (typically a projection)."""
        x = self._operand(x)
        return SymmetricElement(x @ self._m @ x)

    def square(self):
        return SymmetricElement(self._m @ self._m)

    def distance(self, other):
        """Operator-norm distance to another element of the same dimension."""
        return opnorm(self._m - self._operand(other))

    def isclose(self, other, atol):
        return self.distance(other) <= atol

    def eigen(self, tol=DEFAULT_TOLERANCE):
        key = (tol.eig_off_eps, tol.max_sweeps)
        if key not in self._eigen:
            self._eigen[key] = _jacobi(self._m, tol)
        return self._eigen[key]


def as_element(a):
    return a if isinstance(a, SymmetricElement) else SymmetricElement(a)


def check_same_dim(*elements):
    dims = {np.shape(element)[0] for element in elements}
    if len(dims) > 1:
        raise DimensionMismatch(
            f"elements have different dimensions: {sorted(dims)}")


class EigenDecomposition(NamedTuple):
    """Eigenvalues in non-decreasing order; eigenvectors are columns."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def norm(self):
        return float(np.abs(self.eigenvalues).max(initial=0.0))

    def rebuild(self, values=None):
        """Return Q·diag(values)·Qᵀ (the original matrix when values is None)."""
        if values is None:
            values = self.eigenvalues
        q = self.eigenvectors
        m = (q * values) @ q.T
        return (m + m.T) / 2

    def columns(self, mask):
        return self.eigenvectors[:, mask]


def _off_norm(a):
    return float(np.sqrt(np.sum(np.square(a - np.diag(np.diag(a))))))


@lru_cache(maxsize=None)
def _rounds(n):
    """
    Round-robin schedule: n − 1 rounds (n rounded up to even) of disjoint
    index pairs, together covering every pair p < q once.
    """
    players = list(range(n + n % 2))
    rounds = []
    for _ in range(len(players) - 1):
        half = len(players) // 2
        pairs = sorted((min(a, b), max(a, b))
                       for a, b in zip(players[:half], reversed(players[half:]))
                       if max(a, b) < n)
        rounds.append((np.array([p for p, _ in pairs], dtype=int),
                       np.array([q for _, q in pairs], dtype=int)))
        players = players[:1] + players[-1:] + players[1:-1]
    return tuple(rounds)


def _rotation(n, p, q, c, s):
    """The product of the disjoint plane rotations (p[i], q[i]) by (c[i], s[i])."""
    j = np.eye(n)
    j[p, p] = c
    j[q, q] = c
    j[p, q] = s
    j[q, p] = -s
    return j


def _canonical(values, vectors):
    """
    Sort eigenpairs by ascending eigenvalue (stably) and make the first
    non-negligible component of every eigenvector positive.
    """
    order = np.argsort(values, kind="stable")
    values = np.array(values, dtype=float)[order]
    vectors = np.array(vectors, dtype=float)[:, order]
    if len(values):
        first = (np.abs(vectors) > _SIGN_EPS).argmax(axis=0)
        signs = np.sign(vectors[first, np.arange(len(values))])
        signs[signs == 0] = 1
        vectors = vectors * signs
    values.setflags(write=False)
    vectors.setflags(write=False)
    return EigenDecomposition(values, vectors)


def _jacobi(m, tol):
    """
    Cyclic Jacobi eigenvalue iteration with a fixed sweep order.

    A sweep visits every off-diagonal pair once, in the rounds of `_rounds`;
    the rotations of one round touch disjoint rows and columns and are
    applied together. Terminates when the off-diagonal Frobenius norm drops
    below eig_off_eps·‖a‖_F. Eigenvalues are returned in ascending order and
    the first non-negligible component of every eigenvector is made
    positive, so the output is fully determined by the input.
    """
    a = np.array(m, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    target = tol.eig_off_eps * float(np.linalg.norm(a))
    off = _off_norm(a)
    sweeps = 0
    while off > target:
        if sweeps == tol.max_sweeps:
            residual = off / float(np.linalg.norm(m))
            raise NumericalFailure(
                f"Jacobi iteration did not converge in {sweeps} sweeps",
                residual=residual)
        sweeps += 1
        for p, q in _rounds(n):
            apq = a[p, q]
            active = apq != 0.0
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            with np.errstate(over="ignore"):
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.where(
                    np.abs(theta) > 1e150, 0.5 / theta,
                    np.copysign(1.0, theta)
                    / (np.abs(theta) + np.sqrt(theta * theta + 1.0)))
            c = 1.0 / np.sqrt(t * t + 1.0)
            rotation = _rotation(n, p, q, c, t * c)
            a = rotation.T @ a @ rotation
            a = (a + a.T) / 2
            a[p, q] = a[q, p] = 0.0
            v = v @ rotation
        off = _off_norm(a)
    log.debug("Jacobi: dim %d converged after %d sweeps", n, sweeps)
    return _canonical(np.diag(a), v)


def from_spectrum(eig, values, tol=DEFAULT_TOLERANCE):
    """
    Q·diag(values)·Qᵀ for the eigenvectors Q of `eig`, with its own
    eigendecomposition cached under `tol`.
    """
    element = SymmetricElement._wrap(eig.rebuild(values))
    element._eigen[(tol.eig_off_eps, tol.max_sweeps)] = \
        _canonical(values, eig.eigenvectors)
    return element


def sym_eigen(a, tol=DEFAULT_TOLERANCE):
    """Eigendecomposition of a symmetric element (cached on the element)."""
    return as_element(a).eigen(tol)


def apply_scalar_function(a, f: Callable, tol=DEFAULT_TOLERANCE):
    """
    Functional calculus: return Q·f(Λ)·Qᵀ.

    `f` is applied to the array of eigenvalues; scalar-only callables are
    applied element by element. Raises `DomainError` if `f` is undefined
    (non-finite) at some eigenvalue.
    """
    eig = sym_eigen(a, tol)
    with np.errstate(invalid="ignore", divide="ignore"):
        try:
            values = np.asarray(f(eig.eigenvalues), dtype=float)
        except (TypeError, ValueError):
            values = np.array([f(x) for x in eig.eigenvalues], dtype=float)
        if values.shape != eig.eigenvalues.shape:
            values = np.array([f(x) for x in eig.eigenvalues], dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        raise DomainError(
            f"function undefined at eigenvalue(s) {eig.eigenvalues[bad].tolist()}")
    return from_spectrum(eig, values, tol)


def min_eigenvalue(a, tol=DEFAULT_TOLERANCE):
    values = sym_eigen(a, tol).eigenvalues
    return float(values[0]) if len(values) else 0.0


def is_positive(a, tol=DEFAULT_TOLERANCE):
    """0 ≤ a within psd tolerance."""
    eig = sym_eigen(a, tol)
    if not len(eig.eigenvalues):
        return True
    return eig.eigenvalues[0] >= -tol.psd_threshold(eig.norm)


def psd_leq(a, b, tol=DEFAULT_TOLERANCE):
    """The order of the algebra: a ≤ b iff b − a is positive semidefinite."""
    check_same_dim(a, b)
    return is_positive(as_element(b) - a, tol)


def commutator_norm(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return opnorm(a @ b - b @ a)


def commutes(a, b, tol=DEFAULT_TOLERANCE):
    """aCb: ‖ab − ba‖ ≤ comm_eps·(1 + ‖a‖‖b‖)."""
    check_same_dim(a, b)
    return commutator_norm(a, b) <= tol.comm_threshold(opnorm(a), opnorm(b))
