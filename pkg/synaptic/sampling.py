"""
Random elements and pairs for the verification battery.

Every sampler takes a `numpy.random.Generator`, so a stream derived from
(seed, trial) reproduces the same instance on every run and schedule.
"""
from typing import NamedTuple

import numpy as np
from scipy.stats import ortho_group

from synaptic.elements import Effect, Projection
from synaptic.linalg import SymmetricElement

PAIR_KINDS = ("generic", "commuting", "split")
PAIR_KIND_WEIGHTS = (0.75, 0.125, 0.125)
# Probability that some eigenvalues of a sampled effect are snapped to 0 or 1
SNAP_PROBABILITY = 0.25


def random_rotation(rng, n):
    """A Haar-distributed orthogonal n×n matrix."""
    if n == 0:
        return np.zeros((0, 0))
    if n == 1:
        return np.array([[rng.choice((-1.0, 1.0))]])
    return ortho_group.rvs(n, random_state=rng)


def _from_spectrum(rotation, values):
    return (rotation * values) @ rotation.T


def effect_spectrum(rng, n, snap=None):
    """Uniform eigenvalues in [0, 1], some of them possibly snapped to 0 or 1."""
    values = rng.uniform(0.0, 1.0, n)
    if snap is None:
        snap = rng.random() < SNAP_PROBABILITY
    if snap:
        mask = rng.random(n) < 0.5
        values[mask] = np.round(values[mask])
    return values


def random_symmetric(rng, n, zeros=0):
    """Random symmetric element; `zeros` eigenvalues are exactly 0."""
    values = rng.standard_normal(n)
    values[:zeros] = 0.0
    return SymmetricElement(_from_spectrum(random_rotation(rng, n), values))


def random_positive(rng, n, rank=None, scale=1.0):
    """Random positive element of the given rank (random when None)."""
    if rank is None:
        rank = int(rng.integers(0, n + 1))
    values = np.zeros(n)
    values[:rank] = rng.uniform(0.1, 1.0, rank) * scale
    return SymmetricElement(_from_spectrum(random_rotation(rng, n), values))


def random_effect(rng, n, snap=None):
    return Effect(_from_spectrum(random_rotation(rng, n),
                                 effect_spectrum(rng, n, snap)))


def random_projection(rng, n, rank=None):
    """Projection onto random columns of a random rotation (rank 1..n−1)."""
    if rank is None:
        rank = int(rng.integers(1, n)) if n > 1 else int(rng.integers(0, 2))
    return Projection.from_basis(random_rotation(rng, n)[:, :rank])


def random_atom_in(rng, q):
    """Atom onto a random unit vector of range(q); q must be nonzero."""
    x = q.basis @ rng.standard_normal(q.rank)
    return Projection.from_basis((x / np.linalg.norm(x))[:, None])


def random_symmetry(rng, n):
    signs = rng.choice((-1.0, 1.0), n)
    return SymmetricElement(_from_spectrum(random_rotation(rng, n), signs))


def eigen_subset_projection(rng, a, tol):
    """Projection onto a random subset of eigenvectors of a; commutes with a."""
    eig = a.eigen(tol)
    mask = rng.random(a.dim) < 0.5
    return Projection.from_basis(eig.columns(mask))


class SampledPair(NamedTuple):
    p: Projection
    e: Effect
    kind: str


def _generic_block(rng, n):
    p = random_rotation(rng, n)[:, :int(rng.integers(1, n))]
    e = _from_spectrum(random_rotation(rng, n), effect_spectrum(rng, n))
    return p @ p.T, e


def _commuting_block(rng, n):
    rotation = random_rotation(rng, n)
    rank = int(rng.integers(0, n + 1))
    p = rotation[:, :rank]
    return p @ p.T, _from_spectrum(rotation, effect_spectrum(rng, n))


def sample_pair(rng, n, kind=None):
    """
    Random pair (p, e) of dimension n ≥ 2.

    - generic: p and e use independent random eigenbases
    - commuting: p and e share an eigenbasis
    - split: a commuting block direct-summed with a generic block of
      dimension at least 2, in a random basis (needs n ≥ 3)
    """
    if kind is None:
        kind = rng.choice(PAIR_KINDS, p=PAIR_KIND_WEIGHTS)
    if kind == "split" and n < 3:
        kind = "generic"
    if kind == "generic":
        p, e = _generic_block(rng, n)
    elif kind == "commuting":
        p, e = _commuting_block(rng, n)
    else:
        m = int(rng.integers(1, n - 1))
        (pc, ec), (pg, eg) = _commuting_block(rng, m), _generic_block(rng, n - m)
        p, e = np.zeros((n, n)), np.zeros((n, n))
        p[:m, :m], p[m:, m:] = pc, pg
        e[:m, :m], e[m:, m:] = ec, eg
        rotation = random_rotation(rng, n)
        p, e = rotation @ p @ rotation.T, rotation @ e @ rotation.T
    return SampledPair(Projection(p), Effect(e), str(kind))
