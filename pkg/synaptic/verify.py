"""
Randomized verification battery
===============================

Every structural statement the package relies on is registered here as a
named check. A check receives a `TrialContext` (a random pair (p, e) and the
quantities derived from it) and its own random stream, and returns an
`Outcome`. The battery runs every selected check on every trial and collects
pass/fail counts and the worst residual per check.

Random streams are derived from (seed, trial) for the pair and from
(seed, trial, check) for each check, so a report depends only on its
arguments, not on filtering or on the order in which trials run.
"""
import logging
import re
import time
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import List, NamedTuple

import numpy as np
import pandas as pd
from scipy import linalg as sla

from synaptic.calculus import \
    abs_value, carrier, peirce_decompose, offdiagonal_norm, polar_decompose, \
    signum, spectral_resolution
from synaptic.cbs import \
    atom_structure, cbs_carriers, cbs_decompose, generic_position_residuals, \
    is_generic_position, restrict_cbs
from synaptic.commutator import \
    characterization_check, commutant_projections, corner_commutator, \
    inequality_chain, pair_commutator, pair_commutator_via_closure, \
    reducing_closure, split_by_commutator
from synaptic.effects import \
    Corner, corner_orthosupplement, is_projection_free, orthosupplement, \
    restrict_to_corner
from synaptic.elements import Effect, Projection
from synaptic.errors import PreconditionError, SynapticError
from synaptic.infimum import \
    atom_identity_residuals, inf_with_atom_complement, inf_with_projection, \
    largest_scaling, tightness
from synaptic.lattice import \
    are_orthogonal, finite_set_commutator, join, leq, marsden_commutator, \
    meet, same_projection
from synaptic.linalg import \
    SymmetricElement, DEFAULT_TOLERANCE, apply_scalar_function, \
    commutator_norm, commutes, opnorm, psd_leq, sym_eigen
from synaptic.sampling import \
    eigen_subset_projection, random_atom_in, random_effect, \
    random_positive, random_projection, random_rotation, random_symmetric, \
    random_symmetry, sample_pair
from synaptic.serialize import pair_to_dict

log = logging.getLogger(__name__)

# Accuracy of the eigensolver, relative to 1+‖a‖
EIGEN_EPS = 1e-12
# Accuracy of the algebraic identities, relative to 1+‖e‖
IDENTITY_EPS = 1e-10
# Agreement of the closed-form infimum with the oracles
ORACLE_EPS = 1e-9
# Identities dividing by α are only checked above this value
ALPHA_FLOOR = 1e-3

CHECKS = OrderedDict()


class Outcome(NamedTuple):
    passed: bool
    residual: float = 0.0
    message: str = ""


def check(name):
    """Register a check under `name`; names are unique."""
    def register(func):
        assert name not in CHECKS, name
        CHECKS[name] = func
        return func
    return register


def within(residual, bound):
    residual = float(residual)
    return Outcome(residual <= bound, residual)


def holds(*conditions, residual=0.0):
    return Outcome(all(bool(c) for c in conditions), float(residual))


def _sym(m):
    return SymmetricElement._wrap(m)


class TrialContext:
    """A pair (p, e) and the lazily computed quantities checks share."""

    def __init__(self, p, e, tol=DEFAULT_TOLERANCE, seed=0, trial=0,
                 kind="input"):
        self.p = Projection.coerce(p, tol)
        self.e = Effect.coerce(e, tol)
        self.tol = tol
        self.seed = seed
        self.trial = trial
        self.kind = kind

    @classmethod
    def sample(cls, seed, trial, dim, tol=DEFAULT_TOLERANCE):
        pair = sample_pair(np.random.default_rng([seed, trial]), dim)
        return cls(pair.p, pair.e, tol, seed, trial, pair.kind)

    @property
    def n(self):
        return self.e.dim

    @property
    def identity_bound(self):
        return IDENTITY_EPS * (1 + self.e.norm)

    @cached_property
    def d(self):
        return cbs_decompose(self.p, self.e, self.tol, check=False)

    @cached_property
    def resolution(self):
        return spectral_resolution(self.e, self.tol)

    @cached_property
    def r(self):
        return pair_commutator(self.p, self.e, self.tol, self.resolution)

    def rng(self, name):
        index = list(CHECKS).index(name)
        return np.random.default_rng([self.seed, self.trial, index + 1])

    def random_atom(self, rng):
        """A random atom below p, or anywhere when p = 0."""
        q = self.p if self.p.rank else Projection.unit(self.n)
        return random_atom_in(rng, q)


def run_check(ctx, name):
    try:
        return CHECKS[name](ctx, ctx.rng(name))
    except SynapticError as ex:
        log.info("check %s failed on trial %d: %s", name, ctx.trial, ex)
        return Outcome(False, getattr(ex, "residual", float("nan")), str(ex))


# Linear algebra

@check("eigen.reconstruction")
def check_eigen_reconstruction(ctx, rng):
    a = random_symmetric(rng, ctx.n, zeros=int(rng.integers(0, ctx.n)))
    eig = sym_eigen(a, ctx.tol)
    return within(a.distance(eig.rebuild()), EIGEN_EPS * (1 + a.norm))


@check("eigen.orthogonality")
def check_eigen_orthogonality(ctx, rng):
    a = random_symmetric(rng, ctx.n)
    eig = sym_eigen(a, ctx.tol)
    q = eig.eigenvectors
    outcome = within(opnorm(q.T @ q - np.eye(ctx.n)), EIGEN_EPS)
    return holds(outcome.passed, np.all(np.diff(eig.eigenvalues) >= 0),
                 residual=outcome.residual)


@check("order.psd_transitive")
def check_order_transitive(ctx, rng):
    n, tol = ctx.n, ctx.tol
    a = random_symmetric(rng, n)
    b = a + random_positive(rng, n)
    c = b + random_positive(rng, n)
    return holds(psd_leq(a, a, tol), psd_leq(a, b, tol), psd_leq(b, c, tol),
                 psd_leq(a, c, tol))


@check("calculus.function_commutes")
def check_function_commutes(ctx, rng):
    functions = (np.exp, np.tanh, np.sin, lambda x: x ** 3 - x)
    a = random_symmetric(rng, ctx.n)
    h = apply_scalar_function(
        a, functions[int(rng.integers(len(functions)))], ctx.tol)
    return within(commutator_norm(h, a),
                  ctx.tol.comm_threshold(h.norm, a.norm))


# Carriers and the Peirce decomposition

@check("carrier.annihilation")
def check_carrier_annihilation(ctx, rng):
    n, tol = ctx.n, ctx.tol
    rotation = random_rotation(rng, n)
    k = int(rng.integers(1, n))
    values = rng.uniform(0.5, 2.0, n) * rng.choice((-1.0, 1.0), n)
    a = _sym((rotation[:, :k] * values[:k]) @ rotation[:, :k].T)
    if rng.random() < 0.5:
        b = _sym((rotation[:, k:] * values[k:]) @ rotation[:, k:].T)
    else:
        b = random_symmetric(rng, n)
    bound = tol.rank_threshold(a.norm * b.norm)
    product = opnorm(a @ b)
    return holds((product <= bound) == (opnorm(carrier(a, tol) @ b) <= bound),
                 residual=product)


@check("carrier.monotone")
def check_carrier_monotone(ctx, rng):
    a = random_positive(rng, ctx.n)
    b = a + random_positive(rng, ctx.n)
    ca, cb = carrier(a, ctx.tol), carrier(b, ctx.tol)
    return holds(leq(ca, cb, ctx.tol),
                 residual=opnorm(ca.entries - cb.entries @ ca.entries))


@check("carrier.sum_is_join")
def check_carrier_sum(ctx, rng):
    n, tol = ctx.n, ctx.tol
    parts = [random_positive(rng, n, rank=int(rng.integers(0, n)))
             for _ in range(int(rng.integers(2, 5)))]
    total = reduce(lambda x, y: x + y, parts)
    joined = reduce(lambda x, y: join(x, y, tol),
                    (carrier(a, tol) for a in parts))
    direct = carrier(total, tol)
    return holds(same_projection(direct, joined, tol),
                 residual=direct.distance(joined))


@check("carrier.product")
def check_carrier_product(ctx, rng):
    n, tol = ctx.n, ctx.tol
    rotation = random_rotation(rng, n)

    def element():
        values = rng.uniform(0.5, 2.0, n) * rng.choice((-1.0, 1.0), n)
        values[rng.random(n) < 0.4] = 0.0
        return _sym((rotation * values) @ rotation.T)

    a, b = element(), element()
    ca, cb = carrier(a, tol), carrier(b, tol)
    product = carrier(_sym(a @ b), tol)
    meet_ab = meet(ca, cb, tol)
    residual = opnorm(ca @ cb - meet_ab.entries)
    return holds(same_projection(product, meet_ab, tol),
                 residual <= tol.agree_eps, residual=residual)


@check("peirce.diagonal_zero")
def check_peirce_diagonal_zero(ctx, rng):
    n, tol = ctx.n, ctx.tol
    if rng.random() < 0.25:
        a = SymmetricElement.zeros(n)
    else:
        a = random_positive(rng, n, rank=int(rng.integers(1, n + 1)))
    parts = peirce_decompose(a, ctx.p, tol)
    bound = tol.rank_threshold(a.norm)
    total = parts.pap + parts.offdiagonal + parts.perp_a_perp
    residual = a.distance(total)
    return holds((parts.diagonal.norm <= bound) == (a.norm <= bound),
                 residual <= 1e-13 * (1 + a.norm), residual=residual)


@check("peirce.offdiag_commutation")
def check_peirce_offdiag(ctx, rng):
    p, tol = ctx.p, ctx.tol
    a = ctx.e
    if rng.random() < 0.5:
        a = peirce_decompose(a, p, tol).diagonal
    parts = peirce_decompose(a, p, tol)
    bound = tol.comm_threshold(p.norm, a.norm)
    offdiag = parts.offdiagonal.norm
    return holds(commutes(p, a, tol) == (offdiag <= bound)
                 == (offdiagonal_norm(a, p, tol) <= bound), residual=offdiag)


# Spectral resolution and symmetries

@check("spectral.cut_structure")
def check_cut_structure(ctx, rng):
    res, e, tol = ctx.resolution, ctx.e, ctx.tol
    cuts, thresholds = res.cuts, res.thresholds
    midpoints = [(x + y) / 2 for x, y in zip(thresholds, thresholds[1:])]
    return holds(
        all(leq(x, y, tol) for x, y in zip(cuts, cuts[1:])),
        all(x < y for x, y in zip(thresholds, thresholds[1:])),
        all(x < y for x, y in zip(res.ranks, res.ranks[1:])),
        cuts[-1].is_unit,
        all(commutes(cut, e, tol) for cut in cuts),
        res.cut_at(thresholds[0] - 1).is_zero,
        all(res.cut_at(mu) is cut for mu, cut in zip(midpoints, cuts)))


@check("spectral.cut_commutation")
def check_cut_commutation(ctx, rng):
    e, tol = ctx.e, ctx.tol
    if rng.random() < 0.5:
        q = eigen_subset_projection(rng, e, tol)
    else:
        q = ctx.p
    return holds(commutes(q, e, tol)
                 == all(commutes(q, cut, tol) for cut in ctx.resolution.cuts),
                 residual=commutator_norm(q, e))


@check("symmetry.conjugation")
def check_symmetry_conjugation(ctx, rng):
    n, tol = ctx.n, ctx.tol
    u = random_symmetry(rng, n)
    a = random_symmetric(rng, n, zeros=int(rng.integers(0, n)))
    if rng.random() < 0.5:
        b = a + random_positive(rng, n)
    else:
        b = random_symmetric(rng, n)
    uau, ubu = a.compress(u), b.compress(u)
    residual = carrier(a, tol).compress(u).distance(carrier(uau, tol))
    return holds(psd_leq(a, b, tol) == psd_leq(uau, ubu, tol),
                 residual <= tol.agree_eps, residual=residual)


@check("polar.decomposition")
def check_polar(ctx, rng):
    n, tol = ctx.n, ctx.tol
    a = random_symmetric(rng, n, zeros=int(rng.integers(0, n)))
    polar = polar_decompose(a, tol)
    u, absolute = polar.symmetry.element.entries, polar.abs.entries
    t = signum(a, tol).element.entries
    residual = max(a.distance(absolute @ u), a.distance(u @ absolute),
                   opnorm(u @ u - np.eye(n)))
    ca = carrier(a, tol)
    return holds(
        residual <= IDENTITY_EPS * (1 + a.norm),
        same_projection(carrier(abs_value(a, tol), tol), ca, tol),
        opnorm(t @ t - ca.entries) <= tol.agree_eps,
        commutes(polar.symmetry.element, a, tol),
        residual=residual)


# Projection lattice

def _intersection(p, q):
    """Projection onto range(p) ∩ range(q), from a null space."""
    basis = sla.null_space(np.vstack((p.perp.entries, q.perp.entries)),
                           rcond=1e-9)
    return Projection.from_basis(basis)


@check("lattice.orthomodular")
def check_orthomodular(ctx, rng):
    tol = ctx.tol
    p = random_projection(rng, ctx.n)
    q = join(p, random_projection(rng, ctx.n), tol)
    return holds(same_projection(q, join(p, meet(q, p.perp, tol), tol), tol))


@check("lattice.de_morgan")
def check_de_morgan(ctx, rng):
    tol = ctx.tol
    p, q = random_projection(rng, ctx.n), random_projection(rng, ctx.n)
    complement = join(p, q, tol).perp
    spanned = Projection.onto(np.hstack((p.basis, q.basis)), tol)
    return holds(
        same_projection(complement, meet(p.perp, q.perp, tol), tol),
        same_projection(complement, _intersection(p.perp, q.perp), tol),
        same_projection(join(p, q, tol), spanned, tol))


@check("lattice.distributive")
def check_distributive(ctx, rng):
    n, tol = ctx.n, ctx.tol
    rotation = random_rotation(rng, n)
    x = Projection.from_basis(rotation[:, rng.random(n) < 0.5])
    y = Projection.from_basis(rotation[:, rng.random(n) < 0.5])
    inner = random_rotation(rng, x.rank)[:, :int(rng.integers(0, x.rank + 1))]
    outer = random_rotation(rng, n - x.rank)[
        :, :int(rng.integers(0, n - x.rank + 1))]
    z = Projection.from_basis(
        np.hstack((x.basis @ inner, x.perp.basis @ outer)))
    # x commutes with y and with z, so every arrangement is distributive
    f, g, h = [(x, y, z)[i] for i in rng.permutation(3)]
    left = meet(f, join(g, h, tol), tol)
    right = join(meet(f, g, tol), meet(f, h, tol), tol)
    return holds(same_projection(left, right, tol),
                 residual=left.distance(right))


@check("lattice.meet_is_effect_infimum")
def check_meet_infimum(ctx, rng):
    n, tol = ctx.n, ctx.tol
    rotation = random_rotation(rng, n)
    common = int(rng.integers(0, n))
    shared, rest = rotation[:, :common], rotation[:, common:]

    def extend():
        k = int(rng.integers(0, n - common + 1))
        return Projection.onto(
            np.hstack((shared, rest @ rng.standard_normal((n - common, k)))),
            tol)

    p, q = extend(), extend()
    m = meet(p, q, tol)
    atoms = [random_atom_in(rng, Projection.unit(n))]
    atoms += [random_atom_in(rng, x) for x in (p, m) if x.rank]
    below = []
    for w in atoms:
        beta = min(largest_scaling(p, w, tol), largest_scaling(q, w, tol))
        below.append(psd_leq(beta * w, m, tol))
    return holds(psd_leq(m, p, tol), psd_leq(m, q, tol), *below)


@check("lattice.marsden_zero_iff_commute")
def check_marsden(ctx, rng):
    p, tol = ctx.p, ctx.tol
    if rng.random() < 0.5:
        q = eigen_subset_projection(rng, p, tol)
    else:
        q = random_projection(rng, ctx.n)
    m = marsden_commutator(p, q, tol)
    return holds(m.is_zero == commutes(p, q, tol),
                 commutes(m, p, tol), commutes(m, q, tol))


@check("lattice.pqp_carrier")
def check_pqp_carrier(ctx, rng):
    p, tol = ctx.p, ctx.tol
    q = random_projection(rng, ctx.n)
    left = carrier(q.compress(p), tol)
    right = meet(p, join(p.perp, q, tol), tol)
    return holds(same_projection(left, right, tol),
                 residual=left.distance(right))


# Finite-set commutators

def _family(rng, n, commuting):
    size = int(rng.integers(1, 5))
    if commuting:
        rotation = random_rotation(rng, n)
        return [Projection.from_basis(rotation[:, rng.random(n) < 0.5])
                for _ in range(size)]
    return [random_projection(rng, n) for _ in range(size)]


@check("commutator_set.replacement")
def check_set_replacement(ctx, rng):
    tol = ctx.tol
    family = _family(rng, ctx.n, commuting=False) + [ctx.p]
    index = int(rng.integers(len(family)))
    replaced = list(family)
    replaced[index] = replaced[index].perp
    first = finite_set_commutator(family, tol)
    second = finite_set_commutator(replaced, tol)
    return holds(same_projection(first, second, tol),
                 residual=first.distance(second))


@check("commutator_set.commutes_with_members")
def check_set_members(ctx, rng):
    tol = ctx.tol
    family = _family(rng, ctx.n, commuting=rng.random() < 0.5)
    r = finite_set_commutator(family, tol)
    pieces = [meet(w, r.perp, tol) for w in family]
    pairwise = all(commutes(x, y, tol) for x in family for y in family)
    return holds(
        all(commutes(r, w, tol) for w in family),
        all(commutes(x, y, tol) for x in pieces for y in pieces),
        r.is_zero == pairwise)


# Largest subprojections and effects

@check("subprojections.carrier_identities")
def check_subprojection_carriers(ctx, rng):
    e, tol = ctx.e, ctx.tol
    z, t = ctx.d.z, ctx.d.t
    ce = carrier(e, tol)
    residual_carrier = carrier(e - z, tol)
    return holds(
        same_projection(residual_carrier, Projection(ce - z, tol), tol),
        same_projection(residual_carrier,
                        Projection(np.eye(ctx.n) - t.entries - z.entries, tol),
                        tol),
        are_orthogonal(z, t, tol),
        commutes(z, e, tol), commutes(t, e, tol),
        psd_leq(z, e, tol), psd_leq(e, ce, tol),
        psd_leq(t, orthosupplement(e, tol), tol))


@check("subprojections.maximality")
def check_subprojection_maximality(ctx, rng):
    e, tol, z = ctx.e, ctx.tol, ctx.d.z
    results = []
    if z.rank:
        rotation = random_rotation(rng, z.rank)
        w = Projection.from_basis(
            z.basis @ rotation[:, :int(rng.integers(1, z.rank + 1))])
        results += [psd_leq(w, e, tol), leq(w, z, tol)]
    w = random_projection(rng, ctx.n)
    results.append(not psd_leq(w, e, tol) or leq(w, z, tol))
    return holds(*results)


@check("subprojections.residual_projection_free")
def check_residual_projection_free(ctx, rng):
    e, tol, d = ctx.e, ctx.tol, ctx.d
    m = e.entries
    ez = Effect(m - d.z.entries, tol)
    defect = Effect(m - m @ m, tol)
    residual = opnorm(m - m @ m - (ez.entries - ez.entries @ ez.entries))
    return holds(
        is_projection_free(ez, tol), is_projection_free(defect, tol),
        residual <= ctx.identity_bound,
        same_projection(carrier(defect, tol),
                        meet(d.t.perp, d.z.perp, tol), tol),
        residual=residual)


@check("effect.square_criterion")
def check_square_criterion(ctx, rng):
    n, tol = ctx.n, ctx.tol
    a = random_positive(rng, n, scale=rng.uniform(0.5, 1.5))
    unit = np.eye(n)
    return holds(psd_leq(a.square(), unit, tol) == psd_leq(a, unit, tol))


@check("effect.below_projection")
def check_below_projection(ctx, rng):
    n, tol, p = ctx.n, ctx.tol, ctx.p
    branch = rng.random()
    if branch < 1 / 3:
        f = Effect(random_effect(rng, n).compress(p), tol)
    elif branch < 2 / 3:
        f = Effect(p + random_effect(rng, n).compress(p.perp), tol)
    else:
        f = ctx.e
    fm, pm = f.entries, p.entries
    bound = tol.rank_threshold(f.norm)
    below, above = psd_leq(f, p, tol), psd_leq(p, f, tol)
    return holds(
        below == (opnorm(fm - fm @ pm) <= bound and
                  opnorm(fm - pm @ fm) <= bound),
        above == (opnorm(pm - fm @ pm) <= bound),
        not (below or above) or commutes(p, f, tol))


@check("effect.commuting_meet")
def check_commuting_meet(ctx, rng):
    f, tol = ctx.e, ctx.tol
    q = eigen_subset_projection(rng, f, tol)
    m = Effect(q.entries @ f.entries, tol)
    atoms = [random_atom_in(rng, Projection.unit(ctx.n))]
    if q.rank:
        atoms.append(random_atom_in(rng, q))
    below = []
    for w in atoms:
        beta = min(largest_scaling(q, w, tol), largest_scaling(f, w, tol))
        below.append(psd_leq(beta * w, m, tol))
    return holds(psd_leq(m, q, tol), psd_leq(m, f, tol), *below)


@check("effect.corner_spectral")
def check_corner_spectral(ctx, rng):
    e, tol = ctx.e, ctx.tol
    q = eigen_subset_projection(rng, e, tol)
    if q.is_zero:
        return holds(True)
    corner = Corner(q, tol)
    inner = spectral_resolution(corner.compress_effect(e), tol)
    shift = tol.rank_threshold(e.norm)
    results = []
    for mu, cut in zip(inner.thresholds, inner.cuts):
        expected = meet(ctx.resolution.cut_at(mu + shift), q, tol)
        results.append(same_projection(corner.lift_projection(cut),
                                       expected, tol))
    return holds(*results)


@check("effect.corner_components")
def check_corner_components(ctx, rng):
    e, tol = ctx.e, ctx.tol
    q = eigen_subset_projection(rng, e, tol)
    inside, outside = restrict_to_corner(e, q, tol), restrict_to_corner(e, q.perp, tol)
    supplement = corner_orthosupplement(inside, q, tol)
    expected = orthosupplement(e, tol).compress(q)
    residual = max(e.distance(inside + outside), supplement.distance(expected))
    return within(residual, ctx.identity_bound)


# CBS decomposition

def _sqrt_bound(ctx):
    """Bound for statements read off kernels of square roots."""
    return np.sqrt(ctx.tol.rank_threshold(ctx.e.norm))


@check("cbs.cosine_square")
def check_cosine_square(ctx, rng):
    d, tol = ctx.d, ctx.tol
    p, m, c = d.p.entries, d.e.entries, d.c.entries
    expected = np.eye(ctx.n) - p + p @ m + m @ p - m
    residual = max(opnorm(c @ c - expected),
                   opnorm(c @ c @ p - p @ m @ p))
    return holds(residual <= ctx.identity_bound,
                 psd_leq(_sym(c @ c), d.c, tol), residual=residual)


@check("cbs.sine_square")
def check_sine_square(ctx, rng):
    d, tol = ctx.d, ctx.tol
    p, m, s = d.p.entries, d.e.entries, d.s.entries
    pp = d.p.perp.entries
    expected = p - p @ m - m @ p + m
    residual = max(opnorm(s @ s - expected),
                   opnorm(s @ s @ pp - pp @ m @ pp))
    return holds(residual <= ctx.identity_bound,
                 psd_leq(_sym(s @ s), d.s, tol), residual=residual)


@check("cbs.cos_sin_sum")
def check_cos_sin_sum(ctx, rng):
    return within(ctx.d.residuals()["cos_sin_sum"], ctx.identity_bound)


@check("cbs.square_identity")
def check_square_identity(ctx, rng):
    d = ctx.d
    c, s, j, x = d.c.entries, d.s.entries, d.j.entries, d.offdiag.entries
    cs = c @ s
    residual = opnorm(cs @ cs - j @ j - x @ x)
    return holds(residual <= ctx.identity_bound,
                 d.square_residual <= ctx.identity_bound,
                 residual=max(residual, d.square_residual))


@check("cbs.reconstruction")
def check_reconstruction(ctx, rng):
    d = ctx.d
    residuals = d.residuals()
    p, pp, m = d.p.entries, d.p.perp.entries, d.e.entries
    bk = d.b.entries @ d.k.element.entries
    residual = max(residuals["reconstruction"], residuals["offdiag_bk"],
                   residuals["exchange"],
                   opnorm(p @ bk - p @ m @ pp), opnorm(pp @ bk - pp @ m @ p))
    return within(residual, ctx.identity_bound)


@check("cbs.commutation")
def check_cbs_commutation(ctx, rng):
    residuals = ctx.d.residuals()
    residual = max(residuals["p_commutation"], residuals["cs_commutation"])
    return within(residual, ctx.tol.comm_threshold(1.0, 1.0))


@check("cbs.carrier_formulas")
def check_carrier_formulas(ctx, rng):
    d, tol = ctx.d, ctx.tol
    formulas = cbs_carriers(d, tol)
    residual = opnorm(d.c_carrier @ d.s_carrier - formulas.cs.entries)
    return within(residual, tol.agree_eps)


@check("cbs.carrier_bounds")
def check_carrier_bounds(ctx, rng):
    d, tol = ctx.d, ctx.tol
    return holds(psd_leq(d.s_carrier.perp, d.c2, tol),
                 psd_leq(d.c_carrier.perp, d.s2, tol))


@check("cbs.sine_carrier_complement")
def check_sine_carrier_complement(ctx, rng):
    d, tol = ctx.d, ctx.tol
    x = d.s_carrier.perp
    xe, xp = x.entries @ d.e.entries, x.entries @ d.p.entries
    residual = max(opnorm(xe - xp), opnorm(xp - meet(x, d.p, tol).entries))
    return within(residual, _sqrt_bound(ctx))


def _generic_position_pair(rng, n):
    """A pair that is in generic position with probability one."""
    m = max(1, n // 2)
    p = Projection.from_basis(random_rotation(rng, 2 * m)[:, :m])
    return p, random_effect(rng, 2 * m, snap=False)


@check("cbs.generic_position")
def check_generic_position(ctx, rng):
    tol = ctx.tol
    results = []
    for d in (ctx.d, cbs_decompose(*_generic_position_pair(rng, ctx.n), tol)):
        if is_generic_position(d):
            results.extend(generic_position_residuals(d, tol).values())
    return holds(len(results) > 0, *results)


@check("cbs.projection_case")
def check_projection_case(ctx, rng):
    p, tol = ctx.p, ctx.tol
    f = random_projection(rng, ctx.n)
    d = cbs_decompose(p, f, tol)
    residual = max(d.j.norm, opnorm(d.b.entries - d.c.entries @ d.s.entries))
    r = pair_commutator(p, f, tol)
    return holds(residual <= tol.agree_eps,
                 same_projection(r, marsden_commutator(p, f, tol), tol),
                 same_projection(r, d.b_carrier, tol), residual=residual)


@check("cbs.corner_restriction")
def check_corner_restriction(ctx, rng):
    tol = ctx.tol
    choices = [ctx.r, ctx.r.perp]
    choices += commutant_projections(ctx.p, ctx.e, rng, 1, tol, ctx.r)
    q = choices[int(rng.integers(len(choices)))]
    restrict_cbs(ctx.d, q, tol)
    return holds(True)


@check("cbs.atom_structure")
def check_atom_structure(ctx, rng):
    tol = ctx.tol
    atom = ctx.random_atom(rng)
    if commutes(atom, ctx.e, tol):
        return holds(True)
    d = cbs_decompose(atom, ctx.e, tol)
    structure = atom_structure(atom, ctx.e, tol, d)
    return holds(0 < structure.beta <= 1,
                 leq(atom, d.b_carrier, tol), leq(structure.v, d.b_carrier, tol),
                 commutes(structure.v, d.b, tol))


# Pair commutator

@check("commutator.zero_iff_commute")
def check_zero_iff_commute(ctx, rng):
    return holds(ctx.r.is_zero == commutes(ctx.p, ctx.e, ctx.tol))


@check("commutator.dual_algorithm")
def check_dual_algorithm(ctx, rng):
    closure = pair_commutator_via_closure(ctx.p, ctx.e, ctx.tol, ctx.d)
    return holds(closure.rank == ctx.r.rank,
                 same_projection(closure, ctx.r, ctx.tol),
                 residual=closure.distance(ctx.r))


@check("commutator.chain")
def check_chain(ctx, rng):
    return holds(inequality_chain(ctx.p, ctx.e, ctx.tol, ctx.d).chain_ok)


@check("commutator.equality_criterion")
def check_equality_criterion(ctx, rng):
    b_carrier = ctx.d.b_carrier
    return holds(same_projection(b_carrier, ctx.r, ctx.tol)
                 == commutes(ctx.e, b_carrier, ctx.tol))


@check("commutator.commutes_with_cbs")
def check_commutes_with_cbs(ctx, rng):
    d, r, tol = ctx.d, ctx.r, ctx.tol
    elements = (d.p, d.e, d.c, d.s, d.j, d.b, d.k.element)
    return holds(*(commutes(r, x, tol) for x in elements),
                 residual=max(commutator_norm(r, x) for x in elements))


@check("commutator.commutant")
def check_commutant(ctx, rng):
    p, e, tol = ctx.p, ctx.e, ctx.tol
    samples = commutant_projections(p, e, rng, 2, tol, ctx.r)
    samples.append(reducing_closure(
        rng.standard_normal((ctx.n, 1)), [p, e], tol))
    return holds(*(commutes(q, p, tol) and commutes(q, e, tol)
                   and commutes(q, ctx.r, tol) for q in samples))


def _total_noncompatibility(d, tol):
    return [d.c_carrier.is_unit, d.s_carrier.is_unit] + [
        meet(x, y, tol).is_zero for x in (d.p, d.p.perp) for y in (d.z, d.t)]


@check("commutator.totally_noncompatible_consequences")
def check_total_noncompatibility(ctx, rng):
    tol = ctx.tol
    results = []
    if ctx.r.is_unit:
        results += _total_noncompatibility(ctx.d, tol)
    split = split_by_commutator(ctx.p, ctx.e, tol, ctx.r)
    if ctx.r.rank:
        results += _total_noncompatibility(
            cbs_decompose(split.p_r, split.e_r, tol), tol)
    return holds(*results)


@check("commutator.splitting")
def check_splitting(ctx, rng):
    split = split_by_commutator(ctx.p, ctx.e, ctx.tol, ctx.r)
    return holds(split.p_r.dim == ctx.r.rank)


@check("commutator.corner_consistency")
def check_corner_consistency(ctx, rng):
    p, e, r, tol = ctx.p, ctx.e, ctx.r, ctx.tol
    results = []
    for q in [r, r.perp] + commutant_projections(p, e, rng, 2, tol, r):
        inner = corner_commutator(p, e, q, tol)
        results.append(same_projection(inner, meet(q, r, tol), tol))
    return holds(*results)


@check("commutator.characterization")
def check_characterization(ctx, rng):
    p, e, r, tol = ctx.p, ctx.e, ctx.r, ctx.tol
    results = [characterization_check(p, e, r, tol, rng, 2, ctx.d)]
    if not r.is_zero:
        results.append(not characterization_check(
            p, e, Projection.zero(ctx.n), tol, d=ctx.d))
    if not r.is_unit:
        results.append(not characterization_check(
            p, e, Projection.unit(ctx.n), tol, d=ctx.d))
    return holds(*results)


@check("commutator.generic_implies_total")
def check_generic_implies_total(ctx, rng):
    tol = ctx.tol
    p, e = _generic_position_pair(rng, ctx.n)
    d = cbs_decompose(p, e, tol)
    results = [not is_generic_position(ctx.d) or ctx.r.is_unit,
               is_generic_position(d), pair_commutator(p, e, tol).is_unit]
    return holds(*results)


# Infima

@check("infimum.lower_bound")
def check_infimum_lower_bound(ctx, rng):
    tol = ctx.tol
    atom = ctx.random_atom(rng)
    record = inf_with_atom_complement(atom, ctx.e, tol)
    return holds(psd_leq(record.infimum, ctx.e, tol),
                 psd_leq(record.infimum, atom.perp, tol))


@check("infimum.closed_form_agreement")
def check_infimum_closed_form(ctx, rng):
    e, tol = ctx.e, ctx.tol
    atom = ctx.random_atom(rng)
    record = inf_with_atom_complement(atom, e, tol, check=True)
    if not record.is_general:
        return holds(e.distance(record.infimum) == 0)
    m = e.entries
    expected = m - m @ atom.entries @ m / record.alpha
    return within(record.infimum.distance(expected),
                  ctx.identity_bound * (1 + 1 / record.alpha))


@check("infimum.maximality")
def check_infimum_maximality(ctx, rng):
    e, tol, n = ctx.e, ctx.tol, ctx.n
    atom = ctx.random_atom(rng)
    record = inf_with_atom_complement(atom, e, tol)
    infimum = record.infimum
    root = apply_scalar_function(
        infimum, lambda x: np.sqrt(np.clip(x, 0.0, None)), tol).entries
    gamma = rng.random()
    g = root @ random_effect(rng, n).entries @ root
    candidates = [_sym(gamma * infimum.entries + (1 - gamma) * g)]
    u = atom.perp.basis @ rng.standard_normal(n - 1)
    u = np.outer(u, u) / (u @ u)
    candidates.append(_sym(largest_scaling(e, u, tol) * u))
    results = [psd_leq(f, infimum, tol) for f in candidates
               if psd_leq(f, e, tol) and psd_leq(f, atom.perp, tol)]
    residual = 0.0
    if record.is_general:
        y = atom.perp.entries @ (np.eye(n) - record.a_element.entries)
        f = random_effect(rng, n).compress(atom.perp).entries
        residual = opnorm(y @ f @ y.T - f)
    results.append(residual <= ctx.identity_bound * (1 + 1 / record.alpha)
                   if record.is_general else True)
    return holds(len(results) > 1, *results, residual=residual)


@check("infimum.atom_oracle")
def check_atom_oracle(ctx, rng):
    e, tol, n = ctx.e, ctx.tol, ctx.n
    w = random_atom_in(rng, Projection.unit(n))
    beta = largest_scaling(e, w, tol)
    if n == 2:
        infimum = inf_with_atom_complement(w.perp, e, tol).infimum
    else:
        infimum = inf_with_projection(e, w, tol)
    # each fold over an atom of w⊥ adds its own rounding
    return within(infimum.distance(beta * w), ORACLE_EPS * (n - 1))


@check("infimum.order_independence")
def check_order_independence(ctx, rng):
    e, tol, n = ctx.e, ctx.tol, ctx.n
    q = random_projection(rng, n)
    k = n - q.rank
    first = inf_with_projection(e, q, tol, order=rng.permutation(k))
    basis = q.perp.basis @ random_rotation(rng, k)
    second = inf_with_projection(e, q, tol, order=rng.permutation(k),
                                 basis=basis)
    return within(first.distance(second), ORACLE_EPS)


@check("infimum.atom_identities")
def check_atom_identities(ctx, rng):
    atom = ctx.random_atom(rng)
    record = inf_with_atom_complement(atom, ctx.e, ctx.tol)
    if record.alpha < ALPHA_FLOOR:
        return holds(True)
    residuals = atom_identity_residuals(atom, ctx.e, ctx.tol)
    return within(max(residuals.values()),
                  ctx.identity_bound / record.alpha ** 2)


@check("infimum.tightness")
def check_tightness(ctx, rng):
    atom = ctx.random_atom(rng)
    record = inf_with_atom_complement(atom, ctx.e, ctx.tol)
    if record.alpha < ALPHA_FLOOR:
        return holds(True)
    result = tightness(atom, ctx.e, record, ctx.tol)
    return holds(result.gap_rank <= 1, result.bump_breaks)


# Theorem, lemma, corollary and definition labels and the checks testing them
STATEMENTS = OrderedDict([
    ("lm:carrierofsum", ("carrier.sum_is_join",)),
    ("lm:carrierofprod", ("carrier.product",)),
    ("th:distributive", ("lattice.distributive",)),
    ("lm:infsupinP", ("lattice.meet_is_effect_infimum",)),
    ("lm:diagzero", ("peirce.diagonal_zero",)),
    ("lm:offdiagzero", ("peirce.offdiag_commutation",)),
    ("th:largestsubproj", ("subprojections.carrier_identities",
                           "subprojections.maximality",
                           "subprojections.residual_projection_free")),
    ("co:zPropscor", ("subprojections.residual_projection_free",)),
    ("lm:largestsubpro", ("subprojections.residual_projection_free",)),
    ("lm:effectconds", ("effect.square_criterion",)),
    ("th:effleqproj", ("effect.below_projection",)),
    ("co:projleqeff", ("effect.below_projection",)),
    ("lm:eCf", ("effect.commuting_meet",)),
    ("lm:SRofqaq", ("effect.corner_spectral",)),
    ("lm:components", ("effect.corner_components",)),
    ("lm:ecsProps", ("cbs.cosine_square", "cbs.sine_square",
                     "cbs.cos_sin_sum")),
    ("lm:ecsProps.iii", ("cbs.cos_sin_sum",)),
    ("lm:squareofcs", ("cbs.square_identity",)),
    ("th:bProps", ("cbs.reconstruction",)),
    ("th:CBSdecomp", ("cbs.reconstruction", "cbs.commutation")),
    ("th:ecarcs", ("cbs.carrier_formulas", "cbs.carrier_bounds",
                   "cbs.sine_carrier_complement")),
    ("lm:einP", ("cbs.projection_case",)),
    ("lm:pCe", ("commutator.zero_iff_commute",)),
    ("th:esubq", ("cbs.corner_restriction",)),
    ("lm:bdg", ("cbs.atom_structure",)),
    ("lm:totnoncomp", ("cbs.generic_position",
                       "commutator.generic_implies_total")),
    ("df:[pe]", ("commutator_set.replacement",
                 "commutator_set.commutes_with_members",
                 "commutator.zero_iff_commute")),
    ("th:altchar[p,e]", ("commutator.dual_algorithm",)),
    ("th:commutatorineq", ("commutator.chain",)),
    ("co:equalityofcoms", ("commutator.equality_criterion",)),
    ("lm:randCBS", ("commutator.commutes_with_cbs", "commutator.commutant")),
    ("th:rProps", ("commutator.splitting",)),
    ("th:totnoncomp", ("commutator.splitting",
                       "commutator.totally_noncompatible_consequences")),
    ("th:cominqAq", ("commutator.corner_consistency",)),
    ("th:Characterize[p,e]", ("commutator.characterization",)),
    ("lm:pAp", ("infimum.atom_oracle",)),
    ("th:MGL3.8", ("infimum.lower_bound", "infimum.closed_form_agreement",
                   "infimum.atom_oracle", "infimum.tightness")),
    ("lm:ygystar", ("infimum.closed_form_agreement", "infimum.maximality")),
    ("lm:MB01", ("infimum.atom_identities",)),
    ("co:MG3.9", ("infimum.order_independence",)),
])


def statement_checks(label):
    """
    Checks testing the statement `label`; a sub-item suffix ("th:ecarcs.ii")
    falls back to the enclosing statement. None for unknown labels.
    """
    while label:
        if label in STATEMENTS:
            return STATEMENTS[label]
        label, dot, _ = label.rpartition(".")
        if not dot:
            return None
    return None


def statements_of(name):
    return [label for label, names in STATEMENTS.items() if name in names]


def _tokens(selection):
    # commas inside brackets belong to labels such as "th:altchar[p,e]"
    return [token.strip() for token in re.split(r",(?![^\[]*\])", selection)
            if token.strip()]


def select_checks(selection=None):
    """
    Names of the checks matching a comma-separated selection of check names,
    prefixes ("cbs" selects every "cbs.*" check) or statement labels
    ("th:commutatorineq"); all checks for None.
    """
    if not selection:
        return list(CHECKS)
    selected = set()
    for token in _tokens(selection):
        if ":" in token:
            labelled = statement_checks(token)
            if labelled is None:
                raise PreconditionError(f"unknown statement label '{token}'")
            selected.update(labelled)
        else:
            selected.update(name for name in CHECKS
                            if name == token or name.startswith(token + "."))
    names = [name for name in CHECKS if name in selected]
    if not names:
        raise PreconditionError(f"no checks match '{selection}'")
    return names


class TrialResult(NamedTuple):
    rows: list
    failures: list


def run_trial(seed, trial, dim, names, tol=DEFAULT_TOLERANCE):
    ctx = TrialContext.sample(seed, trial, dim, tol)
    rows, failures = [], []
    for name in names:
        outcome = run_check(ctx, name)
        rows.append((name, trial, dim, outcome.passed, outcome.residual))
        if not outcome.passed:
            failures.append(pair_to_dict(
                ctx.p, ctx.e, tol, check=name, seed=seed, trial=trial,
                kind=ctx.kind, residual=outcome.residual,
                message=outcome.message))
    log.debug("trial %d (dim %d, %s) done", trial, dim, ctx.kind)
    return TrialResult(rows, failures)


@dataclass
class VerificationReport:
    seed: int
    trials: int
    dims: List[int]
    table: pd.DataFrame
    failures: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def total(self):
        return int(self.table["passed"].sum() + self.table["failed"].sum())

    @property
    def ok(self):
        return not self.failures

    def statement_table(self):
        """Pass/fail counts per statement label, over the checks that ran."""
        rows = [(label, name) for label, names in STATEMENTS.items()
                for name in names if name in self.table.index]
        if not rows:
            return pd.DataFrame(columns=["passed", "failed"])
        links = pd.DataFrame(rows, columns=["statement", "check"])
        joined = links.join(self.table[["passed", "failed"]], on="check")
        return joined.groupby("statement", sort=False)[
            ["passed", "failed"]].sum()

    def to_dict(self):
        """The report without wall-clock time, so it is reproducible."""
        return {
            "seed": self.seed,
            "trials": self.trials,
            "dims": list(self.dims),
            "total_checks": self.total,
            "checks": {
                name: {"passed": int(row.passed), "failed": int(row.failed),
                       "worst_residual": float(row.worst_residual),
                       "statements": statements_of(name)}
                for name, row in self.table.iterrows()},
            "statements": {
                label: {"passed": int(row.passed), "failed": int(row.failed)}
                for label, row in self.statement_table().iterrows()},
            "failures": self.failures,
        }

    def to_text(self):
        lines = [
            f"seed {self.seed}, {self.trials} trials, "
            f"dims {self.dims[0]}..{self.dims[-1]}",
            self.table.to_string(float_format=lambda x: f"{x:.3e}"),
            f"{self.total} checks, {len(self.failures)} failed, "
            f"{self.elapsed:.2f} s",
        ]
        return "\n".join(lines)


def run_battery(seed=0, trials=100, dims=(2, 3, 4, 5), selection=None,
                tol=DEFAULT_TOLERANCE, jobs=1):
    """
    Run the selected checks on `trials` random pairs; trial i has dimension
    dims[i % len(dims)]. With jobs > 1, trials run on a thread pool.
    """
    if trials < 1:
        raise PreconditionError("the number of trials must be positive")
    dims = list(dims)
    if not dims or min(dims) < 2:
        raise PreconditionError("dimensions must be at least 2")
    names = select_checks(selection)
    log.info("running %d checks on %d trials", len(names), trials)
    start = time.perf_counter()

    def task(trial):
        return run_trial(seed, trial, dims[trial % len(dims)], names, tol)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(task, range(trials)))
    else:
        results = [task(trial) for trial in range(trials)]

    frame = pd.DataFrame(
        [row for result in results for row in result.rows],
        columns=["check", "trial", "dim", "passed", "residual"])
    frame["failed"] = ~frame["passed"]
    table = frame.groupby("check", sort=False).agg(
        passed=("passed", "sum"), failed=("failed", "sum"),
        worst_residual=("residual", "max"))
    failures = [failure for result in results for failure in result.failures]
    return VerificationReport(
        seed, trials, dims, table, failures, time.perf_counter() - start)


def replay(pair_input):
    """Rerun the check a serialized failure names, on its stored pair."""
    if pair_input.replay is None:
        raise PreconditionError("input does not name a check to replay")
    name, seed, trial = pair_input.replay
    if name not in CHECKS:
        raise PreconditionError(f"unknown check '{name}'")
    ctx = TrialContext(pair_input.p, pair_input.e, pair_input.tol,
                       int(seed), int(trial), "replay")
    return run_check(ctx, name)
