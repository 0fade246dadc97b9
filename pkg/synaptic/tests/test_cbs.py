import unittest
from dataclasses import replace

import numpy as np

from synaptic.cbs import \
    atom_structure, cbs_carriers, cbs_decompose, commutator_effect, \
    cosine_sine, generic_position_residuals, is_generic_position, j_effect, \
    restrict_cbs
from synaptic.elements import Effect, Projection
from synaptic.errors import InvariantViolation, PreconditionError
from synaptic.golden import r3_pair
from synaptic.lattice import join, same_projection
from synaptic.sampling import sample_pair


def split_pair():
    """A commuting line direct-summed with a two-dimensional generic pair."""
    p = Projection(np.diag([0., 1., 0.]))
    e = Effect([[0.1, 0, 0], [0, 0.5, 0.2], [0, 0.2, 0.5]])
    return p, e


class TestParts(unittest.TestCase):
    def test_commuting(self):
        p = Projection(np.diag([1., 0.]))
        e = Effect(np.diag([0.3, 0.6]))
        cs = cosine_sine(p, e)
        np.testing.assert_allclose(cs.c2.entries, np.diag([0.3, 0.4]),
                                   atol=1e-15)
        np.testing.assert_allclose(cs.s2.entries, np.diag([0.7, 0.6]),
                                   atol=1e-15)
        np.testing.assert_allclose(j_effect(p, e).entries,
                                   np.sqrt(np.diag([0.21, 0.24])), atol=1e-12)
        parts = commutator_effect(p, e)
        self.assertEqual(parts.b.norm, 0)
        np.testing.assert_allclose(parts.k.element.entries, np.eye(2),
                                   atol=1e-15)
        self.assertLess(parts.square_residual, 1e-12)

    def test_two_dimensional(self):
        p = Projection(np.diag([1., 0.]))
        e = Effect([[0.5, 0.2], [0.2, 0.5]])
        cs = cosine_sine(p, e)
        np.testing.assert_allclose(cs.c.entries, np.sqrt(0.5) * np.eye(2),
                                   atol=1e-12)
        np.testing.assert_allclose(cs.s.entries, np.sqrt(0.5) * np.eye(2),
                                   atol=1e-12)
        np.testing.assert_allclose(j_effect(p, e).entries,
                                   np.sqrt(0.21) * np.eye(2), atol=1e-12)
        parts = commutator_effect(p, e)
        np.testing.assert_allclose(parts.b.entries, 0.2 * np.eye(2),
                                   atol=1e-12)
        np.testing.assert_allclose(parts.k.element.entries,
                                   [[0, 1], [1, 0]], atol=1e-12)
        self.assertLess(parts.square_residual, 1e-12)

    def test_projection_has_no_j(self):
        p, _ = r3_pair()
        q = Projection(np.diag([1., 1., 0.]))
        self.assertLess(j_effect(p, q).norm, 1e-12)


class TestExample(unittest.TestCase):
    def setUp(self):
        self.p, self.e = r3_pair()
        self.d = cbs_decompose(self.p, self.e)

    def test_residuals(self):
        for name, residual in self.d.residuals().items():
            self.assertLess(residual, 1e-10, name)
        self.assertLess(self.e.distance(self.d.reconstruction()), 1e-12)

    def test_carriers(self):
        self.assertEqual(self.d.b_carrier.rank, 2)
        self.assertTrue(self.d.c_carrier.is_unit)
        self.assertTrue(self.d.s_carrier.is_unit)
        self.assertFalse(is_generic_position(self.d))
        carriers = cbs_carriers(self.d)
        self.assertTrue(same_projection(carriers.c, self.d.c_carrier))

    def test_atom_structure(self):
        atom = atom_structure(self.p, self.e, d=self.d)
        self.assertAlmostEqual(atom.beta, 1 / (2 * np.sqrt(6)), places=12)
        self.assertEqual(atom.v.rank, 1)
        self.assertTrue(same_projection(join(self.p, atom.v), atom.b_carrier))

    def test_violation_is_named(self):
        broken = replace(self.d, square_residual=1.0)
        with self.assertRaises(InvariantViolation) as cm:
            broken.assert_invariants()
        self.assertEqual(cm.exception.check, "cbs.square_identity")


class TestSpecialPairs(unittest.TestCase):
    def test_commuting(self):
        p = Projection(np.diag([1., 0., 0.]))
        d = cbs_decompose(p, Effect(np.diag([0.2, 0.4, 0.6])))
        self.assertTrue(d.b_carrier.is_zero)
        np.testing.assert_allclose(d.k.element.entries, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(d.c2.entries, np.diag([0.2, 0.6, 0.4]),
                                   atol=1e-12)
        np.testing.assert_allclose(d.s2.entries, np.diag([0.8, 0.4, 0.6]),
                                   atol=1e-12)

    def test_effect_is_projection(self):
        p, _ = r3_pair()
        d = cbs_decompose(p, Effect(p.entries))
        self.assertTrue(d.c_carrier.is_unit)
        self.assertTrue(d.s_carrier.is_zero)
        self.assertTrue(d.j_carrier.is_zero)
        self.assertTrue(d.b_carrier.is_zero)

    def test_generic_position(self):
        p = Projection(np.diag([1., 0.]))
        d = cbs_decompose(p, Effect([[0.5, 0.2], [0.2, 0.5]]))
        self.assertTrue(is_generic_position(d))
        np.testing.assert_allclose(d.b.entries, 0.2 * np.eye(2), atol=1e-12)
        self.assertEqual(generic_position_residuals(d),
                         {"carriers_unit": True, "meets_zero": True,
                          "k_exchanges": True})

    def test_random_carriers(self):
        rng = np.random.default_rng(0)
        for n in (2, 3, 4, 5):
            for kind in ("generic", "commuting", "split"):
                pair = sample_pair(rng, n, kind)
                d = cbs_decompose(pair.p, pair.e)
                # raises if a lattice formula disagrees with a direct carrier
                cbs_carriers(d)


class TestRestriction(unittest.TestCase):
    def test_split(self):
        p, e = split_pair()
        d = cbs_decompose(p, e)
        q = Projection(np.diag([0., 1., 1.]))
        self.assertTrue(same_projection(d.b_carrier, q))
        restricted = restrict_cbs(d, q)
        self.assertEqual(restricted.dim, 2)
        self.assertTrue(is_generic_position(restricted))
        restricted = restrict_cbs(d, q.perp)
        self.assertTrue(restricted.b_carrier.is_zero)

    def test_unit(self):
        p, e = r3_pair()
        d = cbs_decompose(p, e)
        restricted = restrict_cbs(d, Projection.unit(3))
        self.assertEqual(restricted.dim, 3)
        for name in ("c", "s", "j", "b"):
            self.assertLess(
                getattr(restricted, name).distance(getattr(d, name)), 1e-10,
                name)
        self.assertEqual(restricted.b_carrier.rank, d.b_carrier.rank)

    def test_zero(self):
        p, e = split_pair()
        d = cbs_decompose(p, e)
        restricted = restrict_cbs(d, Projection.zero(3))
        self.assertEqual(restricted.dim, 0)
        self.assertTrue(restricted.p.is_zero)
        self.assertTrue(restricted.b_carrier.is_zero)
        for name in ("c", "s", "j", "b"):
            self.assertEqual(getattr(restricted, name).entries.shape, (0, 0))

    def test_not_commuting(self):
        p, e = split_pair()
        d = cbs_decompose(p, e)
        self.assertRaises(PreconditionError, restrict_cbs, d,
                          Projection(np.diag([1., 1., 0.])))


class TestAtomPreconditions(unittest.TestCase):
    def test_not_atom(self):
        _, e = r3_pair()
        self.assertRaises(PreconditionError, atom_structure,
                          Projection(np.diag([1., 1., 0.])), e)

    def test_commuting(self):
        self.assertRaises(PreconditionError, atom_structure,
                          Projection(np.diag([1., 0., 0.])),
                          Effect(np.diag([0.2, 0.4, 0.6])))


if __name__ == "__main__":
    unittest.main()
