import unittest
from unittest import TestCase

import numpy as np

from synaptic.calculus import is_symmetry
from synaptic.lattice import leq
from synaptic.linalg import DEFAULT_TOLERANCE, commutes, is_positive, psd_leq
from synaptic.sampling import \
    effect_spectrum, eigen_subset_projection, random_atom_in, \
    random_positive, random_projection, random_rotation, random_symmetry, \
    sample_pair
from synaptic.utils import once, parse_range


class TestUtils(TestCase):
    def test_parse_range(self):
        self.assertEqual(parse_range("2..5"), [2, 3, 4, 5])
        self.assertEqual(parse_range("3"), [3])
        self.assertEqual(parse_range(4), [4])
        self.assertRaises(ValueError, parse_range, "5..2")
        self.assertRaises(ValueError, parse_range, "a..b")
        self.assertRaises(ValueError, parse_range, "2..")

    def test_once(self):
        calls = []

        @once
        def value():
            calls.append(1)
            return 42

        self.assertEqual(value(), 42)
        self.assertEqual(value(), 42)
        self.assertEqual(len(calls), 1)

        @once
        def broken():
            calls.append(2)
            raise KeyError("x")

        self.assertRaises(KeyError, broken)
        self.assertRaises(KeyError, broken)
        self.assertEqual(calls.count(2), 1)


class TestSampling(TestCase):
    def test_rotation(self):
        rng = np.random.default_rng(0)
        for n in (1, 2, 5):
            u = random_rotation(rng, n)
            np.testing.assert_allclose(u.T @ u, np.eye(n), atol=1e-12)

    def test_elements(self):
        rng = np.random.default_rng(1)
        values = effect_spectrum(rng, 50, snap=True)
        self.assertTrue(np.all((values >= 0) & (values <= 1)))
        self.assertTrue(np.any((values == 0) | (values == 1)))
        a = random_positive(rng, 4, rank=2)
        self.assertTrue(is_positive(a))
        self.assertEqual(np.linalg.matrix_rank(a.entries, tol=1e-9), 2)
        self.assertTrue(is_symmetry(random_symmetry(rng, 3)))
        p = random_projection(rng, 4, rank=3)
        self.assertEqual(p.rank, 3)
        atom = random_atom_in(rng, p)
        self.assertEqual(atom.rank, 1)
        self.assertTrue(leq(atom, p))
        w = eigen_subset_projection(rng, a, DEFAULT_TOLERANCE)
        self.assertTrue(commutes(w, a))

    def test_pairs(self):
        rng = np.random.default_rng(2)
        for n in (2, 3, 4):
            pair = sample_pair(rng, n, "commuting")
            self.assertEqual(pair.kind, "commuting")
            self.assertTrue(commutes(pair.p, pair.e))
            self.assertTrue(psd_leq(pair.e, np.eye(n)))
        self.assertEqual(sample_pair(rng, 2, "split").kind, "generic")
        self.assertEqual(sample_pair(rng, 3, "split").kind, "split")

    def test_reproducible(self):
        first = sample_pair(np.random.default_rng([7, 3]), 4)
        second = sample_pair(np.random.default_rng([7, 3]), 4)
        self.assertEqual(first.kind, second.kind)
        np.testing.assert_equal(first.e.entries, second.e.entries)


if __name__ == "__main__":
    unittest.main()
