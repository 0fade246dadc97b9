import unittest
from functools import partial

import numpy as np

from synaptic.calculus import \
    PartialSymmetry, Symmetry, abs_value, canonical_extension, carrier, \
    is_symmetry, offdiagonal_norm, peirce_decompose, polar_decompose, \
    positive_part, signum, spectral_resolution, sqrt_psd
from synaptic.elements import Projection
from synaptic.errors import DomainError, ValidationError
from synaptic.golden import r3_pair
from synaptic.linalg import SymmetricElement, commutes, opnorm
from synaptic.sampling import random_effect, random_symmetric

assert_close = partial(np.testing.assert_allclose, atol=1e-12)


def diag(*values):
    return SymmetricElement(np.diag(np.array(values, dtype=float)))


class TestCarrier(unittest.TestCase):
    def test_diagonal(self):
        assert_close(carrier(diag(2, 0, -1)).entries,
                     np.diag([1, 0, 1]))
        self.assertTrue(carrier(diag(0, 0)).is_zero)
        self.assertEqual(carrier(diag(1e-12, 1)).rank, 1)

    def test_projection_is_own_carrier(self):
        p, _ = r3_pair()
        self.assertIs(carrier(p), p)

    def test_annihilates(self):
        a = random_symmetric(np.random.default_rng(0), 4, zeros=2)
        c = carrier(a)
        self.assertEqual(c.rank, 2)
        self.assertLess(opnorm(a @ c - a.entries), 1e-12)


class TestRoots(unittest.TestCase):
    def test_sqrt(self):
        assert_close(sqrt_psd(diag(4, 9)).entries,
                     np.diag([2, 3]))
        self.assertEqual(sqrt_psd(diag(1e-12, 1)).entries[0, 0], 0)
        self.assertRaises(DomainError, sqrt_psd, diag(-1, 1))

    def test_sqrt_random(self):
        e = random_effect(np.random.default_rng(1), 4, snap=False)
        root = sqrt_psd(e)
        self.assertLess(root.square().distance(e), 1e-12)

    def test_abs_and_positive_part(self):
        assert_close(abs_value(diag(-2, 3)).entries,
                     np.diag([2, 3]))
        assert_close(positive_part(diag(-2, 3)).entries,
                     np.diag([0, 3]))


class TestSymmetries(unittest.TestCase):
    def test_signum(self):
        t = signum(diag(-2, 0, 3))
        assert_close(t.element.entries, np.diag([-1, 0, 1]))
        assert_close(t.support.entries, np.diag([1, 0, 1]))
        assert_close(t.element.square().entries,
                     t.support.entries)

    def test_canonical_extension(self):
        u = canonical_extension(signum(diag(-2, 0, 3)))
        assert_close(u.element.entries, np.diag([-1, 1, 1]))
        self.assertTrue(is_symmetry(u.element))
        u = canonical_extension(diag(1, 0))
        assert_close(u.element.entries, np.eye(2))

    def test_invalid(self):
        self.assertRaises(ValidationError, PartialSymmetry.from_element,
                          diag(2, 0))
        self.assertRaises(ValidationError, Symmetry.from_element, diag(1, 2))
        self.assertEqual(Symmetry.from_element(diag(1, -1)).element.trace, 0)

    def test_conjugate(self):
        u = Symmetry.from_element([[0, 1], [1, 0]])
        assert_close(u.conjugate(diag(1, 0)).entries,
                     np.diag([0, 1]))

    def test_polar(self):
        rng = np.random.default_rng(2)
        for n in (2, 3, 5):
            a = random_symmetric(rng, n, zeros=1)
            polar = polar_decompose(a)
            u, absolute = polar.symmetry.element.entries, polar.abs.entries
            self.assertLess(a.distance(absolute @ u), 1e-12 * (1 + a.norm))
            self.assertLess(a.distance(u @ absolute), 1e-12 * (1 + a.norm))
            self.assertTrue(is_symmetry(polar.symmetry.element))
            self.assertTrue(commutes(polar.symmetry.element, a))


class TestSpectralResolution(unittest.TestCase):
    def test_three_cuts(self):
        _, e = r3_pair()
        res = spectral_resolution(e)
        self.assertEqual(len(res), 3)
        assert_close(res.thresholds, [0.25, 0.5, 0.75])
        for cut, expected in zip(res.cuts, ([1, 0, 0], [1, 1, 0], [1, 1, 1])):
            assert_close(cut.entries, np.diag(expected))
        self.assertEqual(res.ranks, [1, 2, 3])

    def test_cut_at(self):
        _, e = r3_pair()
        res = spectral_resolution(e)
        self.assertTrue(res.cut_at(0.1).is_zero)
        self.assertEqual(res.cut_at(0.1).dim, 3)
        self.assertIs(res.cut_at(0.25), res.cuts[0])
        self.assertIs(res.cut_at(0.6), res.cuts[1])
        self.assertTrue(res.cut_at(2).is_unit)
        self.assertEqual(len(res.cut_set()), 3)
        self.assertEqual(len(res.cut_set(drop_trivial=True)), 2)

    def test_merged_eigenvalues(self):
        res = spectral_resolution(diag(0.5, 0.5 + 1e-12, 1))
        self.assertEqual(len(res), 2)
        self.assertEqual(res.thresholds[0], 0.5 + 1e-12)
        self.assertEqual(res.ranks, [2, 3])

    def test_random(self):
        rng = np.random.default_rng(3)
        for n in (2, 4, 6):
            e = random_effect(rng, n)
            res = spectral_resolution(e)
            self.assertTrue(res.cuts[-1].is_unit)
            for cut in res.cuts:
                self.assertTrue(commutes(cut, e))
            # e is recovered from its cuts
            rebuilt = sum(threshold * (cut.entries - previous.entries)
                          for threshold, cut, previous in zip(
                              res.thresholds, res.cuts,
                              (Projection.zero(n),) + res.cuts[:-1]))
            self.assertLess(e.distance(rebuilt), 1e-8)


class TestPeirce(unittest.TestCase):
    def test_parts(self):
        p, e = r3_pair()
        parts = peirce_decompose(e, p)
        total = parts.pap + parts.offdiagonal + parts.perp_a_perp
        self.assertLess(e.distance(total), 1e-14)
        assert_close(parts.pap.entries, 0.5 * p.entries,
                     atol=1e-15)
        self.assertAlmostEqual(parts.offdiagonal.norm, 1 / (2 * np.sqrt(6)))
        self.assertAlmostEqual(offdiagonal_norm(e, p), 1 / (2 * np.sqrt(6)))

    def test_commuting(self):
        p = Projection(np.diag([1., 0., 0.]))
        parts = peirce_decompose(diag(0.2, 0.4, 0.6), p)
        self.assertLess(parts.offdiagonal.norm, 1e-15)
        assert_close(parts.diagonal.entries,
                     np.diag([0.2, 0.4, 0.6]))


if __name__ == "__main__":
    unittest.main()
