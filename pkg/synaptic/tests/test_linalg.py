import unittest

import numpy as np

from synaptic.elements import Effect
from synaptic.errors import \
    DimensionMismatch, DomainError, NumericalFailure, ValidationError
from synaptic.golden import r3_pair
from synaptic.linalg import \
    SymmetricElement, ToleranceConfig, DEFAULT_TOLERANCE, \
    apply_scalar_function, commutator_norm, commutes, is_positive, \
    _rounds, min_eigenvalue, opnorm, psd_leq, sym_eigen
from synaptic.sampling import random_symmetric


class TestToleranceConfig(unittest.TestCase):
    def test_defaults(self):
        tol = DEFAULT_TOLERANCE
        self.assertEqual(tol.rank_eps, 1e-9)
        self.assertEqual(tol.comm_eps, 1e-8)
        self.assertEqual(tol.psd_eps, 1e-9)
        self.assertEqual(tol.eig_off_eps, 1e-13)
        self.assertEqual(tol.max_sweeps, 100)
        self.assertAlmostEqual(tol.rank_threshold(1), 2e-9)
        self.assertAlmostEqual(tol.comm_threshold(2, 3), 7e-8)

    def test_validation(self):
        self.assertRaises(ValidationError, ToleranceConfig, rank_eps=0)
        self.assertRaises(ValidationError, ToleranceConfig, comm_eps=-1e-8)
        self.assertRaises(ValidationError, ToleranceConfig, rank_eps=0.5)
        with self.assertRaises(ValidationError) as cm:
            ToleranceConfig(psd_eps=0)
        self.assertEqual(cm.exception.invariant, "tolerance")

    def test_from_dict(self):
        tol = ToleranceConfig.from_dict({"rank_eps": "1e-6", "max_sweeps": 5})
        self.assertEqual(tol.rank_eps, 1e-6)
        self.assertEqual(tol.max_sweeps, 5)
        self.assertIsInstance(tol.max_sweeps, int)
        self.assertEqual(ToleranceConfig.from_dict(tol.to_dict()), tol)
        self.assertRaises(ValidationError,
                          ToleranceConfig.from_dict, {"foo": 1})
        self.assertRaises(ValidationError,
                          ToleranceConfig.from_dict, {"rank_eps": "x"})


class TestSymmetricElement(unittest.TestCase):
    def test_symmetrized(self):
        a = SymmetricElement([[1, 2], [0, 1]])
        np.testing.assert_equal(a.entries, [[1, 1], [1, 1]])
        np.testing.assert_equal(a.entries, a.entries.T)
        self.assertEqual(a.dim, 2)
        self.assertEqual(a.trace, 2)
        self.assertAlmostEqual(a.norm, 2)

    def test_invalid(self):
        self.assertRaises(ValidationError, SymmetricElement, np.ones((2, 3)))
        self.assertRaises(ValidationError, SymmetricElement, np.ones(3))
        self.assertRaises(ValidationError,
                          SymmetricElement, [[np.nan, 0], [0, 1]])

    def test_immutable(self):
        a = SymmetricElement.identity(2)
        with self.assertRaises(ValueError):
            a.entries[0, 0] = 2

    def test_arithmetic(self):
        a = SymmetricElement(np.diag([1., 2.]))
        b = SymmetricElement([[0, 1], [1, 0]])
        np.testing.assert_equal((a + b).entries, [[1, 1], [1, 2]])
        np.testing.assert_equal((a - b).entries, [[1, -1], [-1, 2]])
        np.testing.assert_equal((2 * a).entries, np.diag([2, 4]))
        np.testing.assert_equal((-a).entries, np.diag([-1, -2]))
        np.testing.assert_equal(a @ b, [[0, 1], [2, 0]])
        np.testing.assert_equal(a.compress(b).entries, np.diag([2, 1]))
        self.assertIsInstance(a + b, SymmetricElement)
        self.assertAlmostEqual(a.distance(b), opnorm(a.entries - b.entries))
        self.assertRaises(DimensionMismatch,
                          a.__add__, SymmetricElement.identity(3))

    def test_zero_dimension(self):
        a = SymmetricElement.zeros(0)
        self.assertEqual(a.dim, 0)
        self.assertEqual(a.norm, 0)
        self.assertEqual(len(sym_eigen(a).eigenvalues), 0)
        self.assertTrue(is_positive(a))


class TestEigen(unittest.TestCase):
    def test_identity(self):
        eig = sym_eigen(SymmetricElement.identity(3))
        np.testing.assert_equal(eig.eigenvalues, [1, 1, 1])
        np.testing.assert_equal(eig.eigenvectors, np.eye(3))

    def test_diagonal(self):
        eig = sym_eigen(SymmetricElement(np.diag([3., 1., 2.])))
        np.testing.assert_equal(eig.eigenvalues, [1, 2, 3])
        np.testing.assert_equal(eig.eigenvectors, np.eye(3)[:, [1, 2, 0]])

    def test_random_reconstruction(self):
        rng = np.random.default_rng(0)
        for n in range(2, 9):
            for _ in range(5):
                a = random_symmetric(rng, n)
                eig = sym_eigen(a)
                q = eig.eigenvectors
                self.assertLessEqual(a.distance(eig.rebuild()),
                                     1e-12 * (1 + a.norm))
                self.assertLessEqual(opnorm(q.T @ q - np.eye(n)), 1e-12)
                self.assertTrue(np.all(np.diff(eig.eigenvalues) >= 0))
                np.testing.assert_allclose(
                    eig.eigenvalues, np.linalg.eigvalsh(a.entries),
                    atol=1e-12 * (1 + a.norm))

    def test_deterministic(self):
        a = random_symmetric(np.random.default_rng(1), 5)
        first = sym_eigen(SymmetricElement(a.entries))
        second = sym_eigen(SymmetricElement(a.entries.copy()))
        np.testing.assert_equal(first.eigenvectors, second.eigenvectors)
        # sign convention: first non-negligible component is positive
        for column in first.eigenvectors.T:
            self.assertGreater(column[np.abs(column) > 1e-12][0], 0)

    def test_cached(self):
        a = random_symmetric(np.random.default_rng(2), 3)
        self.assertIs(a.eigen(), a.eigen())

    def test_non_convergence(self):
        tol = ToleranceConfig(max_sweeps=1, eig_off_eps=1e-300)
        a = random_symmetric(np.random.default_rng(3), 6)
        with self.assertRaises(NumericalFailure) as cm:
            sym_eigen(a, tol)
        self.assertIsInstance(cm.exception, np.linalg.LinAlgError)
        self.assertGreater(cm.exception.residual, 0)

    def test_round_robin_schedule(self):
        for n in range(2, 10):
            seen = []
            for p, q in _rounds(n):
                touched = np.concatenate([p, q])
                self.assertEqual(len(set(touched)), len(touched))
                seen.extend(zip(p.tolist(), q.tolist()))
            self.assertEqual(sorted(seen),
                             [(p, q) for p in range(n) for q in range(p + 1, n)])


class TestFunctionalCalculus(unittest.TestCase):
    def test_sqrt(self):
        a = SymmetricElement(np.diag([4., 9.]))
        np.testing.assert_allclose(
            apply_scalar_function(a, np.sqrt).entries, np.diag([2, 3]),
            atol=1e-12)

    def test_identity_map(self):
        a = random_symmetric(np.random.default_rng(4), 4)
        result = apply_scalar_function(a, lambda x: x)
        self.assertLessEqual(result.distance(a), 1e-12 * (1 + a.norm))

    def test_idempotent(self):
        p, _ = r3_pair()
        squared = apply_scalar_function(p, lambda x: x ** 2)
        self.assertLessEqual(squared.distance(p), 1e-12)

    def test_scalar_only_function(self):
        a = SymmetricElement(np.diag([1., -2.]))
        result = apply_scalar_function(a, lambda x: max(x, 0.0))
        np.testing.assert_allclose(result.entries, np.diag([1, 0]), atol=1e-12)

    def test_commutes_with_argument(self):
        a = random_symmetric(np.random.default_rng(5), 5)
        h = apply_scalar_function(a, np.exp)
        self.assertTrue(commutes(h, a))

    def test_domain_error(self):
        a = SymmetricElement(np.diag([-1., 1.]))
        self.assertRaises(DomainError, apply_scalar_function, a, np.log)

    def test_spectrum_is_cached(self):
        a = random_symmetric(np.random.default_rng(6), 5)
        h = apply_scalar_function(a, lambda x: 1 / (1 + np.exp(-x)))
        eig = h.eigen()
        fresh = sym_eigen(SymmetricElement(h.entries.copy()))
        np.testing.assert_allclose(eig.eigenvalues, fresh.eigenvalues,
                                   atol=1e-12)
        self.assertLessEqual(h.distance(eig.rebuild()), 1e-12)
        self.assertTrue(np.all(np.diff(eig.eigenvalues) >= 0))
        # validating as an effect reuses the seeded decomposition
        self.assertIs(Effect(h).eigen(), eig)


class TestOrder(unittest.TestCase):
    def test_examples(self):
        zero, one = SymmetricElement.zeros(2), SymmetricElement.identity(2)
        self.assertTrue(psd_leq(zero, one))
        _, e = r3_pair()
        self.assertTrue(psd_leq(e, np.eye(3)))
        a = SymmetricElement(np.diag([1., 0.]))
        b = SymmetricElement(np.diag([0., 1.]))
        self.assertFalse(psd_leq(a, b))
        self.assertFalse(psd_leq(b, a))
        self.assertAlmostEqual(min_eigenvalue(b - a), -1)

    def test_tolerance(self):
        a = SymmetricElement(np.diag([1e-12, 0.]))
        self.assertTrue(psd_leq(a, SymmetricElement.zeros(2)))
        a = SymmetricElement(np.diag([1e-6, 0.]))
        self.assertFalse(psd_leq(a, SymmetricElement.zeros(2)))

    def test_dimension_mismatch(self):
        self.assertRaises(DimensionMismatch, psd_leq,
                          SymmetricElement.zeros(2), SymmetricElement.zeros(3))
        self.assertRaises(DimensionMismatch, commutes,
                          SymmetricElement.zeros(2), SymmetricElement.zeros(3))


class TestCommutes(unittest.TestCase):
    def test_examples(self):
        a = random_symmetric(np.random.default_rng(6), 3)
        self.assertTrue(commutes(a, np.eye(3)))
        self.assertTrue(commutes(np.diag([1., 2.]), np.diag([3., 4.])))
        p, e = r3_pair()
        self.assertFalse(commutes(p, e))
        self.assertGreater(commutator_norm(p, e), 0.1)


if __name__ == "__main__":
    unittest.main()
