import unittest

import numpy as np
from scipy.stats import unitary_group

from tensor_core import (
    BadSubsystem,
    DensityMatrix,
    DimensionMismatch,
    InvalidDensityMatrix,
    NotHermitian,
    hermitian_eigenvalues,
    hermiticity_defect,
    hs_distance,
    kron,
    partial_trace,
    partial_transpose,
    projector,
    purity,
    random_density_matrix,
    realign,
    singular_values,
    trace_out,
)


def random_hermitian(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return g + g.conj().T


MAX_ENTANGLED = np.eye(3).reshape(9) / np.sqrt(3)


class TestKronAndSpectra(unittest.TestCase):
    def test_kron_identities(self):
        np.testing.assert_allclose(kron(np.eye(2), np.eye(3)), np.eye(6))
        np.testing.assert_allclose(kron(np.diag([1, 2]), np.eye(2)), np.diag([1, 1, 2, 2]))

    def test_kron_index_formula(self):
        rng = np.random.default_rng(1)
        a, b = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
        k = kron(a, b)
        for i in range(3):
            for j in range(3):
                for m in range(3):
                    for n in range(3):
                        self.assertAlmostEqual(k[3 * i + j, 3 * m + n], a[i, m] * b[j, n])

    def test_hermitian_eigenvalues(self):
        np.testing.assert_allclose(hermitian_eigenvalues(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
        np.testing.assert_allclose(hermitian_eigenvalues([[0, 1], [1, 0]]), [-1, 1])

    def test_eigen_residual_and_trace(self):
        rng = np.random.default_rng(2)
        h = random_hermitian(rng, 9)
        vals = hermitian_eigenvalues(h)
        self.assertAlmostEqual(vals.sum(), np.trace(h).real, places=10)
        _, vecs = np.linalg.eigh(h)
        for lam, v in zip(vals, vecs.T):
            self.assertLess(np.linalg.norm(h @ v - lam * v), 1e-10)

    def test_non_hermitian_rejected(self):
        with self.assertRaises(NotHermitian):
            hermitian_eigenvalues([[0, 1], [0, 0]])

    def test_singular_values(self):
        np.testing.assert_allclose(singular_values([[0, 2], [0, 0]]), [2, 0])
        np.testing.assert_allclose(singular_values(np.eye(9)), np.ones(9))
        rng = np.random.default_rng(3)
        m = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
        expected = np.sqrt(np.clip(np.linalg.eigvalsh(m.conj().T @ m), 0, None))[::-1]
        np.testing.assert_allclose(singular_values(m), expected, atol=1e-10)


class TestDensityMatrix(unittest.TestCase):
    def test_valid_state_is_read_only(self):
        rho = DensityMatrix(np.eye(9) / 9, (3, 3))
        self.assertEqual(rho.dim, 9)
        with self.assertRaises(ValueError):
            rho.matrix[0, 0] = 1.0

    def test_rejects_bad_trace(self):
        with self.assertRaises(InvalidDensityMatrix):
            DensityMatrix(np.eye(9), (3, 3))

    def test_rejects_non_hermitian(self):
        m = np.eye(4) / 4
        m = m.astype(complex)
        m[0, 1] = 0.1
        with self.assertRaises(InvalidDensityMatrix):
            DensityMatrix(m, (2, 2))

    def test_rejects_negative_eigenvalue(self):
        with self.assertRaises(InvalidDensityMatrix):
            DensityMatrix(np.diag([1.5, -0.5]), (2,))

    def test_from_user_tolerates_small_defect(self):
        m = (np.eye(4) / 4).astype(complex)
        m[0, 1] = 5e-11
        with self.assertRaises(InvalidDensityMatrix):
            DensityMatrix(m, (2, 2))
        rho = DensityMatrix.from_user(m, [2, 2])
        self.assertEqual(rho.dims, (2, 2))
        self.assertEqual(hermiticity_defect(rho.matrix), 0.0)
        m[0, 1] = 1e-6
        with self.assertRaises(InvalidDensityMatrix):
            DensityMatrix.from_user(m, (2, 2))

    def test_rejects_wrong_dims(self):
        with self.assertRaises(InvalidDensityMatrix):
            DensityMatrix(np.eye(9) / 9, (2, 4))

    def test_normalized(self):
        rho = DensityMatrix.normalized(np.eye(4), (2, 2))
        np.testing.assert_allclose(rho.matrix, np.eye(4) / 4)


class TestPartialOperations(unittest.TestCase):
    def test_product_partial_transpose(self):
        rng = np.random.default_rng(4)
        a, b = random_hermitian(rng, 3), random_hermitian(rng, 3)
        np.testing.assert_allclose(partial_transpose(np.kron(a, b), 1, (3, 3)), np.kron(a, b.T), atol=1e-12)

    def test_local_operators_move_through_partial_transpose(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a, b, c, d = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(4))
            rho = random_density_matrix(9, rng)
            lhs = partial_transpose(np.kron(a, b) @ rho @ np.kron(c, d), 1, (3, 3))
            rhs = np.kron(a, d.T) @ partial_transpose(rho, 1, (3, 3)) @ np.kron(c, b.T)
            np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_entry_shuffle(self):
        rng = np.random.default_rng(5)
        m = rng.normal(size=(6, 6))
        pt = partial_transpose(m, 1, (2, 3))
        for i in range(2):
            for a in range(3):
                for j in range(2):
                    for b in range(3):
                        self.assertEqual(pt[3 * i + a, 3 * j + b], m[3 * i + b, 3 * j + a])

    def test_maximally_entangled_min_eigenvalue(self):
        rho = DensityMatrix(projector(MAX_ENTANGLED), (3, 3))
        self.assertAlmostEqual(hermitian_eigenvalues(partial_transpose(rho))[0], -1 / 3, places=12)

    def test_involution(self):
        rng = np.random.default_rng(6)
        m = random_density_matrix(9, rng)
        np.testing.assert_allclose(partial_transpose(partial_transpose(m, 1, (3, 3)), 1, (3, 3)), m)

    def test_bad_subsystem(self):
        with self.assertRaises(BadSubsystem):
            partial_transpose(np.eye(9) / 9, 2, (3, 3))
        with self.assertRaises(BadSubsystem):
            partial_transpose(np.eye(9) / 9, 1, (2, 4))

    def test_partial_trace_product(self):
        rng = np.random.default_rng(7)
        a, b = random_density_matrix(3, rng), random_density_matrix(3, rng)
        rho = DensityMatrix(np.kron(a, b), (3, 3))
        np.testing.assert_allclose(partial_trace(rho, keep=[0]).matrix, a, atol=1e-12)
        np.testing.assert_allclose(partial_trace(rho, keep=[1]).matrix, b, atol=1e-12)

    def test_partial_trace_of_maximally_entangled(self):
        rho = DensityMatrix(projector(MAX_ENTANGLED), (3, 3))
        for keep in ([0], [1]):
            np.testing.assert_allclose(partial_trace(rho, keep).matrix, np.eye(3) / 3, atol=1e-12)

    def test_partial_trace_four_parties(self):
        rng = np.random.default_rng(8)
        rho = DensityMatrix(random_density_matrix(36, rng), (2, 2, 3, 3))
        reduced = partial_trace(rho, keep=(2, 3))
        self.assertEqual(reduced.dims, (3, 3))
        self.assertAlmostEqual(np.trace(reduced.matrix).real, 1.0, places=12)
        t = rho.matrix.reshape(2, 2, 3, 3, 2, 2, 3, 3)
        expected = np.einsum("abijabkl->ijkl", t).reshape(9, 9)
        np.testing.assert_allclose(trace_out(rho, None, (2, 3)), expected, atol=1e-12)

    def test_partial_trace_bad_keep(self):
        rho = DensityMatrix(np.eye(9) / 9, (3, 3))
        with self.assertRaises(BadSubsystem):
            partial_trace(rho, keep=[])
        with self.assertRaises(BadSubsystem):
            partial_trace(rho, keep=[2])


class TestRealignment(unittest.TestCase):
    def test_pure_product(self):
        v = np.zeros(9)
        v[0] = 1.0
        self.assertAlmostEqual(singular_values(realign(projector(v), (3, 3))).sum(), 1.0, places=12)

    def test_maximally_mixed(self):
        s = singular_values(realign(np.eye(9) / 9, (3, 3)))
        self.assertAlmostEqual(s[0], 1 / 3, places=12)
        np.testing.assert_allclose(s[1:], 0, atol=1e-12)

    def test_local_unitary_invariance(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            rho = random_density_matrix(9, rng)
            u = np.kron(unitary_group.rvs(3, random_state=rng), unitary_group.rvs(3, random_state=rng))
            before = singular_values(realign(rho, (3, 3))).sum()
            after = singular_values(realign(u @ rho @ u.conj().T, (3, 3))).sum()
            self.assertAlmostEqual(before, after, delta=1e-10)

    def test_requires_bipartite(self):
        with self.assertRaises(BadSubsystem):
            realign(np.eye(8) / 8, (2, 2, 2))


class TestDistances(unittest.TestCase):
    def test_hs_distance(self):
        self.assertEqual(hs_distance(np.eye(2), np.eye(2)), 0.0)
        self.assertAlmostEqual(hs_distance(np.diag([1, 0]), np.diag([0, 1])), np.sqrt(2))
        with self.assertRaises(DimensionMismatch):
            hs_distance(np.eye(2), np.eye(3))

    def test_triangle_inequality(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            a, b, c = (random_density_matrix(9, rng) for _ in range(3))
            self.assertLessEqual(hs_distance(a, c), hs_distance(a, b) + hs_distance(b, c) + 1e-12)

    def test_purity(self):
        v = np.zeros(9)
        v[4] = 1.0
        self.assertAlmostEqual(purity(DensityMatrix(projector(v), (3, 3))), 1.0)
        self.assertAlmostEqual(purity(DensityMatrix(np.eye(9) / 9, (3, 3))), 1 / 9)


if __name__ == "__main__":
    unittest.main()
