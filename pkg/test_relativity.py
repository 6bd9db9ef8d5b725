import unittest

import numpy as np
from scipy.spatial.transform import Rotation

from qudit_states import SPIN_INDEX, Interpretation, phi_spin_state, rho_b, simplex_state
from relativity import (
    MINKOWSKI,
    REST_MOMENTUM,
    V,
    BoostParams,
    FourVector,
    InvalidBoost,
    NonPositiveEnergy,
    NotRotation,
    OffShell,
    RelativityError,
    boost_matrix,
    boost_momentum,
    boost_two_particle,
    boosted_spin_closed_form,
    build_rho0,
    build_rho1,
    build_separable_state,
    four_momentum,
    momentum_marginal,
    momentum_pair,
    product_momentum_vector,
    pure_momentum_state,
    spin1_rep,
    spin_marginal,
    standard_boost,
    symmetric_momentum_vector,
    two_particle_unitary,
    wigner_rotation,
)
from tensor_core import hermitian_eigenvalues, hs_distance, partial_transpose, projector, purity

Z_BOOST = BoostParams((0.0, 0.0, 1.0), 0.8)


def random_boost(rng):
    return BoostParams.along(rng.normal(size=3), rng.uniform(-2, 2))


def random_on_shell(rng):
    p = rng.normal(size=3) * rng.uniform(0.1, 3)
    return FourVector(float(np.sqrt(1 + p @ p)), *p)


class TestKinematics(unittest.TestCase):
    def test_four_momentum(self):
        k1, k2 = momentum_pair(1.0)
        np.testing.assert_allclose(k1.as_array(), [2, np.sqrt(3), 0, 0])
        np.testing.assert_allclose(k2.as_array(), [2, -np.sqrt(3), 0, 0])
        for e in (0.01, 1.0, 7.5):
            self.assertAlmostEqual(four_momentum(e).minkowski_square(), 1.0, places=10)

    def test_non_positive_energy(self):
        with self.assertRaises(NonPositiveEnergy):
            four_momentum(0.0)

    def test_boost_params(self):
        with self.assertRaises(InvalidBoost):
            BoostParams((1.0, 1.0, 0.0), 0.5)
        b = BoostParams.along((0, 0, 2), 0.5)
        self.assertEqual(b.direction, (0.0, 0.0, 1.0))

    def test_boost_matrix(self):
        np.testing.assert_allclose(boost_matrix(BoostParams((0, 0, 1), 0.0)), np.eye(4))
        lam = boost_matrix(Z_BOOST)
        self.assertAlmostEqual(lam[0, 0], 1.337435, places=6)
        self.assertAlmostEqual(lam[0, 3], 0.888106, places=6)
        self.assertAlmostEqual(lam[3, 3], 1.337435, places=6)

    def test_boost_is_lorentz(self):
        rng = np.random.default_rng(20)
        for _ in range(100):
            lam = boost_matrix(random_boost(rng))
            np.testing.assert_allclose(lam.T @ MINKOWSKI @ lam, MINKOWSKI, atol=1e-12 * max(1.0, lam[0, 0] ** 2))

    def test_standard_boost(self):
        np.testing.assert_allclose(standard_boost(REST_MOMENTUM), np.eye(4))
        s3 = np.sqrt(3)
        expected = np.array([[2, s3, 0, 0], [s3, 2, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
        np.testing.assert_allclose(standard_boost(four_momentum(1.0)), expected, atol=1e-14)

    def test_standard_boost_maps_rest_momentum(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            k = random_on_shell(rng)
            np.testing.assert_allclose(standard_boost(k) @ REST_MOMENTUM.as_array(), k.as_array(), atol=1e-10)

    def test_off_shell(self):
        with self.assertRaises(OffShell):
            standard_boost(FourVector(2.0, 0.0, 0.0, 0.0))
        with self.assertRaises(OffShell):
            wigner_rotation(Z_BOOST, FourVector(1.0, 1.0, 0.0, 0.0))

    def test_boosted_momenta_on_shell(self):
        rng = np.random.default_rng(22)
        for _ in range(100):
            self.assertTrue(boost_momentum(random_boost(rng), random_on_shell(rng)).is_on_shell())


class TestWignerRotation(unittest.TestCase):
    def test_rest_momentum(self):
        np.testing.assert_allclose(wigner_rotation(Z_BOOST, REST_MOMENTUM), np.eye(3), atol=1e-12)

    def test_collinear(self):
        k = FourVector(2.0, 0.0, 0.0, np.sqrt(3))
        np.testing.assert_allclose(wigner_rotation(Z_BOOST, k), np.eye(3), atol=1e-12)

    def test_perpendicular_boost_rotates_about_y(self):
        r = wigner_rotation(Z_BOOST, four_momentum(1.0))
        np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
        self.assertAlmostEqual(r[1, 1], 1.0, places=12)
        self.assertLess(r[0, 0], 1.0 - 1e-3)
        c = np.cosh(0.8)
        self.assertAlmostEqual(r[0, 0], (2 + c) / (1 + 2 * c), places=12)

    def test_special_orthogonal(self):
        rng = np.random.default_rng(23)
        for _ in range(1000):
            r = wigner_rotation(random_boost(rng), random_on_shell(rng))
            np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-8)
            self.assertAlmostEqual(np.linalg.det(r), 1.0, delta=1e-8)


class TestSpinRepresentation(unittest.TestCase):
    def test_v_unitary(self):
        np.testing.assert_allclose(V @ V.conj().T, np.eye(3), atol=1e-15)
        np.testing.assert_allclose(spin1_rep(np.eye(3)), np.eye(3), atol=1e-15)

    def test_homomorphism(self):
        rotations = Rotation.random(40, random_state=24).as_matrix()
        for r1, r2 in zip(rotations[::2], rotations[1::2]):
            d = spin1_rep(r1 @ r2)
            np.testing.assert_allclose(d, spin1_rep(r1) @ spin1_rep(r2), atol=1e-10)
            np.testing.assert_allclose(d @ d.conj().T, np.eye(3), atol=1e-10)

    def test_z_rotation_phases_follow_spin_index(self):
        for phi in (0.3, 1.1, -2.4):
            d = spin1_rep(Rotation.from_euler("z", phi).as_matrix())
            expected = np.zeros((3, 3), dtype=complex)
            for m, i in SPIN_INDEX.items():
                expected[i, i] = np.exp(1j * m * phi)
            np.testing.assert_allclose(d, expected, atol=1e-12)

    def test_not_rotation(self):
        with self.assertRaises(NotRotation):
            spin1_rep(np.diag([1.0, 1.0, -1.0]))
        with self.assertRaises(NotRotation):
            spin1_rep(2 * np.eye(3))


class TestTwoParticleStates(unittest.TestCase):
    def test_rho1_marginals(self):
        s = build_rho1(1 / 15)
        np.testing.assert_allclose(spin_marginal(s).matrix, rho_b(1 / 15).matrix, atol=1e-14)
        np.testing.assert_allclose(momentum_marginal(s).matrix, projector(symmetric_momentum_vector()), atol=1e-14)
        self.assertAlmostEqual(purity(s.density), purity(rho_b(1 / 15)), places=12)

    def test_zero_rapidity_is_identity(self):
        s = build_rho1(0.1)
        boosted = boost_two_particle(s, BoostParams((0, 0, 1), 0.0))
        np.testing.assert_allclose(boosted.density.matrix, s.density.matrix, atol=1e-14)
        for k, k_new in zip(s.momenta, boosted.momenta):
            np.testing.assert_allclose(k.as_array(), k_new.as_array(), atol=1e-14)

    def test_boost_relabels_momenta(self):
        boosted = boost_two_particle(build_rho1(0.1), Z_BOOST)
        k1 = boosted.momenta[0]
        self.assertAlmostEqual(k1.t, 2 * np.cosh(0.8), places=12)
        self.assertAlmostEqual(k1.z, 2 * np.sinh(0.8), places=12)
        self.assertAlmostEqual(k1.x, np.sqrt(3), places=12)

    def test_unitary_preserves_spectrum(self):
        rng = np.random.default_rng(25)
        for _ in range(100):
            c = rng.dirichlet(np.ones(9))
            a = rng.normal(size=4) + 1j * rng.normal(size=4)
            s = pure_momentum_state(a, simplex_state(c), rng.uniform(0.1, 3))
            boosted = boost_two_particle(s, random_boost(rng))
            np.testing.assert_allclose(boosted.density.eigenvalues(), s.density.eigenvalues(), atol=1e-10)

    def test_unitary_is_unitary(self):
        u = two_particle_unitary(Z_BOOST, momentum_pair(1.0))
        np.testing.assert_allclose(u @ u.conj().T, np.eye(36), atol=1e-12)

    def test_closed_form_matches_full_boost(self):
        rng = np.random.default_rng(26)
        for _ in range(20):
            a = rng.normal(size=4) + 1j * rng.normal(size=4)
            spin = simplex_state(rng.dirichlet(np.ones(9)))
            b = random_boost(rng)
            full = spin_marginal(boost_two_particle(pure_momentum_state(a, spin, 1.0), b))
            closed = boosted_spin_closed_form(a, spin, b, 1.0)
            self.assertLess(hs_distance(full, closed), 1e-12)

    def test_ppt_preserved_for_pure_momentum(self):
        rng = np.random.default_rng(27)
        checked = 0
        while checked < 100:
            spin = simplex_state(rng.dirichlet(np.ones(9)))
            if hermitian_eigenvalues(partial_transpose(spin))[0] < 0:
                continue
            a = rng.normal(size=4) + 1j * rng.normal(size=4)
            boosted = boosted_spin_closed_form(a, spin, random_boost(rng), rng.uniform(0.1, 3))
            self.assertGreaterEqual(hermitian_eigenvalues(partial_transpose(boosted))[0], -1e-10)
            checked += 1

    def test_rho0_endpoints(self):
        np.testing.assert_allclose(build_rho0(1.0, 0.1).density.matrix, build_rho1(0.1).density.matrix, atol=1e-14)
        rho2 = build_separable_state([(1.0, product_momentum_vector(0, 1), phi_spin_state())], 1.0)
        np.testing.assert_allclose(build_rho0(0.0, 0.1).density.matrix, rho2.density.matrix, atol=1e-14)

    def test_rho0_ket_reading(self):
        s = build_rho0(0.5, 0.1, interpretation=Interpretation.SQRT_AMPLITUDES)
        self.assertEqual(s.density.dims, (2, 2, 3, 3))

    def test_separable_state_weights(self):
        with self.assertRaises(RelativityError):
            build_separable_state([(0.5, symmetric_momentum_vector(), rho_b(0.1))], 1.0)


if __name__ == "__main__":
    unittest.main()
