import itertools
import unittest

import numpy as np

from qudit_states import (
    ACCEPTED_INTERPRETATION,
    ACTIVATION_TABLE,
    OMEGA,
    PPT_BOUNDARY_X,
    Interpretation,
    InvalidCoefficients,
    MagicCoefficients,
    OutOfRange,
    UnknownInterpretation,
    bell_projector,
    bell_state,
    mub_bases,
    phi_spin,
    phi_spin_state,
    rho_b,
    simplex_state,
    weyl,
)
from tensor_core import hermitian_eigenvalues, partial_trace, partial_transpose, purity, DensityMatrix


class TestWeylAndBell(unittest.TestCase):
    def test_weyl_examples(self):
        np.testing.assert_allclose(weyl(0, 0), np.eye(3))
        np.testing.assert_allclose(weyl(1, 0), np.diag([1, OMEGA, OMEGA ** 2]))

    def test_weyl_unitary(self):
        for k, l in itertools.product(range(3), repeat=2):
            w = weyl(k, l)
            np.testing.assert_allclose(w.conj().T @ w, np.eye(3), atol=1e-14)

    def test_weyl_projective_composition(self):
        for k, l, k2, l2 in itertools.product(range(3), repeat=4):
            prod = weyl(k, l) @ weyl(k2, l2)
            target = weyl((k + k2) % 3, (l + l2) % 3)
            phase = np.trace(target.conj().T @ prod) / 3
            self.assertAlmostEqual(abs(phase), 1.0, places=12)
            np.testing.assert_allclose(prod, phase * target, atol=1e-12)

    def test_bell_00(self):
        expected = np.zeros(9)
        expected[[0, 4, 8]] = 1 / np.sqrt(3)
        np.testing.assert_allclose(bell_state(0, 0), expected)

    def test_bell_basis_orthonormal(self):
        basis = np.array([bell_state(k, l) for k in range(3) for l in range(3)])
        np.testing.assert_allclose(basis.conj() @ basis.T, np.eye(9), atol=1e-12)

    def test_projectors_resolve_identity(self):
        total = sum(bell_projector(k, l) for k in range(3) for l in range(3))
        np.testing.assert_allclose(total, np.eye(9), atol=1e-12)

    def test_bell_marginals_maximally_mixed(self):
        for k, l in itertools.product(range(3), repeat=2):
            rho = DensityMatrix(bell_projector(k, l), (3, 3))
            np.testing.assert_allclose(partial_trace(rho, [0]).matrix, np.eye(3) / 3, atol=1e-12)
            np.testing.assert_allclose(partial_trace(rho, [1]).matrix, np.eye(3) / 3, atol=1e-12)


class TestSimplexStates(unittest.TestCase):
    def test_uniform_is_maximally_mixed(self):
        np.testing.assert_allclose(simplex_state(np.full((3, 3), 1 / 9)).matrix, np.eye(9) / 9, atol=1e-14)

    def test_vertex(self):
        c = np.zeros((3, 3))
        c[0, 0] = 1.0
        np.testing.assert_allclose(simplex_state(c).matrix, bell_projector(0, 0), atol=1e-14)

    def test_purity_is_sum_of_squares(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            c = rng.dirichlet(np.ones(9))
            self.assertAlmostEqual(purity(simplex_state(c)), float(np.sum(c ** 2)), places=12)

    def test_invalid_coefficients(self):
        with self.assertRaises(InvalidCoefficients):
            MagicCoefficients(np.full((3, 3), 0.2))
        bad = np.full((3, 3), 1 / 9)
        bad[0, 0], bad[0, 1] = -0.1, 1 / 9 + 0.1
        with self.assertRaises(InvalidCoefficients):
            MagicCoefficients(bad)
        with self.assertRaises(InvalidCoefficients):
            MagicCoefficients(np.ones(4) / 4)


class TestRhoB(unittest.TestCase):
    def test_endpoint(self):
        c = np.zeros((3, 3))
        c[0, 0], c[1, 1] = 2 / 3, 1 / 3
        np.testing.assert_allclose(rho_b(1 / 3).matrix, simplex_state(c).matrix, atol=1e-14)

    def test_x_zero(self):
        expected = (bell_projector(0, 2) + bell_projector(1, 2) + bell_projector(2, 2)) / 3
        np.testing.assert_allclose(rho_b(0).matrix, expected, atol=1e-14)

    def test_valid_on_grid(self):
        for x in np.linspace(0, 1 / 3, 100):
            self.assertAlmostEqual(np.trace(rho_b(x).matrix).real, 1.0, places=12)

    def test_ppt_boundary(self):
        for i in range(101):
            x = i / 300
            lowest = hermitian_eigenvalues(partial_transpose(rho_b(x)))[0]
            if x <= PPT_BOUNDARY_X + 1e-12:
                self.assertGreaterEqual(lowest, -1e-10, msg=f"x={x}")
            elif x >= 0.14:
                self.assertLessEqual(lowest, -1e-6, msg=f"x={x}")

    def test_out_of_range(self):
        with self.assertRaises(OutOfRange):
            rho_b(0.4)
        with self.assertRaises(OutOfRange):
            rho_b(-0.01)


class TestActivationState(unittest.TestCase):
    def test_table(self):
        self.assertAlmostEqual(ACTIVATION_TABLE.sum(), 1.0, places=15)
        self.assertAlmostEqual(float(np.sum(ACTIVATION_TABLE ** 2)), 74 / 324, places=15)

    def test_ket_readings_are_unit(self):
        for interpretation in (Interpretation.LITERAL_RENORMALIZED, Interpretation.SQRT_AMPLITUDES):
            self.assertAlmostEqual(np.linalg.norm(phi_spin(interpretation)), 1.0, places=14)

    def test_mixture_reading(self):
        self.assertIs(ACCEPTED_INTERPRETATION, Interpretation.BELL_MIXTURE)
        with self.assertRaises(UnknownInterpretation):
            phi_spin(Interpretation.BELL_MIXTURE)
        np.testing.assert_allclose(phi_spin_state("bell-mixture").matrix, simplex_state(ACTIVATION_TABLE).matrix)

    def test_parse(self):
        self.assertIs(Interpretation.parse(" SQRT-Amplitudes "), Interpretation.SQRT_AMPLITUDES)
        with self.assertRaises(UnknownInterpretation):
            Interpretation.parse("squared")


class TestMubs(unittest.TestCase):
    def test_four_unbiased_bases(self):
        bases = mub_bases().bases
        self.assertEqual(len(bases), 4)
        np.testing.assert_allclose(bases[0], np.eye(3))
        for basis in bases:
            np.testing.assert_allclose(basis.conj() @ basis.T, np.eye(3), atol=1e-12)
        for i, j in itertools.combinations(range(4), 2):
            overlaps = np.abs(bases[i].conj() @ bases[j].T) ** 2
            np.testing.assert_allclose(overlaps, 1 / 3, atol=1e-12)


if __name__ == "__main__":
    unittest.main()
