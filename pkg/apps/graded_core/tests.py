# apps/graded_core/tests.py
import numpy as np
from django.test import SimpleTestCase

from .clifford import gamma_basis, morita_frame, regular_representation, standard_clifford
from .exceptions import DimensionMismatch, InvolutionError, LabError, ParityMismatch, UnitarityError
from .graded import (
    EVEN, MIXED, ODD, GradedOperator, GradedSpace, graded_kernel_dims, graded_sum,
    graded_tensor, is_involution, is_selfadjoint, is_unitary, parity_check,
    restrict_to_minus, spectral_norm, symmetrized_product, ungraded_tensor,
)


def random_odd(rng, plus, minus, selfadjoint=True):
    space = GradedSpace.from_split(plus, minus)
    block = rng.normal(size=(minus, plus)) + 1j * rng.normal(size=(minus, plus))
    matrix = np.zeros((plus + minus, plus + minus), dtype=complex)
    matrix[plus:, :plus] = block
    if selfadjoint:
        matrix[:plus, plus:] = block.conj().T
    else:
        other = rng.normal(size=(plus, minus)) + 1j * rng.normal(size=(plus, minus))
        matrix[:plus, plus:] = other
    return GradedOperator(matrix, space, ODD)


def random_even(rng, plus, minus):
    space = GradedSpace.from_split(plus, minus)
    matrix = np.zeros((plus + minus, plus + minus), dtype=complex)
    matrix[:plus, :plus] = rng.normal(size=(plus, plus)) + 1j * rng.normal(size=(plus, plus))
    matrix[plus:, plus:] = rng.normal(size=(minus, minus)) + 1j * rng.normal(size=(minus, minus))
    return GradedOperator(matrix, space, EVEN)


def random_pure(rng, plus, minus, parity):
    if parity == ODD:
        return random_odd(rng, plus, minus, selfadjoint=False)
    return random_even(rng, plus, minus)


class GradedSpaceTests(SimpleTestCase):
    def test_split_dimensions(self):
        space = GradedSpace.from_split(3, 2)
        self.assertEqual(space.dims, (3, 2))
        self.assertEqual(space.dim, 5)

    def test_conjugated_grading_splits_by_eigenvectors(self):
        rng = np.random.default_rng(4)
        unitary, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        space = GradedSpace.from_split(1, 3).conjugate(unitary)
        plus, minus = space.split_bases()
        self.assertEqual((plus.shape[1], minus.shape[1]), (1, 3))
        self.assertLess(spectral_norm(space.grading @ plus - plus), 1e-10)

    def test_non_involution_grading_rejected(self):
        with self.assertRaises(InvolutionError):
            GradedSpace(np.diag([1.0, 2.0]))


class ParityTests(SimpleTestCase):
    def setUp(self):
        self.z = np.diag([1.0, -1.0])
        self.sigma = standard_clifford().sigma

    def test_sigma_is_odd(self):
        self.assertEqual(parity_check(self.sigma, self.z).parity, ODD)

    def test_identity_is_even(self):
        for z in (self.z, np.eye(2), np.array([[0, 1], [1, 0]])):
            self.assertEqual(parity_check(np.eye(2), z).parity, EVEN)

    def test_sigma_plus_identity_is_mixed(self):
        report = parity_check(self.sigma + np.eye(2), self.z)
        self.assertEqual(report.parity, MIXED)
        self.assertAlmostEqual(report.commutator, 2.0, places=12)
        self.assertAlmostEqual(report.anticommutator, 2.0, places=12)

    def test_grading_must_be_involution(self):
        with self.assertRaises(InvolutionError):
            parity_check(np.eye(2), np.diag([1.0, 3.0]))

    def test_declared_parity_is_enforced(self):
        with self.assertRaises(ParityMismatch):
            GradedOperator(self.sigma, GradedSpace(self.z), EVEN)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            GradedOperator(np.eye(3), GradedSpace(self.z))


class PredicateTests(SimpleTestCase):
    def test_identity_passes_everything(self):
        for predicate in (is_involution, is_unitary, is_selfadjoint):
            ok, residual = predicate(np.eye(3))
            self.assertTrue(ok)
            self.assertEqual(residual, 0.0)

    def test_sigma_is_involution(self):
        self.assertTrue(is_involution(standard_clifford().sigma)[0])

    def test_random_gaussian_fails(self):
        rng = np.random.default_rng(11)
        matrix = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        for predicate in (is_involution, is_unitary, is_selfadjoint):
            ok, residual = predicate(matrix)
            self.assertFalse(ok)
            self.assertGreater(residual, 1e-3)


class GradedTensorTests(SimpleTestCase):
    def test_identity_with_odd_gives_grading_factor(self):
        rng = np.random.default_rng(1)
        first = GradedOperator.identity(GradedSpace.from_split(2, 1))
        second = random_odd(rng, 2, 2)
        product = graded_tensor(first, second)
        expected = np.kron(first.space.grading, second.matrix)
        self.assertLess(spectral_norm(product.matrix - expected), 1e-12)

    def test_even_even_is_kronecker(self):
        rng = np.random.default_rng(2)
        first, second = random_even(rng, 2, 1), random_even(rng, 1, 2)
        product = graded_tensor(first, second)
        self.assertLess(spectral_norm(product.matrix - np.kron(first.matrix, second.matrix)), 1e-12)
        self.assertEqual(product.parity, EVEN)

    def test_graded_sum_squares_add_reading_of_graded_tensor_example(self):
        # the 4x4 / 6x6 odd example read as the graded sum A + B
        rng = np.random.default_rng(3)
        first, second = random_odd(rng, 2, 2), random_odd(rng, 3, 3)
        total = graded_sum(first, second)
        expected = (np.kron(first.matrix @ first.matrix, np.eye(6))
                    + np.kron(np.eye(4), second.matrix @ second.matrix))
        self.assertLess(np.max(np.abs(total.matrix @ total.matrix - expected)), 1e-12)

    def test_graded_tensor_literal_reading_does_not_square_additively(self):
        rng = np.random.default_rng(3)
        first, second = random_odd(rng, 2, 2), random_odd(rng, 3, 3)
        product = graded_tensor(first, second).matrix
        additive = (np.kron(first.matrix @ first.matrix, np.eye(6))
                    + np.kron(np.eye(4), second.matrix @ second.matrix))
        self.assertGreater(np.max(np.abs(product @ product - additive)), 1e-3)

    def test_product_rule_with_koszul_sign(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            parities = rng.choice([EVEN, ODD], size=4)
            a = random_pure(rng, 2, 1, parities[0])
            b = random_pure(rng, 1, 2, parities[1])
            a2 = random_pure(rng, 2, 1, parities[2])
            b2 = random_pure(rng, 1, 2, parities[3])
            sign = -1 if (b.parity == ODD and a2.parity == ODD) else 1
            left = graded_tensor(a, b).matrix @ graded_tensor(a2, b2).matrix
            right = sign * graded_tensor(a.compose(a2), b.compose(b2)).matrix
            self.assertLess(np.max(np.abs(left - right)), 1e-12)

    def test_parity_adds(self):
        rng = np.random.default_rng(6)
        for first_parity in (EVEN, ODD):
            for second_parity in (EVEN, ODD):
                a = random_pure(rng, 2, 2, first_parity)
                b = random_pure(rng, 1, 2, second_parity)
                product = graded_tensor(a, b)
                expected = EVEN if first_parity == second_parity else ODD
                self.assertEqual(parity_check(product.matrix, product.space).parity, expected)


class UngradedTensorTests(SimpleTestCase):
    def test_identity(self):
        self.assertLess(spectral_norm(ungraded_tensor(np.eye(2), np.eye(3)).matrix - np.eye(6)), 1e-15)

    def test_gamma_kronecker_entry(self):
        gens = standard_clifford()
        product = ungraded_tensor(gens.gamma1, gens.gamma2).matrix
        self.assertEqual(product[0, 1], 1j)
        self.assertEqual(product[2, 3], -1j)

    def test_gradings_multiply(self):
        first, second = GradedSpace.from_split(1, 2), GradedSpace.from_split(2, 1)
        product = ungraded_tensor(GradedOperator.grading_of(first), GradedOperator.grading_of(second))
        self.assertLess(spectral_norm(product.matrix - product.space.grading), 1e-15)


class SymmetrizedProductTests(SimpleTestCase):
    def test_identity_unitary_returns_operator(self):
        rng = np.random.default_rng(7)
        operator = random_odd(rng, 3, 2)
        result = symmetrized_product(np.eye(2), operator)
        self.assertLess(spectral_norm(result.matrix - operator.matrix), 1e-12)

    def test_kernel_dimensions_preserved(self):
        rng = np.random.default_rng(8)
        # D⁺: 3 -> 2 of rank 1 gives ker D⁺ = 2, ker D⁻ = 1
        column = rng.normal(size=(2, 1)) + 1j * rng.normal(size=(2, 1))
        row = rng.normal(size=(1, 3)) + 1j * rng.normal(size=(1, 3))
        block = column @ row
        matrix = np.zeros((5, 5), dtype=complex)
        matrix[3:, :3] = block
        matrix[:3, 3:] = block.conj().T
        operator = GradedOperator(matrix, GradedSpace.from_split(3, 2), ODD)
        self.assertEqual(graded_kernel_dims(operator), (2, 1))
        unitary, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        result = symmetrized_product(unitary, operator)
        self.assertTrue(result.is_selfadjoint()[0])
        self.assertEqual(graded_kernel_dims(result), (2, 1))

    def test_even_involution_commuting_with_operator(self):
        # D = D_a ⊕ D_b and I = 1 ⊕ −1 on (+a, +b, −a, −b)
        d_plus = np.diag([1.5 + 0.5j, -0.7 + 2.0j])
        matrix = np.zeros((4, 4), dtype=complex)
        matrix[2:, :2] = d_plus
        matrix[:2, 2:] = d_plus.conj().T
        operator = GradedOperator(matrix, GradedSpace.from_split(2, 2), ODD)
        involution = np.diag([1.0, -1.0, 1.0, -1.0])
        self.assertTrue(is_involution(involution)[0])
        self.assertLess(spectral_norm(involution @ matrix - matrix @ involution), 1e-15)
        restricted = restrict_to_minus(involution, operator.space)
        result = symmetrized_product(restricted, operator)
        self.assertLess(spectral_norm(result.matrix - involution @ operator.matrix), 1e-12)

    def test_non_unitary_rejected(self):
        rng = np.random.default_rng(10)
        with self.assertRaises(UnitarityError):
            symmetrized_product(2 * np.eye(2), random_odd(rng, 2, 2))


class CliffordTests(SimpleTestCase):
    def test_relations(self):
        for name, residual in standard_clifford().residuals().items():
            self.assertLess(residual, 1e-15, name)

    def test_sign_flip_breaks_product_grading(self):
        residuals = standard_clifford(gamma2_sign=-1).residuals()
        self.assertAlmostEqual(residuals['grading_is_swap'], 2.0)
        self.assertLess(residuals['gammas_anticommute'], 1e-15)

    def test_gamma_basis(self):
        gens = standard_clifford()
        v1, v2 = gamma_basis(gens)
        self.assertLess(np.linalg.norm(gens.product_grading @ v1 - v1), 1e-14)
        self.assertLess(np.linalg.norm(gens.gamma2 @ v1 - 1j * v2), 1e-14)

    def test_regular_representation_left_and_right_commute(self):
        rep = regular_representation()
        for left in rep['left']:
            for right in rep['right']:
                self.assertLess(spectral_norm(left @ right - right @ left), 1e-15)
        sigma1, sigma2 = rep['left']
        self.assertLess(spectral_norm(sigma1 @ sigma2 + sigma2 @ sigma1), 1e-15)

    def test_morita_frame_carries_gamma_model(self):
        frame = morita_frame()
        self.assertLess(spectral_norm(frame.conj().T @ frame - np.eye(2)), 1e-15)
        gens = standard_clifford()
        v1, v2 = gamma_basis(gens)
        change = np.column_stack([v1, v2])
        for left, gamma in zip(regular_representation()['left'], (gens.gamma1, gens.gamma2)):
            compressed = change @ frame.conj().T @ left @ frame @ change.conj().T
            self.assertLess(spectral_norm(compressed - gamma), 1e-14)

    def test_errors_share_exit_codes(self):
        self.assertEqual(DimensionMismatch('x').exit_code, 2)
        self.assertEqual(UnitarityError('x').exit_code, 3)
        self.assertTrue(issubclass(ParityMismatch, LabError))
