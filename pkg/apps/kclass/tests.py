# apps/kclass/tests.py
import math

import numpy as np
from django.test import SimpleTestCase

from apps.graded_core.clifford import standard_clifford
from apps.graded_core.exceptions import (
    CommutationError, GapViolation, InputError, ParityMismatch, RankAmbiguity,
)
from apps.graded_core.graded import spectral_norm

from .algebra import BlockAlgebra, K0Class, K1Class, k0_kronecker, pair_classes
from .loops import LoopOperatorFamily, _refined, k1_of_family, spectral_flow, unitary_flow
from .modules import KasparovModule, k0_of_kernel
from .products import (
    clifford_regular_operator, gamma_model_operator, gamma_model_residual, kprod_even_even,
    kprod_even_odd, kprod_odd_even, kprod_odd_odd, morita_project,
)
from .samples import random_even_module, random_loop_family, random_odd_module


class AlgebraTests(SimpleTestCase):
    def test_tensor_blocks_are_i_major(self):
        algebra = BlockAlgebra((1, 2)).tensor(BlockAlgebra((3, 5)))
        self.assertEqual(algebra.block_sizes, (3, 5, 6, 10))

    def test_kronecker_examples(self):
        trivial = BlockAlgebra.trivial()
        one = K0Class(trivial, (1,))
        self.assertEqual(k0_kronecker(one, one).multiplicities, (1,))
        two_blocks = K0Class(BlockAlgebra((1, 1)), (2, 0))
        self.assertEqual(k0_kronecker(two_blocks, K0Class(trivial, (3,))).multiplicities, (6, 0))

    def test_class_arithmetic(self):
        algebra = BlockAlgebra((1, 2))
        first, second = K0Class(algebra, (1, -2)), K0Class(algebra, (3, 4))
        self.assertEqual((first + second).multiplicities, (4, 2))
        self.assertEqual((first - second).multiplicities, (-2, -6))
        self.assertTrue((first - first).is_zero)

    def test_pair_classes_parity(self):
        trivial = BlockAlgebra.trivial()
        self.assertIsInstance(pair_classes(K0Class(trivial, (2,)), K1Class(trivial, (3,))), K1Class)
        self.assertIsInstance(pair_classes(K1Class(trivial, (2,)), K1Class(trivial, (3,))), K0Class)


class KernelClassTests(SimpleTestCase):
    def test_zero_operator(self):
        module = KasparovModule.even(np.zeros((1, 3)))
        self.assertEqual(k0_of_kernel(module).multiplicities, (2,))

    def test_invertible_operator(self):
        module = KasparovModule.even(np.diag([2.0, 3.0]))
        self.assertEqual(k0_of_kernel(module).multiplicities, (0,))

    def test_diagonal_example(self):
        # H⁺ = ℂ², H⁻ = ℂ, D⁺ = (0, 5)
        module = KasparovModule.even(np.array([[0.0, 5.0]]))
        self.assertEqual(k0_of_kernel(module).multiplicities, (1,))

    def test_ambiguous_rank_is_reported(self):
        module = KasparovModule.even(np.diag([1.0, 5e-9]))
        with self.assertRaises(RankAmbiguity):
            k0_of_kernel(module)

    def test_block_multiplicities(self):
        algebra = BlockAlgebra((1, 2))
        module = KasparovModule.even(np.zeros((1, 3)), algebra, plus_sectors=[0, 1, 1], minus_sectors=[1])
        self.assertEqual(k0_of_kernel(module).multiplicities, (1, 1))

    def test_operator_must_commute_with_blocks(self):
        algebra = BlockAlgebra((1, 1))
        with self.assertRaises(CommutationError):
            KasparovModule.even(np.ones((1, 1)), algebra, plus_sectors=[0], minus_sectors=[1])


class SpectralFlowTests(SimpleTestCase):
    def test_constant_invertible_family(self):
        family = LoopOperatorFamily.constant(np.diag([1.0, -2.0]))
        self.assertEqual(spectral_flow(family).flow, 0)
        self.assertTrue(k1_of_family(family).is_zero)

    def test_cosine_crossings_cancel(self):
        family = LoopOperatorFamily({1: [[0.5]], -1: [[0.5]]})
        report = spectral_flow(family)
        self.assertEqual(report.flow, 0)
        self.assertEqual((report.up, report.down), (1, 1))

    def test_shifted_sine_against_dense_sampling(self):
        family = LoopOperatorFamily({0: [[0.5]], 1: [[-0.5j]], -1: [[0.5j]]})
        grid = np.linspace(0, 2 * math.pi, 10001)
        values = np.sin(grid) + 0.5
        signs = np.sign(values)
        dense_up = int(np.sum((signs[:-1] < 0) & (signs[1:] > 0)))
        dense_down = int(np.sum((signs[:-1] > 0) & (signs[1:] < 0)))
        report = spectral_flow(family)
        self.assertEqual(report.flow, dense_up - dense_down)
        self.assertEqual((report.up, report.down), (dense_up, dense_down))

    def test_twisted_circle_flow_is_total_charge(self):
        for charges in ([1], [-2], [2, -1], [0]):
            family = LoopOperatorFamily.twisted_circle(charges, mixing_seed=3)
            self.assertEqual(spectral_flow(family).flow, sum(charges), charges)

    def test_concatenation_is_additive(self):
        family = LoopOperatorFamily.twisted_circle([2, 1])
        whole = spectral_flow(family).flow
        first = spectral_flow(family, t0=0.0, t1=1.3).flow
        second = spectral_flow(family, t0=1.3, t1=2 * math.pi).flow
        self.assertEqual(first + second, whole)

    def test_grid_shift_invariance(self):
        family = LoopOperatorFamily.twisted_circle([-1, 2], mixing_seed=5)
        self.assertEqual(spectral_flow(family, t0=0.37, t1=0.37 + 2 * math.pi).flow, 1)
        self.assertEqual(spectral_flow(family, sample_count=515).flow, 1)

    def test_singular_endpoint(self):
        family = LoopOperatorFamily.twisted_circle([1], offset=0.0)
        with self.assertRaises(GapViolation):
            spectral_flow(family)

    def test_sample_on_crossing_is_moved_off_it(self):
        # eigenvalue t/2π − 1/2 vanishes at the midpoint sample of an even grid
        family = LoopOperatorFamily({0: [[-0.5]]}, drift=[[1.0]], sample_count=16)
        report = spectral_flow(family)
        self.assertEqual(report.flow, 1)
        self.assertEqual((report.up, report.down), (1, 0))

    def test_even_grids_over_double_charge(self):
        for sample_count in (16, 256, 512):
            for charge in (2, -2):
                family = LoopOperatorFamily.twisted_circle([charge], sample_count=sample_count)
                self.assertEqual(spectral_flow(family).flow, charge, (sample_count, charge))

    def test_slope_at_lipschitz_bound(self):
        for charges in ([1], [2], [-2], [2, -1]):
            family = LoopOperatorFamily.twisted_circle(charges)
            report = spectral_flow(family)
            self.assertEqual(report.flow, sum(charges))
            self.assertEqual(report.up - report.down, sum(charges))

    def test_random_loop_families(self):
        for seed in range(40):
            family, charges = random_loop_family(np.random.default_rng(seed))
            self.assertEqual(k1_of_family(family).windings, tuple(charges), seed)

    def test_refinement_suggestion_is_coprime(self):
        self.assertEqual(_refined(256), 513)
        self.assertEqual(math.gcd(_refined(257), 257), 1)

    def test_open_path_is_not_a_loop(self):
        family = LoopOperatorFamily({0: [[-0.5]]}, drift=[[3.0]])
        self.assertAlmostEqual(family.endpoint_mismatch(), 3.0)
        self.assertEqual(spectral_flow(family).flow, 1)
        with self.assertRaises(InputError):
            k1_of_family(family)

    def test_twisted_circle_closes_up(self):
        for charges in ([2], [-1, 2]):
            family = LoopOperatorFamily.twisted_circle(charges, mixing_seed=6)
            self.assertLess(family.endpoint_mismatch(), 1e-10)

    def test_unitary_flow_counts_counterclockwise_crossings(self):
        for winding in (-2, -1, 1, 3):
            path = lambda t, w=winding: np.diag([np.exp(1j * (w * t + 0.5)), np.exp(2.0j)])
            self.assertEqual(unitary_flow(path, 0.0, 2 * math.pi), winding)


class ProductTests(SimpleTestCase):
    def test_even_even_zero_operators(self):
        first = KasparovModule.even(np.zeros((1, 2)))
        second = KasparovModule.even(np.zeros((2, 1)))
        product = kprod_even_even(first, second)
        expected = k0_kronecker(k0_of_kernel(first), k0_of_kernel(second))
        self.assertEqual(k0_of_kernel(product).multiplicities, expected.multiplicities)

    def test_even_even_product_law_on_random_modules(self):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            first, second = random_even_module(rng), random_even_module(rng)
            product = kprod_even_even(first, second)
            expected = k0_kronecker(k0_of_kernel(first), k0_of_kernel(second))
            self.assertEqual(k0_of_kernel(product).multiplicities, expected.multiplicities)

    def test_even_even_classes_example(self):
        algebra = BlockAlgebra((1, 1))
        first = KasparovModule.even(np.zeros((0, 1)), algebra, plus_sectors=[0], minus_sectors=[])
        second = KasparovModule.even(np.zeros((0, 2)))
        self.assertEqual(k0_of_kernel(first).multiplicities, (1, 0))
        self.assertEqual(k0_of_kernel(kprod_even_even(first, second)).multiplicities, (2, 0))

    def test_parity_mismatch(self):
        even = KasparovModule.even(np.zeros((1, 1)))
        odd = KasparovModule.odd(np.eye(2))
        with self.assertRaises(ParityMismatch):
            kprod_even_even(even, odd)
        with self.assertRaises(ParityMismatch):
            kprod_odd_even(even, odd)

    def test_even_odd_with_zero_second_operator(self):
        first = KasparovModule.even(np.array([[2.0]]))
        second = KasparovModule.odd(np.zeros((3, 3)))
        product = kprod_even_odd(first, second)
        values = np.sort(np.linalg.eigvalsh(product.matrix))
        self.assertTrue(np.allclose(values, np.repeat([-2.0, 2.0], 3)))

    def test_even_odd_flow_is_index_times_flow(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            first = random_even_module(rng)
            family, _ = random_loop_family(rng)
            product = kprod_even_odd(first, family)
            expected = pair_classes(k0_of_kernel(first), k1_of_family(family))
            self.assertEqual(k1_of_family(product).windings, expected.windings)

    def test_odd_even_flow_is_flow_times_index(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            family, _ = random_loop_family(rng)
            second = random_even_module(rng)
            product = kprod_odd_even(family, second)
            expected = pair_classes(k1_of_family(family), k0_of_kernel(second))
            self.assertEqual(k1_of_family(product).windings, expected.windings)

    def test_invertible_factor_kills_flow(self):
        first = KasparovModule.even(np.array([[1.5, 0.0], [0.0, -2.0]]))
        family = LoopOperatorFamily.twisted_circle([2])
        self.assertEqual(spectral_flow(kprod_even_odd(first, family)).flow, 0)
        self.assertEqual(spectral_flow(kprod_odd_even(family, first)).flow, 0)

    def test_odd_odd_plain_modules(self):
        zero = KasparovModule.odd(np.zeros((1, 1)))
        product = kprod_odd_odd(zero, zero)
        self.assertEqual(k0_of_kernel(product).multiplicities, (0,))
        invertible = KasparovModule.odd(np.diag([1.0, -3.0]))
        self.assertTrue(k0_of_kernel(kprod_odd_odd(invertible, invertible)).is_zero)

    def test_odd_odd_chern_number_is_product_of_windings(self):
        for first_charge, second_charge in ((1, 1), (2, -1), (0, 2), (-2, -2)):
            first = LoopOperatorFamily.twisted_circle([first_charge], mixing_seed=1)
            second = LoopOperatorFamily.twisted_circle([second_charge], mixing_seed=2)
            torus = kprod_odd_odd(first, second)
            self.assertEqual(torus.chern_number(), first_charge * second_charge)

    def test_odd_odd_random_blocks(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            first, _ = random_loop_family(rng)
            second, _ = random_loop_family(rng)
            torus = kprod_odd_odd(first, second)
            expected = pair_classes(k1_of_family(first), k1_of_family(second))
            self.assertEqual(torus.chern_class().multiplicities, expected.multiplicities)

    def test_flipped_gamma_flips_chern_number(self):
        first = LoopOperatorFamily.twisted_circle([1])
        second = LoopOperatorFamily.twisted_circle([1])
        torus = kprod_odd_odd(first, second, standard_clifford(gamma2_sign=-1))
        self.assertEqual(torus.chern_number(), -1)


class MoritaTests(SimpleTestCase):
    def test_gamma_model_compresses_consistently(self):
        rng = np.random.default_rng(10)
        first, second = random_odd_module(rng).matrix, random_odd_module(rng).matrix
        self.assertLess(gamma_model_residual(first, second), 1e-12)

    def test_identity(self):
        projected = morita_project(np.eye(12))
        self.assertLess(spectral_norm(projected - np.eye(6)), 1e-14)

    def test_non_commuting_operator_rejected(self):
        operator = np.kron(np.diag([1.0, 0.0, 0.0, 0.0]), np.eye(2))
        with self.assertRaises(CommutationError):
            morita_project(operator)

    def test_sign_flip_is_detected(self):
        rng = np.random.default_rng(11)
        first, second = random_odd_module(rng).matrix, random_odd_module(rng).matrix
        self.assertGreater(gamma_model_residual(first, second, standard_clifford(gamma2_sign=-1)), 1e-3)

    def test_regular_operator_is_odd(self):
        first, second = np.array([[1.0]]), np.array([[2.0]])
        operator = clifford_regular_operator(first, second)
        grading = np.diag([1.0, -1.0, -1.0, 1.0])
        self.assertLess(spectral_norm(operator @ grading + grading @ operator), 1e-15)
        self.assertLess(spectral_norm(gamma_model_operator(first, second, standard_clifford())
                                      - morita_project(operator)), 1e-14)
