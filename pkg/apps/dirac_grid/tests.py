# apps/dirac_grid/tests.py
import io
import itertools

import numpy as np
from django.test import SimpleTestCase
from scipy import linalg

from apps.graded_core.clifford import standard_clifford
from apps.graded_core.exceptions import (
    DimensionMismatch, ExtensionTooShort, GapViolation, InputError, LagrangianError, ParityMismatch,
    RankAmbiguity, RefineRequired,
)
from apps.kclass.loops import LoopOperatorFamily
from apps.kclass.modules import KasparovModule

from .boundary import (
    BoundaryOperator, TrivializingOp, aps_projection, graph_basis, kernel_basis, lagrangian_unitary,
    negative_basis,
)
from .cylinder import build_cylinder_extension, cutoff, verify_zl_inverse
from .identities import boundary_identities
from .mesh import Mesh1D
from .operators import (
    DiscreteDirac, build_interval_dirac, diagonal_index_oracle, diagonal_kernel_oracle, impose_aps,
    numerical_index, scalar_index_oracle, scalar_kernel_oracle,
)
from .products import (
    EvenCollarModel, OddCollarPath, build_product_dirac, lift_trivializing, verify_product_index,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)


def random_unitary(rng, dim):
    unitary, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return unitary


def scalar_collar(b, a_right, a_left, nodes=64):
    dirac = build_interval_dirac(Mesh1D.interval(nodes), BoundaryOperator([[b]]))
    return impose_aps(dirac, right=[[a_right]], left=[[a_left]])


class MeshTests(SimpleTestCase):
    def test_too_few_nodes(self):
        with self.assertRaises(DimensionMismatch):
            Mesh1D.interval(4)

    def test_interval_and_circle_cells(self):
        self.assertEqual(Mesh1D.interval(65).cells, 64)
        self.assertEqual(Mesh1D.circle(64).cells, 64)
        self.assertEqual(Mesh1D.interval(65).boundary_traces, 2)
        self.assertEqual(Mesh1D.circle(64).boundary_traces, 0)

    def test_extension_keeps_spacing(self):
        mesh = Mesh1D.interval(65, 2.0)
        extended = mesh.extended(10)
        self.assertAlmostEqual(extended.spacing, mesh.spacing)
        self.assertAlmostEqual(extended.length, 2.0 + 10 * mesh.spacing)

    def test_unknown_kind(self):
        with self.assertRaises(InputError):
            Mesh1D('sphere', 16)


class BoundaryTests(SimpleTestCase):
    def test_aps_projection(self):
        projection = aps_projection(np.diag([2.0, -1.0]))
        np.testing.assert_allclose(projection, np.diag([1.0, 0.0]), atol=1e-12)

    def test_projection_of_singular_operator(self):
        with self.assertRaises(GapViolation):
            aps_projection(np.diag([2.0, 0.0]))

    def test_trivializing_needs_gap(self):
        boundary = BoundaryOperator(np.diag([1.0, -1.0]))
        with self.assertRaises(GapViolation):
            TrivializingOp(np.diag([-1.0, 0.0]), boundary)
        self.assertAlmostEqual(TrivializingOp(np.diag([1.0, -2.0]), boundary).gap, 2.0)

    def test_odd_collar_needs_odd_operator(self):
        with self.assertRaises(ParityMismatch):
            BoundaryOperator(np.eye(2), SIGMA_Z)
        boundary = BoundaryOperator(SIGMA_X, SIGMA_Z)
        with self.assertRaises(ParityMismatch):
            TrivializingOp(SIGMA_Z, boundary)

    def test_kernel_basis_rejects_non_projection(self):
        with self.assertRaises(InputError):
            kernel_basis(np.array([[1.0, 0.5], [0.0, 0.0]]))
        self.assertEqual(kernel_basis(np.diag([1.0, 0.0, 0.0])).shape, (3, 2))

    def test_lagrangian_unitary_ignores_basis_choice(self):
        rng = np.random.default_rng(3)
        grading = np.diag([1.0, 1.0, -1.0, -1.0])
        unitary = random_unitary(rng, 2)
        basis = np.vstack([np.eye(2), unitary])
        change = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        np.testing.assert_allclose(lagrangian_unitary(basis @ change, grading), unitary, atol=1e-10)
        np.testing.assert_allclose(graph_basis(basis @ change, grading), basis, atol=1e-10)

    def test_non_lagrangian_subspace(self):
        grading = np.diag([1.0, -1.0])
        with self.assertRaises(LagrangianError):
            lagrangian_unitary(np.array([[1.0], [0.5]]), grading)

    def test_negative_space_of_odd_operator_is_lagrangian(self):
        rng = np.random.default_rng(5)
        block = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        odd = np.block([[np.zeros((2, 2)), block.conj().T], [block, np.zeros((2, 2))]])
        unitary = lagrangian_unitary(negative_basis(odd), np.diag([1.0, 1.0, -1.0, -1.0]))
        np.testing.assert_allclose(unitary.conj().T @ unitary, np.eye(2), atol=1e-10)


class EvenCollarTests(SimpleTestCase):
    def test_scalar_index_matches_oracle(self):
        for b, a_right, a_left in itertools.product((-2.0, -0.5, 0.5, 2.0), (-3.0, 1.0), (-1.0, 3.0)):
            report = numerical_index(scalar_collar(b, a_right, a_left))
            expected = scalar_index_oracle(b, a_right, a_left)
            self.assertEqual(report.index, expected, (b, a_right, a_left))
            self.assertEqual(report.kernel, max(expected, 0))
            self.assertEqual(report.cokernel, max(-expected, 0))

    def test_kernel_matches_oracle(self):
        for b, a_right, a_left in itertools.product((-2.0, 0.5), (-3.0, 1.0), (-1.0, 3.0)):
            report = numerical_index(scalar_collar(b, a_right, a_left))
            self.assertEqual(report.kernel, scalar_kernel_oracle(b, a_right, a_left), (b, a_right, a_left))
        self.assertEqual(diagonal_kernel_oracle([1.0, -2.0], [-3.0, 1.0], [2.0, -3.0]), 1)

    def test_nearly_aligned_ends_are_ambiguous(self):
        # B = 0 propagates the left line unchanged; the right line misses it by δ
        boundary = BoundaryOperator(np.zeros((2, 2)))
        masses = np.zeros((8, 2, 2))
        left = np.array([[1.0], [0.0]])
        for delta, kernel in ((0.0, 1), (1.0, 0)):
            dirac = DiscreteDirac(Mesh1D.interval(9), boundary, masses, left, np.array([[1.0], [delta]]))
            self.assertEqual(numerical_index(dirac).kernel, kernel)
        near = DiscreteDirac(Mesh1D.interval(9), boundary, masses, left, np.array([[1.0], [1.6e-8]]))
        with self.assertRaises(RankAmbiguity):
            numerical_index(near)
        self.assertIn(numerical_index(near, strict=False).kernel, (0, 1))

    def test_free_and_dirichlet_ends(self):
        dirac = build_interval_dirac(Mesh1D.interval(32), BoundaryOperator(np.diag([1.0, -1.0])))
        self.assertEqual(numerical_index(dirac).index, 2)
        self.assertEqual(numerical_index(dirac).kernel, 2)
        clamped = impose_aps(dirac, right_projection=np.eye(2), left_projection=np.eye(2))
        self.assertEqual(numerical_index(clamped).index, -2)

    def test_one_free_end(self):
        dirac = impose_aps(build_interval_dirac(Mesh1D.interval(32), BoundaryOperator([[1.0]])), right=[[1.0]])
        self.assertEqual(numerical_index(dirac).index, scalar_index_oracle(1.0, 1.0, None))

    def test_circle_has_no_boundary_conditions(self):
        dirac = build_interval_dirac(Mesh1D.circle(16), BoundaryOperator([[0.0]]))
        with self.assertRaises(DimensionMismatch):
            impose_aps(dirac, right=[[1.0]])

    def test_conjugated_diagonal_model(self):
        rng = np.random.default_rng(11)
        unitary = random_unitary(rng, 2)
        conjugate = lambda values: unitary @ np.diag(values) @ unitary.conj().T
        boundary = BoundaryOperator(conjugate([1.0, -2.0]))
        dirac = impose_aps(build_interval_dirac(Mesh1D.interval(64), boundary),
                           right=conjugate([-3.0, 1.0]), left=conjugate([2.0, -3.0]))
        expected = diagonal_index_oracle([1.0, -2.0], [-3.0, 1.0], [2.0, -3.0])
        self.assertEqual(expected, 1)
        report = numerical_index(dirac)
        self.assertEqual((report.index, report.kernel, report.cokernel), (1, 1, 0))

    def test_assembled_operator_is_odd_and_selfadjoint(self):
        rng = np.random.default_rng(2)
        raw = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        dirac = build_interval_dirac(Mesh1D.interval(16), BoundaryOperator(raw + raw.conj().T))
        operator, grading = dirac.assembled()
        dense = operator.toarray()
        z = np.diag(grading)
        self.assertLess(np.max(np.abs(dense - dense.conj().T)), 1e-12)
        self.assertLess(np.max(np.abs(dense @ z + z @ dense)), 1e-12)

    def test_scalar_circle_spectrum_is_symmetric(self):
        dirac = build_interval_dirac(Mesh1D.circle(16), BoundaryOperator([[0.0]]))
        self.assertEqual(dirac.stencil().shape, (16, 16))
        values = np.sort(linalg.eigvalsh(dirac.assembled()[0].toarray()))
        np.testing.assert_allclose(values, -values[::-1], atol=1e-10)

    def test_kernel_propagates_with_transfer(self):
        dirac = build_interval_dirac(Mesh1D.interval(32), BoundaryOperator(np.diag([0.5, -1.5])))
        stencil = dirac.stencil().toarray()
        kernel = linalg.null_space(stencil)
        self.assertEqual(kernel.shape[1], 2)
        transfer = dirac.transfer()
        for column in kernel.T:
            np.testing.assert_allclose(column[-2:], transfer @ column[:2], atol=1e-10)

    def test_coarse_mesh_for_large_mass(self):
        dirac = build_interval_dirac(Mesh1D.interval(8), BoundaryOperator([[100.0]]))
        with self.assertRaises(RefineRequired):
            dirac.transfer()

    def test_coordinate_export(self):
        stream = io.StringIO()
        scalar_collar(1.0, -3.0, 3.0, nodes=8).export_coordinates(stream)
        lines = stream.getvalue().splitlines()
        rows, cols, nnz = (int(value) for value in lines[0].lstrip('% ').split())
        self.assertEqual((rows, cols), (7, 7))
        self.assertEqual(len(lines) - 1, nnz)


class OddCollarTests(SimpleTestCase):
    def test_scalar_loop_flows(self):
        for flow in range(-2, 3):
            self.assertEqual(OddCollarPath.scalar(flow).flow(), flow)

    def test_pairing_detects_kernel(self):
        path = OddCollarPath.scalar(1)
        crossing = numerical_index(path.dirac(0.25), strict=False)
        self.assertEqual(crossing.index, 0)
        self.assertEqual(crossing.kernel, 1)
        self.assertLess(np.min(np.abs(linalg.eigvals(crossing.pairing) - 1)), 1e-9)
        regular = numerical_index(path.dirac(0.0))
        self.assertEqual(regular.kernel, 0)
        self.assertGreater(np.min(np.abs(linalg.eigvals(regular.pairing) - 1)), 0.1)

    def test_odd_operator_uses_grading(self):
        path = OddCollarPath.scalar(1)
        dirac = path.dirac(0.0)
        self.assertEqual(dirac.odd_operator().shape, dirac.stencil().shape)
        with self.assertRaises(ParityMismatch):
            scalar_collar(1.0, 1.0, 1.0).odd_operator()


class CylinderTests(SimpleTestCase):
    MODELS = [(1.0, 1.0, -1.0), (1.0, -3.0, -1.0), (-1.0, 3.0, 2.0), (-1.0, -1.5, 1.0),
              (2.5, -0.5, 0.0), (-2.5, 5.0, -4.0)]

    def test_cutoff_profile(self):
        self.assertEqual(cutoff(0.1, 1.0, 0.25), 0.0)
        self.assertEqual(cutoff(0.9, 1.0, 0.25), 1.0)
        self.assertTrue(0 < cutoff(0.78, 1.0, 0.25) < 1)

    def test_extension_preserves_index(self):
        for b, a_right, a_left in self.MODELS:
            boundary = BoundaryOperator([[b]])
            trivializing = TrivializingOp([[a_right]], boundary)
            self.assertGreaterEqual(trivializing.gap, 2.0)
            for nodes in (64, 128):
                original = scalar_collar(b, a_right, a_left, nodes)
                extended = build_cylinder_extension(original, trivializing, 8.0 / trivializing.gap)
                first, second = numerical_index(original), numerical_index(extended)
                self.assertEqual(first.index, second.index, (b, a_right, a_left, nodes))
                self.assertEqual((first.kernel, first.cokernel), (second.kernel, second.cokernel))

    def test_matrix_extension(self):
        rng = np.random.default_rng(8)
        unitary = random_unitary(rng, 3)
        boundary = BoundaryOperator(unitary @ np.diag([1.0, -0.5, 2.0]) @ unitary.conj().T)
        trivializing = TrivializingOp(unitary @ np.diag([1.0, -2.0, -4.5]) @ unitary.conj().T, boundary)
        original = impose_aps(build_interval_dirac(Mesh1D.interval(64), boundary),
                              right=trivializing, left=np.diag([3.0, 1.0, -1.0]))
        extended = build_cylinder_extension(original, trivializing, 4.0)
        self.assertEqual(numerical_index(original).index, numerical_index(extended).index)

    def test_short_extension(self):
        boundary = BoundaryOperator([[1.0]])
        trivializing = TrivializingOp([[1.0]], boundary)
        with self.assertRaises(ExtensionTooShort):
            build_cylinder_extension(scalar_collar(1.0, 1.0, -1.0), trivializing, 1.0)

    def test_half_cylinder_inverse(self):
        rng = np.random.default_rng(4)
        unitary = random_unitary(rng, 2)
        boundary = BoundaryOperator(unitary @ np.diag([1.0, -1.0]) @ unitary.conj().T)
        trivializing = TrivializingOp(unitary @ np.diag([1.0, -2.0]) @ unitary.conj().T, boundary)
        report = verify_zl_inverse(trivializing, Mesh1D.interval(129, 2.0))
        self.assertLess(report.discrete_residual, 1e-8)
        self.assertLess(report.continuum_residual, 1e-2)
        self.assertGreater(report.solution_norm, 0)

    def test_half_cylinder_with_positive_mass(self):
        boundary = BoundaryOperator(np.diag([1.0, 2.0]))
        report = verify_zl_inverse(TrivializingOp(np.eye(2), boundary), Mesh1D.interval(129))
        self.assertLess(report.discrete_residual, 1e-8)


class ProductTests(SimpleTestCase):
    def test_mode_blocks(self):
        circle = LoopOperatorFamily.twisted_circle([1])
        even_first = build_interval_dirac(Mesh1D.interval(16), BoundaryOperator([[0.7]]))
        odd_first = OddCollarPath.scalar(1, mesh=Mesh1D.interval(16)).dirac(0.0)
        for first in (even_first, odd_first):
            product = build_product_dirac(first, circle, tau=1.1)
            self.assertLess(product.mode_block_residual(), 1e-10)
            self.assertEqual(len(product.collars()), circle.dim)

    def test_mixed_circle_is_not_separable(self):
        circle = LoopOperatorFamily.twisted_circle([1], mixing_seed=4)
        first = build_interval_dirac(Mesh1D.interval(16), BoundaryOperator([[0.7]]))
        product = build_product_dirac(first, circle)
        self.assertFalse(product.separable)
        self.assertEqual(len(product.collars()), 1)
        with self.assertRaises(DimensionMismatch):
            product.mode_block_residual()

    def test_declared_parity_checked(self):
        first = build_interval_dirac(Mesh1D.interval(16), BoundaryOperator([[0.7]]))
        with self.assertRaises(ParityMismatch):
            build_product_dirac(first, LoopOperatorFamily.twisted_circle([1]), parity_pair=(1, 1))

    def test_lift_keeps_gap(self):
        first = build_interval_dirac(Mesh1D.interval(16), BoundaryOperator([[0.5]]))
        product = build_product_dirac(first, LoopOperatorFamily.twisted_circle([2]), tau=0.3)
        lifted = lift_trivializing(product, [[1.5]])
        self.assertGreaterEqual(lifted.gap, 2.0 - 1e-9)

    def test_boundary_identities(self):
        residuals = boundary_identities()
        self.assertGreaterEqual(len(residuals), 17)
        for name, residual in residuals.items():
            self.assertLess(residual, 1e-10, name)

    def test_flipped_gamma_breaks_reductions(self):
        residuals = boundary_identities(gens=standard_clifford(gamma2_sign=-1))
        self.assertGreater(residuals['even-odd/boundary-reduction'], 1e-3)
        self.assertGreater(residuals['odd-odd/boundary-reduction'], 1e-3)

    def test_even_even(self):
        first = EvenCollarModel.scalar(-0.5, -3.0, -1.0)
        self.assertEqual(first.index(), 1)
        second = KasparovModule.even(np.array([[0.0, 1.0]]))
        report = verify_product_index(first, second)
        self.assertEqual((report.first, report.second), (1, 1))
        self.assertTrue(report.ok, report)
        twice = verify_product_index(EvenCollarModel.scalar(0.5, 1.0, 3.0), KasparovModule.even(np.zeros((0, 2))))
        self.assertEqual(twice.product, -2)

    def test_even_odd(self):
        models = [EvenCollarModel.scalar(0.5, -3.0, -1.0), EvenCollarModel.scalar(0.5, 1.0, 3.0),
                  EvenCollarModel.scalar(0.5, -3.0, 3.0)]
        for first, winding in itertools.product(models, (-1, 2)):
            report = verify_product_index(first, LoopOperatorFamily.twisted_circle([winding]))
            self.assertTrue(report.ok, report)
        self.assertEqual([model.index() for model in models], [1, -1, 0])

    def test_odd_even(self):
        for flow in (-1, 2):
            report = verify_product_index(OddCollarPath.scalar(flow), KasparovModule.even(np.array([[0.0, 1.0]])))
            self.assertEqual(report.product, flow)
            report = verify_product_index(OddCollarPath.scalar(flow), KasparovModule.even(np.zeros((0, 2))))
            self.assertEqual(report.product, 2 * flow)

    def test_odd_odd(self):
        for flow, winding in ((1, 1), (-1, 2), (2, -1), (0, 2)):
            report = verify_product_index(OddCollarPath.scalar(flow), LoopOperatorFamily.twisted_circle([winding]))
            self.assertEqual(report.product, flow * winding, report)

    def test_odd_odd_double_windings(self):
        for flow, winding in ((-2, 2), (1, -2), (2, -2)):
            report = verify_product_index(OddCollarPath.scalar(flow), LoopOperatorFamily.twisted_circle([winding]))
            self.assertEqual((report.first, report.second), (flow, winding))
            self.assertTrue(report.ok, report)

    def test_flipped_gamma_flips_odd_odd(self):
        report = verify_product_index(OddCollarPath.scalar(1), LoopOperatorFamily.twisted_circle([1]),
                                      gens=standard_clifford(gamma2_sign=-1))
        self.assertEqual(report.product, -1)
        self.assertFalse(report.ok)
