# apps/signature/tests.py
import math

import numpy as np
from django.test import SimpleTestCase

from apps.graded_core.exceptions import (
    HodgeError, InputError, InvolutionError, LagrangianError,
)
from apps.kclass.algebra import BlockAlgebra, K0Class, K1Class

from .classes import (
    BOUNDARY_EVEN, BOUNDARY_ODD, CLOSED_EVEN, CLOSED_ODD, HARMONIC_TAU, capped_signature_indices,
    hs_normalization_check, odd_loop_signature_class, signature_class,
)
from .complexes import (
    HALF_SHIFT, RING, CellComplex, FlatBundleRep, _closure, cone_cap, cover, cw_projective_plane, cw_sphere,
    disjoint_union, disk, grid_torus, interval, minimal_projective_plane, orientation_cycle, polygon,
    product_complex, puncture, simplicial_complex, tetrahedron_sphere,
)
from .forms import IntersectionForm, intersection_form, signature_of_form, tensor_forms
from .groups import (
    FiniteGroup, cyclic, dihedral, direct_product, phi_pushforward, phi_pushforward_map, regular_action,
    symmetric, twisted_multiplicities,
)
from .hodge import IDENTITY_TOL, hodge_package
from .involutions import (
    assumptions_hold, build_alpha, canonical_trivializing, independence_suite, involution_path,
    lagrangian_from_unitary, square_identity_residual,
)
from .products import (
    decomposition_checks, lagrangian_tensor, odd_even_loop_product, odd_odd_loop_product, product_package,
    verify_signature_products, zeta_identity,
)
from .stabilization import (
    interval_stabilizer, stabilization_path, stabilize, stabilized_signature_class, swap_unitary,
)


def s2xs2():
    return product_complex(cw_sphere(), cw_sphere())


class GroupTests(SimpleTestCase):
    def test_irrep_dimensions(self):
        self.assertEqual(cyclic(4).irrep_dims, (1, 1, 1, 1))
        self.assertEqual(symmetric(3).irrep_dims, (1, 1, 2))
        self.assertEqual(sorted(dihedral(4).irrep_dims), [1, 1, 1, 1, 2])

    def test_characters_are_orthonormal(self):
        group = symmetric(3)
        table = group.characters
        gram = table @ table.conj().T / group.order
        self.assertLess(np.max(np.abs(gram - np.eye(3))), 1e-10)
        self.assertTrue(np.allclose(table[0], 1.0))

    def test_invalid_tables(self):
        with self.assertRaises(InputError):
            FiniteGroup(np.array([[0, 1], [0, 1]]))
        with self.assertRaises(InputError):
            cyclic(25)

    def test_regular_action_decomposes(self):
        group = symmetric(3)
        ok, residual = group.check_representation(regular_action(group))
        self.assertTrue(ok, residual)
        ranks = [round(np.trace(group.isotypic_projector(regular_action(group), irrep)).real)
                 for irrep in range(3)]
        self.assertEqual(ranks, [1, 1, 4])

    def test_twisted_multiplicities_of_regular_character(self):
        self.assertEqual(twisted_multiplicities(cyclic(2), np.array([2.0, 0.0])), (1, 1))

    def test_pushforward_relabels_bijectively(self):
        for first, second in ((cyclic(2), cyclic(2)), (cyclic(2), cyclic(3)), (symmetric(3), cyclic(2))):
            mapping = phi_pushforward_map(first, second)
            self.assertEqual(sorted(mapping.permutation), list(range(mapping.target.rank)))
            source = K0Class(mapping.source, tuple(range(1, mapping.source.rank + 1)))
            pushed = mapping.apply(source)
            self.assertEqual(sorted(pushed.multiplicities), sorted(source.multiplicities))
            # trivial ⊗ trivial is the trivial irrep of the product
            self.assertEqual(pushed.multiplicities[0], 1)

    def test_pushforward_keeps_block_sizes(self):
        first, second = symmetric(3), cyclic(2)
        mapping = phi_pushforward_map(first, second)
        for position, target in enumerate(mapping.permutation):
            self.assertEqual(mapping.source.block_sizes[position], mapping.target.block_sizes[target])
        self.assertEqual(direct_product(first, second).order, 12)

    def test_pushforward_rejects_other_algebras(self):
        with self.assertRaises(InputError):
            phi_pushforward(K0Class(BlockAlgebra.trivial(), (1,)), cyclic(2), cyclic(2))


class ComplexTests(SimpleTestCase):
    def test_euler_characteristics(self):
        self.assertEqual(polygon(5).euler_characteristic, 0)
        self.assertEqual(tetrahedron_sphere().euler_characteristic, 2)
        self.assertEqual(cw_projective_plane().euler_characteristic, 3)
        self.assertEqual(grid_torus(3, 4).euler_characteristic, 0)
        self.assertEqual(disk(6).euler_characteristic, 1)

    def test_boundary_of_boundary_is_checked(self):
        with self.assertRaises(InputError):
            CellComplex((1, 1, 1), (np.array([[1]]), np.array([[1]])))

    def test_coboundary_squares_to_zero(self):
        for complex_ in (grid_torus(3, 3), disk(4), product_complex(interval(2), polygon(3))):
            d = complex_.coboundary
            self.assertFalse(np.any(np.abs(d @ d) > 0), complex_.label)

    def test_orientation_must_be_relative_cycle(self):
        with self.assertRaises(InputError):
            CellComplex((2, 1), (np.array([[-1], [1]]),), np.array([1]))

    def test_product_boundary(self):
        cylinder = product_complex(interval(1), polygon(3))
        self.assertEqual(cylinder.dimension, 2)
        self.assertFalse(cylinder.is_closed)
        self.assertEqual(cylinder.boundary_model.cell_counts, (6, 6))
        self.assertTrue(cylinder.is_oriented)

    def test_disjoint_union_counts(self):
        union = disjoint_union(cw_projective_plane(), cw_projective_plane(-1))
        self.assertEqual(union.cell_counts, (2, 0, 2, 0, 2))
        with self.assertRaises(InputError):
            disjoint_union(polygon(3), cw_sphere())

    def test_cover_of_circle(self):
        covered = cover(polygon(3), FlatBundleRep(cyclic(2), {(0, 1): 1}))
        self.assertEqual(covered.cell_counts, (6, 6))
        self.assertEqual(covered.chirality_rule, HALF_SHIFT)
        self.assertEqual(len(covered.deck), 2)
        self.assertEqual(hodge_package(covered).betti, (1, 1))

    def test_inconsistent_cocycle(self):
        bundle = FlatBundleRep(cyclic(2), {(0, 1): 1})
        with self.assertRaises(InputError):
            cover(tetrahedron_sphere(), bundle)

    def test_minimal_projective_plane(self):
        plane = minimal_projective_plane()
        self.assertEqual(plane.cell_counts, (9, 36, 84, 90, 36))
        self.assertEqual(plane.euler_characteristic, 3)
        self.assertTrue(plane.is_closed)
        self.assertFalse(np.any(plane.boundary(4) @ plane.orientation))
        np.testing.assert_array_equal(minimal_projective_plane(-1).orientation, -plane.orientation)

    def test_six_vertex_projective_plane_is_not_orientable(self):
        facets = ((0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5),
                  (1, 2, 4), (2, 3, 5), (1, 3, 4), (2, 4, 5), (1, 3, 5))
        surface = simplicial_complex(_closure(facets), label='RP2(6)')
        self.assertEqual(surface.euler_characteristic, 1)
        with self.assertRaises(InputError):
            orientation_cycle(surface)

    def test_puncture_and_cone_cap(self):
        punctured = puncture(minimal_projective_plane())
        self.assertFalse(punctured.is_closed)
        self.assertEqual(punctured.cell_counts, (9, 36, 84, 90, 35))
        self.assertEqual(punctured.boundary_model.cell_counts, (5, 10, 10, 5))
        capped = cone_cap(punctured)
        self.assertTrue(capped.is_closed)
        self.assertEqual(capped.cell_counts, (10, 41, 94, 100, 40))
        self.assertEqual(capped.euler_characteristic, 3)
        self.assertEqual(cone_cap(disk(4)).euler_characteristic, 2)
        with self.assertRaises(InputError):
            cone_cap(product_complex(interval(1), polygon(3)))
        with self.assertRaises(InputError):
            puncture(disk(4))


class HodgeTests(SimpleTestCase):
    def test_circle_package(self):
        package = hodge_package(polygon(6))
        self.assertEqual(package.betti, (1, 1))
        self.assertEqual(package.tau_source, HALF_SHIFT)
        self.assertLess(max(package.check().values()), IDENTITY_TOL)

    def test_ring_and_product_packages(self):
        self.assertEqual(hodge_package(cw_projective_plane()).betti, (1, 0, 1, 0, 1))
        self.assertEqual(hodge_package(cw_projective_plane()).tau_source, RING)
        torus = hodge_package(grid_torus(3, 3))
        self.assertEqual(torus.betti, (1, 2, 1))
        self.assertLess(max(torus.check().values()), IDENTITY_TOL)

    def test_open_complex_is_rejected(self):
        with self.assertRaises(InputError):
            hodge_package(disk(4))

    def test_middle_balance(self):
        self.assertEqual(hodge_package(cw_projective_plane()).middle_balance(), (1, 0))
        self.assertEqual(hodge_package(s2xs2()).middle_balance(), (1, 1))


class FormTests(SimpleTestCase):
    def test_small_forms(self):
        self.assertEqual(signature_of_form(np.array([[1.0]])).signature, 1)
        self.assertEqual(tuple(signature_of_form(np.array([[0.0, 1.0], [1.0, 0.0]]))), (1, 1, 0))
        self.assertEqual(tuple(signature_of_form(np.zeros((0, 0)))), (0, 0, 0))

    def test_non_hermitian_form(self):
        with self.assertRaises(HodgeError):
            signature_of_form(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_manifold_forms(self):
        self.assertEqual(intersection_form(cw_projective_plane()).signature, 1)
        self.assertEqual(intersection_form(cw_projective_plane(-1)).signature, -1)
        self.assertEqual(intersection_form(s2xs2()).signature, 0)
        self.assertEqual(intersection_form(grid_torus(3, 3)).signature, 0)

    def test_disk_has_empty_form(self):
        form = intersection_form(disk(4))
        self.assertEqual(form.rank, 0)
        self.assertEqual(form.signature, 0)

    def test_odd_dimension_rejected(self):
        with self.assertRaises(InputError):
            intersection_form(polygon(4))

    def test_equivariant_split(self):
        swap = np.array([[0.0, 1.0], [1.0, 0.0]])
        form = IntersectionForm.from_equivariant(np.eye(2), cyclic(2), lambda g: swap if g else np.eye(2))
        self.assertEqual(form.equivariant_signatures, (1, 1))
        self.assertEqual(form.twisted_signature((1, 0)), 1)
        negative = IntersectionForm.from_equivariant(np.diag([1.0, 1.0, -1.0]), cyclic(2),
                                                     lambda g: np.diag([1.0, -1.0, -1.0]) if g else np.eye(3))
        self.assertEqual(negative.equivariant_signatures, (1, 0))

    def test_tensor_form_multiplies(self):
        product = tensor_forms(intersection_form(cw_projective_plane()), intersection_form(cw_projective_plane(-1)))
        self.assertEqual(product.signature, -1)

    def test_triangulated_projective_plane_form(self):
        form = intersection_form(minimal_projective_plane())
        self.assertEqual(form.rank, 1)
        self.assertEqual(form.signature, 1)
        self.assertEqual(intersection_form(minimal_projective_plane(-1)).signature, -1)
        relative = intersection_form(puncture(minimal_projective_plane()))
        self.assertEqual((relative.rank, relative.signature), (1, 1))


class InvolutionTests(SimpleTestCase):
    def test_alpha_even_case(self):
        spec = build_alpha(hodge_package(polygon(4)))
        self.assertLess(max(spec.residuals().values()), IDENTITY_TOL)
        self.assertLess(square_identity_residual(spec), IDENTITY_TOL)
        spec.opposite().check()
        spec.negated().check()
        self.assertGreater(canonical_trivializing(spec).gap, 0.0)

    def test_alpha_odd_case_needs_lagrangian(self):
        hodge = hodge_package(s2xs2())
        with self.assertRaises(LagrangianError):
            build_alpha(hodge)
        spec = build_alpha(hodge, lagrangian_from_unitary(hodge))
        self.assertLess(square_identity_residual(spec), IDENTITY_TOL)
        spec.negated().check()
        with self.assertRaises(InvolutionError):
            spec.opposite()

    def test_unbalanced_harmonic_space_has_no_lagrangian(self):
        with self.assertRaises(LagrangianError):
            lagrangian_from_unitary(hodge_package(cw_projective_plane()))

    def test_lagrangians_exist_exactly_when_balanced(self):
        union = disjoint_union(cw_projective_plane(), cw_projective_plane(-1))
        for complex_, expected in ((s2xs2(), True), (grid_torus(3, 3), True), (union, True),
                                   (cw_projective_plane(), False)):
            hodge = hodge_package(complex_)
            self.assertEqual(assumptions_hold(hodge), expected, complex_.label)
            if expected:
                self.assertLess(max(lagrangian_from_unitary(hodge).residuals().values()), IDENTITY_TOL)
            else:
                with self.assertRaises(LagrangianError):
                    lagrangian_from_unitary(hodge)

    def test_independence_even_case(self):
        indices = independence_suite(build_alpha(hodge_package(polygon(4))), nodes=64)
        self.assertEqual(set(indices), {'canonical', 'scaled', 'shifted', 'opposite'})
        self.assertEqual(len(set(indices.values())), 1, indices)

    def test_independence_odd_case(self):
        hodge = hodge_package(s2xs2())
        flows = independence_suite(build_alpha(hodge, lagrangian_from_unitary(hodge)), nodes=32)
        self.assertEqual(len(flows), 3)
        self.assertEqual(len(set(flows.values())), 1, flows)

    def test_involution_paths(self):
        report = involution_path(build_alpha(hodge_package(polygon(4))), rng=np.random.default_rng(1))
        self.assertTrue(report['ok'], report)
        self.assertEqual(report['samples'], 32)
        hodge = hodge_package(s2xs2())
        report = involution_path(build_alpha(hodge, lagrangian_from_unitary(hodge)), rng=np.random.default_rng(2))
        self.assertTrue(report['ok'], report)


class SignatureClassTests(SimpleTestCase):
    def test_projective_planes(self):
        result = signature_class(cw_projective_plane())
        self.assertEqual(result.case, CLOSED_EVEN)
        self.assertEqual(result.values, (1,))
        self.assertTrue(result.agrees_with_form)
        self.assertEqual(signature_class(cw_projective_plane(-1)).values, (-1,))

    def test_vanishing_signatures(self):
        self.assertEqual(signature_class(grid_torus(3, 3)).values, (0,))
        self.assertEqual(signature_class(s2xs2()).values, (0,))
        sphere = signature_class(tetrahedron_sphere())
        self.assertEqual(sphere.values, (0,))
        self.assertEqual(sphere.tau_source, 'synthesized')

    def test_disjoint_union_is_additive(self):
        plane = cw_projective_plane()
        self.assertEqual(signature_class(disjoint_union(plane, plane)).values, (2,))
        self.assertEqual(signature_class(disjoint_union(plane, cw_projective_plane(-1))).values, (0,))

    def test_circle_is_k1_zero(self):
        result = signature_class(polygon(5))
        self.assertEqual(result.case, CLOSED_ODD)
        self.assertIsInstance(result.k_class, K1Class)
        self.assertTrue(result.k_class.is_zero)

    def test_twisted_circle_over_group_ring(self):
        result = signature_class(polygon(3), FlatBundleRep(cyclic(2), {(0, 1): 1}))
        self.assertEqual(result.k_class.algebra.rank, 2)
        self.assertEqual(result.values, (0, 0))

    def test_disk_boundary_even(self):
        result = signature_class(disk(4))
        self.assertEqual(result.case, BOUNDARY_EVEN)
        self.assertEqual(result.values, (0,))
        self.assertEqual(result.blocks[0]['collar'], 0)
        self.assertEqual(result.blocks[0]['capped'], 0)
        opposite = signature_class(disk(4), involution=lambda hodge: build_alpha(hodge).opposite())
        self.assertEqual(opposite.values, (0,))

    def test_punctured_projective_plane(self):
        for orientation in (1, -1):
            result = signature_class(puncture(minimal_projective_plane(orientation)), nodes=16)
            self.assertEqual(result.case, BOUNDARY_EVEN)
            self.assertEqual(result.values, (orientation,))
            self.assertEqual(result.blocks[0]['capped'], orientation)
            self.assertEqual(result.blocks[0]['form'], orientation)
            self.assertEqual(result.blocks[0]['collar'], 0)
            self.assertTrue(result.agrees_with_form)

    def test_triangulated_projective_plane_is_graded_on_harmonics(self):
        result = signature_class(minimal_projective_plane())
        self.assertEqual(result.case, CLOSED_EVEN)
        self.assertEqual(result.values, (1,))
        self.assertEqual(result.tau_source, HARMONIC_TAU)
        self.assertTrue(result.agrees_with_form)

    def test_capped_index_comes_from_the_closed_complex(self):
        self.assertEqual(capped_signature_indices(disk(4)), (0,))
        self.assertEqual(capped_signature_indices(minimal_projective_plane()), (1,))
        self.assertEqual(capped_signature_indices(minimal_projective_plane(-1)), (-1,))

    def test_covered_disk_boundary_even(self):
        bundle = FlatBundleRep(cyclic(2), {(i, 4): 1 for i in range(4)})
        result = signature_class(disk(4), bundle, nodes=16)
        self.assertEqual(result.case, BOUNDARY_EVEN)
        self.assertEqual(result.values, (0, 0))
        self.assertTrue(result.agrees_with_form)

    def test_interval_boundary_odd(self):
        result = signature_class(interval(2))
        self.assertEqual(result.case, BOUNDARY_ODD)
        self.assertTrue(result.k_class.is_zero)
        self.assertTrue(result.witness['ok'], result.witness)

    def test_unoriented_complex_rejected(self):
        unoriented = CellComplex((1, 0, 1), (np.zeros((1, 0)), np.zeros((0, 1))), label='bare')
        with self.assertRaises(InputError):
            signature_class(unoriented)

    def test_odd_loop_class(self):
        self.assertEqual(odd_loop_signature_class([2, -1]).values, (1,))
        self.assertEqual(odd_loop_signature_class([-3], mixing_seed=4).values, (-3,))

    def test_normalization_check(self):
        report = hs_normalization_check(hodge_package(cw_projective_plane()))
        self.assertTrue(report['ok'], report)
        self.assertEqual((report['index'], report['index_hs'], report['sign']), (1, 1, 1))
        report = hs_normalization_check(hodge_package(grid_torus(3, 3)))
        self.assertTrue(report['ok'], report)
        self.assertEqual(report['sign'], -1)
        with self.assertRaises(InputError):
            hs_normalization_check(hodge_package(polygon(4)))


class ProductTests(SimpleTestCase):
    def test_even_even(self):
        report = verify_signature_products(cw_projective_plane(), cw_projective_plane())
        self.assertTrue(report.ok, report.to_dict())
        self.assertEqual(report.observed, (1,))
        self.assertEqual(report.details['tensor_form'], [1])
        self.assertEqual(verify_signature_products(cw_projective_plane(), cw_projective_plane(-1)).observed, (-1,))

    def test_mixed_and_odd_odd(self):
        mixed = verify_signature_products(cw_projective_plane(), polygon(3))
        self.assertEqual(mixed.parity_pair, 'even-odd')
        self.assertTrue(mixed.ok)
        odd = verify_signature_products(polygon(3), polygon(4))
        self.assertEqual(odd.parity_pair, 'odd-odd')
        self.assertTrue(odd.ok)
        self.assertEqual(odd.details['factor'], 2)

    def test_odd_even_loop_product(self):
        for charges, second, expected in (([1], cw_projective_plane(), 1), ([2, -1], s2xs2(), 0),
                                          ([-2], cw_projective_plane(-1), 2)):
            report = odd_even_loop_product(charges, second)
            self.assertTrue(report.ok, report.to_dict())
            self.assertEqual(report.observed, (expected,))

    def test_odd_odd_factor_two(self):
        for first, second in (([1], [1]), ([2], [-1]), ([0], [2]), ([-1], [-1]), ([1, 1], [2])):
            report = odd_odd_loop_product(first, second)
            self.assertTrue(report.ok, report.to_dict())
            self.assertEqual(report.observed[0], 2 * sum(first) * sum(second))

    def test_product_package_identities(self):
        package = product_package(hodge_package(polygon(4)), hodge_package(polygon(3)))
        self.assertEqual(package.betti, (1, 2, 1))
        self.assertLess(max(package.check().values()), IDENTITY_TOL)

    def test_tensor_lagrangians(self):
        even = lagrangian_tensor(build_alpha(hodge_package(polygon(4))), hodge_package(polygon(3)))
        self.assertEqual(even.dim, 1)
        odd = lagrangian_tensor(build_alpha(hodge_package(cw_sphere())), hodge_package(cw_sphere()))
        self.assertEqual(odd.dim, 1)
        with self.assertRaises(InputError):
            lagrangian_tensor(build_alpha(hodge_package(polygon(4))), hodge_package(cw_sphere()))

    def test_decomposition_checks(self):
        for first, second in ((polygon(4), polygon(3)), (cw_sphere(), polygon(4)), (polygon(4), cw_sphere())):
            report = decomposition_checks(hodge_package(first), hodge_package(second))
            self.assertTrue(report.ok(), report)

    def test_zeta_identity(self):
        residuals = zeta_identity(hodge_package(polygon(4)), hodge_package(polygon(3)))
        self.assertLess(max(residuals.values()), IDENTITY_TOL)
        with self.assertRaises(InputError):
            zeta_identity(hodge_package(cw_sphere()), hodge_package(polygon(3)))


class StabilizationTests(SimpleTestCase):
    def test_interval_stabilizer(self):
        stabilizer = interval_stabilizer(2)
        self.assertEqual(stabilizer.dim, 4)
        self.assertEqual(stabilizer.check().dim, 2)
        with self.assertRaises(InputError):
            interval_stabilizer(0)

    def test_unbalanced_boundary_cannot_be_stabilized(self):
        with self.assertRaises(LagrangianError):
            stabilize(hodge_package(cw_projective_plane()))

    def test_componentwise_unbalanced_boundary(self):
        union = disjoint_union(cw_projective_plane(), cw_projective_plane(-1))
        for part in union.factors:
            self.assertFalse(assumptions_hold(hodge_package(part)))
        self.assertTrue(assumptions_hold(hodge_package(union)))
        stabilized = stabilize(hodge_package(union), k=1, rng=np.random.default_rng(13))
        self.assertEqual(stabilized.lagrangian.dim, 2)
        self.assertGreater(stabilized.mixing, 0.0)
        self.assertLess(max(stabilized.lagrangian.residuals().values()), IDENTITY_TOL)

    def test_mixed_lagrangian(self):
        stabilized = stabilize(hodge_package(grid_torus(3, 3)), k=1, rng=np.random.default_rng(3))
        self.assertEqual(stabilized.lagrangian.dim, 2)
        self.assertLess(max(stabilized.lagrangian.residuals().values()), IDENTITY_TOL)
        split, _ = stabilized.split
        self.assertEqual(split.dim, 2)

    def test_stabilized_class_is_unchanged(self):
        base, result = stabilized_signature_class(interval(1), k=2, rng=np.random.default_rng(5))
        self.assertEqual(base.values, result.values)
        self.assertTrue(result.witness['ok'], result.witness)
        self.assertEqual(result.witness['samples'], 32)
        with self.assertRaises(InputError):
            stabilized_signature_class(disk(4))

    def test_swap_unitary_endpoints(self):
        y = np.eye(4)[:, :2]
        z = np.eye(4)[:, 2:]
        self.assertTrue(np.allclose(swap_unitary(y, z, 0.0), np.eye(4)))
        end = swap_unitary(y, z, math.pi / 2)
        self.assertTrue(np.allclose(np.abs(end), np.abs(np.kron([[0, 1], [1, 0]], np.eye(2)))))

    def test_stabilization_path(self):
        stabilized = stabilize(hodge_package(cw_sphere()), k=1, rng=np.random.default_rng(7))
        report = stabilization_path(stabilized, hodge_package(cw_projective_plane()))
        self.assertTrue(report['ok'], report)
        self.assertEqual(report['samples'], 32)
        self.assertEqual(report['dim'], report['tensor_dim'] + 1)
        with self.assertRaises(InputError):
            stabilization_path(stabilized, hodge_package(polygon(3)))

    def test_stabilization_path_on_torus(self):
        stabilized = stabilize(hodge_package(grid_torus(3, 3)), k=1, rng=np.random.default_rng(11))
        report = stabilization_path(stabilized, hodge_package(cw_projective_plane()))
        self.assertTrue(report['ok'], report)
