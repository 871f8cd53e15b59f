# apps/lab/suite.py
"""The acceptance battery as a catalog of named checks.

Every check owns a stable id, a family and a runner returning one or more
CheckResults. Randomized checks draw from a generator seeded by the run seed
and their own id, so results do not depend on scheduling. Reports are sorted
by check id.
"""
import itertools
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fnmatch import fnmatchcase
from typing import Any, Callable, Optional, Tuple

import numpy as np
from tqdm import tqdm

from apps.dirac_grid.boundary import BoundaryOperator, TrivializingOp
from apps.dirac_grid.cylinder import build_cylinder_extension
from apps.dirac_grid.identities import boundary_identities
from apps.dirac_grid.mesh import Mesh1D
from apps.dirac_grid.operators import (
    build_interval_dirac, diagonal_index_oracle, diagonal_kernel_oracle, impose_aps, numerical_index,
)
from apps.dirac_grid.products import OddCollarPath, verify_product_index
from apps.graded_core.clifford import standard_clifford
from apps.graded_core.exceptions import InputError, LabError, NumericalPrecondition
from apps.kclass.algebra import K0Class, K1Class, k0_kronecker, pair_classes
from apps.kclass.loops import LoopOperatorFamily, k1_of_family
from apps.kclass.modules import k0_of_kernel
from apps.kclass.products import (
    TorusFamily, gamma_model_residual, kprod_even_even, kprod_even_odd, kprod_odd_even, kprod_odd_odd,
)
from apps.kclass.samples import random_even_module, random_loop_family, random_odd_module
from apps.signature.classes import hs_normalization_check, signature_class
from apps.signature.complexes import (
    FlatBundleRep, cw_projective_plane, cw_sphere, disk, grid_torus, interval, minimal_projective_plane, polygon,
    product_complex, puncture, tetrahedron_sphere,
)
from apps.signature.forms import intersection_form
from apps.signature.groups import cyclic, direct_product, phi_pushforward_map, symmetric
from apps.signature.hodge import hodge_package
from apps.signature.involutions import (
    build_alpha, independence_suite, involution_path, lagrangian_from_unitary, square_identity_residual,
)
from apps.signature.products import (
    decomposition_checks, odd_even_loop_product, odd_odd_loop_product, verify_signature_products,
    zeta_identity,
)
from apps.signature.stabilization import stabilization_path, stabilize, stabilized_signature_class

from .utils import check_rng, performance_monitor, to_jsonable

logger = logging.getLogger(__name__)

PASS = 'PASS'
FAIL = 'FAIL'
ERROR = 'ERROR'

PARITY_PAIRS = ('even-even', 'even-odd', 'odd-even', 'odd-odd')

# (b, A_R, A_L) eigenvalues; matrix models are conjugated by a seeded unitary
APS_MODELS = (
    ((1.0,), (1.0,), (-1.0,)),
    ((1.0,), (-3.0,), (-1.0,)),
    ((-1.0,), (3.0,), (2.0,)),
    ((-1.0,), (-1.5,), (1.0,)),
    ((2.5,), (-0.5,), (0.0,)),
    ((-2.5,), (5.0,), (-4.0,)),
    ((1.0, -0.5, 2.0), (1.0, -2.0, -4.5), (3.0, 1.0, -1.0)),
    ((1.0, -1.0), (1.0, -2.0), (-1.0, 1.0)),
    ((0.5, -0.5), (-3.0, 3.0), (2.0, -2.0)),
    ((2.0, -2.0, 1.0), (-4.0, 4.0, 1.0), (1.0, -3.0, 0.0)),
    ((-1.0, 1.0), (3.0, -3.0), (0.0, 0.0)),
    ((1.5, -1.5, 0.5), (-3.5, -1.0, 1.5), (-2.0, 2.0, 3.0)),
)

PRODUCT_RANGE = range(-2, 3)

FACTOR_TWO_CASES = (((1,), (1,)), ((-1,), (1,)), ((2,), (1,)), ((1,), (-2,)), ((1, 1), (-1,)))

ODD_EVEN_CASES = (('cp2', (1,)), ('s2xs2', (2, -1)), ('cp2bar', (-2,)))

GROUP_PAIRS = (('Z2', 'Z2'), ('Z2', 'Z3'), ('S3', 'Z2'))


def _group(name):
    return symmetric(int(name[1:])) if name.startswith('S') else cyclic(int(name[1:]))


def closed_models():
    return {
        'cp2': cw_projective_plane(),
        'cp2bar': cw_projective_plane(-1),
        'torus': grid_torus(3, 3),
        's2xs2': product_complex(cw_sphere(), cw_sphere()),
        'tetrahedron': tetrahedron_sphere(),
    }


@dataclass
class CheckResult:
    check_id: str
    family: str
    verdict: str
    expected: Any = None
    observed: Any = None
    residual: Optional[float] = None
    details: dict = field(default_factory=dict)
    exit_code: int = 0

    @property
    def passed(self):
        return self.verdict == PASS

    def jsonable(self, name):
        return to_jsonable(getattr(self, name))

    def to_record(self, seed):
        return {
            'check_id': self.check_id,
            'family': self.family,
            'verdict': self.verdict,
            'expected': self.jsonable('expected'),
            'observed': self.jsonable('observed'),
            'residual': self.jsonable('residual'),
            'details': self.jsonable('details'),
            'seed': seed,
        }

    def to_dict(self):
        data = self.to_record(None)
        data.pop('seed')
        data['exit_code'] = self.exit_code
        return data

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def compare(check_id, family, expected, observed, **details):
    expected, observed = to_jsonable(expected), to_jsonable(observed)
    verdict = PASS if expected == observed else FAIL
    return CheckResult(check_id, family, verdict, expected, observed, None, details)


def within(check_id, family, residual, tol, **details):
    residual = float(residual)
    verdict = PASS if residual < tol else FAIL
    return CheckResult(check_id, family, verdict, 0.0, residual, residual, {'tol': tol, **details})


def holds(check_id, family, condition, observed=None, **details):
    return CheckResult(check_id, family, PASS if condition else FAIL, True, observed, None, details)


@dataclass(frozen=True)
class Check:
    check_id: str
    family: str
    runner: Callable
    params: Tuple = ()

    def matches(self, filters):
        if not filters:
            return True
        return any(token == self.family or self.check_id.startswith(f"{token}/") or self.check_id == token
                   or fnmatchcase(self.check_id, token) for token in filters)

    def run(self, config):
        try:
            results = self.runner(config, self.check_id, *self.params)
        except (LabError, np.linalg.LinAlgError) as e:
            exit_code = e.exit_code if isinstance(e, LabError) else NumericalPrecondition.exit_code
            logger.error(f"check {self.check_id} raised {type(e).__name__}: {e}")
            return [CheckResult(self.check_id, self.family, ERROR, None, None, None,
                                {'error': type(e).__name__, 'message': str(e)}, exit_code)]
        for result in results:
            logger.debug(f"{result.check_id}: {result.verdict}")
        return results


def gens_for(config):
    return standard_clifford(gamma2_sign=-1 if config.flipped_gamma else 1)


def _convention(config):
    return {'gamma2_sign': -1 if config.flipped_gamma else 1}


# Kasparov product law

def _k1(family, charges):
    return K1Class(family.algebra, tuple(charges))


def run_kprod_pair(config, check_id, pair):
    rng = check_rng(config.seed, check_id)
    tol = config.structural_tol
    if pair == 'even-even':
        first, second = random_even_module(rng), random_even_module(rng)
        left, right = k0_of_kernel(first, tol), k0_of_kernel(second, tol)
        observed = k0_of_kernel(kprod_even_even(first, second), tol)
        expected = k0_kronecker(left, right)
    elif pair == 'even-odd':
        first = random_even_module(rng)
        family, charges = random_loop_family(rng)
        left, right = k0_of_kernel(first, tol), _k1(family, charges)
        observed = k1_of_family(kprod_even_odd(first, family), tol)
        expected = pair_classes(left, right)
    elif pair == 'odd-even':
        family, charges = random_loop_family(rng)
        second = random_even_module(rng)
        left, right = _k1(family, charges), k0_of_kernel(second, tol)
        observed = k1_of_family(kprod_odd_even(family, second), tol)
        expected = pair_classes(left, right)
    else:
        first, first_charges = random_loop_family(rng)
        second, second_charges = random_loop_family(rng)
        left, right = _k1(first, first_charges), _k1(second, second_charges)
        observed = kprod_odd_odd(first, second, gens_for(config)).chern_class()
        expected = pair_classes(left, right)
    details = {'first': left.to_dict(), 'second': right.to_dict(), **_convention(config)}
    return [compare(check_id, 'kprod', class_values(expected), class_values(observed), **details)]


def class_values(k_class):
    return list(k_class.windings if isinstance(k_class, K1Class) else k_class.multiplicities)


def parity_of(factor):
    return 1 if isinstance(factor, LoopOperatorFamily) else factor.parity


def module_class(factor, tol):
    """K₀ class of an even module, flow class of a loop family; plain odd modules give zero."""
    if isinstance(factor, LoopOperatorFamily):
        return k1_of_family(factor, tol)
    if factor.parity == 0:
        return k0_of_kernel(factor, tol)
    return K1Class.zero(factor.algebra)


def product_class(first, second, gens, tol):
    """Class of the Kasparov product in the parity case of the two factors."""
    pair = (parity_of(first), parity_of(second))
    if pair == (0, 0):
        return k0_of_kernel(kprod_even_even(first, second), tol)
    if pair == (1, 1):
        product = kprod_odd_odd(first, second, gens)
        if isinstance(product, TorusFamily):
            return product.chern_class()
        return k0_of_kernel(product, tol)
    product = kprod_even_odd(first, second) if pair == (0, 1) else kprod_odd_even(first, second)
    return module_class(product, tol)


# APS condition against the truncated cylinder

def _conjugated(values, unitary):
    return unitary @ np.diag(values).astype(np.complex128) @ unitary.conj().T


def run_aps_cylinder(config, check_id, model, nodes):
    b_values, right_values, left_values = APS_MODELS[model - 1]
    size = len(b_values)
    unitary = np.eye(size, dtype=np.complex128)
    if size > 1:
        # shared by every resolution of the model
        rng = check_rng(config.seed, f"aps-cylinder/m{model:02d}")
        unitary, _ = np.linalg.qr(rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size)))
    boundary = BoundaryOperator(_conjugated(b_values, unitary), label=f"m{model:02d}")
    trivializing = TrivializingOp(_conjugated(right_values, unitary), boundary, config.structural_tol)
    dirac = impose_aps(build_interval_dirac(Mesh1D.interval(nodes), boundary, f"m{model:02d}"),
                       right=trivializing, left=_conjugated(left_values, unitary))
    extended = build_cylinder_extension(dirac, trivializing, 8.0 / trivializing.gap)
    original = numerical_index(dirac, config.structural_tol)
    cylinder = numerical_index(extended, config.structural_tol)
    oracle = diagonal_index_oracle(b_values, right_values, left_values)
    kernel = diagonal_kernel_oracle(b_values, right_values, left_values)
    return [compare(check_id, 'aps-cylinder', [oracle, oracle, kernel, kernel],
                    [original.index, cylinder.index, original.kernel, cylinder.kernel],
                    nodes=nodes, gap=trivializing.gap, cylinder_nodes=extended.mesh.nodes)]


# Product index on interval × circle

def run_product_index(config, check_id, flow, winding):
    report = verify_product_index(OddCollarPath.scalar(flow), LoopOperatorFamily.twisted_circle([winding]),
                                  gens_for(config))
    details = {'factor_flow': report.first, 'circle_flow': report.second, 'parity_pair': list(report.parity_pair),
               **_convention(config)}
    return [compare(check_id, 'product-index', flow * winding, report.product, **details)]


# Operator-identity battery

def run_boundary_identities(config, check_id):
    residuals = boundary_identities(rng=check_rng(config.seed, check_id), gens=gens_for(config))
    return [within(f"{check_id}/{name}", 'identities', value, config.identity_tol, **_convention(config))
            for name, value in sorted(residuals.items())]


def run_gamma_model(config, check_id):
    rng = check_rng(config.seed, check_id)
    results = []
    for position in range(3):
        first, second = random_odd_module(rng).matrix, random_odd_module(rng).matrix
        residual = gamma_model_residual(first, second, gens_for(config))
        results.append(within(f"{check_id}/{position}", 'identities', residual, config.identity_tol,
                              dims=[first.shape[0], second.shape[0]], **_convention(config)))
    return results


def run_clifford_relations(config, check_id):
    return [within(f"{check_id}/{name}", 'identities', value, config.identity_tol, **_convention(config))
            for name, value in sorted(gens_for(config).residuals().items())]


def run_hodge_identities(config, check_id, name):
    package = hodge_package(closed_models()[name], tol=config.structural_tol)
    return [within(f"{check_id}/{key}", 'identities', value, config.identity_tol)
            for key, value in sorted(package.residuals().items())]


def run_involution_identities(config, check_id):
    spec = build_alpha(hodge_package(polygon(4), tol=config.structural_tol))
    residuals = dict(spec.residuals())
    residuals['square_identity'] = square_identity_residual(spec)
    hodge = hodge_package(closed_models()['s2xs2'], tol=config.structural_tol)
    for key, value in lagrangian_from_unitary(hodge).residuals().items():
        residuals[f"lagrangian_{key}"] = value
    return [within(f"{check_id}/{key}", 'identities', value, config.identity_tol)
            for key, value in sorted(residuals.items())]


def run_normalization_identities(config, check_id):
    report = hs_normalization_check(hodge_package(cw_projective_plane(), tol=config.structural_tol))
    keys = ('u_unitary', 'd_conjugation', 'signature_conjugation', 'tau_conjugation', 'tau_hs_involution')
    results = [within(f"{check_id}/{key}", 'identities', report[key], config.identity_tol) for key in keys]
    results.append(compare(f"{check_id}/index", 'identities', report['sign'] * report['index'], report['index_hs']))
    return results


def run_product_identities(config, check_id):
    first = hodge_package(polygon(4), tol=config.structural_tol)
    second = hodge_package(polygon(3), tol=config.structural_tol)
    residuals = {f"zeta_{key}": value for key, value in zeta_identity(first, second).items()}
    report = decomposition_checks(first, second)
    residuals.update({f"decomposition_{key}": value for key, value in report.residuals.items()})
    results = [within(f"{check_id}/{key}", 'identities', value, config.identity_tol)
               for key, value in sorted(residuals.items())]
    results.append(holds(f"{check_id}/v_invertible", 'identities',
                         report.smallest_singular_on_v > math.sqrt(config.identity_tol),
                         report.smallest_singular_on_v))
    return results


# Signature classes and their products

def run_closed_signature(config, check_id, name, expected):
    result = signature_class(closed_models()[name], nodes=config.nodes[0], tol=config.structural_tol)
    details = {'case': result.case, 'tau_source': result.tau_source, 'agrees_with_form': result.agrees_with_form}
    return [compare(check_id, 'signature', expected, list(result.values), **details)]


def run_triangulated_signature(config, check_id, orientation):
    """9-vertex CP²: cup form on the closed complex, then the APS class of the punctured one."""
    closed = minimal_projective_plane(orientation)
    form = intersection_form(closed, config.structural_tol)
    results = [compare(f"{check_id}/form", 'signature', [orientation], [form.signature], cells=closed.cell_counts),
               compare(f"{check_id}/b2", 'signature', 1, form.rank)]
    closed_class = signature_class(closed, tol=config.structural_tol)
    results.append(compare(f"{check_id}/index", 'signature', [orientation], list(closed_class.values),
                           tau_source=closed_class.tau_source))
    result = signature_class(puncture(closed), nodes=config.nodes[0], tol=config.structural_tol)
    block = result.blocks[0]
    results.append(compare(f"{check_id}/punctured", 'signature', [orientation], list(result.values),
                           case=result.case, capped=block['capped'], collar=block['collar'], form=block['form']))
    results.append(holds(f"{check_id}/agrees_with_form", 'signature', result.agrees_with_form,
                         list(result.form_class.multiplicities)))
    return results


def run_disk_signature(config, check_id):
    result = signature_class(disk(4), nodes=config.nodes[0], tol=config.structural_tol)
    return [compare(check_id, 'signature', [0], list(result.values), case=result.case)]


def run_cover_signature(config, check_id):
    bundle = FlatBundleRep(cyclic(2), {(0, 1): 1}, label='Z2-loop')
    result = signature_class(polygon(3), bundle=bundle, tol=config.structural_tol)
    return [compare(check_id, 'signature', [0, 0], list(result.values), case=result.case,
                    algebra=result.k_class.algebra.to_dict())]


def run_signature_product(config, check_id, first, second, expected):
    models = {'cp2': cw_projective_plane(), 'cp2bar': cw_projective_plane(-1), 's2': cw_sphere(),
              'circle3': polygon(3)}
    report = verify_signature_products(models[first], models[second], nodes=config.nodes[0],
                                       tol=config.structural_tol)
    results = [compare(check_id, 'signature', list(report.expected), list(report.observed),
                       parity_pair=report.parity_pair)]
    if expected is not None:
        results.append(compare(f"{check_id}/value", 'signature', expected, list(report.observed)))
    if 'tensor_form' in report.details:
        results.append(compare(f"{check_id}/tensor-form", 'signature', list(report.observed),
                               report.details['tensor_form']))
    return results


def run_odd_even_loop(config, check_id, name, charges):
    report = odd_even_loop_product(list(charges), closed_models()[name], tol=config.structural_tol)
    return [compare(check_id, 'signature', list(report.expected), list(report.observed), **report.details)]


def run_normalization_sign(config, check_id, name):
    report = hs_normalization_check(hodge_package(closed_models()[name], tol=config.structural_tol))
    return [holds(check_id, 'signature', report['ok'], [report['index'], report['index_hs']], sign=report['sign'])]


# Factor two in odd × odd

def run_factor_two(config, check_id, first, second):
    report = odd_odd_loop_product(list(first), list(second))
    return [compare(check_id, 'odd-odd', list(report.expected), list(report.observed), **report.details)]


def run_odd_odd_signature(config, check_id):
    report = verify_signature_products(polygon(3), polygon(4), nodes=config.nodes[0], tol=config.structural_tol)
    return [compare(check_id, 'odd-odd', list(report.expected), list(report.observed), factor=2)]


# Independence of the symmetric trivializing operator

def _involution_spec(name, tol):
    if name == 's2xs2':
        hodge = hodge_package(closed_models()['s2xs2'], tol=tol)
        return build_alpha(hodge, lagrangian_from_unitary(hodge)), 32
    return build_alpha(hodge_package(polygon(int(name[-1])), tol=tol)), 64


def run_independence(config, check_id, name):
    spec, nodes = _involution_spec(name, config.structural_tol)
    values = independence_suite(spec, nodes=nodes)
    results = []
    canonical = values['canonical']
    choices = {key: value for key, value in values.items() if key != 'opposite'}
    results.append(compare(f"{check_id}/operators", 'independence', [canonical] * len(choices),
                           [choices[key] for key in sorted(choices)], operators=sorted(choices), case=spec.case))
    if 'opposite' in values:
        results.append(compare(f"{check_id}/opposite", 'independence', canonical, values['opposite']))
    report = involution_path(spec, nodes=nodes, rng=check_rng(config.seed, check_id))
    results.append(holds(f"{check_id}/path", 'independence', report['ok'], report['residual'],
                         samples=report['samples'], indices=sorted(set(report['indices']))))
    return results


# Stabilization by the interval

def run_stabilized_class(config, check_id, k):
    base, result = stabilized_signature_class(interval(1), k=k, rng=check_rng(config.seed, check_id))
    witness = result.witness
    return [
        compare(f"{check_id}/class", 'stabilization', list(base.values), list(result.values)),
        holds(f"{check_id}/witness", 'stabilization', witness['ok'] and witness['samples'] == 32,
              witness.get('residual'), samples=witness['samples']),
    ]


def run_stabilization_path(config, check_id, first):
    source = cw_sphere() if first == 's2' else grid_torus(3, 3)
    stabilized = stabilize(hodge_package(source, tol=config.structural_tol), k=1,
                           rng=check_rng(config.seed, check_id))
    report = stabilization_path(stabilized, hodge_package(cw_projective_plane(), tol=config.structural_tol))
    lagrangian = max(stabilized.lagrangian.residuals().values())
    return [
        holds(f"{check_id}/path", 'stabilization', report['ok'] and report['samples'] == 32, report['residual'],
              samples=report['samples'], dim=report['dim'], tensor_dim=report['tensor_dim']),
        within(f"{check_id}/lagrangian", 'stabilization', lagrangian, 1e-8),
    ]


# Pushforward along C[G₁]⊗C[G₂] → C[G₁×G₂]

def run_pushforward(config, check_id, first_name, second_name):
    first, second = _group(first_name), _group(second_name)
    product = direct_product(first, second)
    mapping = phi_pushforward_map(first, second, product)
    rng = check_rng(config.seed, check_id)
    left = K0Class(first.algebra(), tuple(int(v) for v in rng.integers(-3, 4, size=len(first.irrep_dims))))
    right = K0Class(second.algebra(), tuple(int(v) for v in rng.integers(-3, 4, size=len(second.irrep_dims))))
    pushed = mapping.apply(k0_kronecker(left, right))
    # multiplicity of the product irrep χ⊗ψ read off through characters
    m = second.order
    by_character = []
    for row in product.characters:
        value = 0
        for i, chi in enumerate(first.characters):
            for j, psi in enumerate(second.characters):
                lifted = np.array([chi[g // m] * psi[g % m] for g in range(product.order)])
                if abs(product.inner_product(lifted, row) - 1) < 1e-8:
                    value += left.multiplicities[i] * right.multiplicities[j]
        by_character.append(value)
    return [
        holds(f"{check_id}/bijective", 'pushforward',
              sorted(mapping.permutation) == list(range(mapping.target.rank)), list(mapping.permutation)),
        compare(f"{check_id}/kronecker", 'pushforward', by_character, list(pushed.multiplicities),
                first=list(left.multiplicities), second=list(right.multiplicities)),
    ]


def build_catalog(config):
    checks = []
    for pair in PARITY_PAIRS:
        for position in range(config.pairs):
            checks.append(Check(f"kprod/{pair}/{position:03d}", 'kprod', run_kprod_pair, (pair,)))
    for model in range(1, len(APS_MODELS) + 1):
        for nodes in config.nodes:
            checks.append(Check(f"aps-cylinder/m{model:02d}/n{nodes:03d}", 'aps-cylinder', run_aps_cylinder,
                                (model, nodes)))
    for flow, winding in itertools.product(PRODUCT_RANGE, PRODUCT_RANGE):
        checks.append(Check(f"product-index/f{flow:+d}/w{winding:+d}", 'product-index', run_product_index,
                            (flow, winding)))

    checks += [
        Check('identities/boundary', 'identities', run_boundary_identities),
        Check('identities/gamma-model', 'identities', run_gamma_model),
        Check('identities/clifford', 'identities', run_clifford_relations),
        Check('identities/hodge-cp2', 'identities', run_hodge_identities, ('cp2',)),
        Check('identities/hodge-torus', 'identities', run_hodge_identities, ('torus',)),
        Check('identities/involution', 'identities', run_involution_identities),
        Check('identities/normalization', 'identities', run_normalization_identities),
        Check('identities/product', 'identities', run_product_identities),
    ]

    for name, orientation in (('cp2', 1), ('cp2bar', -1)):
        checks.append(Check(f"signature/closed/{name}", 'signature', run_triangulated_signature, (orientation,)))
    for name, expected in (('cp2', [1]), ('cp2bar', [-1])):
        checks.append(Check(f"signature/closed/{name}-cell", 'signature', run_closed_signature, (name, expected)))
    for name, expected in (('torus', [0]), ('s2xs2', [0]), ('tetrahedron', [0])):
        checks.append(Check(f"signature/closed/{name}", 'signature', run_closed_signature, (name, expected)))
    checks.append(Check('signature/boundary/disk4', 'signature', run_disk_signature))
    checks.append(Check('signature/cover/circle3-z2', 'signature', run_cover_signature))
    for first, second, expected in (('cp2', 'cp2', [1]), ('cp2', 'cp2bar', [-1]), ('s2', 's2', [0]),
                                    ('cp2', 'circle3', None)):
        checks.append(Check(f"signature/product/{first}x{second}", 'signature', run_signature_product,
                            (first, second, expected)))
    for name, charges in ODD_EVEN_CASES:
        label = ','.join(f"{c:+d}" for c in charges)
        checks.append(Check(f"signature/odd-even/{name}/{label}", 'signature', run_odd_even_loop, (name, charges)))
    for name in ('cp2', 'torus'):
        checks.append(Check(f"signature/normalization/{name}", 'signature', run_normalization_sign, (name,)))

    for first, second in FACTOR_TWO_CASES:
        label = '_'.join(','.join(f"{c:+d}" for c in charges) for charges in (first, second))
        checks.append(Check(f"odd-odd/loop/{label}", 'odd-odd', run_factor_two, (first, second)))
    checks.append(Check('odd-odd/signature/circle3xcircle4', 'odd-odd', run_odd_odd_signature))

    for name in ('polygon4', 'polygon6', 's2xs2'):
        checks.append(Check(f"independence/{name}", 'independence', run_independence, (name,)))

    for k in (1, 2):
        checks.append(Check(f"stabilization/interval-k{k}", 'stabilization', run_stabilized_class, (k,)))
    for first in ('s2', 'torus'):
        checks.append(Check(f"stabilization/path/{first}-cp2", 'stabilization', run_stabilization_path, (first,)))

    for first, second in GROUP_PAIRS:
        checks.append(Check(f"pushforward/{first}x{second}", 'pushforward', run_pushforward, (first, second)))
    return checks


def select_checks(config):
    checks = [check for check in build_catalog(config) if check.matches(config.filters)]
    if config.filters and not checks:
        raise InputError("filter selects no checks", filters=list(config.filters))
    return checks


def find_check(config, check_id):
    for check in build_catalog(config):
        if check.check_id == check_id:
            return check
    raise InputError("unknown check id", check_id=check_id)


def _dispatch_local(checks, config, progress):
    results = []
    with tqdm(total=len(checks), file=sys.stderr, disable=not progress, desc='checks', unit='check') as bar:
        if config.jobs == 1:
            for check in checks:
                results.extend(check.run(config))
                bar.update(1)
        else:
            with ThreadPoolExecutor(max_workers=config.jobs) as pool:
                futures = [pool.submit(check.run, config) for check in checks]
                for future in futures:
                    results.extend(future.result())
                    bar.update(1)
    return results


def _dispatch_celery(checks, config):
    from celery import group

    from .tasks import run_check_task

    payload = config.to_dict()
    job = group(run_check_task.s(payload, check.check_id) for check in checks)
    batches = job.apply_async().get(disable_sync_subtasks=False)
    return [CheckResult.from_dict(data) for batch in batches for data in batch]


@performance_monitor('lab.run_suite')
def run_suite(config, checks=None, progress=True):
    """Run the selected checks and return their results sorted by check id."""
    checks = select_checks(config) if checks is None else checks
    logger.info(f"running {len(checks)} checks (seed {config.seed}, jobs {config.jobs}, "
                f"celery {config.use_celery})")
    if config.use_celery:
        results = _dispatch_celery(checks, config)
    else:
        results = _dispatch_local(checks, config, progress)
    results.sort(key=lambda result: result.check_id)
    failed = [result.check_id for result in results if result.verdict != PASS]
    if failed:
        logger.error(f"{len(failed)} of {len(results)} checks did not pass, first: {failed[0]}")
    else:
        logger.info(f"all {len(results)} checks passed")
    return results


def exit_code_for(results):
    """0 when everything passed, 1 on any failure, otherwise the code of the first error."""
    if any(result.verdict == FAIL for result in results):
        return 1
    errors = [result for result in results if result.verdict == ERROR]
    return errors[0].exit_code if errors else 0
