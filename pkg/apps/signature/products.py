# apps/signature/products.py
"""Product formulas for signature classes and the product Hodge machinery
behind them: product packages, tensor Lagrangians and the V/W splittings."""
import logging
import math
from typing import NamedTuple

import numpy as np
from scipy import linalg

from apps.dirac_grid.operators import EVEN_CASE
from apps.graded_core.exceptions import InputError, LagrangianError
from apps.graded_core.graded import STRUCTURAL_TOL, GradedOperator, GradedSpace, ODD, spectral_norm
from apps.kclass.algebra import K0Class, K1Class, k0_kronecker
from apps.kclass.loops import LoopOperatorFamily, k1_of_family
from apps.kclass.modules import KasparovModule
from apps.kclass.products import kprod_odd_even, kprod_odd_odd

from .classes import signature_class
from .complexes import PRODUCT, product_complex
from .forms import intersection_form, tensor_forms
from .groups import phi_pushforward, trivial_group
from .hodge import IDENTITY_TOL, HodgeDecomposition, _orth, hodge_package, tensor_chirality
from .involutions import Lagrangian

logger = logging.getLogger(__name__)


class ProductReport(NamedTuple):
    parity_pair: str
    expected: tuple
    observed: tuple
    details: dict

    @property
    def ok(self):
        return tuple(self.expected) == tuple(self.observed)

    def to_dict(self):
        return {'parity_pair': self.parity_pair, 'expected': list(self.expected),
                'observed': list(self.observed), 'ok': self.ok, **self.details}


def _parity(complex_):
    return 'odd' if complex_.dimension % 2 else 'even'


def _pushed(expected, first, second, product):
    """Relabel a class over C[G₁]⊗C[G₂] to C[G₁×G₂] when the product carries a deck group."""
    if product.group is None:
        return expected
    return phi_pushforward(expected, first.group or trivial_group(), second.group or trivial_group(),
                           product.group)


def verify_signature_products(first, second, nodes=64, tol=STRUCTURAL_TOL):
    """Compare σ(X)⊗σ(Y) with σ(X×Y).

    even×even: Kronecker product of K₀ classes, pushed to C[G₁×G₂].
    Mixed parities: both sides live in K₁ of a block algebra and vanish.
    odd×odd: 2σ(X)⊗σ(Y) with both factors in K₁, hence zero.
    """
    product = product_complex(first, second)
    left = signature_class(first, nodes=nodes, tol=tol)
    right = signature_class(second, nodes=nodes, tol=tol)
    combined = signature_class(product, nodes=nodes, tol=tol)
    pair = f"{_parity(first)}-{_parity(second)}"
    details = {'first': left.to_dict(), 'second': right.to_dict(), 'product': combined.to_dict()}
    if pair == 'even-even':
        expected = _pushed(k0_kronecker(left.k_class, right.k_class), first, second, product)
        if first.is_closed and second.is_closed and first.cup is not None and second.cup is not None:
            forms = tensor_forms(intersection_form(first, tol), intersection_form(second, tol))
            details['tensor_form'] = list(forms.equivariant_signatures)
        report = ProductReport(pair, expected.multiplicities, combined.values, details)
    elif pair == 'odd-odd':
        expected = K0Class.zero(combined.k_class.algebra)
        details['factor'] = 2
        report = ProductReport(pair, expected.multiplicities, combined.values, details)
    else:
        expected = K1Class.zero(combined.k_class.algebra)
        report = ProductReport(pair, expected.windings, combined.values, details)
    logger.info(f"signature product {first.label} x {second.label} ({pair}): "
                f"{list(report.expected)} vs {list(report.observed)}")
    return report


def signature_module(hodge):
    """The even module (d + d*, τ) of a closed even-dimensional package."""
    if hodge.dimension % 2:
        raise InputError("the graded signature module needs an even dimension", dimension=hodge.dimension)
    operator = GradedOperator(hodge.dirac, GradedSpace(hodge.tau), ODD)
    return KasparovModule(operator, 0, label=f"sign[{hodge.label}]")


def odd_even_loop_product(charges, second, tol=STRUCTURAL_TOL):
    """Flow of the twisted circle against the signature module of a closed even complex.

    The product family D₁(t)⊗τ + 1⊗(d + d*) has flow Σ charges · σ(Y).
    """
    hodge = hodge_package(second, tol=tol)
    module = signature_module(hodge)
    sigma = signature_class(second, tol=tol).values[0]
    family = LoopOperatorFamily.twisted_circle(charges)
    flow = k1_of_family(kprod_odd_even(family, module)).windings[0]
    expected = sum(int(c) for c in charges) * sigma
    details = {'charges': list(charges), 'signature': sigma, 'complex': second.label}
    return ProductReport('odd-even', (expected,), (flow,), details)


def doubled_family(family):
    """The loop family on C⁰ ⊕ C¹ of the circle: the same operator on both degrees."""
    coefficients = {k: np.kron(np.eye(2), matrix) for k, matrix in family.coefficients.items()}
    return LoopOperatorFamily(coefficients, np.kron(np.eye(2), family.drift), family.sample_count,
                              label=f"2{family.label}")


def odd_odd_loop_product(first_charges, second_charges):
    """Chern number of the torus family built from the full de Rham complex of the first circle.

    It equals 2·f₁·f₂ with f the flows of the single-degree families.
    """
    first = LoopOperatorFamily.twisted_circle(first_charges)
    second = LoopOperatorFamily.twisted_circle(second_charges)
    f1 = k1_of_family(first).windings[0]
    f2 = k1_of_family(second).windings[0]
    chern = kprod_odd_odd(doubled_family(first), second).chern_number()
    details = {'first_charges': list(first_charges), 'second_charges': list(second_charges),
               'first_flow': f1, 'second_flow': f2, 'factor': 2}
    return ProductReport('odd-odd', (2 * f1 * f2,), (chern,), details)


def product_package(first, second, tol=STRUCTURAL_TOL):
    """Hodge package of X×Y in Kronecker coordinates: d = d_X⊗1 + Γ_X⊗d_Y, τ by the product rule."""
    size_second = second.size
    d = np.kron(first.d, np.eye(size_second)) + np.kron(first.gamma, second.d)
    tau = tensor_chirality(first.tau, first.gamma, second.tau, first.dimension, second.dimension)
    degrees = (first.degrees[:, None] + second.degrees[None, :]).reshape(-1)
    package = HodgeDecomposition(d, tau, degrees, first.dimension + second.dimension, PRODUCT,
                                 f"{first.label}x{second.label}", tol)
    package.check()
    return package


def _lift_first(matrix, second):
    return np.kron(matrix, np.eye(second.size))


def lagrangian_tensor(spec, second, product=None):
    """L_⊗ ⊂ ℋ of ∂M×N: the positive eigenspace of α^L⊗Γ_N (even boundary) or
    ατ⊗Γ_Nτ_N (odd boundary, odd N) on the middle harmonic space."""
    first = spec.hodge
    product = product or product_package(first, second)
    if spec.case == EVEN_CASE:
        if second.dimension % 2 == 0:
            raise InputError("an odd-dimensional boundary pairs with an odd-dimensional factor")
        involution = np.kron(spec.matrix @ first.tau, second.gamma @ second.tau)
    else:
        if second.dimension % 2:
            raise InputError("an even-dimensional boundary pairs with an even-dimensional factor")
        involution = np.kron(spec.matrix, second.gamma)
    harmonic = product.middle_harmonic
    local = harmonic.conj().T @ involution @ harmonic
    leakage = spectral_norm(involution @ harmonic - harmonic @ local)
    if leakage > IDENTITY_TOL:
        raise LagrangianError("the tensor involution does not preserve the harmonic space", leakage=leakage)
    values, vectors = linalg.eigh((local + local.conj().T) / 2)
    basis = harmonic @ vectors[:, values > 0]
    lagrangian = Lagrangian(basis, harmonic, product.tau).check()
    logger.debug(f"tensor Lagrangian on {product.label}: dim {lagrangian.dim} of {harmonic.shape[1]}")
    return lagrangian


class DecompositionReport(NamedTuple):
    residuals: dict
    smallest_singular_on_v: float

    def ok(self, tol=IDENTITY_TOL):
        return max(self.residuals.values()) < tol and self.smallest_singular_on_v > math.sqrt(tol)


def _commutator(first, second):
    return spectral_norm(first @ second - second @ first)


def decomposition_checks(first, second, product=None):
    """Residuals of the V/W splittings of ∂M×N along V_M⊗Ω* and ℋ_M⊗Ω*."""
    product = product or product_package(first, second)
    v_first = _lift_first(first.projector(first.v_space), second)
    v_product = product.projector(product.v_space)
    operator = product.boundary_operator if product.dimension % 2 else product.signature_operator
    report = {
        'v_first_d_invariant': _commutator(v_first, product.d),
        'v_first_tau_invariant': _commutator(v_first, product.tau),
        'v_product_split': _commutator(v_product, v_first),
        'operator_respects_split': _commutator(operator, v_first),
    }
    v_basis = _orth(v_first)
    smallest = float(linalg.svdvals(operator @ v_basis).min()) if v_basis.shape[1] else math.inf
    if product.dimension % 2:
        harmonic = product.harmonic
        report['harmonic_in_w_first'] = spectral_norm(v_first @ harmonic) if harmonic.size else 0.0
    if first.dimension % 2 == 0:
        h_first = _lift_first(first.projector(first.middle_harmonic), second)
        expected = np.kron(first.projector(first.middle_harmonic), second.projector(second.v_space))
        report['harmonic_split'] = _commutator(h_first, v_product)
        report['harmonic_times_v'] = spectral_norm(h_first @ v_product - expected)
    return DecompositionReport(report, smallest)


def zeta_identity(first, second, product=None):
    """𝒵 = (1 + τ_{M×N}(Γ_M⊗1))/√2 is unitary and 𝒵(Γ_M⊗1)𝒵⁻¹ = τ_{M×N} for odd M, N."""
    if not (first.dimension % 2 and second.dimension % 2):
        raise InputError("the 𝒵 identity concerns two odd-dimensional factors")
    product = product or product_package(first, second)
    gamma = _lift_first(first.gamma, second)
    zeta = (np.eye(product.size) + product.tau @ gamma) / math.sqrt(2)
    return {
        'zeta_unitary': spectral_norm(zeta.conj().T @ zeta - np.eye(product.size)),
        'zeta_gamma': spectral_norm(zeta @ gamma @ zeta.conj().T - product.tau),
    }
