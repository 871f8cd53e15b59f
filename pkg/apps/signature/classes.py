# apps/signature/classes.py
"""Twisted signature classes of cell complexes.

Closed complexes of even dimension give the K₀(C[G]) class of the
signature operator d + d* graded by τ, one entry per irreducible
representation; simplicial models without a cochain-level τ are graded on
their middle harmonic space. With boundary the class is the index on
M ∪ C(∂M) plus the collar contribution of the chosen involution on ∂M, and
the relative intersection form of M is kept beside it for comparison. In odd
dimensions the class lives in K₁ of a block algebra, which vanishes; the
difference of two Lagrangians is exhibited by a unitary path instead.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import linalg

from apps.graded_core.exceptions import HodgeError, InputError, LagrangianError
from apps.graded_core.graded import STRUCTURAL_TOL, GradedOperator, GradedSpace, ODD, spectral_norm
from apps.kclass.algebra import BlockAlgebra, K0Class, K1Class
from apps.kclass.loops import LoopOperatorFamily, k1_of_family
from apps.kclass.modules import KasparovModule, k0_of_kernel

from .complexes import cone_cap, cover
from .forms import intersection_form
from .groups import twisted_multiplicities
from .hodge import IDENTITY_TOL, _kernel, _orth, exact_chirality, hodge_package, isotypic_bases, middle_form
from .involutions import (
    PATH_SAMPLES, PATH_TOL, build_alpha, collar_index, lagrangian_from_unitary, middle_tau_bases,
    trivializing_matrix,
)

logger = logging.getLogger(__name__)

CLOSED_EVEN = 'closed-even'
CLOSED_ODD = 'closed-odd'
BOUNDARY_EVEN = 'boundary-even'
BOUNDARY_ODD = 'boundary-odd'
LOOP_ODD = 'loop-odd'
HARMONIC_TAU = 'harmonic'


@dataclass(frozen=True, eq=False)
class SignatureResult:
    label: str
    case: str
    k_class: object
    form_class: Optional[K0Class] = None
    blocks: Tuple[dict, ...] = ()
    tau_source: str = ''
    witness: dict = field(default_factory=dict)
    twisted: Optional[int] = None

    @property
    def values(self):
        if isinstance(self.k_class, K1Class):
            return self.k_class.windings
        return self.k_class.multiplicities

    @property
    def agrees_with_form(self):
        if self.form_class is None:
            return None
        return self.form_class.multiplicities == self.k_class.multiplicities

    def to_dict(self):
        data = {'label': self.label, 'case': self.case, 'class': list(self.values),
                'algebra': self.k_class.algebra.to_dict(), 'tau_source': self.tau_source,
                'blocks': list(self.blocks)}
        if self.form_class is not None:
            data['form'] = list(self.form_class.multiplicities)
        if self.twisted is not None:
            data['twisted'] = self.twisted
        if self.witness:
            data['witness'] = self.witness
        return data


def _blocks(complex_):
    """(irrep dimension, basis) per isotypic block; one trivial block without a deck group."""
    group = complex_.group
    if group is None:
        return [(1, None)]
    return list(zip(group.irrep_dims, isotypic_bases(complex_, group)))


def _algebra(complex_):
    return complex_.group.algebra() if complex_.group is not None else BlockAlgebra.trivial()


def _per_irrep(value, dim, what):
    if value % dim:
        raise HodgeError(f"{what} is not divisible by the irrep dimension", value=value, dim=dim)
    return value // dim


def _signature_index(hodge):
    """Index of (d + d*)⁺ for the grading τ, through the kernel class of the even module."""
    operator = GradedOperator(hodge.dirac, GradedSpace(hodge.tau), ODD)
    module = KasparovModule(operator, 0, label=f"Dsign[{hodge.label}]")
    return k0_of_kernel(module).multiplicities[0]


def _form_class(complex_, algebra, tol):
    if complex_.cup is None or not complex_.is_oriented:
        return None
    form = intersection_form(complex_, tol)
    return K0Class(algebra, form.equivariant_signatures)


def _cochain_chirality_possible(complex_):
    """τ on all cochains needs an exact rule or matching cell counts in complementary degrees."""
    return exact_chirality(complex_) is not None or complex_.cell_counts == complex_.cell_counts[::-1]


def _closed_even(complex_, tol):
    algebra = _algebra(complex_)
    if complex_.simplices is not None and not _cochain_chirality_possible(complex_):
        values = capped_signature_indices(complex_, tol)
        blocks = tuple({'irrep': irrep, 'index': value} for irrep, value in enumerate(values))
        return SignatureResult(complex_.label, CLOSED_EVEN, K0Class(algebra, values),
                               _form_class(complex_, algebra, tol), blocks, HARMONIC_TAU)
    values, blocks, source = [], [], ''
    for irrep, (dim, basis) in enumerate(_blocks(complex_)):
        hodge = hodge_package(complex_, basis, tol)
        hodge.check()
        source = hodge.tau_source
        index = _signature_index(hodge)
        values.append(_per_irrep(index, dim, 'signature index'))
        blocks.append({'irrep': irrep, 'dim': dim, 'index': index, 'betti': list(hodge.betti)})
    k_class = K0Class(algebra, tuple(values))
    form_class = _form_class(complex_, algebra, tol)
    return SignatureResult(complex_.label, CLOSED_EVEN, k_class, form_class, tuple(blocks), source)


def _closed_odd(complex_, tol):
    algebra = _algebra(complex_)
    blocks, source = [], ''
    for irrep, (dim, basis) in enumerate(_blocks(complex_)):
        hodge = hodge_package(complex_, basis, tol)
        hodge.check()
        source = hodge.tau_source
        # the odd signature operator defines a finite-dimensional odd module, whose class is zero
        module = KasparovModule.odd(hodge.signature_operator, label=f"Dbd[{hodge.label}]")
        blocks.append({'irrep': irrep, 'dim': dim, 'operator_dim': module.dim, 'betti': list(hodge.betti)})
    return SignatureResult(complex_.label, CLOSED_ODD, K1Class.zero(algebra), None, tuple(blocks), source)


def _boundary_packages(complex_, tol):
    boundary = complex_.boundary_model
    if boundary is None:
        raise InputError("complexes with boundary need a boundary model", label=complex_.label)
    if (boundary.group is None) != (complex_.group is None):
        raise InputError("boundary model does not carry the deck group", label=complex_.label)
    packages = []
    for dim, basis in _blocks(boundary):
        hodge = hodge_package(boundary, basis, tol)
        hodge.check()
        packages.append((dim, hodge))
    return packages


def capped_signature_indices(complex_, tol=STRUCTURAL_TOL):
    """Index of the signature operator on M ∪ C(∂M), one entry per irrep.

    On the middle harmonic space d + d* vanishes, so the index is the graded
    kernel of the zero operator for τ = sign of the cup pairing there. The
    radical of the pairing (a cone over a non-sphere boundary) is dropped.
    """
    capped = cone_cap(complex_)
    m = capped.dimension // 2
    d = capped.coboundary
    block = capped.block(m)
    harmonic = _kernel((d @ d.conj().T + d.conj().T @ d)[block, block], tol)
    if capped.group is None:
        bases = [(1, harmonic)]
    else:
        action = [harmonic.conj().T @ capped.group_action(g)[block, block] @ harmonic
                  for g in range(capped.group.order)]
        bases = [(dim, harmonic @ _orth(capped.group.isotypic_projector(lambda g: action[g], irrep), tol))
                 for irrep, dim in enumerate(capped.group.irrep_dims)]
    indices = []
    for dim, basis in bases:
        if basis.shape[1] == 0:
            indices.append(0)
            continue
        form = middle_form(capped, m, basis)
        values = linalg.eigvalsh((form + form.conj().T) / 2)
        scale = max([1.0] + [abs(v) for v in values])
        signs = np.sign(values[np.abs(values) > tol * scale])
        if signs.size == 0:
            indices.append(0)
            continue
        operator = GradedOperator(np.zeros((signs.size, signs.size)), GradedSpace(np.diag(signs)), ODD)
        index = k0_of_kernel(KasparovModule(operator, 0, label=f"Dsign[{capped.label}]")).multiplicities[0]
        indices.append(_per_irrep(index, dim, 'capped signature index'))
    logger.debug(f"capped signature indices of {complex_.label}: {indices}")
    return tuple(indices)


def _boundary_even(complex_, involution, nodes, tol):
    algebra = _algebra(complex_)
    form = intersection_form(complex_, tol)
    form_values = form.equivariant_signatures
    capped = capped_signature_indices(complex_, tol)
    values, blocks, source = [], [], ''
    for irrep, (dim, hodge) in enumerate(_boundary_packages(complex_, tol)):
        source = hodge.tau_source
        alpha = build_alpha(hodge)
        spec = involution(hodge) if involution is not None else alpha
        collar = collar_index(spec, trivializing_matrix(spec), trivializing_matrix(alpha), nodes)
        collar = _per_irrep(collar, dim, 'collar index')
        values.append(capped[irrep] + collar)
        blocks.append({'irrep': irrep, 'dim': dim, 'form': form_values[irrep], 'capped': capped[irrep],
                       'collar': collar, 'involution': spec.label})
    return SignatureResult(complex_.label, BOUNDARY_EVEN, K0Class(algebra, tuple(values)),
                           K0Class(algebra, form_values), tuple(blocks), source)


def _unitary_log(unitary):
    """Hermitian h with unitary = e^{ih}, eigenphases in (−π, π]."""
    triangular, vectors = linalg.schur(unitary, output='complex')
    phases = np.angle(np.diag(triangular))
    return vectors @ np.diag(phases) @ vectors.conj().T


def lagrangian_witness(hodge, first=None, second=None, samples=PATH_SAMPLES):
    """Unitary path G(t) = G₁e^{ith} from the graph of G₁ to the graph of G₂.

    Every sampled graph is checked to be Lagrangian and to give a valid
    odd-case involution α^L; the worst residual is reported.
    """
    plus, minus = middle_tau_bases(hodge)
    if plus.shape[1] != minus.shape[1]:
        raise LagrangianError("ℋ⁺ and ℋ⁻ differ in dimension", plus=plus.shape[1], minus=minus.shape[1])
    size = plus.shape[1]
    if size == 0:
        return {'samples': samples, 'dim': 0, 'residual': 0.0, 'endpoint': 0.0, 'ok': True}
    first = np.eye(size, dtype=np.complex128) if first is None else np.asarray(first, dtype=np.complex128)
    second = -first if second is None else np.asarray(second, dtype=np.complex128)
    generator = _unitary_log(first.conj().T @ second)
    worst = 0.0
    for t in np.linspace(0.0, 1.0, samples):
        unitary = first @ linalg.expm(1j * t * generator)
        lagrangian = lagrangian_from_unitary(hodge, unitary)
        worst = max(worst, max(lagrangian.residuals().values()))
        worst = max(worst, max(build_alpha(hodge, lagrangian).residuals().values()))
    end = first @ linalg.expm(1j * generator)
    return {'samples': samples, 'dim': size, 'residual': worst,
            'endpoint': spectral_norm(end - second), 'ok': worst < PATH_TOL}


def _boundary_odd(complex_, lagrangian, tol):
    algebra = _algebra(complex_)
    blocks, witnesses, source = [], [], ''
    for irrep, (dim, hodge) in enumerate(_boundary_packages(complex_, tol)):
        source = hodge.tau_source
        positive, negative = hodge.middle_balance()
        if positive != negative:
            raise LagrangianError("no Lagrangian in the middle harmonic space of the boundary",
                                  irrep=irrep, plus=positive, minus=negative)
        first = None
        if lagrangian is not None and complex_.group is None:
            lagrangian.check()
            first = lagrangian.unitary()
        build_alpha(hodge, lagrangian_from_unitary(hodge, first))
        witness = lagrangian_witness(hodge, first)
        witnesses.append(witness)
        blocks.append({'irrep': irrep, 'dim': dim, 'middle': positive + negative})
    residual = max([w['residual'] for w in witnesses] + [0.0])
    witness = {'samples': PATH_SAMPLES, 'residual': residual, 'ok': all(w['ok'] for w in witnesses)}
    return SignatureResult(complex_.label, BOUNDARY_ODD, K1Class.zero(algebra), None, tuple(blocks), source,
                           witness)


def signature_class(complex_, bundle=None, lagrangian=None, involution: Optional[Callable] = None,
                    nodes=64, tol=STRUCTURAL_TOL):
    """Signature class of `complex_` twisted by a flat C[G]-bundle.

    The bundle is realized by its finite cover; with a fiber representation
    the result also carries the twisted integer Σ σ_ρ·m_ρ. `involution`
    maps a boundary Hodge package to an InvolutionSpec (default α).
    """
    if bundle is not None:
        complex_ = cover(complex_, bundle)
    if not complex_.is_oriented:
        raise InputError("signature classes need an orientation class", label=complex_.label)
    even = complex_.dimension % 2 == 0
    if complex_.is_closed:
        result = _closed_even(complex_, tol) if even else _closed_odd(complex_, tol)
    elif even:
        result = _boundary_even(complex_, involution, nodes, tol)
    else:
        result = _boundary_odd(complex_, lagrangian, tol)
    if bundle is not None and bundle.representation is not None and isinstance(result.k_class, K0Class):
        multiplicities = twisted_multiplicities(bundle.group, bundle.character())
        twisted = int(sum(v * m for v, m in zip(result.values, multiplicities)))
        result = SignatureResult(result.label, result.case, result.k_class, result.form_class, result.blocks,
                                 result.tau_source, result.witness, twisted)
    logger.info(f"signature class of {result.label}: {result.case} {list(result.values)}")
    if result.agrees_with_form is False:
        logger.warning(f"signature class of {result.label} differs from its intersection form")
    return result


def odd_loop_signature_class(charges, cutoff=None, mixing_seed=None):
    """K₁ class of the odd signature operator of a circle twisted by a drifting flat connection.

    The operator −i∂_θ + α(t) is the odd signature operator up to a shift,
    so its spectral flow over one period is the K₁ class.
    """
    family = LoopOperatorFamily.twisted_circle(charges, cutoff, mixing_seed)
    k_class = k1_of_family(family)
    return SignatureResult(family.label, LOOP_ODD, k_class, None, ({'charges': list(charges)},), 'half-shift')


def hs_normalization_check(hodge, tol=IDENTITY_TOL):
    """Compare the τ-graded signature operator with the U-conjugated convention U = i^{p(p−1)/2}.

    UdU* = d·i^p, Uτ U* = (−1)^{n/2} τ^{HS} with τ^{HS} = ⋆·i^{−p(n−p)}, and
    the two indices differ by (−1)^{n/2}.
    """
    if hodge.dimension % 2:
        raise InputError("the normalization check is set up for even dimensions", dimension=hodge.dimension)
    n = hodge.dimension
    m = n // 2
    p = hodge.degrees
    unitary = np.diag([1j ** ((q * (q - 1) // 2) % 4) for q in p])
    d_hs = hodge.d @ np.diag([1j ** (q % 4) for q in p])
    tau_hs = hodge.star() @ np.diag([1j ** ((-q * (n - q)) % 4) for q in p])
    sign = (-1) ** m
    report = {
        'u_unitary': spectral_norm(unitary.conj().T @ unitary - np.eye(hodge.size)),
        'd_conjugation': spectral_norm(unitary @ hodge.d @ unitary.conj().T - d_hs),
        'signature_conjugation': spectral_norm(unitary @ hodge.dirac @ unitary.conj().T
                                               - (d_hs + d_hs.conj().T)),
        'tau_conjugation': spectral_norm(unitary @ hodge.tau @ unitary.conj().T - sign * tau_hs),
        'tau_hs_involution': spectral_norm(tau_hs @ tau_hs - np.eye(hodge.size)),
    }
    index = _signature_index(hodge)
    kernel = linalg.null_space(d_hs + d_hs.conj().T, rcond=math.sqrt(tol))
    index_hs = int(round(float(np.real(np.trace(kernel.conj().T @ tau_hs @ kernel))))) if kernel.size else 0
    report.update({'index': index, 'index_hs': index_hs, 'sign': sign,
                   'ok': index_hs == sign * index and max(report.values()) < tol})
    logger.debug(f"normalization check {hodge.label}: index {index}, HS index {index_hs}")
    return report
