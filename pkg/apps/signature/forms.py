# apps/signature/forms.py
"""Intersection forms on middle (relative) cohomology and their signatures,
optionally split into isotypic blocks of a finite group action."""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy import linalg

from apps.graded_core.exceptions import DimensionMismatch, HodgeError, InputError, RankAmbiguity
from apps.graded_core.graded import STRUCTURAL_TOL, spectral_norm
from apps.kclass.algebra import K0Class

from .hodge import _complement, _kernel, _orth, middle_form

logger = logging.getLogger(__name__)

FORM_TOL = 1e-8


class Inertia(NamedTuple):
    positive: int
    negative: int
    radical: int

    @property
    def signature(self):
        return self.positive - self.negative


def signature_of_form(form, tol=FORM_TOL):
    """Inertia of a hermitian matrix; eigenvalues below tol·max(1, ‖h‖) count as radical."""
    form = np.asarray(form, dtype=np.complex128)
    if form.size == 0:
        return Inertia(0, 0, 0)
    if spectral_norm(form - form.conj().T) > tol * max(1.0, spectral_norm(form)):
        raise HodgeError("intersection form is not hermitian", residual=spectral_norm(form - form.conj().T))
    values = linalg.eigvalsh((form + form.conj().T) / 2)
    scale = max(1.0, float(np.max(np.abs(values))))
    ambiguous = (np.abs(values) > tol * scale) & (np.abs(values) < 1e3 * tol * scale)
    if np.any(ambiguous):
        raise RankAmbiguity("form eigenvalue too close to zero to classify", values=values[ambiguous].tolist())
    positive = int(np.sum(values > tol * scale))
    negative = int(np.sum(values < -tol * scale))
    return Inertia(positive, negative, values.size - positive - negative)


@dataclass(frozen=True, eq=False)
class IntersectionForm:
    """h = i^{m²}⟨ā ∪ b, [M, ∂M]⟩ on the columns of `representatives`.

    `action` maps a group element to its matrix on the representative space.
    """
    matrix: np.ndarray
    representatives: Optional[np.ndarray] = None
    group: Optional[object] = None
    action: Optional[Tuple[np.ndarray, ...]] = None
    label: str = ''

    @property
    def rank(self):
        return self.matrix.shape[0]

    @cached_property
    def inertia(self):
        return signature_of_form(self.matrix)

    @property
    def signature(self):
        return self.inertia.signature

    def isotypic_blocks(self):
        """Per irrep ρ the restricted form Q_ρ* h Q_ρ."""
        if self.group is None:
            return [self.matrix]
        blocks = []
        for irrep in range(len(self.group.irrep_dims)):
            projector = self.group.isotypic_projector(lambda g: self.action[g], irrep)
            basis = _orth(projector)
            blocks.append(basis.conj().T @ self.matrix @ basis)
        return blocks

    @cached_property
    def equivariant_signatures(self):
        """σ_ρ = (n₊ − n₋)/d_ρ per irrep; a single entry without a group."""
        if self.group is None:
            return (self.signature,)
        values = []
        for dim, block in zip(self.group.irrep_dims, self.isotypic_blocks()):
            inertia = signature_of_form(block)
            if inertia.signature % dim:
                raise HodgeError("block signature not divisible by the irrep dimension",
                                 signature=inertia.signature, dim=dim)
            values.append(inertia.signature // dim)
        return tuple(values)

    def k0_class(self):
        if self.group is None:
            from apps.kclass.algebra import BlockAlgebra

            return K0Class(BlockAlgebra.trivial(), (self.signature,))
        return K0Class(self.group.algebra(), self.equivariant_signatures)

    def twisted_signature(self, multiplicities):
        """Σ_ρ σ_ρ·m_ρ for the multiplicities of ρ* in a fiber representation."""
        signatures = self.equivariant_signatures
        if len(multiplicities) != len(signatures):
            raise DimensionMismatch("one multiplicity per irrep", expected=len(signatures), got=len(multiplicities))
        return int(sum(s * m for s, m in zip(signatures, multiplicities)))

    @classmethod
    def from_equivariant(cls, matrix, group, action, label=''):
        matrix = np.asarray(matrix, dtype=np.complex128)
        action = tuple(np.asarray(action(g) if callable(action) else action[g], dtype=np.complex128)
                       for g in range(group.order))
        for g, op in enumerate(action):
            if op.shape != matrix.shape:
                raise DimensionMismatch("action does not match the form", element=g, shape=op.shape)
            if spectral_norm(op.conj().T @ matrix @ op - matrix) > FORM_TOL:
                raise InputError("form is not invariant under the action", element=g)
        return cls(matrix, None, group, action, label)

    def to_dict(self):
        positive, negative, radical = self.inertia
        return {'label': self.label, 'rank': self.rank, 'positive': positive, 'negative': negative,
                'radical': radical, 'signature': self.signature,
                'equivariant': list(self.equivariant_signatures)}


def relative_representatives(complex_, m, tol=STRUCTURAL_TOL):
    """Orthonormal cell-coordinate representatives of H^m(M, ∂M): relative cocycles ⊖ relative coboundaries."""
    mask = ~complex_.boundary_mask
    d = complex_.coboundary
    inner = np.flatnonzero(mask & (complex_.degrees == m))
    lower = np.flatnonzero(mask & (complex_.degrees == m - 1))
    upper = np.flatnonzero(mask & (complex_.degrees == m + 1)) if m < complex_.dimension else np.array([], dtype=int)
    d_out = d[np.ix_(upper, inner)] if upper.size else np.zeros((0, inner.size))
    d_in = d[np.ix_(inner, lower)] if lower.size else np.zeros((inner.size, 0))
    if d_out.size:
        cocycles = _kernel(d_out.conj().T @ d_out, tol)
    else:
        cocycles = np.eye(inner.size, dtype=np.complex128)
    coboundaries = _orth(d_in.astype(np.complex128), tol) if d_in.size else np.zeros((inner.size, 0))
    if coboundaries.shape[1]:
        complement = _complement(coboundaries, inner.size, tol)
        reps = _orth(complement @ (complement.conj().T @ cocycles), tol)
    else:
        reps = cocycles
    full = np.zeros((complex_.cell_counts[m], reps.shape[1]), dtype=np.complex128)
    full[inner - complex_.offsets[m]] = reps
    return full


def intersection_form(complex_, tol=STRUCTURAL_TOL):
    """Intersection form on H^m(M, ∂M) of an oriented 2m-dimensional complex.

    With a deck group the form carries the induced action and splits into
    isotypic signatures.
    """
    if complex_.dimension % 2:
        raise InputError("intersection forms need an even-dimensional complex", dimension=complex_.dimension)
    if not complex_.is_oriented:
        raise InputError("intersection forms need an orientation class", label=complex_.label)
    m = complex_.dimension // 2
    reps = relative_representatives(complex_, m, tol)
    form = middle_form(complex_, m, reps)
    action = None
    if complex_.group is not None:
        block = complex_.block(m)
        action = tuple(reps.conj().T @ complex_.group_action(g)[block, block] @ reps
                       for g in range(complex_.group.order))
    result = IntersectionForm(form, reps, complex_.group, action, complex_.label)
    logger.debug(f"intersection form of {complex_.label}: rank {result.rank}, inertia {tuple(result.inertia)}")
    return result


def tensor_forms(first, second):
    """h₁ ⊗ h₂ with the product action when both carry one."""
    matrix = np.kron(first.matrix, second.matrix)
    if first.group is None and second.group is None:
        return IntersectionForm(matrix, label=f"{first.label}x{second.label}")
    from .groups import direct_product, trivial_group

    first_group = first.group or trivial_group()
    second_group = second.group or trivial_group()
    first_action = first.action or (np.eye(first.rank),)
    second_action = second.action or (np.eye(second.rank),)
    action = tuple(np.kron(a, b) for a in first_action for b in second_action)
    return IntersectionForm(matrix, None, direct_product(first_group, second_group), action,
                            f"{first.label}x{second.label}")
