# apps/signature/groups.py
"""Finite groups given by multiplication tables, their characters and the
isotypic projectors that split C[G]-equivariant data into blocks.

Irreducible characters are computed from class constants (Burnside): the
central characters are the common eigenvectors of the class-multiplication
matrices. Groups of order at most 24 are supported.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, NamedTuple, Tuple

import numpy as np
from scipy import linalg
from sympy.combinatorics import Permutation, PermutationGroup
from sympy.combinatorics.named_groups import DihedralGroup, SymmetricGroup

from apps.graded_core.exceptions import DimensionMismatch, InputError, RankAmbiguity, VerificationFailure
from apps.kclass.algebra import BlockAlgebra, K0Class

logger = logging.getLogger(__name__)

MAX_ORDER = 24
CHARACTER_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """Elements 0..n−1 with table[a, b] = a·b."""
    table: np.ndarray
    generators: Tuple[int, ...] = ()
    label: str = ''

    def __post_init__(self):
        table = np.asarray(self.table, dtype=int)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise DimensionMismatch("multiplication table must be square", shape=table.shape)
        order = table.shape[0]
        if order < 1 or order > MAX_ORDER:
            raise InputError(f"groups of order 1..{MAX_ORDER} are supported", order=order)
        elements = np.arange(order)
        if table.min() < 0 or table.max() >= order:
            raise InputError("table entry outside the element range")
        for row in table:
            if not np.array_equal(np.sort(row), elements):
                raise InputError("table is not a Latin square")
        left = table[table, elements[None, None, :]]
        right = table[elements[:, None, None], table[None, :, :]]
        if not np.array_equal(left, right):
            raise InputError("multiplication table is not associative")
        identities = [e for e in range(order) if np.array_equal(table[e], elements)]
        if not identities:
            raise InputError("multiplication table has no identity")
        generators = tuple(int(g) for g in self.generators) or tuple(range(order))
        table.setflags(write=False)
        object.__setattr__(self, 'table', table)
        object.__setattr__(self, 'generators', generators)

    @property
    def order(self):
        return self.table.shape[0]

    @cached_property
    def identity(self):
        elements = np.arange(self.order)
        return next(e for e in range(self.order) if np.array_equal(self.table[e], elements))

    @cached_property
    def inverses(self):
        return np.array([int(np.flatnonzero(self.table[a] == self.identity)[0]) for a in range(self.order)])

    def multiply(self, a, b):
        return int(self.table[a, b])

    @cached_property
    def conjugacy_classes(self):
        """Classes ordered by their smallest element, the identity class first."""
        seen, classes = set(), []
        for a in [self.identity] + [x for x in range(self.order) if x != self.identity]:
            if a in seen:
                continue
            members = sorted({self.multiply(self.multiply(g, a), int(self.inverses[g])) for g in range(self.order)})
            seen.update(members)
            classes.append(tuple(members))
        return (classes[0],) + tuple(sorted(classes[1:], key=min))

    @cached_property
    def class_of(self):
        labels = np.zeros(self.order, dtype=int)
        for index, members in enumerate(self.conjugacy_classes):
            labels[list(members)] = index
        return labels

    def _class_matrices(self):
        """(A_i)_{jk} = #{(x, y) ∈ C_i × C_j : xy = z_k} for a fixed z_k ∈ C_k."""
        classes = self.conjugacy_classes
        count = len(classes)
        matrices = np.zeros((count, count, count))
        for i, first in enumerate(classes):
            for x in first:
                for y in range(self.order):
                    z = self.multiply(x, y)
                    k = self.class_of[z]
                    if z == classes[k][0]:
                        matrices[i, self.class_of[y], k] += 1
        return matrices

    @cached_property
    def characters(self):
        """Irreducible characters as rows indexed by element, trivial character first."""
        classes = self.conjugacy_classes
        sizes = np.array([len(members) for members in classes], dtype=float)
        matrices = self._class_matrices()
        rng = np.random.default_rng(len(classes) * 7919 + self.order)
        for _ in range(8):
            weights = rng.normal(size=len(classes))
            combined = np.tensordot(weights, matrices, axes=1)
            values, vectors = linalg.eig(combined)
            distances = np.abs(values[:, None] - values[None, :])
            spread = np.min(np.where(np.eye(values.size, dtype=bool), np.inf, distances))
            if values.size == 1 or spread > 1e-6:
                break
        else:
            raise RankAmbiguity("class constants did not separate the characters", group=self.label)
        rows = []
        for column in vectors.T:
            omega = column / column[0]
            degree = math.sqrt(self.order / float(np.sum(np.abs(omega) ** 2 / sizes)))
            per_class = np.round(degree) * omega / sizes
            rows.append(per_class[self.class_of])
        table = np.array(rows)
        table = table[sorted(range(len(rows)), key=lambda r: self._character_key(table[r]))]
        gram = table @ table.conj().T / self.order
        if np.max(np.abs(gram - np.eye(len(rows)))) > CHARACTER_TOL:
            raise VerificationFailure("computed characters are not orthonormal", group=self.label)
        table.setflags(write=False)
        logger.debug(f"{self.label or 'group'}: {len(rows)} irreducible characters, dims {self._dims(table)}")
        return table

    def _character_key(self, row):
        trivial = np.allclose(row, 1.0)
        return (int(round(row[self.identity].real)), not trivial,
                tuple(np.round(-row.real, 6)), tuple(np.round(-row.imag, 6)))

    def _dims(self, table):
        return tuple(int(round(value.real)) for value in table[:, self.identity])

    @property
    def irrep_dims(self):
        return self._dims(self.characters)

    def algebra(self):
        """C[G] ≅ ⊕ M_{d_ρ}(ℂ), one block per irreducible character."""
        return BlockAlgebra(self.irrep_dims, f"C[{self.label}]" if self.label else '')

    def inner_product(self, first, second):
        return complex(np.sum(np.asarray(first) * np.conj(second)) / self.order)

    def isotypic_projector(self, action, irrep):
        """P_ρ = (d_ρ/|G|) Σ_g conj χ_ρ(g) π(g) for a representation g ↦ π(g)."""
        character = self.characters[irrep]
        dim = self.irrep_dims[irrep]
        total = None
        for g in range(self.order):
            term = np.conj(character[g]) * np.asarray(action(g), dtype=np.complex128)
            total = term if total is None else total + term
        return dim * total / self.order

    def check_representation(self, action, tol=1e-10):
        """Largest ‖π(a)π(b) − π(ab)‖ over the table."""
        matrices = [np.asarray(action(g), dtype=np.complex128) for g in range(self.order)]
        worst = 0.0
        for a in range(self.order):
            for b in range(self.order):
                residual = np.max(np.abs(matrices[a] @ matrices[b] - matrices[self.multiply(a, b)]))
                worst = max(worst, float(residual))
        return worst <= tol, worst

    def to_dict(self):
        return {'label': self.label, 'order': self.order, 'irrep_dims': list(self.irrep_dims)}


def cyclic(n):
    table = np.add.outer(np.arange(n), np.arange(n)) % n
    return FiniteGroup(table, (1 % n,), f"Z{n}")


def trivial_group():
    return cyclic(1)


def from_permutation_group(group, label=''):
    """Table of a sympy permutation group; elements sorted by array form, identity first."""
    elements = sorted(group.generate(), key=lambda perm: perm.array_form)
    index = {tuple(perm.array_form): position for position, perm in enumerate(elements)}
    table = np.array([[index[tuple((a * b).array_form)] for b in elements] for a in elements])
    generators = tuple(index[tuple(perm.array_form)] for perm in group.generators)
    return FiniteGroup(table, generators, label)


def symmetric(n):
    return from_permutation_group(SymmetricGroup(n), f"S{n}")


def dihedral(n):
    return from_permutation_group(DihedralGroup(n), f"D{n}")


def permutation_group(generator_cycles, degree, label=''):
    """Group generated by permutations written in array form."""
    generators = [Permutation(list(cycle), size=degree) for cycle in generator_cycles]
    return from_permutation_group(PermutationGroup(generators), label)


def direct_product(first, second):
    """G × H with (a, b) ↦ a·|H| + b."""
    n, m = first.order, second.order
    table = np.zeros((n * m, n * m), dtype=int)
    for a in range(n):
        for b in range(m):
            for c in range(n):
                for d in range(m):
                    table[a * m + b, c * m + d] = first.table[a, c] * m + second.table[b, d]
    generators = tuple(g * m + second.identity for g in first.generators)
    generators += tuple(first.identity * m + h for h in second.generators)
    return FiniteGroup(table, generators, f"{first.label}x{second.label}")


def regular_action(group):
    """π(g) e_h = e_{gh}."""
    def action(g):
        matrix = np.zeros((group.order, group.order))
        for h in range(group.order):
            matrix[group.multiply(g, h), h] = 1.0
        return matrix
    return action


def extend_representation(group, generator_matrices):
    """Extend matrices given on generators to every element along the Cayley graph."""
    matrices: Dict[int, np.ndarray] = {}
    first = next(iter(generator_matrices.values()))
    dim = np.asarray(first).shape[0]
    matrices[group.identity] = np.eye(dim, dtype=np.complex128)
    frontier = [group.identity]
    while frontier:
        nxt = []
        for element in frontier:
            for generator, matrix in generator_matrices.items():
                product = group.multiply(generator, element)
                if product not in matrices:
                    matrices[product] = np.asarray(matrix, dtype=np.complex128) @ matrices[element]
                    nxt.append(product)
        frontier = nxt
    if len(matrices) != group.order:
        raise InputError("representation generators do not generate the group",
                         reached=len(matrices), order=group.order)
    ok, residual = group.check_representation(lambda g: matrices[g])
    if not ok:
        raise InputError("generator matrices do not define a representation", residual=residual)
    return matrices


class PushforwardMap(NamedTuple):
    """Irreps (i, j) of G₁ and G₂ matched to the irreps of G₁ × G₂."""
    product: FiniteGroup
    permutation: Tuple[int, ...]
    source: BlockAlgebra
    target: BlockAlgebra

    def apply(self, k0_class):
        if k0_class.algebra.block_sizes != self.source.block_sizes:
            raise DimensionMismatch("class does not live over C[G₁]⊗C[G₂]",
                                    expected=self.source.block_sizes, got=k0_class.algebra.block_sizes)
        values = [0] * self.target.rank
        for position, target in enumerate(self.permutation):
            values[target] = k0_class.multiplicities[position]
        return K0Class(self.target, tuple(values))


def phi_pushforward_map(first, second, product=None):
    """Identify irrep(G₁) × irrep(G₂) with irrep(G₁ × G₂) by character inner products."""
    product = product or direct_product(first, second)
    m = second.order
    targets = []
    for chi in first.characters:
        for psi in second.characters:
            lifted = np.array([chi[g // m] * psi[g % m] for g in range(product.order)])
            overlaps = np.array([product.inner_product(lifted, row) for row in product.characters])
            matches = np.flatnonzero(np.abs(overlaps - 1) < CHARACTER_TOL)
            others = np.abs(np.delete(overlaps, matches))
            if matches.size != 1 or (others.size and others.max() > CHARACTER_TOL):
                raise VerificationFailure("tensor character is not irreducible in the product group")
            targets.append(int(matches[0]))
    if sorted(targets) != list(range(len(product.characters))):
        raise VerificationFailure("irrep relabeling is not a bijection", targets=targets)
    source = first.algebra().tensor(second.algebra())
    target = product.algebra()
    for position, index in enumerate(targets):
        if source.block_sizes[position] != target.block_sizes[index]:
            raise VerificationFailure("block sizes change under the relabeling")
    return PushforwardMap(product, tuple(targets), source, target)


def phi_pushforward(k0_class, first, second, product=None):
    return phi_pushforward_map(first, second, product).apply(k0_class)


def twisted_multiplicities(group, character):
    """⟨χ_V, conj χ_ρ⟩ for every irrep ρ: how often ρ* occurs in V."""
    return tuple(int(round(group.inner_product(character, np.conj(row)).real)) for row in group.characters)
