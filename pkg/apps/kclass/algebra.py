# apps/kclass/algebra.py
"""Block-matrix coefficient algebras and their integer K-classes."""
from dataclasses import dataclass
from itertools import product
from typing import Tuple

import numpy as np

from apps.graded_core.exceptions import DimensionMismatch, InputError


@dataclass(frozen=True)
class BlockAlgebra:
    """⊕ M_{n_i}(ℂ); K₀ is ℤ^r with one generator per block."""
    block_sizes: Tuple[int, ...] = (1,)
    label: str = ''

    def __post_init__(self):
        sizes = tuple(int(size) for size in self.block_sizes)
        if not sizes:
            raise InputError("a block algebra needs at least one block")
        if any(size < 1 for size in sizes):
            raise InputError("block sizes must be positive", block_sizes=sizes)
        object.__setattr__(self, 'block_sizes', sizes)

    @classmethod
    def trivial(cls):
        return cls((1,), 'C')

    @property
    def rank(self):
        return len(self.block_sizes)

    def tensor(self, other):
        """Blocks of A⊗B in i-major order: (i, j) sits at i·r_B + j."""
        sizes = tuple(a * b for a, b in product(self.block_sizes, other.block_sizes))
        label = f"{self.label or self.block_sizes}⊗{other.label or other.block_sizes}"
        return BlockAlgebra(sizes, label)

    def to_dict(self):
        return {'blocks': list(self.block_sizes), 'label': self.label}


def _integer_vector(values, length, name):
    array = np.asarray(values)
    if array.shape != (length,):
        raise DimensionMismatch(f"{name} has the wrong length", expected=length, got=array.shape)
    rounded = np.rint(array.astype(float))
    if np.any(np.abs(array.astype(float) - rounded) > 0):
        raise InputError(f"{name} must be integral")
    return tuple(int(value) for value in rounded)


@dataclass(frozen=True)
class K0Class:
    algebra: BlockAlgebra
    multiplicities: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'multiplicities',
                           _integer_vector(self.multiplicities, self.algebra.rank, 'multiplicities'))

    @classmethod
    def zero(cls, algebra):
        return cls(algebra, (0,) * algebra.rank)

    def _check(self, other):
        if other.algebra.block_sizes != self.algebra.block_sizes:
            raise DimensionMismatch("classes live over different algebras",
                                    first=self.algebra.block_sizes, second=other.algebra.block_sizes)

    def __add__(self, other):
        self._check(other)
        return K0Class(self.algebra, tuple(a + b for a, b in zip(self.multiplicities, other.multiplicities)))

    def __neg__(self):
        return K0Class(self.algebra, tuple(-a for a in self.multiplicities))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        return K0Class(self.algebra, tuple(int(factor) * a for a in self.multiplicities))

    @property
    def is_zero(self):
        return not any(self.multiplicities)

    def to_dict(self):
        return {'algebra': self.algebra.to_dict(), 'k0': list(self.multiplicities)}

    def __str__(self):
        return f"K0{list(self.multiplicities)}"


@dataclass(frozen=True)
class K1Class:
    """Windings of a loop family, one per block of the coefficient algebra."""
    algebra: BlockAlgebra
    windings: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'windings', _integer_vector(self.windings, self.algebra.rank, 'windings'))

    @classmethod
    def zero(cls, algebra):
        return cls(algebra, (0,) * algebra.rank)

    def __add__(self, other):
        if other.algebra.block_sizes != self.algebra.block_sizes:
            raise DimensionMismatch("classes live over different algebras")
        return K1Class(self.algebra, tuple(a + b for a, b in zip(self.windings, other.windings)))

    def __neg__(self):
        return K1Class(self.algebra, tuple(-a for a in self.windings))

    @property
    def is_zero(self):
        return not any(self.windings)

    def to_dict(self):
        return {'algebra': self.algebra.to_dict(), 'k1': list(self.windings)}

    def __str__(self):
        return f"K1{list(self.windings)}"


def k0_kronecker(first, second):
    """Outer product of multiplicity vectors over A⊗B, flattened i-major."""
    algebra = first.algebra.tensor(second.algebra)
    values = np.outer(first.multiplicities, second.multiplicities).reshape(-1)
    return K0Class(algebra, tuple(int(value) for value in values))


def _entries(value):
    return value.windings if isinstance(value, K1Class) else value.multiplicities


def pair_classes(first, second):
    """Outer product of two class vectors over A⊗B.

    K₀×K₀ and K₁×K₁ land in K₀, mixed parities in K₁.
    """
    algebra = first.algebra.tensor(second.algebra)
    values = tuple(int(value) for value in np.outer(_entries(first), _entries(second)).reshape(-1))
    if isinstance(first, K1Class) != isinstance(second, K1Class):
        return K1Class(algebra, values)
    return K0Class(algebra, values)
