# apps/kclass/modules.py
"""Finite-dimensional Kasparov modules over block algebras.

A module is stored in reduced form: the algebra ⊕M_{n_i} acts on
⊕ ℂ^{m_i} ⊗ ℂ^{n_i}, an operator commuting with it is (D_i ⊗ 1) per block,
and only the multiplicity space ⊕ ℂ^{m_i} with its block labels (sectors) is
kept.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from apps.graded_core.exceptions import CommutationError, DimensionMismatch, NotSelfAdjoint, ParityMismatch
from apps.graded_core.graded import (
    ODD, STRUCTURAL_TOL, GradedOperator, GradedSpace, as_matrix, kernel_dimension,
    spectral_norm,
)

from .algebra import BlockAlgebra, K0Class

logger = logging.getLogger(__name__)


def validate_sectors(sectors, dim, algebra):
    sectors = np.zeros(dim, dtype=int) if sectors is None else np.asarray(sectors, dtype=int)
    if sectors.shape != (dim,):
        raise DimensionMismatch("one sector label per basis vector", expected=dim, got=sectors.shape)
    if dim and (sectors.min() < 0 or sectors.max() >= algebra.rank):
        raise DimensionMismatch("sector label outside the block range", rank=algebra.rank)
    sectors = sectors.copy()
    sectors.setflags(write=False)
    return sectors


def sector_leakage(matrix, sectors):
    """Largest entry coupling two different sectors."""
    mask = sectors[:, None] != sectors[None, :]
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(np.asarray(matrix)[mask])))


def pair_sectors(first, second, second_rank):
    """Sector labels of a Kronecker product, i-major."""
    return (first[:, None] * second_rank + second[None, :]).reshape(-1)


@dataclass(frozen=True, eq=False)
class KasparovModule:
    operator: GradedOperator
    parity: int
    algebra: BlockAlgebra = field(default_factory=BlockAlgebra.trivial)
    sectors: Optional[np.ndarray] = None
    label: str = ''

    def __post_init__(self):
        if self.parity not in (0, 1):
            raise ParityMismatch("module parity must be 0 or 1", parity=self.parity)
        ok, residual = self.operator.is_selfadjoint()
        if not ok:
            raise NotSelfAdjoint("Kasparov module operator must be selfadjoint", residual=residual)
        if self.parity == 0 and self.operator.parity != ODD:
            raise ParityMismatch("even module needs an odd operator", parity=self.operator.parity)
        if self.parity == 1 and not self.operator.space.is_trivially_graded:
            raise ParityMismatch("odd module must be trivially graded")
        sectors = validate_sectors(self.sectors, self.operator.dim, self.algebra)
        scale = STRUCTURAL_TOL * max(1.0, spectral_norm(self.operator.matrix))
        leakage = max(sector_leakage(self.operator.matrix, sectors),
                      sector_leakage(self.operator.space.grading, sectors))
        if leakage > scale:
            raise CommutationError("operator does not commute with the algebra action", leakage=leakage)
        object.__setattr__(self, 'sectors', sectors)

    @classmethod
    def even(cls, d_plus, algebra=None, plus_sectors=None, minus_sectors=None, label=''):
        """Module [[0, D⁺*], [D⁺, 0]] on H⁺ ⊕ H⁻ from a (dim H⁻ × dim H⁺) block."""
        d_plus = as_matrix(d_plus, 'D⁺')
        minus, plus = d_plus.shape
        matrix = np.zeros((plus + minus, plus + minus), dtype=np.complex128)
        matrix[plus:, :plus] = d_plus
        matrix[:plus, plus:] = d_plus.conj().T
        algebra = algebra or BlockAlgebra.trivial()
        sectors = None
        if plus_sectors is not None or minus_sectors is not None:
            plus_sectors = np.zeros(plus, dtype=int) if plus_sectors is None else np.asarray(plus_sectors)
            minus_sectors = np.zeros(minus, dtype=int) if minus_sectors is None else np.asarray(minus_sectors)
            sectors = np.concatenate([plus_sectors, minus_sectors])
        operator = GradedOperator(matrix, GradedSpace.from_split(plus, minus), ODD)
        return cls(operator, 0, algebra, sectors, label)

    @classmethod
    def odd(cls, matrix, algebra=None, sectors=None, label=''):
        matrix = as_matrix(matrix)
        operator = GradedOperator(matrix, GradedSpace.trivial(matrix.shape[0]))
        return cls(operator, 1, algebra or BlockAlgebra.trivial(), sectors, label)

    @property
    def dim(self):
        return self.operator.dim

    @property
    def matrix(self):
        return self.operator.matrix

    @property
    def grading(self):
        return self.operator.space.grading

    def sector_indices(self, block):
        return np.flatnonzero(self.sectors == block)

    def describe(self):
        return {
            'label': self.label,
            'parity': self.parity,
            'dim': self.dim,
            'algebra': self.algebra.to_dict(),
        }


def k0_of_kernel(module, tol=STRUCTURAL_TOL, strict=True):
    """Graded kernel of an even module, one multiplicity per block.

    Rank decisions share one threshold, tol times the operator norm, and a
    singular value within a factor 10 of it raises RankAmbiguity.
    """
    if module.parity != 0:
        raise ParityMismatch("K₀ class needs an even module", parity=module.parity)
    scale = spectral_norm(module.matrix)
    multiplicities = []
    for block in range(module.algebra.rank):
        indices = module.sector_indices(block)
        if indices.size == 0:
            multiplicities.append(0)
            continue
        sub_space = GradedSpace(module.grading[np.ix_(indices, indices)])
        sub_operator = GradedOperator(module.matrix[np.ix_(indices, indices)], sub_space, ODD)
        d_plus, d_minus = sub_operator.chiral_blocks()
        kernel_plus = kernel_dimension(d_plus, tol, scale=scale, strict=strict)
        kernel_minus = kernel_dimension(d_minus, tol, scale=scale, strict=strict)
        logger.debug(f"block {block}: ker D⁺ = {kernel_plus}, ker D⁻ = {kernel_minus}")
        multiplicities.append(kernel_plus - kernel_minus)
    return K0Class(module.algebra, tuple(multiplicities))
