# apps/kclass/products.py
"""The Kasparov product KK(ℂ,𝒜) × KK(ℂ,ℬ) → KK(ℂ,𝒜⊗ℬ) in its four parity cases.

Even factors are KasparovModules. Odd factors are either odd
KasparovModules (whose class is zero) or LoopOperatorFamilies.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from apps.graded_core.clifford import (
    CliffordGens, gamma_basis, morita_frame, regular_representation, standard_clifford,
)
from apps.graded_core.exceptions import CommutationError, DimensionMismatch, ParityMismatch, RefineRequired
from apps.graded_core.graded import (
    ODD, STRUCTURAL_TOL, GradedOperator, GradedSpace, as_matrix, graded_sum, spectral_norm,
)

from .algebra import K0Class
from .loops import TWO_PI, LoopOperatorFamily
from .modules import KasparovModule, pair_sectors

logger = logging.getLogger(__name__)


def _require_parity(module, parity, role):
    actual = 1 if isinstance(module, LoopOperatorFamily) else module.parity
    if actual != parity:
        raise ParityMismatch(f"{role} factor must have parity {parity}", got=actual)


def _product_labels(first, second):
    algebra = first.algebra.tensor(second.algebra)
    sectors = pair_sectors(first.sectors, second.sectors, second.algebra.rank)
    return algebra, sectors


def kprod_even_even(first, second):
    """D₁⊗1 + z₁⊗D₂ graded by z₁⊗z₂."""
    _require_parity(first, 0, 'first')
    _require_parity(second, 0, 'second')
    operator = graded_sum(first.operator, second.operator)
    algebra, sectors = _product_labels(first, second)
    return KasparovModule(GradedOperator(operator.matrix, operator.space, ODD), 0, algebra, sectors,
                          f"{first.label}#{second.label}")


def _lift_family(family, left=None, right=None, extra=None):
    """Coefficients C_k ↦ left⊗C_k⊗right, with `extra` added to C_0."""
    def lift(matrix):
        if left is not None:
            matrix = np.kron(left, matrix)
        if right is not None:
            matrix = np.kron(matrix, right)
        return matrix

    coefficients = {k: lift(matrix) for k, matrix in family.coefficients.items()}
    if extra is not None:
        coefficients[0] = coefficients.get(0, np.zeros_like(extra)) + extra
    return coefficients, lift(family.drift)


def kprod_even_odd(first, second):
    """[D₁] ⊗ [D₂] = [D₁⊗1 + z₁⊗D₂] on the ungraded H₁⊗H₂."""
    _require_parity(first, 0, 'first')
    _require_parity(second, 1, 'second')
    algebra, sectors = _product_labels(first, second)
    label = f"{first.label}#{second.label}"
    if isinstance(second, LoopOperatorFamily):
        extra = np.kron(first.matrix, np.eye(second.dim))
        coefficients, drift = _lift_family(second, left=first.grading, extra=extra)
        return LoopOperatorFamily(coefficients, drift, second.sample_count, algebra, sectors, label)
    matrix = np.kron(first.matrix, np.eye(second.dim)) + np.kron(first.grading, second.matrix)
    return KasparovModule.odd(matrix, algebra, sectors, label)


def kprod_odd_even(first, second):
    """[D₁] ⊗ [D₂] = [D₁⊗z₂ + 1⊗D₂] on the ungraded H₁⊗H₂."""
    _require_parity(first, 1, 'first')
    _require_parity(second, 0, 'second')
    algebra, sectors = _product_labels(first, second)
    label = f"{first.label}#{second.label}"
    if isinstance(first, LoopOperatorFamily):
        extra = np.kron(np.eye(first.dim), second.matrix)
        coefficients, drift = _lift_family(first, right=second.grading, extra=extra)
        return LoopOperatorFamily(coefficients, drift, first.sample_count, algebra, sectors, label)
    matrix = np.kron(first.matrix, second.grading) + np.kron(np.eye(first.dim), second.matrix)
    return KasparovModule.odd(matrix, algebra, sectors, label)


def gamma_model_operator(first_matrix, second_matrix, gens):
    """Γ₁⊗D₁⊗1 + Γ₂⊗1⊗D₂ on ℂ²⊗H₁⊗H₂."""
    first_matrix, second_matrix = as_matrix(first_matrix), as_matrix(second_matrix)
    identity_first, identity_second = np.eye(first_matrix.shape[0]), np.eye(second_matrix.shape[0])
    return (np.kron(gens.gamma1, np.kron(first_matrix, identity_second))
            + np.kron(gens.gamma2, np.kron(identity_first, second_matrix)))


@dataclass(frozen=True, eq=False)
class TorusFamily:
    """F(s,t) = Γ₁⊗H₁(s)⊗1 + Γ₂⊗1⊗H₂(t) over the parameter square [0,2π]²."""
    first: LoopOperatorFamily
    second: LoopOperatorFamily
    gens: CliffordGens = field(default_factory=standard_clifford)
    label: str = ''

    @property
    def algebra(self):
        return self.first.algebra.tensor(self.second.algebra)

    @property
    def sectors(self):
        return pair_sectors(self.first.sectors, self.second.sectors, self.second.algebra.rank)

    def at(self, s, t):
        return gamma_model_operator(self.first.at(s), self.second.at(t), self.gens)

    def grading(self):
        return np.kron(self.gens.grading, np.eye(self.first.dim * self.second.dim))

    @cached_property
    def frame(self):
        v1, v2 = gamma_basis(self.gens)
        identity = np.eye(self.first.dim * self.second.dim)
        return np.kron(v1[:, None], identity), np.kron(v2[:, None], identity)

    def chiral_block(self, s, t):
        """F⁺ in the frame (v₁⊗·, v₂⊗·) of the Γ-model grading."""
        plus, minus = self.frame
        return minus.conj().T @ self.at(s, t) @ plus

    def chern_number(self, block=None, samples=None):
        return det_winding(self._block_function(block), samples or self.first.sample_count)

    def chern_class(self):
        values = []
        for first_block in range(self.first.algebra.rank):
            for second_block in range(self.second.algebra.rank):
                values.append(self.chern_number((first_block, second_block)))
        return K0Class(self.algebra, tuple(values))

    def _block_function(self, block):
        if block is None:
            return self.chiral_block
        first_idx = np.flatnonzero(self.first.sectors == block[0])
        second_idx = np.flatnonzero(self.second.sectors == block[1])
        if first_idx.size == 0 or second_idx.size == 0:
            return None
        first, second = self.first.restrict(block[0]), self.second.restrict(block[1])
        return TorusFamily(first, second, self.gens).chiral_block


def _boundary_point(u):
    """Counter-clockwise boundary of [0,2π]² parametrized by u ∈ [0, 4)."""
    side, fraction = int(min(math.floor(u), 3)), u - min(math.floor(u), 3)
    if side == 0:
        return TWO_PI * fraction, 0.0
    if side == 1:
        return TWO_PI, TWO_PI * fraction
    if side == 2:
        return TWO_PI * (1 - fraction), TWO_PI
    return 0.0, TWO_PI * (1 - fraction)


def det_winding(block_function, samples=257, max_depth=24):
    """Winding number of det F⁺ along the boundary of the parameter square.

    Consecutive samples are subdivided until the phase increment is below π/2.
    """
    if block_function is None:
        return 0

    def phase(u):
        s, t = _boundary_point(u)
        sign, logdet = np.linalg.slogdet(block_function(s, t))
        if sign == 0 or not np.isfinite(logdet):
            raise RefineRequired("F⁺ is singular on the boundary of the parameter square",
                                 s=s, t=t, suggested_samples=2 * samples + 1)
        return np.angle(sign)

    def increment(a, b, phase_a, phase_b, depth):
        delta = (phase_b - phase_a + math.pi) % TWO_PI - math.pi
        if abs(delta) < math.pi / 2:
            return delta
        if depth >= max_depth:
            raise RefineRequired("determinant phase changes too fast", suggested_samples=2 * samples + 1)
        middle = (a + b) / 2
        phase_m = phase(middle)
        return increment(a, middle, phase_a, phase_m, depth + 1) + increment(middle, b, phase_m, phase_b, depth + 1)

    steps = 4 * samples
    grid = np.linspace(0.0, 4.0, steps + 1)
    phases = [phase(u) for u in grid[:-1]]
    phases.append(phases[0])
    total = sum(increment(grid[i], grid[i + 1], phases[i], phases[i + 1], 0) for i in range(steps))
    return int(round(total / TWO_PI))


def kprod_odd_odd(first, second, gens=None):
    """[D₁] ⊗ [D₂] = [Γ₁D₁ + Γ₂D₂] graded by the Γ-model grading."""
    _require_parity(first, 1, 'first')
    _require_parity(second, 1, 'second')
    gens = gens or standard_clifford()
    if isinstance(first, LoopOperatorFamily) and isinstance(second, LoopOperatorFamily):
        return TorusFamily(first, second, gens, f"{first.label}#{second.label}")
    if isinstance(first, LoopOperatorFamily) or isinstance(second, LoopOperatorFamily):
        raise ParityMismatch("odd×odd needs two loop families or two plain odd modules")
    matrix = gamma_model_operator(first.matrix, second.matrix, gens)
    space = GradedSpace(np.kron(gens.grading, np.eye(first.dim * second.dim)))
    algebra, sectors = _product_labels(first, second)
    sectors = np.concatenate([sectors, sectors])
    return KasparovModule(GradedOperator(matrix, space, ODD), 0, algebra, sectors,
                          f"{first.label}#{second.label}")


def clifford_regular_operator(first_matrix, second_matrix):
    """σ′D₁ + σ″D₂ on C₁′⊗C₁″⊗H₁⊗H₂ with left multiplication on the Clifford factor."""
    left_first, left_second = regular_representation()['left']
    first_matrix, second_matrix = as_matrix(first_matrix), as_matrix(second_matrix)
    identity_first, identity_second = np.eye(first_matrix.shape[0]), np.eye(second_matrix.shape[0])
    return (np.kron(left_first, np.kron(first_matrix, identity_second))
            + np.kron(left_second, np.kron(identity_first, second_matrix)))


def morita_project(operator, gens=None, tol=STRUCTURAL_TOL):
    """Inverse of p_*: compress an operator on C₁′⊗C₁″⊗H to ℂ²⊗H.

    The operator must commute with right multiplication by C₁′⊗C₁″. The
    result is written in the standard basis of ℂ² through (v₁, v₂ = Γ₁v₁).
    """
    operator = as_matrix(operator)
    if operator.shape[0] % 4:
        raise DimensionMismatch("operator must act on C₁′⊗C₁″⊗H", shape=operator.shape)
    inner = operator.shape[0] // 4
    identity = np.eye(inner)
    scale = tol * max(1.0, spectral_norm(operator))
    for right in regular_representation()['right']:
        lifted = np.kron(right, identity)
        residual = spectral_norm(operator @ lifted - lifted @ operator)
        if residual > scale:
            raise CommutationError("operator does not commute with the right Clifford action",
                                   residual=residual)
    frame = np.kron(morita_frame(), identity)
    compressed = frame.conj().T @ operator @ frame
    v1, v2 = gamma_basis(gens or standard_clifford())
    change = np.kron(np.column_stack([v1, v2]), identity)
    return change @ compressed @ change.conj().T


def gamma_model_residual(first_matrix, second_matrix, gens=None):
    """‖morita_project(σ′D₁ + σ″D₂) − (Γ₁D₁ + Γ₂D₂)‖."""
    gens = gens or standard_clifford()
    projected = morita_project(clifford_regular_operator(first_matrix, second_matrix), gens)
    return spectral_norm(projected - gamma_model_operator(first_matrix, second_matrix, gens))
