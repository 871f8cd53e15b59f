# apps/dirac_grid/boundary.py
"""Boundary data of a collar: the boundary operator, trivializing perturbations,
APS projections and Lagrangian subspaces described as graphs of unitaries."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from apps.graded_core.exceptions import (
    DimensionMismatch, GapViolation, InputError, LagrangianError, NotSelfAdjoint, ParityMismatch,
)
from apps.graded_core.graded import STRUCTURAL_TOL, as_matrix, parity_check, spectral_norm

logger = logging.getLogger(__name__)


def _selfadjoint(matrix, name):
    matrix = as_matrix(matrix, name)
    if matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"{name} must be square", shape=matrix.shape)
    residual = spectral_norm(matrix - matrix.conj().T)
    if residual > STRUCTURAL_TOL * max(1.0, spectral_norm(matrix)):
        raise NotSelfAdjoint(f"{name} must be selfadjoint", residual=residual)
    return (matrix + matrix.conj().T) / 2


@dataclass(frozen=True, eq=False)
class BoundaryOperator:
    """Selfadjoint boundary operator on a fiber ℂ^k.

    Odd collars carry a grading and the operator must anticommute with it.
    """
    matrix: np.ndarray
    grading: Optional[np.ndarray] = None
    label: str = ''

    def __post_init__(self):
        matrix = _selfadjoint(self.matrix, 'boundary operator')
        object.__setattr__(self, 'matrix', matrix)
        if self.grading is not None:
            grading = as_matrix(self.grading, 'grading')
            if grading.shape != matrix.shape:
                raise DimensionMismatch("grading does not match the boundary fiber",
                                        grading=grading.shape, fiber=matrix.shape)
            report = parity_check(matrix, grading)
            if report.anticommutator > STRUCTURAL_TOL * max(1.0, spectral_norm(matrix)):
                raise ParityMismatch("boundary operator of an odd collar must be odd",
                                     anticommutator=report.anticommutator)
            object.__setattr__(self, 'grading', grading)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def is_odd_collar(self):
        return self.grading is not None


@dataclass(frozen=True, eq=False)
class TrivializingOp:
    """A with B + A invertible; odd collars also need A odd."""
    matrix: np.ndarray
    boundary: BoundaryOperator
    tol: float = STRUCTURAL_TOL

    def __post_init__(self):
        matrix = _selfadjoint(self.matrix, 'trivializing operator')
        if matrix.shape != self.boundary.matrix.shape:
            raise DimensionMismatch("trivializing operator does not match the boundary fiber",
                                    operator=matrix.shape, fiber=self.boundary.matrix.shape)
        if self.boundary.is_odd_collar:
            report = parity_check(matrix, self.boundary.grading)
            if report.anticommutator > STRUCTURAL_TOL * max(1.0, spectral_norm(matrix)):
                raise ParityMismatch("trivializing operator of an odd collar must be odd")
        object.__setattr__(self, 'matrix', matrix)
        gap = spectral_gap(self.boundary.matrix + matrix)
        if gap <= self.tol * max(1.0, spectral_norm(self.boundary.matrix + matrix)):
            raise GapViolation("B + A is not invertible", gap=gap)

    @property
    def gap(self):
        return spectral_gap(self.boundary.matrix + self.matrix)

    @property
    def perturbed(self):
        return self.boundary.matrix + self.matrix


def spectral_gap(matrix):
    values = linalg.eigvalsh(as_matrix(matrix))
    return float(np.min(np.abs(values))) if values.size else np.inf


def aps_projection(matrix, tol=STRUCTURAL_TOL):
    """1_{≥0}(X) for an invertible selfadjoint X."""
    values, vectors = linalg.eigh(_selfadjoint(matrix, 'projection source'))
    if values.size and np.min(np.abs(values)) <= tol * max(1.0, np.max(np.abs(values))):
        raise GapViolation("APS projection of a non-invertible operator is ambiguous",
                           gap=float(np.min(np.abs(values))))
    positive = vectors[:, values >= 0]
    return positive @ positive.conj().T


def negative_basis(matrix, tol=STRUCTURAL_TOL):
    """Orthonormal basis of ker 1_{≥0}(X), the negative spectral subspace."""
    values, vectors = linalg.eigh(_selfadjoint(matrix, 'projection source'))
    if values.size and np.min(np.abs(values)) <= tol * max(1.0, np.max(np.abs(values))):
        raise GapViolation("negative subspace of a non-invertible operator is ambiguous",
                           gap=float(np.min(np.abs(values))))
    return vectors[:, values < 0]


def kernel_basis(projection, tol=STRUCTURAL_TOL):
    """Orthonormal basis of ker P for an orthogonal projection P."""
    projection = as_matrix(projection, 'projection')
    if projection.shape[0] != projection.shape[1]:
        raise DimensionMismatch("projection must be square", shape=projection.shape)
    defect = max(spectral_norm(projection @ projection - projection),
                 spectral_norm(projection - projection.conj().T))
    if defect > tol * 100:
        raise InputError("boundary condition is not an orthogonal projection", defect=defect)
    values, vectors = linalg.eigh((projection + projection.conj().T) / 2)
    return vectors[:, values < 0.5]


def grading_bases(grading):
    """(U₊, U₋) orthonormal bases of the ±1 eigenspaces of an involution."""
    values, vectors = linalg.eigh(_selfadjoint(grading, 'grading'))
    return vectors[:, values > 0], vectors[:, values < 0]


def lagrangian_unitary(basis, grading, tol=STRUCTURAL_TOL):
    """V = (U₋*N)(U₊*N)⁻¹ for a subspace spanned by N; independent of the basis N."""
    basis = as_matrix(basis, 'subspace basis')
    plus, minus = grading_bases(grading)
    if basis.shape[1] != plus.shape[1] or plus.shape[1] != minus.shape[1]:
        raise LagrangianError("subspace is not half-dimensional in a balanced fiber",
                              subspace=basis.shape[1], plus=plus.shape[1], minus=minus.shape[1])
    upper = plus.conj().T @ basis
    if np.linalg.cond(upper) > 1 / tol:
        raise LagrangianError("subspace is not a graph over the positive part")
    unitary = (minus.conj().T @ basis) @ np.linalg.inv(upper)
    residual = spectral_norm(unitary.conj().T @ unitary - np.eye(unitary.shape[0]))
    if residual > 1e-6:
        raise LagrangianError("subspace is not Lagrangian for the grading", residual=residual)
    return unitary


def graph_basis(basis, grading, tol=STRUCTURAL_TOL):
    """Basis U₊ + U₋G of the same subspace; continuous along a family of subspaces."""
    basis = as_matrix(basis, 'subspace basis')
    plus, minus = grading_bases(grading)
    if basis.shape[1] != plus.shape[1]:
        raise LagrangianError("graph bases need a subspace of the positive-part dimension",
                              subspace=basis.shape[1], plus=plus.shape[1])
    upper = plus.conj().T @ basis
    if np.linalg.cond(upper) > 1 / tol:
        raise LagrangianError("subspace is not a graph over the positive part")
    return plus + minus @ ((minus.conj().T @ basis) @ np.linalg.inv(upper))
