# apps/dirac_grid/operators.py
"""Staggered first-order collar operators with APS boundary conditions.

A collar operator lives on a mesh with values f_j at the nodes and acts by

    (Δf)_j = −i[(f_{j+1} − f_j)/h − X_j (f_j + f_{j+1})/2]

cell by cell, X_j being the mass (B, or B + χA near the end of a cylinder).
Its kernel propagates with the Cayley transfer (1 − hX/2)⁻¹(1 + hX/2), which
keeps the spectral subspaces of X and, for odd collars, the Lagrangian
subspaces of the fiber grading.
"""
import logging
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg, sparse

from apps.graded_core.exceptions import DimensionMismatch, ParityMismatch, RefineRequired
from apps.graded_core.graded import STRUCTURAL_TOL, as_matrix, numerical_rank
from apps.kclass.loops import unitary_flow

from .boundary import BoundaryOperator, kernel_basis, lagrangian_unitary, negative_basis
from .mesh import CIRCLE, Mesh1D

logger = logging.getLogger(__name__)

EVEN_CASE = 'even'
ODD_CASE = 'odd'


@dataclass(frozen=True, eq=False)
class DiscreteDirac:
    mesh: Mesh1D
    boundary: BoundaryOperator
    masses: np.ndarray
    left_basis: Optional[np.ndarray] = None
    right_basis: Optional[np.ndarray] = None
    label: str = ''

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=np.complex128)
        k = self.boundary.dim
        if masses.shape != (self.mesh.cells, k, k):
            raise DimensionMismatch("one k×k mass per cell expected",
                                    expected=(self.mesh.cells, k, k), got=masses.shape)
        object.__setattr__(self, 'masses', masses)
        for name in ('left_basis', 'right_basis'):
            basis = getattr(self, name)
            if basis is None:
                continue
            if self.mesh.kind == CIRCLE:
                raise DimensionMismatch("a circle has no boundary traces to constrain")
            basis = np.asarray(basis, dtype=np.complex128)
            if basis.ndim == 1:
                basis = basis.reshape(k, 1)
            if basis.shape[0] != k:
                raise DimensionMismatch("boundary basis does not match the fiber", fiber=k, basis=basis.shape)
            object.__setattr__(self, name, basis)

    @property
    def fiber_dim(self):
        return self.boundary.dim

    @property
    def parity_case(self):
        return ODD_CASE if self.boundary.is_odd_collar else EVEN_CASE

    @property
    def has_constant_mass(self):
        return bool(np.all(self.masses == self.masses[0]))

    def stencil(self):
        """Δ as a sparse matrix from node values to cell values."""
        k, cells, h = self.fiber_dim, self.mesh.cells, self.mesh.spacing
        identity = np.eye(k)
        diagonal = sparse.block_diag([-1j * (-identity / h - mass / 2) for mass in self.masses], format='csr')
        upper = sparse.block_diag([-1j * (identity / h - mass / 2) for mass in self.masses], format='csr')
        if self.mesh.kind == CIRCLE:
            shift = sparse.lil_matrix((cells, cells))
            shift.setdiag(1, 1)
            shift[cells - 1, 0] = 1
            return (diagonal + upper @ sparse.kron(shift.tocsr(), sparse.identity(k))).tocsr()
        padding = sparse.csr_matrix((k * cells, k))
        return (sparse.hstack([diagonal, padding]) + sparse.hstack([padding, upper])).tocsr()

    def embedding(self):
        """Columns spanning the node vectors that satisfy both boundary conditions."""
        k, nodes = self.fiber_dim, self.mesh.nodes
        if self.mesh.kind == CIRCLE:
            return sparse.identity(k * nodes, dtype=np.complex128, format='csr')
        left = np.eye(k) if self.left_basis is None else self.left_basis
        right = np.eye(k) if self.right_basis is None else self.right_basis
        interior = k * (nodes - 2)
        columns = left.shape[1] + interior + right.shape[1]
        frame = sparse.lil_matrix((k * nodes, columns), dtype=np.complex128)
        if left.shape[1]:
            frame[:k, :left.shape[1]] = left
        for offset in range(interior):
            frame[k + offset, left.shape[1] + offset] = 1.0
        if right.shape[1]:
            frame[k * (nodes - 1):, left.shape[1] + interior:] = right
        return frame.tocsr()

    def constrained(self):
        return (self.stencil() @ self.embedding()).tocsr()

    def assembled(self):
        """[[0, Δ*], [Δ, 0]] with its grading, nodes first."""
        stencil = self.stencil()
        operator = sparse.bmat([[None, stencil.conj().T], [stencil, None]], format='csr')
        grading = np.concatenate([np.ones(stencil.shape[1]), -np.ones(stencil.shape[0])])
        return operator, grading

    def odd_operator(self):
        """c(dx₁)(∂₁ − X) = −iz(∂₁ − X), i.e. (1⊗z)Δ, for odd collars."""
        if not self.boundary.is_odd_collar:
            raise ParityMismatch("only odd collars carry c(dx₁) = −iz")
        return (sparse.kron(sparse.identity(self.mesh.cells), self.boundary.grading) @ self.stencil()).tocsr()

    def cayley_steps(self):
        h = self.mesh.spacing
        identity = np.eye(self.fiber_dim)
        masses = self.masses[:1] if self.has_constant_mass else self.masses
        radius = max(float(np.max(np.abs(linalg.eigvals(mass)))) for mass in masses)
        if h * radius / 2 >= 0.5:
            raise RefineRequired("mesh too coarse for the boundary spectrum", spacing=h, radius=radius,
                                 suggested_samples=2 * self.mesh.nodes - 1)
        if self.has_constant_mass:
            mass = self.masses[0]
            return [linalg.solve(identity - h * mass / 2, identity + h * mass / 2)]
        return [linalg.solve(identity - h * mass / 2, identity + h * mass / 2) for mass in self.masses]

    def transfer(self):
        """Node 0 to node n propagator of solutions of Δf = 0."""
        steps = self.cayley_steps()
        if len(steps) == 1:
            return np.linalg.matrix_power(steps[0], self.mesh.cells)
        total = np.eye(self.fiber_dim, dtype=np.complex128)
        for step in steps:
            total = step @ total
        return total

    def export_coordinates(self, stream):
        """Coordinate-format dump of the constrained matrix."""
        matrix = self.constrained().tocoo()
        stream.write(f"% {matrix.shape[0]} {matrix.shape[1]} {matrix.nnz}\n")
        for row, col, value in zip(matrix.row, matrix.col, matrix.data):
            stream.write(f"{row} {col} {value.real:.17g} {value.imag:.17g}\n")


def build_interval_dirac(mesh, boundary, label=''):
    """Collar operator ∂₁ − B on the whole mesh with both ends free."""
    masses = np.repeat(boundary.matrix[None, :, :], mesh.cells, axis=0)
    return DiscreteDirac(mesh, boundary, masses, label=label)


def _constraint(boundary_matrix, perturbation, projection, sign):
    if projection is not None:
        return kernel_basis(projection)
    if perturbation is None:
        return None
    perturbation = perturbation.matrix if hasattr(perturbation, 'matrix') else as_matrix(perturbation)
    return negative_basis(sign * boundary_matrix + perturbation)


def impose_aps(dirac, right=None, left=None, right_projection=None, left_projection=None):
    """APS conditions 1_{≥0}(B + A_R) f(L) = 0 and 1_{≥0}(−B + A_L) f(0) = 0.

    Either end may instead receive an explicit projection, or nothing for a
    free end.
    """
    if dirac.mesh.kind == CIRCLE:
        raise DimensionMismatch("a circle has no boundary traces to constrain")
    boundary = dirac.boundary.matrix
    right_basis = _constraint(boundary, right, right_projection, 1)
    left_basis = _constraint(boundary, left, left_projection, -1)
    return replace(dirac, right_basis=right_basis, left_basis=left_basis)


class IndexReport(NamedTuple):
    index: int
    kernel: int
    cokernel: int
    smallest_singular: float
    pairing: Optional[np.ndarray] = None

    def to_dict(self):
        return {'index': self.index, 'kernel': self.kernel, 'cokernel': self.cokernel,
                'smallest_singular': self.smallest_singular}


def numerical_index(dirac, tol=STRUCTURAL_TOL, strict=True):
    """Kernel and cokernel of the constrained operator from an SVD.

    A singular value within a decade of the rank threshold raises
    RankAmbiguity; pass strict=False to classify it anyway, e.g. exactly on a
    known crossing.

    Odd collars give a square operator of index 0; their report also carries
    the boundary pairing unitary whose eigenvalue 1 detects the kernel.
    """
    matrix = dirac.constrained().toarray()
    rows, cols = matrix.shape
    values = linalg.svdvals(matrix) if matrix.size else np.zeros(0)
    rank = numerical_rank(matrix, tol, strict=strict) if matrix.size else 0
    smallest = float(values.min()) if values.size else 0.0
    pairing = None
    if dirac.parity_case == ODD_CASE and dirac.left_basis is not None and dirac.right_basis is not None:
        pairing = pairing_unitary(dirac)
    kernel, cokernel = cols - rank, rows - rank
    report = IndexReport(kernel - cokernel, kernel, cokernel, smallest, pairing)
    logger.debug(f"index of {dirac.label or 'collar'}: {report.index} "
                 f"(ker {report.kernel}, coker {report.cokernel})")
    return report


def _normalized_columns(matrix):
    norms = np.linalg.norm(matrix, axis=0)
    return matrix / np.where(norms > 0, norms, 1.0)


def pairing_unitary(dirac):
    """W = V_R* V₁ from the right Lagrangian and the propagated left one."""
    if dirac.parity_case != ODD_CASE:
        raise ParityMismatch("boundary pairing needs an odd collar")
    propagated, _ = linalg.qr(dirac.transfer() @ dirac.left_basis, mode='economic')
    grading = dirac.boundary.grading
    return lagrangian_unitary(dirac.right_basis, grading).conj().T @ lagrangian_unitary(propagated, grading)


def matching_determinant(dirac):
    """det[T·N_L | N_R] with normalized propagated columns; zero exactly on kernels."""
    if dirac.left_basis is None or dirac.right_basis is None:
        raise DimensionMismatch("matching needs both ends constrained")
    if dirac.left_basis.shape[1] + dirac.right_basis.shape[1] != dirac.fiber_dim:
        raise DimensionMismatch("boundary conditions are not complementary in dimension",
                                left=dirac.left_basis.shape[1], right=dirac.right_basis.shape[1])
    propagated = _normalized_columns(dirac.transfer() @ dirac.left_basis)
    return np.linalg.det(np.hstack([propagated, dirac.right_basis]))


def path_flow(build, samples=257, tol=STRUCTURAL_TOL):
    """Net eigenphase crossings of the pairing unitary along s ∈ [0, 1] ↦ odd collar."""
    return unitary_flow(lambda s: pairing_unitary(build(s)), 0.0, 1.0, samples, tol)


def scalar_index_oracle(b, a_right=None, a_left=None):
    """Index of f′ = bf with scalar APS conditions; None marks a free end."""
    right_free = a_right is None or b + a_right < 0
    left_free = a_left is None or a_left < b
    return int(right_free and left_free) - int(not right_free and not left_free)


def scalar_kernel_oracle(b, a_right=None, a_left=None):
    """Kernel of the scalar problem: exp(bx) survives only when both ends are free."""
    right_free = a_right is None or b + a_right < 0
    left_free = a_left is None or a_left < b
    return int(right_free and left_free)


def diagonal_index_oracle(b_values, right_values=None, left_values=None):
    """Sum of scalar oracles over simultaneously diagonal B, A_R, A_L."""
    right_values = right_values if right_values is not None else [None] * len(b_values)
    left_values = left_values if left_values is not None else [None] * len(b_values)
    return sum(scalar_index_oracle(b, a_r, a_l) for b, a_r, a_l in zip(b_values, right_values, left_values))


def diagonal_kernel_oracle(b_values, right_values=None, left_values=None):
    right_values = right_values if right_values is not None else [None] * len(b_values)
    left_values = left_values if left_values is not None else [None] * len(b_values)
    return sum(scalar_kernel_oracle(b, a_r, a_l) for b, a_r, a_l in zip(b_values, right_values, left_values))
