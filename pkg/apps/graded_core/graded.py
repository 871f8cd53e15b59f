# apps/graded_core/graded.py
"""Graded spaces, graded operators and the graded tensor rule AB = A⊗B⁺ + Az⊗B⁻."""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy import linalg

from .exceptions import DimensionMismatch, InvolutionError, ParityMismatch, RankAmbiguity, UnitarityError

logger = logging.getLogger(__name__)

STRUCTURAL_TOL = 1e-9
ALGEBRAIC_TOL = 1e-12

EVEN = 'even'
ODD = 'odd'
MIXED = 'mixed'


def as_matrix(value, name='matrix'):
    """Coerce to a 2-d complex128 array."""
    array = np.array(value, dtype=np.complex128)
    if array.ndim == 0:
        array = array.reshape(1, 1)
    if array.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional", shape=array.shape)
    return array


def spectral_norm(matrix):
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0.0
    return float(linalg.norm(matrix, 2))


def _square(matrix, name):
    matrix = as_matrix(matrix, name)
    if matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"{name} must be square", shape=matrix.shape)
    return matrix


def is_selfadjoint(matrix, tol=STRUCTURAL_TOL):
    matrix = _square(matrix, 'operator')
    residual = spectral_norm(matrix - matrix.conj().T)
    return residual <= tol, residual


def is_unitary(matrix, tol=STRUCTURAL_TOL):
    matrix = _square(matrix, 'operator')
    identity = np.eye(matrix.shape[0])
    residual = max(spectral_norm(matrix.conj().T @ matrix - identity),
                   spectral_norm(matrix @ matrix.conj().T - identity))
    return residual <= tol, residual


def is_involution(matrix, tol=STRUCTURAL_TOL):
    matrix = _square(matrix, 'operator')
    residual = spectral_norm(matrix @ matrix - np.eye(matrix.shape[0]))
    return residual <= tol, residual


def _frozen(array):
    array = np.array(array, dtype=np.complex128)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class GradedSpace:
    """Finite-dimensional space with a selfadjoint grading involution z."""
    grading: np.ndarray

    def __post_init__(self):
        grading = _square(self.grading, 'grading')
        ok_inv, res_inv = is_involution(grading)
        ok_sa, res_sa = is_selfadjoint(grading)
        if not (ok_inv and ok_sa):
            raise InvolutionError("grading must be a selfadjoint involution",
                                  involution_residual=res_inv, selfadjoint_residual=res_sa)
        object.__setattr__(self, 'grading', _frozen(grading))

    @classmethod
    def trivial(cls, dim):
        return cls(np.eye(dim))

    @classmethod
    def from_split(cls, plus, minus):
        return cls(np.diag(np.concatenate([np.ones(plus), -np.ones(minus)])))

    @property
    def dim(self):
        return self.grading.shape[0]

    @property
    def is_trivially_graded(self):
        return spectral_norm(self.grading - np.eye(self.dim)) <= STRUCTURAL_TOL

    def split_bases(self) -> Tuple[np.ndarray, np.ndarray]:
        """Orthonormal bases (as columns) of H⁺ and H⁻."""
        z = self.grading
        off_diagonal = z - np.diag(np.diag(z))
        if not np.any(np.abs(off_diagonal) > STRUCTURAL_TOL):
            diagonal = np.real(np.diag(z))
            identity = np.eye(self.dim, dtype=np.complex128)
            return identity[:, diagonal > 0], identity[:, diagonal < 0]
        values, vectors = linalg.eigh(z)
        return vectors[:, values > 0], vectors[:, values < 0]

    @property
    def dims(self):
        plus, minus = self.split_bases()
        return plus.shape[1], minus.shape[1]

    def tensor(self, other):
        return GradedSpace(np.kron(self.grading, other.grading))

    def conjugate(self, unitary):
        """The grading transported along a unitary (Ψ z Ψ⁻¹)."""
        unitary = as_matrix(unitary)
        return GradedSpace(unitary @ self.grading @ unitary.conj().T)


class ParityReport(NamedTuple):
    parity: str
    commutator: float
    anticommutator: float


def parity_check(matrix, grading, tol=STRUCTURAL_TOL):
    """Classify an operator as even, odd or mixed with respect to z."""
    matrix = _square(matrix, 'operator')
    z = grading.grading if isinstance(grading, GradedSpace) else _square(grading, 'grading')
    if matrix.shape != z.shape:
        raise DimensionMismatch("operator and grading disagree", operator=matrix.shape, grading=z.shape)
    ok, residual = is_involution(z, tol)
    if not ok:
        raise InvolutionError("grading is not an involution", residual=residual)
    commutator = spectral_norm(matrix @ z - z @ matrix)
    anticommutator = spectral_norm(matrix @ z + z @ matrix)
    scale = tol * max(1.0, spectral_norm(matrix))
    if commutator <= scale:
        parity = EVEN
    elif anticommutator <= scale:
        parity = ODD
    else:
        parity = MIXED
    return ParityReport(parity, commutator, anticommutator)


def _parity_sum(first, second):
    if MIXED in (first, second):
        return None
    return EVEN if first == second else ODD


@dataclass(frozen=True, eq=False)
class GradedOperator:
    matrix: np.ndarray
    space: GradedSpace
    parity: Optional[str] = None

    def __post_init__(self):
        matrix = _square(self.matrix, 'operator')
        if matrix.shape[0] != self.space.dim:
            raise DimensionMismatch("operator does not act on its declared space",
                                    operator=matrix.shape, space=self.space.dim)
        report = parity_check(matrix, self.space)
        if self.parity is None:
            object.__setattr__(self, 'parity', report.parity)
        elif self.parity != report.parity and self.parity != MIXED:
            # the zero operator is both even and odd
            if not (self.parity == ODD and report.anticommutator <= STRUCTURAL_TOL * max(1.0, spectral_norm(matrix))):
                raise ParityMismatch(f"operator declared {self.parity} but is {report.parity}",
                                     commutator=report.commutator, anticommutator=report.anticommutator)
        object.__setattr__(self, 'matrix', _frozen(matrix))

    @classmethod
    def identity(cls, space):
        return cls(np.eye(space.dim), space, EVEN)

    @classmethod
    def grading_of(cls, space):
        return cls(space.grading, space, EVEN)

    @property
    def dim(self):
        return self.space.dim

    @property
    def adjoint(self):
        return GradedOperator(self.matrix.conj().T, self.space, self.parity)

    def split(self):
        """B = B⁺ + B⁻ with B⁺ even and B⁻ odd."""
        z = self.space.grading
        conjugated = z @ self.matrix @ z
        return (self.matrix + conjugated) / 2, (self.matrix - conjugated) / 2

    def compose(self, other):
        if other.space.dim != self.space.dim:
            raise DimensionMismatch("cannot compose operators on different spaces")
        parity = _parity_sum(self.parity, other.parity)
        return GradedOperator(self.matrix @ other.matrix, self.space, parity)

    def chiral_blocks(self):
        """(D⁺: H⁺ → H⁻, D⁻: H⁻ → H⁺) in the bases of split_bases."""
        plus, minus = self.space.split_bases()
        return minus.conj().T @ self.matrix @ plus, plus.conj().T @ self.matrix @ minus

    def is_selfadjoint(self, tol=STRUCTURAL_TOL):
        return is_selfadjoint(self.matrix, tol)


def _coerce(operator):
    if isinstance(operator, GradedOperator):
        return operator
    matrix = _square(operator, 'operator')
    return GradedOperator(matrix, GradedSpace.trivial(matrix.shape[0]))


def graded_tensor(first, second):
    """A⊗B⁺ + (A·z₁)⊗B⁻ on H₁⊗H₂ graded by z₁⊗z₂."""
    first, second = _coerce(first), _coerce(second)
    even_part, odd_part = second.split()
    matrix = (np.kron(first.matrix, even_part)
              + np.kron(first.matrix @ first.space.grading, odd_part))
    space = first.space.tensor(second.space)
    return GradedOperator(matrix, space, _parity_sum(first.parity, second.parity))


def graded_sum(first, second):
    """A⊗1 + 1⊗B⁺ + z₁⊗B⁻, the operator usually written A + B."""
    first, second = _coerce(first), _coerce(second)
    lifted = graded_tensor(GradedOperator.identity(first.space), second)
    matrix = np.kron(first.matrix, np.eye(second.dim)) + lifted.matrix
    return GradedOperator(matrix, lifted.space)


def ungraded_tensor(first, second):
    """Plain Kronecker product; gradings are tensored when both factors carry one."""
    first_matrix = first.matrix if isinstance(first, GradedOperator) else as_matrix(first)
    second_matrix = second.matrix if isinstance(second, GradedOperator) else as_matrix(second)
    matrix = np.kron(first_matrix, second_matrix)
    if isinstance(first, GradedOperator) and isinstance(second, GradedOperator):
        return GradedOperator(matrix, first.space.tensor(second.space))
    if matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch("ungraded tensor of non-square factors", shape=matrix.shape)
    return GradedOperator(matrix, GradedSpace.trivial(matrix.shape[0]))


def symmetrized_product(unitary, operator, tol=STRUCTURAL_TOL):
    """S(I, D) = [[0, D⁻I*], [ID⁺, 0]] for a unitary I on H⁻."""
    unitary = _square(unitary, 'unitary')
    ok, residual = is_unitary(unitary, tol)
    if not ok:
        raise UnitarityError("I must be unitary", residual=residual)
    if operator.parity != ODD:
        raise ParityMismatch("symmetrized product needs an odd operator", parity=operator.parity)
    plus, minus = operator.space.split_bases()
    if unitary.shape[0] != minus.shape[1]:
        raise DimensionMismatch("I must act on the negative summand",
                                unitary=unitary.shape, negative_dim=minus.shape[1])
    d_plus, d_minus = operator.chiral_blocks()
    matrix = (minus @ unitary @ d_plus @ plus.conj().T
              + plus @ d_minus @ unitary.conj().T @ minus.conj().T)
    return GradedOperator(matrix, operator.space, ODD)


def restrict_to_minus(operator_matrix, space):
    """Compression of an operator to H⁻ in the basis of split_bases."""
    _, minus = space.split_bases()
    return minus.conj().T @ as_matrix(operator_matrix) @ minus


def numerical_rank(matrix, tol=STRUCTURAL_TOL, scale=None, margin=10.0, strict=True):
    """Count singular values above tol·max(1, scale).

    With strict=True a singular value within a factor `margin` of the
    threshold raises RankAmbiguity instead of being silently classified.
    """
    matrix = as_matrix(matrix)
    if 0 in matrix.shape:
        return 0
    values = linalg.svdvals(matrix)
    reference = values[0] if scale is None else scale
    threshold = tol * max(1.0, float(reference))
    if strict:
        near = values[(values > threshold / margin) & (values <= threshold * margin)]
        if near.size:
            raise RankAmbiguity("singular value too close to the rank threshold",
                                threshold=threshold, singular_value=float(near[0]), margin=margin)
    return int(np.sum(values > threshold))


def kernel_dimension(matrix, tol=STRUCTURAL_TOL, scale=None, strict=False):
    matrix = as_matrix(matrix)
    return matrix.shape[1] - numerical_rank(matrix, tol, scale=scale, strict=strict)


def graded_kernel_dims(operator, tol=STRUCTURAL_TOL, strict=False):
    """(dim ker D⁺, dim ker D⁻) of an odd operator."""
    d_plus, d_minus = operator.chiral_blocks()
    scale = spectral_norm(operator.matrix)
    return (kernel_dimension(d_plus, tol, scale, strict),
            kernel_dimension(d_minus, tol, scale, strict))
